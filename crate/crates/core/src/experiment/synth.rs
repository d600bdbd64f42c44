use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::seed::{stream_rng, SYNTH_STREAM};
use crate::geo::PlanarPoint;

/// Gaussian blobs in planar km.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub blobs: usize,
    pub points_per_blob: usize,
    /// Standard deviation of each blob along both axes, km.
    pub spread_km: f64,
    /// Points of a blob are dealt round-robin to this many ships.
    pub ships_per_blob: usize,
    /// Blob centers are uniform in a square of this side, centred on 0.
    pub extent_km: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            blobs: 3,
            points_per_blob: 100,
            spread_km: 10.0,
            ships_per_blob: 10,
            extent_km: 200.0,
            seed: 0,
        }
    }
}

/// Blob `b` has ships `blob{b}-ship{s}`; its `j`-th point belongs to ship
/// `j mod ships_per_blob`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Vec<PlanarPoint> {
    let mut rng = stream_rng(spec.seed, SYNTH_STREAM);
    let ships = spec.ships_per_blob.max(1);
    let noise = Normal::new(0.0, spec.spread_km.max(0.0)).expect("finite spread");
    let half = spec.extent_km / 2.0;
    let mut out = Vec::with_capacity(spec.blobs * spec.points_per_blob);
    for b in 0..spec.blobs {
        let cx = if half > 0.0 { rng.random_range(-half..=half) } else { 0.0 };
        let cy = if half > 0.0 { rng.random_range(-half..=half) } else { 0.0 };
        for j in 0..spec.points_per_blob {
            out.push(PlanarPoint {
                x: cx + noise.sample(&mut rng),
                y: cy + noise.sample(&mut rng),
                ship_id: format!("blob{b}-ship{}", j % ships),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_and_determinism() {
        let spec = SyntheticSpec {
            blobs: 3,
            points_per_blob: 10,
            ..SyntheticSpec::default()
        };
        let a = generate_synthetic(&spec);
        assert_eq!(a.len(), 30);
        assert_eq!(a, generate_synthetic(&spec));
        let other = generate_synthetic(&SyntheticSpec { seed: 1, ..spec });
        assert_ne!(a, other);
    }

    #[test]
    fn zero_spread_collapses_blobs() {
        let spec = SyntheticSpec {
            blobs: 2,
            points_per_blob: 5,
            spread_km: 0.0,
            ..SyntheticSpec::default()
        };
        let pts = generate_synthetic(&spec);
        for blob in pts.chunks(5) {
            assert!(blob.iter().all(|p| p.x == blob[0].x && p.y == blob[0].y));
        }
    }

    #[test]
    fn ships_round_robin() {
        let spec = SyntheticSpec {
            blobs: 1,
            points_per_blob: 5,
            ships_per_blob: 2,
            ..SyntheticSpec::default()
        };
        let ids: Vec<_> = generate_synthetic(&spec).into_iter().map(|p| p.ship_id).collect();
        assert_eq!(ids, ["blob0-ship0", "blob0-ship1", "blob0-ship0", "blob0-ship1", "blob0-ship0"]);
    }
}
