//! Independent reference computations for the integration tests. Nothing
//! here calls into the ranking or weighting code under test.
#![allow(dead_code)]

use dropout_cluster::{CenterSet, Coord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Probability that exactly the centers in `mask` survive.
pub fn outcome_probability(mask: u32, k: usize, p: f64) -> f64 {
    let alive = mask.count_ones() as i32;
    (1.0 - p).powi(alive) * p.powi(k as i32 - alive)
}

/// `sum_{S != {}} P(S) sum_i min_{k in S} cost(|x_i - c_k|^2)` by visiting
/// every survivor subset.
pub fn enumerate_objective(
    points: &[Coord],
    centers: &[Coord],
    p: f64,
    cost: impl Fn(f64) -> f64,
) -> f64 {
    let k = centers.len();
    let mut total = 0.0;
    for mask in 1u32..(1 << k) {
        let prob = outcome_probability(mask, k, p);
        let mut sum = 0.0;
        for x in points {
            let mut best = f64::INFINITY;
            for (j, c) in centers.iter().enumerate() {
                if mask & (1 << j) != 0 {
                    let dx = x.x - c.x;
                    let dy = x.y - c.y;
                    best = best.min(dx * dx + dy * dy);
                }
            }
            sum += cost(best);
        }
        total += prob * sum;
    }
    total
}

pub fn enumerate_kmeans_objective(points: &[Coord], centers: &[Coord], p: f64) -> f64 {
    enumerate_objective(points, centers, p, |d2| d2)
}

pub fn enumerate_kmedian_objective(points: &[Coord], centers: &[Coord], p: f64) -> f64 {
    enumerate_objective(points, centers, p, f64::sqrt)
}

/// Probability that the `j`-th closest center is the nearest survivor,
/// summed over survivor subsets.
pub fn enumerate_rank_weights(k: usize, p: f64) -> Vec<f64> {
    let mut w = vec![0.0; k];
    for mask in 1u32..(1 << k) {
        // centers indexed by rank: the nearest survivor is the lowest set bit
        let nearest = mask.trailing_zeros() as usize;
        w[nearest] += outcome_probability(mask, k, p);
    }
    w
}

/// Winding number of `p` around the closed ring `ring` of `(x, y)`.
pub fn winding_number(p: (f64, f64), ring: &[(f64, f64)]) -> i32 {
    let mut wn = 0;
    for i in 0..ring.len() {
        let a = ring[i];
        let b = ring[(i + 1) % ring.len()];
        let side = (b.0 - a.0) * (p.1 - a.1) - (p.0 - a.0) * (b.1 - a.1);
        if a.1 <= p.1 {
            if b.1 > p.1 && side > 0.0 {
                wn += 1;
            }
        } else if b.1 <= p.1 && side < 0.0 {
            wn -= 1;
        }
    }
    wn
}

/// Weighted geometric median by dense grid search followed by shrinking
/// local grids.
pub fn grid_median(points: &[Coord], weights: &[f64]) -> Coord {
    let cost = |c: Coord| -> f64 {
        points
            .iter()
            .zip(weights)
            .map(|(x, w)| w * ((x.x - c.x).powi(2) + (x.y - c.y).powi(2)).sqrt())
            .sum()
    };
    let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) = points.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), p| (a.min(p.x), b.max(p.x), c.min(p.y), d.max(p.y)),
    );
    let mut best = Coord::new((lo_x + hi_x) / 2.0, (lo_y + hi_y) / 2.0);
    let steps = 200;
    for _ in 0..40 {
        let mut best_cost = cost(best);
        for i in 0..=steps {
            for j in 0..=steps {
                let c = Coord::new(
                    lo_x + (hi_x - lo_x) * i as f64 / steps as f64,
                    lo_y + (hi_y - lo_y) * j as f64 / steps as f64,
                );
                let v = cost(c);
                if v < best_cost {
                    best_cost = v;
                    best = c;
                }
            }
        }
        let half_x = (hi_x - lo_x) / steps as f64 * 2.0;
        let half_y = (hi_y - lo_y) / steps as f64 * 2.0;
        lo_x = best.x - half_x;
        hi_x = best.x + half_x;
        lo_y = best.y - half_y;
        hi_y = best.y + half_y;
        if half_x < 1e-9 && half_y < 1e-9 {
            break;
        }
    }
    best
}

pub fn random_points(rng: &mut impl Rng, n: usize, scale: f64) -> Vec<Coord> {
    (0..n)
        .map(|_| Coord::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale)))
        .collect()
}

pub fn random_centers(rng: &mut impl Rng, k: usize, scale: f64) -> CenterSet {
    CenterSet::new(random_points(rng, k, scale)).unwrap()
}

/// Points in `blobs` Gaussian-ish clusters (sum of uniforms), for runs that
/// need structure.
pub fn clustered_points(rng: &mut impl Rng, n: usize, blobs: usize, spread: f64) -> Vec<Coord> {
    let anchors: Vec<Coord> = random_points(rng, blobs, 100.0);
    (0..n)
        .map(|i| {
            let a = anchors[i % blobs];
            let jitter = |r: &mut dyn FnMut() -> f64| (0..4).map(|_| r()).sum::<f64>() - 2.0;
            let mut u = || rng.random::<f64>();
            let dx = jitter(&mut u) * spread;
            let dy = jitter(&mut u) * spread;
            Coord::new(a.x + dx, a.y + dy)
        })
        .collect()
}

/// Ship ids assigning points round-robin to `ships` ships.
pub fn ship_ids(n: usize, ships: usize) -> Vec<String> {
    (0..n).map(|i| format!("ship{}", i % ships)).collect()
}

/// Detection probability by visiting every survivor subset: a ship is seen
/// when one of its points lies within `r` of a surviving center.
pub fn enumerate_detection(
    ship_of: &[usize],
    ships: usize,
    points: &[Coord],
    centers: &[Coord],
    p: f64,
    r: f64,
) -> f64 {
    let k = centers.len();
    let mut total = 0.0;
    for s in 0..ships {
        for mask in 0u32..(1 << k) {
            let seen = points.iter().zip(ship_of).any(|(x, &owner)| {
                owner == s
                    && centers.iter().enumerate().any(|(j, c)| {
                        mask & (1 << j) != 0 && ((x.x - c.x).powi(2) + (x.y - c.y).powi(2)).sqrt() <= r
                    })
            });
            if seen {
                total += outcome_probability(mask, k, p);
            }
        }
    }
    total / ships as f64
}

/// Root of the enumerated expected squared distance, normalised by the
/// probability mass of non-empty outcomes.
pub fn enumerate_rmsd(points: &[Coord], centers: &[Coord], p: f64) -> f64 {
    let k = centers.len();
    let numerator = enumerate_kmeans_objective(points, centers, p);
    let denominator: f64 = (1u32..(1 << k))
        .map(|m| outcome_probability(m, k, p) * points.len() as f64)
        .sum();
    (numerator / denominator).sqrt()
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// A random instance for oracle sweeps: points in a 60 km box, centers in
/// the same box, ships drawn at random.
pub struct Instance {
    pub points: Vec<Coord>,
    pub ship_of: Vec<usize>,
    pub ships: usize,
    pub centers: CenterSet,
    pub p: f64,
}

pub fn instance(seed: u64, k: usize, p: f64) -> Instance {
    let mut r = rng(seed);
    let n = r.random_range(1..=200);
    let ships = r.random_range(1..=n.min(25));
    let points = random_points(&mut r, n, 30.0);
    // every ship owns at least one point
    let ship_of: Vec<usize> = (0..n)
        .map(|i| if i < ships { i } else { r.random_range(0..ships) })
        .collect();
    let centers = random_centers(&mut r, k, 30.0);
    Instance {
        points,
        ship_of,
        ships,
        centers,
        p,
    }
}

impl Instance {
    pub fn ship_ids(&self) -> Vec<String> {
        self.ship_of.iter().map(|s| format!("v{s}")).collect()
    }
}
