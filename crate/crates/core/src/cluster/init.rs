use std::collections::HashSet;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CenterSet, Coord};
use crate::error::{Error, Result};

/// k-means++ seeding: the first center uniformly, each following one with
/// probability proportional to the squared distance to the nearest chosen
/// center. When every remaining point coincides with a chosen center the
/// draw falls back to uniform.
pub fn kmeanspp_init(points: &[Coord], k: usize, seed: u64) -> Result<CenterSet> {
    kmeanspp_with(points, k, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub(crate) fn kmeanspp_with<R: Rng>(points: &[Coord], k: usize, rng: &mut R) -> Result<CenterSet> {
    if points.is_empty() {
        return Err(Error::EmptyPoints);
    }
    if k == 0 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    let mut centers = Vec::with_capacity(k);
    let first = points[rng.random_range(0..points.len())];
    centers.push(first);
    let mut d2: Vec<f64> = points.iter().map(|x| x.dist2(first)).collect();

    while centers.len() < k {
        let next = match WeightedIndex::new(&d2) {
            Ok(dist) => points[dist.sample(rng)],
            // all weights zero
            Err(_) => points[rng.random_range(0..points.len())],
        };
        centers.push(next);
        for (d, x) in d2.iter_mut().zip(points) {
            *d = d.min(x.dist2(next));
        }
    }
    Ok(CenterSet::from_vec_unchecked(centers))
}

/// K distinct data points drawn uniformly without replacement (indices, so
/// duplicated coordinates may still repeat).
pub fn uniform_init(points: &[Coord], k: usize, seed: u64) -> Result<CenterSet> {
    uniform_with(points, k, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub(crate) fn uniform_with<R: Rng>(points: &[Coord], k: usize, rng: &mut R) -> Result<CenterSet> {
    if points.is_empty() {
        return Err(Error::EmptyPoints);
    }
    if k == 0 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    if k > points.len() {
        return Err(Error::InsufficientPoints {
            needed: k,
            found: points.len(),
        });
    }
    let picked = index::sample(rng, points.len(), k);
    Ok(CenterSet::from_vec_unchecked(
        picked.iter().map(|i| points[i]).collect(),
    ))
}

/// Number of distinct coordinates in `points`.
pub fn distinct_count(points: &[Coord]) -> usize {
    points
        .iter()
        .map(|c| (c.x.to_bits(), c.y.to_bits()))
        .collect::<HashSet<_>>()
        .len()
}
