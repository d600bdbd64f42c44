use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::rank::{rank_weights, Assignment};
use super::{check_probability, check_run_inputs, reseed_empty, CenterSet, Coord, RunResult};
use crate::error::{Error, Result};

/// Stochastic dropout k-means baseline.
///
/// Each iteration draws an independent Bernoulli(`p`) failure for every
/// center (redrawn when all fail), assigns points to the nearest surviving
/// center and moves the surviving centers to their cluster means. Failed
/// centers stay where they are; a surviving center without points is
/// reseeded onto the point farthest from the surviving centers, as in the
/// classic algorithms. The run ends after an iteration in which every center
/// survived and moved less than `r / 4`, or after `max_iters` iterations.
/// Iterations with failed centers never end the run, since a lone survivor
/// sitting on the global mean would otherwise pass the test.
///
/// The trace records the expected squared distance to the nearest surviving
/// center of the full center set, for comparison with dropout k-means.
pub fn run_stochastic_dropout_kmeans(
    points: &[Coord],
    init: &CenterSet,
    p: f64,
    r: f64,
    max_iters: usize,
    seed: u64,
) -> Result<RunResult> {
    run_stochastic_with(points, init, p, r, max_iters, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub(crate) fn run_stochastic_with<R: Rng>(
    points: &[Coord],
    init: &CenterSet,
    p: f64,
    r: f64,
    max_iters: usize,
    rng: &mut R,
) -> Result<RunResult> {
    check_run_inputs(points, init)?;
    check_probability(p)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "detection radius must be positive, got {r}"
        )));
    }
    let start = Instant::now();
    let k = init.len();
    let weights = rank_weights(k, p);
    let threshold = r / 4.0;
    let mut centers = init.clone();
    let mut alive = vec![false; k];
    let mut trace = vec![Assignment::build(points, centers.as_slice(), &weights).cost_sq];
    let mut trajectory = Vec::new();
    let mut reseeds = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iters {
        iterations += 1;
        loop {
            for a in alive.iter_mut() {
                *a = rng.random::<f64>() >= p;
            }
            if alive.iter().any(|&a| a) {
                break;
            }
        }

        let mut acc = vec![Coord::default(); k];
        let mut count = vec![0.0; k];
        let mut nearest_d2 = Vec::with_capacity(points.len());
        for x in points {
            let mut best = usize::MAX;
            let mut best_d2 = f64::INFINITY;
            for (j, c) in centers.iter().enumerate() {
                if !alive[j] {
                    continue;
                }
                let d2 = x.dist2(*c);
                if d2 < best_d2 {
                    best = j;
                    best_d2 = d2;
                }
            }
            nearest_d2.push(best_d2);
            acc[best].x += x.x;
            acc[best].y += x.y;
            count[best] += 1.0;
        }
        let slots = centers.as_mut_slice();
        let before = slots.to_vec();
        let mut empty = Vec::new();
        for j in 0..k {
            if !alive[j] {
                continue;
            }
            if count[j] > 0.0 {
                slots[j] = Coord::new(acc[j].x / count[j], acc[j].y / count[j]);
            } else {
                empty.push(j);
            }
        }
        reseed_empty(points, &nearest_d2, &empty, slots);
        if !empty.is_empty() {
            reseeds.push(iterations);
        }
        let settled = alive.iter().all(|&a| a)
            && slots.iter().zip(&before).all(|(c, b)| c.dist(*b) < threshold);
        trace.push(Assignment::build(points, centers.as_slice(), &weights).cost_sq);
        trajectory.push(centers.clone());
        if settled {
            converged = true;
            break;
        }
    }

    Ok(RunResult {
        initial: init.clone(),
        centers,
        iterations,
        converged,
        objective_trace: trace,
        trajectory,
        reseeds,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::run_classic_kmeans;

    fn c(x: f64, y: f64) -> Coord {
        Coord::new(x, y)
    }

    fn two_blobs() -> Vec<Coord> {
        let mut pts = Vec::new();
        for i in 0..20 {
            let t = i as f64;
            pts.push(c((t * 1.3).sin(), (t * 2.1).cos()));
            pts.push(c(40.0 + (t * 0.7).sin(), 5.0 + (t * 1.9).cos()));
        }
        pts
    }

    #[test]
    fn deterministic_for_seed() {
        let pts = two_blobs();
        let init = CenterSet::new(vec![pts[0], pts[2], pts[1]]).unwrap();
        let a = run_stochastic_dropout_kmeans(&pts, &init, 0.3, 10.0, 300, 5).unwrap();
        let b = run_stochastic_dropout_kmeans(&pts, &init, 0.3, 10.0, 300, 5).unwrap();
        assert_eq!(a.trajectory, b.trajectory);
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn zero_dropout_follows_lloyd() {
        let pts = two_blobs();
        let init = CenterSet::new(vec![pts[0], pts[2]]).unwrap();
        let lloyd = run_classic_kmeans(&pts, &init, 1000).unwrap();
        let run = run_stochastic_dropout_kmeans(&pts, &init, 0.0, 10.0, 300, 1).unwrap();
        assert!(run.converged);
        for (a, b) in run.trajectory.iter().zip(&lloyd.trajectory) {
            assert_eq!(a, b);
        }
        assert!(run.centers.max_shift(&lloyd.centers) < 1e-12);
    }

    #[test]
    fn cap_stops_the_run() {
        let pts = two_blobs();
        let init = CenterSet::new(vec![pts[0], pts[2]]).unwrap();
        // tiny radius makes the movement test nearly impossible to pass
        let run = run_stochastic_dropout_kmeans(&pts, &init, 0.5, 1e-12, 7, 3).unwrap();
        assert!(run.iterations <= 7);
        assert_eq!(run.trajectory.len(), run.iterations);
    }

    #[test]
    fn coincident_survivor_is_reseeded() {
        let pts = two_blobs();
        let m = c(20.0, 2.5);
        let init = CenterSet::new(vec![m, m]).unwrap();
        let run = run_stochastic_dropout_kmeans(&pts, &init, 0.0, 10.0, 300, 0).unwrap();
        assert_eq!(run.reseeds, vec![1]);
        assert!(run.centers[0].dist(run.centers[1]) > 30.0);
    }

    #[test]
    fn rejects_bad_radius() {
        let pts = two_blobs();
        let init = CenterSet::new(vec![pts[0]]).unwrap();
        assert!(run_stochastic_dropout_kmeans(&pts, &init, 0.3, 0.0, 10, 0).is_err());
    }
}
