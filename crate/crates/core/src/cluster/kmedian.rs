use std::time::Instant;

use super::rank::{rank_weights, Assignment};
use super::{check_probability, check_run_inputs, reseed_empty, CenterSet, Coord, RunResult};
use crate::error::Result;

/// Distances below this (km) count as the iterate sitting on a data point.
pub const WEISZFELD_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct WeiszfeldOutcome {
    pub center: Coord,
    /// Accepted steps.
    pub iterations: usize,
    /// Weighted sum of distances at the start and after each accepted step.
    pub costs: Vec<f64>,
}

fn weighted_l1(points: &[Coord], weights: &[f64], c: Coord) -> f64 {
    points.iter().zip(weights).map(|(x, w)| w * x.dist(c)).sum()
}

/// Weighted Weiszfeld iteration
/// `c <- sum_i (w_i x_i / |x_i - c|) / sum_i (w_i / |x_i - c|)`.
///
/// When the iterate lies on data points (within [`WEISZFELD_EPS`]) those
/// points are left out of the quotient and the step is shortened by the
/// Vardi-Zhang rule, so the iteration can leave a data point that is not the
/// median and stays put on one that is. A step that would raise the weighted
/// distance sum is rejected and ends the loop, as does a move below `tol`.
pub fn weighted_geometric_median(
    points: &[Coord],
    weights: &[f64],
    start: Coord,
    inner_iters: usize,
    tol: f64,
) -> WeiszfeldOutcome {
    debug_assert_eq!(points.len(), weights.len());
    let mut c = start;
    let mut cost = weighted_l1(points, weights, c);
    let mut costs = vec![cost];
    let mut iterations = 0;

    for _ in 0..inner_iters {
        let (mut nx, mut ny, mut den) = (0.0, 0.0, 0.0);
        let (mut rx, mut ry) = (0.0, 0.0);
        let mut on_point = 0.0;
        for (x, &w) in points.iter().zip(weights) {
            let d = x.dist(c);
            if d < WEISZFELD_EPS {
                on_point += w;
                continue;
            }
            let s = w / d;
            nx += s * x.x;
            ny += s * x.y;
            den += s;
            rx += s * (x.x - c.x);
            ry += s * (x.y - c.y);
        }
        if den <= 0.0 {
            break;
        }
        let target = Coord::new(nx / den, ny / den);
        let next = if on_point > 0.0 {
            let pull = rx.hypot(ry);
            if pull <= on_point {
                // the coincident point is optimal
                break;
            }
            let keep = on_point / pull;
            Coord::new(
                (1.0 - keep) * target.x + keep * c.x,
                (1.0 - keep) * target.y + keep * c.y,
            )
        } else {
            target
        };
        let next_cost = weighted_l1(points, weights, next);
        if next_cost > cost || !next_cost.is_finite() {
            break;
        }
        let moved = next.dist(c);
        c = next;
        cost = next_cost;
        costs.push(cost);
        iterations += 1;
        if moved < tol {
            break;
        }
    }

    WeiszfeldOutcome {
        center: c,
        iterations,
        costs,
    }
}

/// One dropout k-median center update: weighted Weiszfeld from `current`
/// with the center's survival weights.
pub fn update_center_dropout_median(
    points: &[Coord],
    weights: &[f64],
    current: Coord,
    inner_iters: usize,
    tol: f64,
) -> Coord {
    weighted_geometric_median(points, weights, current, inner_iters, tol).center
}

/// Classic k-median: nearest-center assignment, per-cluster Weiszfeld, stop
/// when the labels repeat.
pub fn run_classic_kmedian(
    points: &[Coord],
    init: &CenterSet,
    max_iters: usize,
    inner_iters: usize,
    tol: f64,
) -> Result<RunResult> {
    check_run_inputs(points, init)?;
    let start = Instant::now();
    let k = init.len();
    let mut centers = init.clone();
    let mut prev_labels: Option<Vec<u32>> = None;
    let mut labels = vec![0u32; points.len()];
    let mut nearest_d2 = vec![0.0; points.len()];
    let mut trace = Vec::new();
    let mut trajectory = Vec::new();
    let mut reseeds = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    loop {
        let mut cost = 0.0;
        for (i, x) in points.iter().enumerate() {
            let mut best = 0;
            let mut best_d2 = x.dist2(centers[0]);
            for j in 1..k {
                let d2 = x.dist2(centers[j]);
                if d2 < best_d2 {
                    best = j;
                    best_d2 = d2;
                }
            }
            labels[i] = best as u32;
            nearest_d2[i] = best_d2;
            cost += best_d2.sqrt();
        }
        trace.push(cost);
        if prev_labels.as_ref() == Some(&labels) {
            converged = true;
            break;
        }
        if iterations == max_iters {
            break;
        }
        iterations += 1;

        let mut members = vec![Vec::new(); k];
        for (x, &l) in points.iter().zip(&labels) {
            members[l as usize].push(*x);
        }
        let mut empty = Vec::new();
        let slots = centers.as_mut_slice();
        for (c, xs) in members.iter().enumerate() {
            if xs.is_empty() {
                empty.push(c);
                continue;
            }
            let ones = vec![1.0; xs.len()];
            slots[c] = weighted_geometric_median(xs, &ones, slots[c], inner_iters, tol).center;
        }
        if !empty.is_empty() {
            reseed_empty(points, &nearest_d2, &empty, slots);
            reseeds.push(iterations);
        }
        trajectory.push(centers.clone());
        prev_labels = Some(labels.clone());
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

/// Dropout k-median: the dropout k-means loop with each center moved by
/// weighted Weiszfeld instead of the weighted mean. The trace holds the
/// expected distance to the nearest surviving center; it is recorded, not
/// guaranteed monotone.
pub fn run_dropout_kmedian(
    points: &[Coord],
    init: &CenterSet,
    p: f64,
    max_iters: usize,
    inner_iters: usize,
    tol: f64,
) -> Result<RunResult> {
    check_run_inputs(points, init)?;
    check_probability(p)?;
    let start = Instant::now();
    let weights = rank_weights(init.len(), p);
    let mut centers = init.clone();
    let mut prev: Option<Assignment> = None;
    let mut trace = Vec::new();
    let mut trajectory = Vec::new();
    let mut reseeds = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    loop {
        let assignment = Assignment::build(points, centers.as_slice(), &weights);
        trace.push(assignment.cost_abs);
        if prev.as_ref().is_some_and(|a| a.ranking == assignment.ranking) {
            converged = true;
            break;
        }
        if iterations == max_iters {
            break;
        }
        iterations += 1;

        let mut empty = Vec::new();
        let slots = centers.as_mut_slice();
        for (c, (xs, ws)) in assignment.members(points).iter().enumerate() {
            if xs.is_empty() {
                empty.push(c);
                continue;
            }
            slots[c] = update_center_dropout_median(xs, ws, slots[c], inner_iters, tol);
        }
        if !empty.is_empty() {
            reseed_empty(points, assignment.ranking.nearest_d2(), &empty, slots);
            reseeds.push(iterations);
        }
        trajectory.push(centers.clone());
        prev = Some(assignment);
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
    use crate::cluster::{DEFAULT_INNER_ITERS, DEFAULT_WEISZFELD_TOL};

    fn c(x: f64, y: f64) -> Coord {
        Coord::new(x, y)
    }

    #[test]
    fn collinear_median_is_middle_point() {
        let pts = [c(0.0, 0.0), c(1.0, 0.0), c(10.0, 0.0)];
        let out = weighted_geometric_median(&pts, &[1.0; 3], c(3.0, 0.5), 500, 1e-12);
        assert!(out.center.dist(c(1.0, 0.0)) < 1e-6, "{}", out.center);
    }

    #[test]
    fn leaves_a_non_optimal_data_point() {
        let pts = [c(0.0, 0.0), c(1.0, 0.0), c(100.0, 0.0)];
        let out = weighted_geometric_median(&pts, &[1.0; 3], c(0.0, 0.0), 500, 1e-12);
        assert!(out.center.dist(c(1.0, 0.0)) < 1e-6, "{}", out.center);
    }

    #[test]
    fn stays_on_an_optimal_data_point() {
        let pts = [c(0.0, 0.0), c(1.0, 0.0), c(100.0, 0.0)];
        let out = weighted_geometric_median(&pts, &[1.0; 3], c(1.0, 0.0), 50, 1e-6);
        assert_eq!(out.center, c(1.0, 0.0));
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn single_point_median() {
        let out = weighted_geometric_median(&[c(4.0, -2.0)], &[0.7], c(0.0, 0.0), 50, 1e-6);
        assert!(out.center.dist(c(4.0, -2.0)) < 1e-9);
    }

    #[test]
    fn heavy_weight_pulls_median() {
        let pts = [c(0.0, 0.0), c(10.0, 0.0)];
        let out = weighted_geometric_median(&pts, &[0.7, 0.21], c(5.0, 1.0), 500, 1e-12);
        assert!(out.center.dist(c(0.0, 0.0)) < 1e-6);
    }

    #[test]
    fn classic_kmedian_one_dimensional() {
        let pts = [c(0.0, 0.0), c(1.0, 0.0), c(100.0, 0.0)];
        for start in [0usize, 1, 2] {
            let init = CenterSet::new(vec![pts[start]]).unwrap();
            let run = run_classic_kmedian(
                &pts,
                &init,
                1000,
                DEFAULT_INNER_ITERS,
                DEFAULT_WEISZFELD_TOL,
            )
            .unwrap();
            assert!(run.converged);
            assert!(run.centers[0].dist(c(1.0, 0.0)) < 1e-3, "{}", run.centers[0]);
            assert!(run.objective_trace.last().unwrap() <= &run.objective_trace[0]);
        }
    }

    #[test]
    fn classic_kmedian_two_blobs() {
        let pts = [
            c(0.0, 0.0),
            c(1.0, 0.0),
            c(2.0, 0.0),
            c(50.0, 0.0),
            c(51.0, 0.0),
            c(58.0, 0.0),
        ];
        let init = CenterSet::new(vec![pts[0], pts[5]]).unwrap();
        let run = run_classic_kmedian(&pts, &init, 1000, 200, 1e-9).unwrap();
        assert!(run.centers[0].dist(c(1.0, 0.0)) < 1e-4, "{}", run.centers[0]);
        assert!(run.centers[1].dist(c(51.0, 0.0)) < 1e-4, "{}", run.centers[1]);
    }

    #[test]
    fn dropout_kmedian_single_center_is_geometric_median() {
        let pts = [c(0.0, 0.0), c(4.0, 0.0), c(0.0, 3.0), c(7.0, 7.0), c(-2.0, 5.0)];
        let init = CenterSet::new(vec![pts[3]]).unwrap();
        let run = run_dropout_kmedian(&pts, &init, 0.3, 1000, 2000, 1e-12).unwrap();
        let plain = weighted_geometric_median(&pts, &[1.0; 5], pts[3], 2000, 1e-12).center;
        assert!(run.centers[0].dist(plain) < 1e-6);
    }

    #[test]
    fn dropout_kmedian_zero_probability_matches_classic() {
        let pts: Vec<Coord> = (0..40)
            .map(|i| {
                let t = i as f64;
                c((t * 1.7).sin() * 6.0 + (i % 2) as f64 * 30.0, (t * 0.9).cos() * 4.0)
            })
            .collect();
        let init = CenterSet::new(vec![pts[0], pts[1], pts[2]]).unwrap();
        let a = run_classic_kmedian(&pts, &init, 1000, 50, 1e-6).unwrap();
        let b = run_dropout_kmedian(&pts, &init, 0.0, 1000, 50, 1e-6).unwrap();
        assert_eq!(a.iterations, b.iterations);
        assert!(a.centers.max_shift(&b.centers) < 1e-6);
    }
}
