use std::time::Instant;

use super::rank::{mean_update, rank_weights, Assignment};
use super::{check_probability, check_run_inputs, reseed_empty, CenterSet, Coord, RunResult};
use crate::error::Result;

/// Lloyd iterations: nearest-center assignment, then cluster means. Stops
/// when the labels repeat or after `max_iters` updates.
pub fn run_classic_kmeans(points: &[Coord], init: &CenterSet, max_iters: usize) -> Result<RunResult> {
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
            cost += best_d2;
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

        let mut acc = vec![Coord::default(); k];
        let mut count = vec![0.0; k];
        for (x, &l) in points.iter().zip(&labels) {
            let l = l as usize;
            acc[l].x += x.x;
            acc[l].y += x.y;
            count[l] += 1.0;
        }
        let mut empty = Vec::new();
        let slots = centers.as_mut_slice();
        for c in 0..k {
            if count[c] > 0.0 {
                slots[c] = Coord::new(acc[c].x / count[c], acc[c].y / count[c]);
            } else {
                empty.push(c);
            }
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

/// Dropout k-means: rank the centers for every point, weight rank `j` by
/// `p^j (1 - p)`, move each center to its weighted mean. Stops when the
/// ranking matrix repeats or after `max_iters` updates.
///
/// The trace records the expected squared distance to the nearest surviving
/// center, which never increases from one update to the next.
pub fn run_dropout_kmeans(
    points: &[Coord],
    init: &CenterSet,
    p: f64,
    max_iters: usize,
) -> Result<RunResult> {
    run_dropout_kmeans_observed(points, init, p, max_iters, |_, _| {})
}

/// [`run_dropout_kmeans`] that hands every computed assignment to
/// `observer` together with the number of updates performed so far.
pub fn run_dropout_kmeans_observed<F>(
    points: &[Coord],
    init: &CenterSet,
    p: f64,
    max_iters: usize,
    mut observer: F,
) -> Result<RunResult>
where
    F: FnMut(usize, &Assignment),
{
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
        observer(iterations, &assignment);
        trace.push(assignment.cost_sq);
        if prev.as_ref().is_some_and(|a| a.ranking == assignment.ranking) {
            converged = true;
            break;
        }
        if iterations == max_iters {
            break;
        }
        iterations += 1;
        let empty = mean_update(points, &assignment, centers.as_mut_slice());
        if !empty.is_empty() {
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

    fn c(x: f64, y: f64) -> Coord {
        Coord::new(x, y)
    }

    fn blobs() -> Vec<Coord> {
        vec![c(0.0, 0.0), c(1.0, 0.0), c(20.0, 0.0), c(21.0, 2.0)]
    }

    #[test]
    fn separated_blobs_converge_to_means() {
        let init = CenterSet::new(vec![c(0.2, 0.1), c(19.0, 0.0)]).unwrap();
        let run = run_classic_kmeans(&blobs(), &init, 100).unwrap();
        assert!(run.converged);
        assert!(run.iterations <= 2);
        assert_eq!(run.centers[0], c(0.5, 0.0));
        assert_eq!(run.centers[1], c(20.5, 1.0));
    }

    #[test]
    fn converged_init_takes_one_iteration() {
        let init = CenterSet::new(vec![c(0.5, 0.0), c(20.5, 1.0)]).unwrap();
        let run = run_classic_kmeans(&blobs(), &init, 100).unwrap();
        assert!(run.converged);
        assert_eq!(run.iterations, 1);
        assert_eq!(run.centers, init);
    }

    #[test]
    fn classic_trace_non_increasing() {
        let pts: Vec<Coord> = (0..60)
            .map(|i| {
                let t = i as f64;
                c((t * 7.3).sin() * 10.0 + (i % 3) as f64 * 15.0, (t * 3.1).cos() * 8.0)
            })
            .collect();
        let init = CenterSet::new(vec![pts[0], pts[1], pts[2]]).unwrap();
        let run = run_classic_kmeans(&pts, &init, 100).unwrap();
        for w in run.objective_trace.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn dropout_single_center_is_plain_mean() {
        let pts = blobs();
        let init = CenterSet::new(vec![c(3.0, 3.0)]).unwrap();
        let run = run_dropout_kmeans(&pts, &init, 0.3, 100).unwrap();
        assert!(run.converged);
        assert_eq!(run.iterations, 1);
        assert!((run.centers[0].x - 10.5).abs() < 1e-12);
        assert!((run.centers[0].y - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dropout_at_zero_probability_matches_classic() {
        let init = CenterSet::new(vec![c(0.2, 0.1), c(1.0, 0.0)]).unwrap();
        let a = run_classic_kmeans(&blobs(), &init, 100).unwrap();
        let b = run_dropout_kmeans(&blobs(), &init, 0.0, 100).unwrap();
        assert_eq!(a.trajectory, b.trajectory);
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn dropout_shrinks_spread_on_square() {
        // corners of a square, centers on two opposite edge midpoints
        let pts = vec![c(-1.0, -1.0), c(1.0, -1.0), c(1.0, 1.0), c(-1.0, 1.0)];
        let init = CenterSet::new(vec![c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let classic = run_dropout_kmeans(&pts, &init, 0.0, 100).unwrap();
        let robust = run_dropout_kmeans(&pts, &init, 0.3, 100).unwrap();
        assert_eq!(classic.centers[0], c(-1.0, 0.0));
        // (0.7 * -1 + 0.21 * 1) / 0.91
        assert!((robust.centers[0].x - (-0.49 / 0.91)).abs() < 1e-12);
        assert!(robust.centers[0].x.abs() < classic.centers[0].x.abs());
        assert!(robust.centers[1].x.abs() < classic.centers[1].x.abs());
    }

    #[test]
    fn observer_sees_every_assignment() {
        let init = CenterSet::new(vec![c(0.2, 0.1), c(1.0, 0.0)]).unwrap();
        let mut seen = 0;
        let run = run_dropout_kmeans_observed(&blobs(), &init, 0.3, 100, |_, _| seen += 1).unwrap();
        assert_eq!(seen, run.objective_trace.len());
    }

    #[test]
    fn iteration_cap_is_respected() {
        let init = CenterSet::new(vec![c(0.2, 0.1), c(1.0, 0.0)]).unwrap();
        let run = run_dropout_kmeans(&blobs(), &init, 0.3, 1).unwrap();
        assert_eq!(run.iterations, 1);
        assert!(!run.converged);
    }
}
