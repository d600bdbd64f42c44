//! Classic and dropout-weighted clustering in the plane.
//!
//! Every algorithm works on plain [`Coord`] slices in kilometres. Ship
//! identifiers only matter for metrics and are kept out of this module.

pub(crate) mod init;
mod kmeans;
mod kmedian;
mod rank;
pub(crate) mod stochastic;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use init::{distinct_count, kmeanspp_init, uniform_init};
pub use kmeans::{run_classic_kmeans, run_dropout_kmeans, run_dropout_kmeans_observed};
pub use kmedian::{
    run_classic_kmedian, run_dropout_kmedian, update_center_dropout_median,
    weighted_geometric_median, WeiszfeldOutcome, WEISZFELD_EPS,
};
pub use rank::{
    dropout_kmeans_objective, dropout_kmedian_objective, rank_centers, rank_weights,
    survival_weights, update_centers_dropout_mean, Assignment, RankAssignment, SurvivalWeightRow,
};
pub use stochastic::run_stochastic_dropout_kmeans;

/// Default outer iteration cap for the deterministic algorithms.
pub const DEFAULT_MAX_ITERS: usize = 1000;
/// Iteration cap of the stochastic-dropout baseline.
pub const STOCHASTIC_MAX_ITERS: usize = 300;
/// Inner Weiszfeld iterations per outer k-median iteration.
pub const DEFAULT_INNER_ITERS: usize = 50;
/// Weiszfeld movement tolerance, km.
pub const DEFAULT_WEISZFELD_TOL: f64 = 1e-6;

/// A planar location in kilometres.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Coord {
    pub x: f64,
    pub y: f64,
}

impl Coord {
    pub const fn new(x: f64, y: f64) -> Self {
        Coord { x, y }
    }

    #[inline]
    pub fn dist2(self, other: Coord) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn dist(self, other: Coord) -> f64 {
        self.dist2(other).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<(f64, f64)> for Coord {
    fn from((x, y): (f64, f64)) -> Self {
        Coord { x, y }
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6}, {:.6})", self.x, self.y)
    }
}

/// Ordered cluster centers. Index `k` is the identity of sensor `k`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CenterSet(Vec<Coord>);

impl CenterSet {
    pub fn new(centers: Vec<Coord>) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::InvalidParameter("center set is empty".into()));
        }
        if let Some(c) = centers.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite center {c}")));
        }
        Ok(CenterSet(centers))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Coord] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Coord> {
        self.0.iter()
    }

    pub fn into_vec(self) -> Vec<Coord> {
        self.0
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [Coord] {
        &mut self.0
    }

    pub(crate) fn from_vec_unchecked(centers: Vec<Coord>) -> Self {
        CenterSet(centers)
    }

    /// Largest displacement of any center relative to `other`.
    pub fn max_shift(&self, other: &CenterSet) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.dist(*b))
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for CenterSet {
    type Output = Coord;

    fn index(&self, k: usize) -> &Coord {
        &self.0[k]
    }
}

impl<'a> IntoIterator for &'a CenterSet {
    type Item = &'a Coord;
    type IntoIter = std::slice::Iter<'a, Coord>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Failure model and detection geometry shared by algorithms and metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DropoutParams {
    /// Independent failure probability of each center, in `[0, 1)`.
    pub p: f64,
    /// Number of centers.
    pub k: usize,
    /// Detection radius in km.
    pub r: f64,
}

impl DropoutParams {
    pub fn new(p: f64, k: usize, r: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "dropout probability must lie in [0, 1), got {p}"
            )));
        }
        if k == 0 {
            return Err(Error::InvalidParameter("K must be at least 1".into()));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "detection radius must be positive, got {r}"
            )));
        }
        Ok(DropoutParams { p, k, r })
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if (0.0..1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "dropout probability must lie in [0, 1), got {p}"
        )))
    }
}

/// Outcome of one clustering run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub initial: CenterSet,
    pub centers: CenterSet,
    /// Number of center updates performed.
    pub iterations: usize,
    /// False when the iteration cap stopped the run.
    pub converged: bool,
    /// Objective at the initial centers followed by the objective after each
    /// update.
    pub objective_trace: Vec<f64>,
    /// Centers after each update, in order.
    pub trajectory: Vec<CenterSet>,
    /// Iterations (1-based) in which an empty cluster was reseeded.
    pub reseeds: Vec<usize>,
    /// Wall-clock duration of the run in seconds.
    pub wall_time: f64,
}

/// Moves each center whose cluster received no weight onto the point
/// farthest from its nearest center. Farthest points are taken in
/// decreasing order of distance, lower index first on ties, each used once.
pub(crate) fn reseed_empty(
    points: &[Coord],
    nearest_d2: &[f64],
    empty: &[usize],
    centers: &mut [Coord],
) {
    if empty.is_empty() {
        return;
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| nearest_d2[b].total_cmp(&nearest_d2[a]));
    for (&k, &i) in empty.iter().zip(&order) {
        centers[k] = points[i];
    }
}

pub(crate) fn check_run_inputs(points: &[Coord], init: &CenterSet) -> Result<()> {
    if points.is_empty() {
        return Err(Error::EmptyPoints);
    }
    if init.is_empty() {
        return Err(Error::InvalidParameter("initial center set is empty".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation() {
        assert!(DropoutParams::new(0.3, 5, 10.0).is_ok());
        assert!(DropoutParams::new(0.0, 1, 0.5).is_ok());
        assert!(DropoutParams::new(1.0, 5, 10.0).is_err());
        assert!(DropoutParams::new(-0.1, 5, 10.0).is_err());
        assert!(DropoutParams::new(0.3, 0, 10.0).is_err());
        assert!(DropoutParams::new(0.3, 5, 0.0).is_err());
    }

    #[test]
    fn center_set_rejects_non_finite() {
        assert!(CenterSet::new(vec![]).is_err());
        assert!(CenterSet::new(vec![Coord::new(f64::NAN, 0.0)]).is_err());
        assert_eq!(CenterSet::new(vec![Coord::new(1.0, 2.0)]).unwrap().len(), 1);
    }

    #[test]
    fn reseed_takes_farthest_points_once() {
        let points = [
            Coord::new(0.0, 0.0),
            Coord::new(9.0, 0.0),
            Coord::new(5.0, 0.0),
        ];
        let d2 = [0.0, 81.0, 25.0];
        let mut centers = vec![Coord::new(0.0, 0.0); 3];
        reseed_empty(&points, &d2, &[1, 2], &mut centers);
        assert_eq!(centers[1], points[1]);
        assert_eq!(centers[2], points[2]);
        assert_eq!(centers[0], Coord::new(0.0, 0.0));
    }
}
