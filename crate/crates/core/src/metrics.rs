//! Detection probability and dropout-weighted RMSD.
//!
//! Both metrics average over all `2^K` survival outcomes. The grouped forms
//! run in `O(N K log K)` or better; the `_bruteforce` forms enumerate every
//! outcome and exist to check the grouped ones.

use std::collections::HashMap;

use serde::Serialize;

use crate::cluster::{Assignment, CenterSet, Coord, DropoutParams};
use crate::error::{Error, Result};

/// Largest K accepted by the exhaustive enumerations.
pub const MAX_ENUMERATION_K: usize = 20;

/// Point indices of each ship, ships in order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct ShipGrouping {
    names: Vec<String>,
    members: Vec<Vec<usize>>,
}

impl ShipGrouping {
    /// Groups point indices by ship id.
    pub fn from_ids<S: AsRef<str>>(ids: &[S]) -> Self {
        let mut slot: HashMap<&str, usize> = HashMap::new();
        let mut names = Vec::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        for (i, id) in ids.iter().enumerate() {
            let id = id.as_ref();
            let s = *slot.entry(id).or_insert_with(|| {
                names.push(id.to_string());
                members.push(Vec::new());
                names.len() - 1
            });
            members[s].push(i);
        }
        ShipGrouping { names, members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn ships(&self) -> impl Iterator<Item = &[usize]> {
        self.members.iter().map(Vec::as_slice)
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.members.is_empty() {
            return Err(Error::NoShips);
        }
        if let Some(&i) = self.members.iter().flatten().find(|&&i| i >= n) {
            return Err(Error::InvalidParameter(format!(
                "ship grouping references point {i} of {n}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsResult {
    pub p_d: f64,
    pub rmsd: f64,
}

/// Closed-ball detection test shared by both P_d routes.
#[inline]
fn detects(x: Coord, c: Coord, r: f64) -> bool {
    x.dist(c) <= r
}

fn check_params(centers: &CenterSet, params: &DropoutParams) -> Result<()> {
    if centers.len() != params.k {
        return Err(Error::InvalidParameter(format!(
            "expected {} centers, got {}",
            params.k,
            centers.len()
        )));
    }
    DropoutParams::new(params.p, params.k, params.r).map(|_| ())
}

/// Probability that a uniformly chosen ship comes within `r` of a surviving
/// center.
///
/// A ship whose points come within `r` of `m` distinct centers goes
/// undetected only when all `m` fail, so it contributes `1 - p^m`.
pub fn detection_probability(
    ships: &ShipGrouping,
    points: &[Coord],
    centers: &CenterSet,
    params: &DropoutParams,
) -> Result<f64> {
    ships.check(points.len())?;
    check_params(centers, params)?;
    let mut total = 0.0;
    for ship in ships.ships() {
        let covering = centers
            .iter()
            .filter(|&&c| ship.iter().any(|&i| detects(points[i], c, params.r)))
            .count();
        total += 1.0 - params.p.powi(covering as i32);
    }
    Ok(total / ships.len() as f64)
}

fn outcome_probability(mask: u32, k: usize, p: f64) -> f64 {
    let alive = mask.count_ones() as i32;
    (1.0 - p).powi(alive) * p.powi(k as i32 - alive)
}

/// P_d by summing over every survivor subset.
pub fn detection_probability_bruteforce(
    ships: &ShipGrouping,
    points: &[Coord],
    centers: &CenterSet,
    params: &DropoutParams,
) -> Result<f64> {
    ships.check(points.len())?;
    check_params(centers, params)?;
    let k = centers.len();
    if k > MAX_ENUMERATION_K {
        return Err(Error::TooManyCenters(k));
    }
    let mut total = 0.0;
    for ship in ships.ships() {
        let mut detected = 0.0;
        for mask in 0u32..(1 << k) {
            let hit = (0..k)
                .filter(|&j| mask & (1 << j) != 0)
                .any(|j| ship.iter().any(|&i| detects(points[i], centers[j], params.r)));
            if hit {
                detected += outcome_probability(mask, k, params.p);
            }
        }
        total += detected;
    }
    Ok(total / ships.len() as f64)
}

/// Root of the expected mean squared distance to the nearest surviving
/// center, conditioned on at least one survivor.
pub fn dropout_rmsd(points: &[Coord], centers: &CenterSet, p: f64) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyPoints);
    }
    crate::cluster::check_probability(p)?;
    let numerator = Assignment::compute(points, centers.as_slice(), p).cost_sq;
    let survive_any = 1.0 - p.powi(centers.len() as i32);
    Ok((numerator / (survive_any * points.len() as f64)).sqrt())
}

/// [`dropout_rmsd`] by enumerating every non-empty survivor subset.
pub fn dropout_rmsd_bruteforce(points: &[Coord], centers: &CenterSet, p: f64) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyPoints);
    }
    crate::cluster::check_probability(p)?;
    let k = centers.len();
    if k > MAX_ENUMERATION_K {
        return Err(Error::TooManyCenters(k));
    }
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for mask in 1u32..(1 << k) {
        let prob = outcome_probability(mask, k, p);
        let sum: f64 = points
            .iter()
            .map(|x| {
                (0..k)
                    .filter(|&j| mask & (1 << j) != 0)
                    .map(|j| x.dist2(centers[j]))
                    .fold(f64::INFINITY, f64::min)
            })
            .sum();
        numerator += prob * sum;
        denominator += prob * points.len() as f64;
    }
    Ok((numerator / denominator).sqrt())
}

/// Both metrics for one placement.
pub fn evaluate(
    ships: &ShipGrouping,
    points: &[Coord],
    centers: &CenterSet,
    params: &DropoutParams,
) -> Result<MetricsResult> {
    Ok(MetricsResult {
        p_d: detection_probability(ships, points, centers, params)?,
        rmsd: dropout_rmsd(points, centers, params.p)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64, y: f64) -> Coord {
        Coord::new(x, y)
    }

    fn params(p: f64, k: usize) -> DropoutParams {
        DropoutParams::new(p, k, 10.0).unwrap()
    }

    #[test]
    fn grouping_preserves_first_appearance() {
        let g = ShipGrouping::from_ids(&["b", "a", "b", "c", "a"]);
        assert_eq!(g.names(), ["b", "a", "c"]);
        let ships: Vec<_> = g.ships().collect();
        assert_eq!(ships, vec![&[0, 2][..], &[1, 4][..], &[3][..]]);
    }

    #[test]
    fn ship_covered_by_two_centers() {
        let points = [c(0.0, 0.0), c(30.0, 0.0)];
        let ships = ShipGrouping::from_ids(&["s", "s"]);
        let centers = CenterSet::new(vec![c(5.0, 0.0), c(100.0, 0.0), c(35.0, 0.0)]).unwrap();
        let pd = detection_probability(&ships, &points, &centers, &params(0.3, 3)).unwrap();
        assert!((pd - 0.91).abs() < 1e-12);
        let bf = detection_probability_bruteforce(&ships, &points, &centers, &params(0.3, 3)).unwrap();
        assert!((bf - 0.91).abs() < 1e-12);
    }

    #[test]
    fn uncovered_ship_is_never_detected() {
        let points = [c(0.0, 0.0)];
        let ships = ShipGrouping::from_ids(&["s"]);
        let centers = CenterSet::new(vec![c(50.0, 0.0)]).unwrap();
        assert_eq!(detection_probability(&ships, &points, &centers, &params(0.3, 1)).unwrap(), 0.0);
    }

    #[test]
    fn zero_dropout_counts_covered_ships() {
        let points = [c(0.0, 0.0), c(100.0, 0.0), c(200.0, 0.0), c(300.0, 0.0)];
        let ships = ShipGrouping::from_ids(&["a", "b", "c", "d"]);
        let centers = CenterSet::new(vec![c(0.0, 10.0), c(195.0, 0.0)]).unwrap();
        let pd = detection_probability(&ships, &points, &centers, &params(0.0, 2)).unwrap();
        assert_eq!(pd, 0.5);
    }

    #[test]
    fn boundary_counts_as_detected() {
        let points = [c(0.0, 0.0)];
        let ships = ShipGrouping::from_ids(&["s"]);
        let centers = CenterSet::new(vec![c(6.0, 8.0)]).unwrap();
        let pd = detection_probability(&ships, &points, &centers, &params(0.3, 1)).unwrap();
        assert!((pd - 0.7).abs() < 1e-15);
    }

    #[test]
    fn full_coverage_hits_upper_bound() {
        let points = [c(0.0, 0.0), c(1.0, 1.0)];
        let ships = ShipGrouping::from_ids(&["a", "b"]);
        let centers = CenterSet::new(vec![c(0.5, 0.5), c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let bf = detection_probability_bruteforce(&ships, &points, &centers, &params(0.3, 3)).unwrap();
        assert!((bf - (1.0 - 0.027)).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let centers = CenterSet::new(vec![c(0.0, 0.0)]).unwrap();
        let empty: ShipGrouping = ShipGrouping::from_ids::<&str>(&[]);
        assert!(matches!(
            detection_probability(&empty, &[], &centers, &params(0.3, 1)),
            Err(Error::NoShips)
        ));
        let many = CenterSet::new(vec![c(0.0, 0.0); 21]).unwrap();
        let ships = ShipGrouping::from_ids(&["s"]);
        assert!(matches!(
            detection_probability_bruteforce(&ships, &[c(0.0, 0.0)], &many, &params(0.3, 21)),
            Err(Error::TooManyCenters(21))
        ));
        assert!(dropout_rmsd_bruteforce(&[c(0.0, 0.0)], &many, 0.3).is_err());
        assert!(dropout_rmsd(&[], &centers, 0.3).is_err());
    }

    #[test]
    fn rmsd_single_center() {
        let centers = CenterSet::new(vec![c(3.0, 4.0)]).unwrap();
        for p in [0.0, 0.3, 0.9] {
            assert!((dropout_rmsd(&[c(0.0, 0.0)], &centers, p).unwrap() - 5.0).abs() < 1e-12);
            assert!((dropout_rmsd_bruteforce(&[c(0.0, 0.0)], &centers, p).unwrap() - 5.0).abs() < 1e-12);
        }
        assert_eq!(dropout_rmsd_bruteforce(&[c(3.0, 4.0)], &centers, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn rmsd_zero_dropout_is_classic() {
        let points = [c(0.0, 0.0), c(4.0, 0.0), c(10.0, 1.0)];
        let centers = CenterSet::new(vec![c(1.0, 0.0), c(10.0, 0.0)]).unwrap();
        let naive = ((1.0 + 9.0 + 1.0) / 3.0f64).sqrt();
        assert!((dropout_rmsd(&points, &centers, 0.0).unwrap() - naive).abs() < 1e-12);
    }
}
