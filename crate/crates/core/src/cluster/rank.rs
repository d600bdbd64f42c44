use serde::Serialize;

use super::{check_probability, reseed_empty, CenterSet, Coord};
use crate::error::Result;

/// Per-center probabilities that each center is the nearest surviving one
/// for a given point. Indexed by center, not by rank.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SurvivalWeightRow(Vec<f64>);

impl SurvivalWeightRow {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Index<usize> for SurvivalWeightRow {
    type Output = f64;

    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

/// Weight of the rank-`j` center (0-based): `p^j (1 - p)`.
///
/// The nearest center survives with probability `1 - p`; the `j`-th nearest is
/// the nearest survivor exactly when the `j` closer ones all fail.
pub fn rank_weights(k: usize, p: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(k);
    let mut fail_all_closer = 1.0;
    for _ in 0..k {
        out.push(fail_all_closer * (1.0 - p));
        fail_all_closer *= p;
    }
    out
}

/// Center indices sorted by increasing distance to `point`; ties go to the
/// lower index.
pub fn rank_centers(point: Coord, centers: &[Coord]) -> Vec<usize> {
    let d2: Vec<f64> = centers.iter().map(|c| point.dist2(*c)).collect();
    let mut order: Vec<usize> = (0..centers.len()).collect();
    // stable sort keeps ascending index order among equal distances
    order.sort_by(|&a, &b| d2[a].total_cmp(&d2[b]));
    order
}

/// Expands a ranking into per-center survival weights.
pub fn survival_weights(ranking: &[usize], p: f64) -> SurvivalWeightRow {
    let by_rank = rank_weights(ranking.len(), p);
    let mut row = vec![0.0; ranking.len()];
    for (&k, w) in ranking.iter().zip(by_rank) {
        row[k] = w;
    }
    SurvivalWeightRow(row)
}

/// Distance rankings of every point, truncated to the ranks that carry
/// non-zero weight.
///
/// With `p = 0` only the nearest center matters, so the stored ranking is the
/// ordinary hard assignment and comparing two rankings is comparing labels.
#[derive(Debug, Clone)]
pub struct RankAssignment {
    k: usize,
    depth: usize,
    order: Vec<u32>,
    nearest_d2: Vec<f64>,
}

impl PartialEq for RankAssignment {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.depth == other.depth && self.order == other.order
    }
}

impl RankAssignment {
    pub fn compute(points: &[Coord], centers: &[Coord], depth: usize) -> Self {
        Assignment::build(points, centers, &vec![1.0; depth.clamp(1, centers.len())]).ranking
    }

    pub fn num_points(&self) -> usize {
        self.nearest_d2.len()
    }

    pub fn num_centers(&self) -> usize {
        self.k
    }

    /// Number of stored ranks per point.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Centers of point `i`, nearest first.
    pub fn row(&self, i: usize) -> &[u32] {
        &self.order[i * self.depth..(i + 1) * self.depth]
    }

    pub fn nearest(&self, i: usize) -> usize {
        self.order[i * self.depth] as usize
    }

    pub(crate) fn nearest_d2(&self) -> &[f64] {
        &self.nearest_d2
    }
}

/// A ranking together with the rank weights it was built for and the
/// dropout-weighted costs of the centers it was computed from.
#[derive(Debug, Clone)]
pub struct Assignment {
    pub ranking: RankAssignment,
    pub rank_weights: Vec<f64>,
    /// `sum_i sum_k w_ik |x_i - c_k|^2`.
    pub cost_sq: f64,
    /// `sum_i sum_k w_ik |x_i - c_k|`.
    pub cost_abs: f64,
}

impl Assignment {
    pub fn compute(points: &[Coord], centers: &[Coord], p: f64) -> Self {
        Self::build(points, centers, &rank_weights(centers.len(), p))
    }

    pub(crate) fn build(points: &[Coord], centers: &[Coord], rank_weights: &[f64]) -> Self {
        let k = centers.len();
        let depth = rank_weights
            .iter()
            .rposition(|&w| w > 0.0)
            .map_or(1, |j| j + 1);
        let mut order = Vec::with_capacity(points.len() * depth);
        let mut nearest_d2 = Vec::with_capacity(points.len());
        let mut d2 = vec![0.0; k];
        let mut idx: Vec<u32> = Vec::with_capacity(k);
        let mut cost_sq = 0.0;
        let mut cost_abs = 0.0;

        for x in points {
            for (d, c) in d2.iter_mut().zip(centers) {
                *d = x.dist2(*c);
            }
            if depth == 1 {
                let mut best = 0;
                for j in 1..k {
                    if d2[j] < d2[best] {
                        best = j;
                    }
                }
                order.push(best as u32);
                nearest_d2.push(d2[best]);
                cost_sq += rank_weights[0] * d2[best];
                cost_abs += rank_weights[0] * d2[best].sqrt();
                continue;
            }
            idx.clear();
            idx.extend(0..k as u32);
            idx.sort_by(|&a, &b| d2[a as usize].total_cmp(&d2[b as usize]));
            nearest_d2.push(d2[idx[0] as usize]);
            let mut row_sq = 0.0;
            let mut row_abs = 0.0;
            for (&c, &w) in idx[..depth].iter().zip(rank_weights) {
                let d = d2[c as usize];
                row_sq += w * d;
                row_abs += w * d.sqrt();
            }
            cost_sq += row_sq;
            cost_abs += row_abs;
            order.extend_from_slice(&idx[..depth]);
        }

        Assignment {
            ranking: RankAssignment {
                k,
                depth,
                order,
                nearest_d2,
            },
            rank_weights: rank_weights.to_vec(),
            cost_sq,
            cost_abs,
        }
    }

    /// Per-center survival weights of point `i`.
    pub fn weight_row(&self, i: usize) -> SurvivalWeightRow {
        let mut row = vec![0.0; self.ranking.k];
        for (&c, &w) in self.ranking.row(i).iter().zip(&self.rank_weights) {
            row[c as usize] = w;
        }
        // ranks past the stored depth all carry weight zero
        SurvivalWeightRow(row)
    }

    /// Total weight each center receives.
    pub fn center_mass(&self) -> Vec<f64> {
        let mut mass = vec![0.0; self.ranking.k];
        for i in 0..self.ranking.num_points() {
            for (&c, &w) in self.ranking.row(i).iter().zip(&self.rank_weights) {
                mass[c as usize] += w;
            }
        }
        mass
    }

    /// Per-center `(points, weights)` with the zero-weight entries left out,
    /// points in index order.
    pub(crate) fn members(&self, points: &[Coord]) -> Vec<(Vec<Coord>, Vec<f64>)> {
        let mut out = vec![(Vec::new(), Vec::new()); self.ranking.k];
        for (i, x) in points.iter().enumerate() {
            for (&c, &w) in self.ranking.row(i).iter().zip(&self.rank_weights) {
                if w > 0.0 {
                    let (xs, ws) = &mut out[c as usize];
                    xs.push(*x);
                    ws.push(w);
                }
            }
        }
        out
    }
}

/// Expected squared distance to the nearest surviving center, summed over
/// points (the empty outcome excluded).
pub fn dropout_kmeans_objective(points: &[Coord], centers: &CenterSet, p: f64) -> Result<f64> {
    check_probability(p)?;
    Ok(Assignment::compute(points, centers.as_slice(), p).cost_sq)
}

/// Expected distance to the nearest surviving center, summed over points.
pub fn dropout_kmedian_objective(points: &[Coord], centers: &CenterSet, p: f64) -> Result<f64> {
    check_probability(p)?;
    Ok(Assignment::compute(points, centers.as_slice(), p).cost_abs)
}

/// Weighted-mean center update for a fixed assignment. Centers whose total
/// weight is zero are reseeded; their indices are returned.
pub(crate) fn mean_update(
    points: &[Coord],
    assignment: &Assignment,
    centers: &mut [Coord],
) -> Vec<usize> {
    let k = centers.len();
    let mut acc = vec![Coord::default(); k];
    let mut mass = vec![0.0; k];
    let ranking = &assignment.ranking;
    for (i, x) in points.iter().enumerate() {
        for (&c, &w) in ranking.row(i).iter().zip(&assignment.rank_weights) {
            let c = c as usize;
            acc[c].x += w * x.x;
            acc[c].y += w * x.y;
            mass[c] += w;
        }
    }
    let mut empty = Vec::new();
    for c in 0..k {
        if mass[c] > 0.0 {
            centers[c] = Coord::new(acc[c].x / mass[c], acc[c].y / mass[c]);
        } else {
            empty.push(c);
        }
    }
    reseed_empty(points, ranking.nearest_d2(), &empty, centers);
    empty
}

/// `c_k = sum_i w_ik x_i / sum_i w_ik` for the assignment's weights.
pub fn update_centers_dropout_mean(
    points: &[Coord],
    assignment: &Assignment,
    previous: &CenterSet,
) -> CenterSet {
    let mut centers = previous.clone();
    mean_update(points, assignment, centers.as_mut_slice());
    centers
}
