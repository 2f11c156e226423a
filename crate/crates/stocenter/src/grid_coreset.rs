//! Additive ε-coresets of a realization via a two-stage Cartesian grid.
//!
//! `r_P` is the k-center value of P against the best k support points. With
//! `2^a ≤ r_P < 2^(a+1)`, a grid of side `ε·2^a/(4d)` anchored at the origin
//! keeps the smallest-index point of every occupied cell. If the kept points
//! have `r < 2^a`, the grid is halved once.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Point, PointId};

/// Limit on the number of k-subsets scanned by [`r_value`].
pub const MAX_R_COMBINATIONS: u64 = 1_000_000;

/// Integer coordinates of a grid cell.
pub type CellIndex = Vec<i64>;

/// A Cartesian grid with a vertex at the origin.
///
/// `side = ε·2^level/(4d)`; a side of zero marks the absence of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub side: f64,
    pub d: usize,
    pub level: i32,
}

impl GridSpec {
    pub fn new(eps: f64, d: usize, level: i32) -> Self {
        GridSpec {
            side: eps / (4.0 * d as f64) * 2f64.powi(level),
            d,
            level,
        }
    }

    pub fn sentinel(d: usize) -> Self {
        GridSpec {
            side: 0.0,
            d,
            level: 0,
        }
    }

    pub fn is_sentinel(&self) -> bool {
        self.side == 0.0
    }

    /// The cell containing `x`. Points on a wall belong to the lower cell.
    pub fn cell_of(&self, x: &Point) -> Result<CellIndex> {
        if self.is_sentinel() {
            return Err(Error::InvalidArgument(
                "the sentinel grid has no cells".into(),
            ));
        }
        x.0.iter()
            .map(|&c| {
                let q = (c / self.side).floor();
                if q.abs() >= 9.0e18 {
                    Err(Error::InvalidArgument(format!(
                        "grid index of coordinate {c} overflows"
                    )))
                } else {
                    Ok(q as i64)
                }
            })
            .collect()
    }
}

/// Result of the coreset construction on one realization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoresetOutput {
    /// 𝓔(P), sorted by id.
    pub coreset: Vec<PointId>,
    pub grid: GridSpec,
    /// 𝒞(P): each occupied cell and its smallest-index point.
    pub cells: BTreeMap<CellIndex, PointId>,
    /// r_P of the input.
    pub r: f64,
    /// Exponent with `2^a ≤ r_P < 2^(a+1)`; `None` when r_P = 0.
    pub a: Option<i32>,
    /// 0 without a grid, otherwise the stage that produced the output.
    pub stage: u8,
}

/// Binomial coefficient, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
        if acc > u64::MAX as u128 {
            return u128::MAX;
        }
    }
    acc
}

/// Exponent `a` with `2^a ≤ r < 2^(a+1)` for finite positive `r`, read from the bits.
pub fn floor_log2(r: f64) -> i32 {
    debug_assert!(r > 0.0 && r.is_finite());
    let bits = r.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    if exp == 0 {
        floor_log2(r * 2f64.powi(64)) - 64
    } else {
        exp - 1023
    }
}

/// Visits every k-subset of `0..n` in lexicographic order.
pub(crate) fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for l in i + 1..k {
            idx[l] = idx[l - 1] + 1;
        }
    }
}

fn check_guard(n: usize, k: usize) -> Result<usize> {
    let kk = k.min(n);
    if binomial(n, kk) > MAX_R_COMBINATIONS as u128 {
        return Err(Error::CombinationGuardExceeded {
            n,
            k,
            limit: MAX_R_COMBINATIONS,
        });
    }
    Ok(kk)
}

/// min over k-subsets F of the support of K(P,F).
///
/// If the support has fewer than k points, all of them are used as centers.
pub fn r_value(points: &[Point], support: &[Point], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if points.is_empty() {
        return Ok(0.0);
    }
    let kk = check_guard(support.len(), k)?;
    let dist: Vec<Vec<f64>> = points
        .iter()
        .map(|p| support.iter().map(|s| p.dist(s)).collect())
        .collect();
    Ok(min_over_subsets(support.len(), kk, dist.len(), |i, f| {
        dist[i][f]
    }))
}

fn min_over_subsets(n: usize, k: usize, m: usize, dist: impl Fn(usize, usize) -> f64) -> f64 {
    let mut best = f64::INFINITY;
    for_each_subset(n, k, |sub| {
        let mut worst: f64 = 0.0;
        for i in 0..m {
            let near = sub
                .iter()
                .map(|&f| dist(i, f))
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(near);
            if worst >= best {
                return;
            }
        }
        best = worst;
    });
    best
}

/// Upper bound ⌈k·(8d/ε + 2)^d⌉ on the coreset size used by the guards.
pub fn coreset_image_size_bound(k: usize, d: usize, eps: f64) -> u64 {
    let b = (k as f64 * (8.0 * d as f64 / eps + 2.0).powi(d as i32)).ceil();
    if b >= u64::MAX as f64 {
        u64::MAX
    } else {
        b as u64
    }
}

/// The coreset construction over a fixed support, with cached pairwise distances.
#[derive(Debug, Clone)]
pub struct GridCoreset<'a> {
    support: &'a [Point],
    dist: Vec<f64>,
    k: usize,
    eps: f64,
}

impl<'a> GridCoreset<'a> {
    pub fn new(support: &'a [Point], k: usize, eps: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "eps must lie in (0,1), got {eps}"
            )));
        }
        check_guard(support.len(), k)?;
        let n = support.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = support[i].dist(&support[j]);
                dist[i * n + j] = v;
                dist[j * n + i] = v;
            }
        }
        Ok(GridCoreset {
            support,
            dist,
            k,
            eps,
        })
    }

    pub fn support(&self) -> &'a [Point] {
        self.support
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }

    fn d(&self) -> usize {
        self.support.first().map_or(1, Point::dim)
    }

    /// r of a set of support points.
    pub fn r(&self, ids: &[PointId]) -> f64 {
        if ids.is_empty() {
            return 0.0;
        }
        let n = self.support.len();
        min_over_subsets(n, self.k.min(n), ids.len(), |i, f| {
            self.dist[ids[i].0 * n + f]
        })
    }

    /// Smallest-index representative of every occupied cell.
    pub fn representatives(
        &self,
        ids: &[PointId],
        grid: &GridSpec,
    ) -> Result<BTreeMap<CellIndex, PointId>> {
        let mut cells = BTreeMap::new();
        for &id in ids {
            let c = grid.cell_of(&self.support[id.0])?;
            cells
                .entry(c)
                .and_modify(|r: &mut PointId| *r = (*r).min(id))
                .or_insert(id);
        }
        Ok(cells)
    }

    /// Runs the construction on the realization `ids`.
    pub fn build(&self, ids: &[PointId]) -> Result<CoresetOutput> {
        if ids.is_empty() {
            return Err(Error::EmptyRealization);
        }
        if let Some(bad) = ids.iter().find(|i| i.0 >= self.support.len()) {
            return Err(Error::InvalidArgument(format!(
                "point id {} is not in the support",
                bad.0
            )));
        }
        let mut ids = ids.to_vec();
        ids.sort_unstable();
        ids.dedup();
        let d = self.d();
        let r = self.r(&ids);
        if r == 0.0 {
            return Ok(CoresetOutput {
                coreset: ids,
                grid: GridSpec::sentinel(d),
                cells: BTreeMap::new(),
                r,
                a: None,
                stage: 0,
            });
        }
        let a = floor_log2(r);
        let g1 = GridSpec::new(self.eps, d, a);
        let cells1 = self.representatives(&ids, &g1)?;
        let e1: Vec<PointId> = sorted_values(&cells1);
        if self.r(&e1) >= 2f64.powi(a) {
            return Ok(CoresetOutput {
                coreset: e1,
                grid: g1,
                cells: cells1,
                r,
                a: Some(a),
                stage: 1,
            });
        }
        let g2 = GridSpec::new(self.eps, d, a - 1);
        let cells2 = self.representatives(&ids, &g2)?;
        Ok(CoresetOutput {
            coreset: sorted_values(&cells2),
            grid: g2,
            cells: cells2,
            r,
            a: Some(a),
            stage: 2,
        })
    }
}

fn sorted_values(cells: &BTreeMap<CellIndex, PointId>) -> Vec<PointId> {
    let mut v: Vec<PointId> = cells.values().copied().collect();
    v.sort_unstable();
    v
}

/// Runs the construction on the realization `ids` of `support`.
pub fn build_additive_coreset(
    ids: &[PointId],
    support: &[Point],
    k: usize,
    eps: f64,
) -> Result<CoresetOutput> {
    GridCoreset::new(support, k, eps)?.build(ids)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(c: &[[f64; 2]]) -> Vec<Point> {
        c.iter().map(|x| Point(x.to_vec())).collect()
    }

    #[test]
    fn r_examples() {
        let s = pts(&[[0.0, 0.0], [2.0, 0.0]]);
        assert_eq!(r_value(&s, &s, 1).unwrap(), 2.0);
        assert_eq!(r_value(&s[..1], &s, 1).unwrap(), 0.0);
        assert_eq!(r_value(&s, &s, 2).unwrap(), 0.0);
        assert_eq!(r_value(&s, &s, 5).unwrap(), 0.0);
    }

    #[test]
    fn r_guard() {
        let s: Vec<Point> = (0..200).map(|i| Point(vec![i as f64])).collect();
        assert!(matches!(
            r_value(&s, &s, 4),
            Err(Error::CombinationGuardExceeded { .. })
        ));
    }

    #[test]
    fn exponent_is_exact() {
        assert_eq!(floor_log2(1.0), 0);
        assert_eq!(floor_log2(2.0), 1);
        assert_eq!(floor_log2(2.0 - 1e-15), 0);
        assert_eq!(floor_log2(0.75), -1);
        assert_eq!(floor_log2(f64::MIN_POSITIVE / 8.0), -1025);
    }

    #[test]
    fn size_bound_example() {
        assert_eq!(coreset_image_size_bound(1, 1, 1.0), 10);
        assert!(coreset_image_size_bound(2, 2, 0.25) > coreset_image_size_bound(2, 2, 0.5));
    }

    #[test]
    fn k_points_are_their_own_coreset() {
        let s = pts(&[[0.0, 0.0], [5.0, 1.0], [3.0, 3.0]]);
        let out = build_additive_coreset(&[PointId(0), PointId(2)], &s, 2, 0.5).unwrap();
        assert_eq!(out.coreset, vec![PointId(0), PointId(2)]);
        assert!(out.grid.is_sentinel());
    }

    #[test]
    fn one_cell_keeps_smallest_id() {
        // A far point sets r; the tight cluster falls into a single cell.
        let mut s = pts(&[[100.0, 100.0], [-100.0, -100.0]]);
        s.extend(pts(&[[0.5, 0.5], [0.5000001, 0.5], [0.5, 0.5000002]]));
        let ids = [PointId(4), PointId(0), PointId(2), PointId(3)];
        let out = build_additive_coreset(&ids, &s, 1, 0.5).unwrap();
        assert_eq!(out.coreset, vec![PointId(0), PointId(2)]);
    }

    #[test]
    fn wall_points_go_to_lower_cell() {
        let g = GridSpec {
            side: 0.5,
            d: 2,
            level: 0,
        };
        assert_eq!(g.cell_of(&Point(vec![1.0, -0.5])).unwrap(), vec![2, -1]);
        assert_eq!(g.cell_of(&Point(vec![0.0, 0.0])).unwrap(), vec![0, 0]);
        assert_eq!(
            g.cell_of(&Point(vec![0.9999999, -0.4999])).unwrap(),
            vec![1, -1]
        );
    }

    #[test]
    fn halved_grid_refines() {
        let g1 = GridSpec::new(0.3, 2, 3);
        let g2 = GridSpec::new(0.3, 2, 2);
        assert_eq!(g1.side, 2.0 * g2.side);
        for x in [0.123, 7.77, -3.3, 1.2e-3, 5.0] {
            let p = Point(vec![x, -x]);
            let c1 = g1.cell_of(&p).unwrap();
            let c2 = g2.cell_of(&p).unwrap();
            assert_eq!(c1, c2.iter().map(|c| c.div_euclid(2)).collect::<Vec<_>>());
        }
    }

    #[test]
    fn empty_realization_rejected() {
        let s = pts(&[[0.0, 0.0]]);
        assert!(matches!(
            build_additive_coreset(&[], &s, 1, 0.5),
            Err(Error::EmptyRealization)
        ));
    }

    #[test]
    fn subsets_in_order() {
        let mut seen = Vec::new();
        for_each_subset(4, 2, |s| seen.push(s.to_vec()));
        assert_eq!(
            seen,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        let mut count = 0;
        for_each_subset(3, 0, |_| count += 1);
        assert_eq!(count, 1);
    }
}
