//! Probability that a realization has a given additive coreset.
//!
//! In the existential model the mass factorizes over the grid cells of 𝔸(S).
//! In the locational model it is a sum of holant values, one per occupancy
//! sequence, each computed exactly by dynamic programming over the nodes.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::grid_coreset::{
    binomial, coreset_image_size_bound, for_each_subset, CellIndex, GridCoreset, GridSpec,
};
use crate::model::{realization_probability, Instance, PointId, Realization, RealizationSpace};

/// Limit on the holant state space `n·Π(lᵢ+1)` of a single sequence.
pub const MAX_HOLANT_STATES: u128 = 10_000_000;
/// Limit on the number of subsets scanned by [`ImageMode::SubsetEnumeration`].
pub const MAX_IMAGE_SUBSETS: u128 = 1_000_000;

/// Whether a point set is the coreset of some realization, and why.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum MembershipVerdict {
    /// 𝔸(S) ≠ S, so no realization maps to S.
    NotInImage,
    /// S has r_S = 0 (in particular |S| ≤ k); only S itself maps to S.
    Singleton,
    /// S is a fixed point with a grid.
    Full {
        grid: GridSpec,
        cells: BTreeMap<CellIndex, PointId>,
        /// Per cell of S, the support points with smaller index than its representative.
        tail_sets: BTreeMap<CellIndex, Vec<PointId>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ImageMode {
    Exhaustive,
    SubsetEnumeration,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageEntry {
    pub ids: Vec<PointId>,
    pub weight: f64,
}

/// The coreset classes of an instance with their probabilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedImage {
    /// Sorted by id tuple; every weight is positive.
    pub entries: Vec<ImageEntry>,
    pub source: ImageMode,
}

impl WeightedImage {
    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|e| e.weight).sum()
    }

    pub fn get(&self, ids: &[PointId]) -> Option<f64> {
        self.entries
            .binary_search_by(|e| e.ids.as_slice().cmp(ids))
            .ok()
            .map(|i| self.entries[i].weight)
    }
}

/// Partition-mass computations for one instance and fixed (k, ε).
#[derive(Debug, Clone)]
pub struct Partition<'a> {
    instance: &'a Instance,
    grid: GridCoreset<'a>,
}

fn normalize(s: &[PointId]) -> Vec<PointId> {
    let mut v = s.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

impl<'a> Partition<'a> {
    pub fn new(instance: &'a Instance, k: usize, eps: f64) -> Result<Self> {
        Ok(Partition {
            instance,
            grid: GridCoreset::new(instance.support(), k, eps)?,
        })
    }

    pub fn coreset_builder(&self) -> &GridCoreset<'a> {
        &self.grid
    }

    /// The coreset ids of a realization given by its point ids.
    pub fn coreset_of(&self, ids: &[PointId]) -> Result<Vec<PointId>> {
        if ids.is_empty() {
            return Ok(Vec::new());
        }
        Ok(self.grid.build(ids)?.coreset)
    }

    pub fn membership(&self, s: &[PointId]) -> Result<MembershipVerdict> {
        let s = normalize(s);
        if s.is_empty() {
            return Ok(MembershipVerdict::Singleton);
        }
        let out = self.grid.build(&s)?;
        if out.coreset != s {
            return Ok(MembershipVerdict::NotInImage);
        }
        if out.grid.is_sentinel() {
            return Ok(MembershipVerdict::Singleton);
        }
        let mut tail_sets: BTreeMap<CellIndex, Vec<PointId>> = BTreeMap::new();
        for (i, x) in self.instance.support().iter().enumerate() {
            let c = out.grid.cell_of(x)?;
            if let Some(&rep) = out.cells.get(&c) {
                if i < rep.0 {
                    tail_sets.entry(c).or_default().push(PointId(i));
                }
            }
        }
        Ok(MembershipVerdict::Full {
            grid: out.grid,
            cells: out.cells,
            tail_sets,
        })
    }

    /// Support points grouped by their cell in `grid`.
    fn cell_members(&self, grid: &GridSpec) -> Result<BTreeMap<CellIndex, Vec<usize>>> {
        let mut members: BTreeMap<CellIndex, Vec<usize>> = BTreeMap::new();
        for (i, x) in self.instance.support().iter().enumerate() {
            members.entry(grid.cell_of(x)?).or_default().push(i);
        }
        Ok(members)
    }

    /// (forbidden points, T(S)) for a full member S.
    pub fn forbidden_and_tail_sets(&self, s: &[PointId]) -> Result<(Vec<PointId>, Vec<PointId>)> {
        let MembershipVerdict::Full { grid, cells, .. } = self.membership(s)? else {
            return Err(Error::NotFull);
        };
        let mut forbidden = Vec::new();
        let mut tail = Vec::new();
        for (c, ids) in self.cell_members(&grid)? {
            match cells.get(&c) {
                None => forbidden.extend(ids.into_iter().map(PointId)),
                Some(&rep) => {
                    for i in ids {
                        if i < rep.0 {
                            forbidden.push(PointId(i));
                        } else if i > rep.0 {
                            tail.push(PointId(i));
                        }
                    }
                }
            }
        }
        forbidden.sort_unstable();
        Ok((forbidden, tail))
    }

    /// Pr[𝓔(P) = S] in the existential model.
    pub fn prob_existential(&self, s: &[PointId]) -> Result<f64> {
        let Instance::Existential(e) = self.instance else {
            return Err(Error::InvalidArgument(
                "existential instance required".into(),
            ));
        };
        match self.membership(s)? {
            MembershipVerdict::NotInImage => Ok(0.0),
            MembershipVerdict::Singleton => {
                realization_probability(self.instance, &Realization::Existential(normalize(s)))
            }
            MembershipVerdict::Full { grid, cells, .. } => {
                let p = e.probs();
                let mut factors = Vec::with_capacity(p.len());
                for (c, ids) in self.cell_members(&grid)? {
                    match cells.get(&c) {
                        None => factors.extend(ids.iter().map(|&i| 1.0 - p[i])),
                        Some(&rep) => {
                            factors.push(p[rep.0]);
                            factors.extend(ids.iter().filter(|&&i| i < rep.0).map(|&i| 1.0 - p[i]));
                        }
                    }
                }
                Ok(crate::model::product_of(&factors))
            }
        }
    }

    /// Node weights into (s₁,…,s_q, T(S)) for S, or `None` if S is not in the image.
    pub fn holant_weights(&self, s: &[PointId]) -> Result<Option<Vec<Vec<f64>>>> {
        let Instance::Locational(l) = self.instance else {
            return Err(Error::InvalidArgument(
                "locational instance required".into(),
            ));
        };
        let s = normalize(s);
        let tail = match self.membership(&s)? {
            MembershipVerdict::NotInImage => return Ok(None),
            MembershipVerdict::Singleton => Vec::new(),
            MembershipVerdict::Full { .. } => self.forbidden_and_tail_sets(&s)?.1,
        };
        Ok(Some(
            l.probs()
                .iter()
                .map(|row| {
                    let mut w: Vec<f64> = s.iter().map(|id| row[id.0]).collect();
                    w.push(tail.iter().map(|id| row[id.0]).sum());
                    w
                })
                .collect(),
        ))
    }

    /// Pr[𝓔(P) = S] in the locational model: Σ over occupancy sequences of Z(Λ_𝓛).
    pub fn prob_locational(&self, s: &[PointId]) -> Result<f64> {
        let Some(w) = self.holant_weights(s)? else {
            return Ok(0.0);
        };
        let q = normalize(s).len();
        let mut total = 0.0;
        for seq in compositions(w.len(), q) {
            total += holant_dp(&w, &seq)?;
        }
        Ok(total)
    }

    /// Pr[𝓔(P) = S] in either model.
    pub fn prob(&self, s: &[PointId]) -> Result<f64> {
        match self.instance {
            Instance::Existential(_) => self.prob_existential(s),
            Instance::Locational(_) => self.prob_locational(s),
        }
    }
}

/// All sequences (l₁,…,l_q, l_t) with lᵢ ≥ 1, l_t ≥ 0 summing to n, in lexicographic order.
pub fn compositions(n: usize, q: usize) -> Vec<Vec<usize>> {
    fn rec(rest: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 0 {
            cur.push(rest);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for l in 1..=rest.saturating_sub(slots - 1) {
            if rest < slots {
                break;
            }
            cur.push(l);
            rec(rest - l, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n >= q {
        rec(n, q, &mut Vec::with_capacity(q + 1), &mut out);
    }
    out
}

/// Z(Λ_𝓛): total weight of node assignments whose bucket occupancy equals `seq` exactly.
///
/// `weights[i][b]` is the weight of node i choosing bucket b.
pub fn holant_dp(weights: &[Vec<f64>], seq: &[usize]) -> Result<f64> {
    let n = weights.len();
    if seq.iter().sum::<usize>() != n {
        return Ok(0.0);
    }
    let mut strides = Vec::with_capacity(seq.len());
    let mut size: u128 = 1;
    for &l in seq {
        strides.push(size as usize);
        size *= l as u128 + 1;
    }
    if size * (n.max(1) as u128) > MAX_HOLANT_STATES {
        return Err(Error::StateSpaceGuardExceeded {
            size: size * n as u128,
            limit: MAX_HOLANT_STATES,
        });
    }
    let size = size as usize;
    let mut dp = vec![0.0; size];
    dp[0] = 1.0;
    let mut counts = vec![0usize; seq.len()];
    for w in weights {
        let mut next = vec![0.0; size];
        for (state, &v) in dp.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let mut rest = state;
            for (c, &l) in counts.iter_mut().zip(seq) {
                *c = rest % (l + 1);
                rest /= l + 1;
            }
            for b in 0..seq.len() {
                if counts[b] < seq[b] && w[b] != 0.0 {
                    next[state + strides[b]] += v * w[b];
                }
            }
        }
        dp = next;
    }
    Ok(dp[size - 1])
}

/// Groups all realizations by their coreset.
fn exhaustive_image(part: &Partition, exec: Exec) -> Result<WeightedImage> {
    let space = RealizationSpace::new(part.instance, false)?;
    let chunks = exec.map_chunks(
        space.len(),
        256,
        |range| -> Result<BTreeMap<Vec<PointId>, f64>> {
            let mut map = BTreeMap::new();
            for idx in range {
                let (r, p) = space.get(idx);
                if p == 0.0 {
                    continue;
                }
                *map.entry(part.coreset_of(&r.point_ids())?).or_insert(0.0) += p;
            }
            Ok(map)
        },
    );
    let mut total: BTreeMap<Vec<PointId>, f64> = BTreeMap::new();
    for chunk in chunks {
        for (ids, w) in chunk? {
            *total.entry(ids).or_insert(0.0) += w;
        }
    }
    Ok(WeightedImage {
        entries: total
            .into_iter()
            .map(|(ids, weight)| ImageEntry { ids, weight })
            .collect(),
        source: ImageMode::Exhaustive,
    })
}

fn subset_image(part: &Partition, k: usize, eps: f64, exec: Exec) -> Result<WeightedImage> {
    let n = part.instance.support().len();
    let cap = (coreset_image_size_bound(k, part.instance.d(), eps).min(n as u64)) as usize;
    let count: u128 = (0..=cap)
        .map(|s| binomial(n, s))
        .fold(0u128, |a, b| a.saturating_add(b));
    if count > MAX_IMAGE_SUBSETS {
        return Err(Error::EnumerationGuardExceeded {
            size: count as f64,
            limit: MAX_IMAGE_SUBSETS as f64,
        });
    }
    let mut subsets: Vec<Vec<PointId>> = Vec::with_capacity(count as usize);
    for size in 0..=cap {
        for_each_subset(n, size, |s| {
            subsets.push(s.iter().map(|&i| PointId(i)).collect())
        });
    }
    subsets.sort();
    let probs = exec.map_slice(&subsets, |s| part.prob(s));
    let mut entries = Vec::new();
    for (ids, p) in subsets.into_iter().zip(probs) {
        let weight = p?;
        if weight > 0.0 {
            entries.push(ImageEntry { ids, weight });
        }
    }
    Ok(WeightedImage {
        entries,
        source: ImageMode::SubsetEnumeration,
    })
}

/// The weighted image 𝓔(𝒫) of an instance.
pub fn build_weighted_image(
    instance: &Instance,
    k: usize,
    eps: f64,
    mode: ImageMode,
    exec: Exec,
) -> Result<WeightedImage> {
    let part = Partition::new(instance, k, eps)?;
    match mode {
        ImageMode::Exhaustive => exhaustive_image(&part, exec),
        ImageMode::SubsetEnumeration => subset_image(&part, k, eps, exec),
    }
}

pub fn membership_check(
    s: &[PointId],
    instance: &Instance,
    k: usize,
    eps: f64,
) -> Result<MembershipVerdict> {
    Partition::new(instance, k, eps)?.membership(s)
}

pub fn prob_existential(s: &[PointId], instance: &Instance, k: usize, eps: f64) -> Result<f64> {
    Partition::new(instance, k, eps)?.prob_existential(s)
}

pub fn prob_locational(s: &[PointId], instance: &Instance, k: usize, eps: f64) -> Result<f64> {
    Partition::new(instance, k, eps)?.prob_locational(s)
}

pub fn forbidden_and_tail_sets(
    s: &[PointId],
    instance: &Instance,
    k: usize,
    eps: f64,
) -> Result<(Vec<PointId>, Vec<PointId>)> {
    Partition::new(instance, k, eps)?.forbidden_and_tail_sets(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ExistentialInstance, LocationalInstance, Point};

    fn line(xs: &[f64], probs: &[f64]) -> Instance {
        ExistentialInstance::new(
            1,
            xs.iter().map(|&x| Point(vec![x])).collect(),
            probs.to_vec(),
        )
        .unwrap()
        .into()
    }

    #[test]
    fn compositions_in_order() {
        assert_eq!(
            compositions(3, 2),
            vec![vec![1, 1, 1], vec![1, 2, 0], vec![2, 1, 0]]
        );
        assert_eq!(compositions(2, 0), vec![vec![2]]);
        assert!(compositions(1, 2).is_empty());
        assert_eq!(compositions(5, 2).len(), binomial(5, 2) as usize);
    }

    #[test]
    fn holant_small_cases() {
        let w = vec![vec![0.3, 0.7], vec![0.6, 0.4]];
        assert!((holant_dp(&w, &[1, 1]).unwrap() - (0.3 * 0.4 + 0.7 * 0.6)).abs() < 1e-15);
        assert!((holant_dp(&w, &[2, 0]).unwrap() - 0.18).abs() < 1e-15);
        assert_eq!(holant_dp(&w, &[1, 0]).unwrap(), 0.0);
    }

    #[test]
    fn verdicts() {
        let inst = line(&[0.0, 0.001, 10.0, 20.0], &[0.5; 4]);
        let part = Partition::new(&inst, 1, 0.5).unwrap();
        assert_eq!(
            part.membership(&[PointId(0), PointId(1), PointId(3)])
                .unwrap(),
            MembershipVerdict::NotInImage
        );
        assert_eq!(
            part.membership(&[PointId(2)]).unwrap(),
            MembershipVerdict::Singleton
        );
        assert!(matches!(
            part.membership(&[PointId(0), PointId(2), PointId(3)])
                .unwrap(),
            MembershipVerdict::Full { .. }
        ));
        assert_eq!(
            part.prob_existential(&[PointId(0), PointId(1), PointId(3)])
                .unwrap(),
            0.0
        );
    }

    #[test]
    fn certain_instance_has_one_class() {
        let inst = line(&[0.0, 0.001, 10.0, 20.0, 21.0], &[1.0; 5]);
        let part = Partition::new(&inst, 1, 0.5).unwrap();
        let all: Vec<PointId> = (0..5).map(PointId).collect();
        let s = part.coreset_of(&all).unwrap();
        assert_eq!(part.prob_existential(&s).unwrap(), 1.0);
        let img =
            build_weighted_image(&inst, 1, 0.5, ImageMode::Exhaustive, Exec::Sequential).unwrap();
        assert_eq!(
            img.entries,
            vec![ImageEntry {
                ids: s,
                weight: 1.0
            }]
        );
    }

    #[test]
    fn cell_with_three_points() {
        // r is set by the far points; ids 2, 5 and 9 share one cell.
        let mut xs = vec![
            100.0, 200.0, 0.30, 300.0, 400.0, 0.10, 500.0, 600.0, 700.0, 0.20,
        ];
        xs[0] = -100.0;
        let inst = line(&xs, &[0.5; 10]);
        let part = Partition::new(&inst, 1, 0.5).unwrap();
        let s: Vec<PointId> = [0, 1, 3, 4, 5, 6, 7, 8].into_iter().map(PointId).collect();
        let (forbidden, tail) = part.forbidden_and_tail_sets(&s).unwrap();
        assert_eq!(forbidden, vec![PointId(2)]);
        assert_eq!(tail, vec![PointId(9)]);
    }

    #[test]
    fn singleton_locational() {
        let inst: Instance = LocationalInstance::new(
            1,
            vec![Point(vec![0.0]), Point(vec![1.0])],
            vec![vec![1.0, 0.0]],
        )
        .unwrap()
        .into();
        let part = Partition::new(&inst, 1, 0.5).unwrap();
        assert_eq!(part.prob_locational(&[PointId(0)]).unwrap(), 1.0);
        assert_eq!(part.prob_locational(&[PointId(1)]).unwrap(), 0.0);
    }

    #[test]
    fn not_full_error() {
        let inst = line(&[0.0, 5.0], &[0.5, 0.5]);
        assert!(matches!(
            forbidden_and_tail_sets(&[PointId(0)], &inst, 1, 0.5),
            Err(Error::NotFull)
        ));
    }
}
