use std::cmp::Ordering;

use serde::Serialize;

use super::{gkm_cost, WeightedCollection};
use crate::convex::{ConvexOptions, Group, SumMaxNorm};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::grid_coreset::{binomial, for_each_subset};
use crate::model::{CenterSet, Point};

/// Largest number of piece descriptors `enumerate_pieces` will list.
const MAX_PIECES: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveMode {
    /// Exact piece enumeration when small enough, heuristics otherwise.
    Auto,
    Heuristic,
    Exact,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub mode: SolveMode,
    pub convex: ConvexOptions,
    /// Alternating-optimization rounds per start.
    pub max_rounds: usize,
    /// Number of discrete and of farthest-first starts.
    pub restarts: usize,
    /// Largest number of k-subsets of the union tried in the discrete pass.
    pub discrete_limit: u128,
    /// Largest number of assignments `Auto` solves exactly.
    pub exact_limit: u128,
    pub exec: Exec,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            mode: SolveMode::Auto,
            convex: ConvexOptions::default(),
            max_rounds: 30,
            restarts: 4,
            discrete_limit: 200_000,
            exact_limit: 256,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GkmSolution {
    pub centers: CenterSet,
    pub value: f64,
    /// `Exact` when the assignment enumeration ran, else `Heuristic`.
    pub mode: SolveMode,
    pub iterations: usize,
}

/// A piece of center space: the center serving each point of each set and the
/// index of each set's farthest point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PieceDescriptor {
    pub assignment: Vec<Vec<usize>>,
    pub argmax: Vec<usize>,
}

/// Every piece descriptor, in lexicographic order.
pub fn enumerate_pieces(coll: &WeightedCollection, k: usize) -> Result<Vec<PieceDescriptor>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let size: f64 = coll
        .sets()
        .iter()
        .map(|s| (k as f64).powi(s.points.len() as i32) * s.points.len() as f64)
        .product();
    if size > MAX_PIECES {
        return Err(Error::EnumerationGuardExceeded {
            size,
            limit: MAX_PIECES,
        });
    }
    let per_set: Vec<Vec<(Vec<usize>, usize)>> = coll
        .sets()
        .iter()
        .map(|s| {
            let l = s.points.len();
            let mut out = Vec::new();
            let mut a = vec![0usize; l];
            loop {
                for b in 0..l {
                    out.push((a.clone(), b));
                }
                let Some(i) = (0..l).rev().find(|&i| a[i] + 1 < k) else {
                    break;
                };
                a[i] += 1;
                a[i + 1..].iter_mut().for_each(|v| *v = 0);
            }
            out
        })
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; per_set.len()];
    if per_set.iter().any(|p| p.is_empty()) {
        return Ok(out);
    }
    loop {
        out.push(PieceDescriptor {
            assignment: idx
                .iter()
                .zip(&per_set)
                .map(|(&i, p)| p[i].0.clone())
                .collect(),
            argmax: idx.iter().zip(&per_set).map(|(&i, p)| p[i].1).collect(),
        });
        let Some(i) = (0..idx.len())
            .rev()
            .find(|&i| idx[i] + 1 < per_set[i].len())
        else {
            break;
        };
        idx[i] += 1;
        idx[i + 1..].iter_mut().for_each(|v| *v = 0);
    }
    Ok(out)
}

struct Problem<'a> {
    coll: &'a WeightedCollection,
    k: usize,
    d: usize,
    union: Vec<Point>,
    /// For each set, the union index of each of its points.
    ids: Vec<Vec<usize>>,
    norm: f64,
}

impl<'a> Problem<'a> {
    fn new(coll: &'a WeightedCollection, k: usize) -> Self {
        let union = coll.union_points();
        let ids = coll
            .sets()
            .iter()
            .map(|s| {
                s.points
                    .iter()
                    .map(|p| {
                        union
                            .binary_search_by(|u| u.lex_cmp(p))
                            .expect("point in union")
                    })
                    .collect()
            })
            .collect();
        let d = union.first().map_or(0, Point::dim);
        Problem {
            coll,
            k,
            d,
            union,
            ids,
            norm: 1.0 / coll.total_weight(),
        }
    }

    /// Convex problem with every union point served by the given center.
    fn assigned(&self, serve: &[usize]) -> SumMaxNorm {
        let groups = self
            .coll
            .sets()
            .iter()
            .zip(&self.ids)
            .map(|(s, ids)| Group {
                weight: s.weight * self.norm,
                members: ids
                    .iter()
                    .map(|&u| (serve[u], self.union[u].0.clone()))
                    .collect(),
            })
            .collect();
        SumMaxNorm::new(self.d, self.k, groups)
    }

    fn serving(&self, centers: &CenterSet) -> Vec<usize> {
        self.union.iter().map(|p| centers.nearest(p)).collect()
    }

    fn centers_of(&self, x: &[f64]) -> CenterSet {
        CenterSet::new(x.chunks(self.d).map(|c| Point(c.to_vec())).collect()).expect("k ≥ 1 blocks")
    }

    fn flatten(centers: &CenterSet) -> Vec<f64> {
        centers
            .centers()
            .iter()
            .flat_map(|c| c.0.iter().copied())
            .collect()
    }

    /// Alternates nearest-center assignment and a convex solve over the fixed assignment.
    fn alternate(&self, start: CenterSet, opts: &SolveOptions) -> (CenterSet, f64, usize) {
        let mut centers = start;
        let mut value = gkm_cost(self.coll, &centers);
        let mut iterations = 0;
        for _ in 0..opts.max_rounds {
            let serve = self.serving(&centers);
            let sol = self
                .assigned(&serve)
                .solve(&Self::flatten(&centers), &opts.convex);
            iterations += sol.iterations;
            let next = self.centers_of(&sol.x);
            let v = gkm_cost(self.coll, &next);
            if v.is_nan() || v >= value {
                break;
            }
            let gain = value - v;
            centers = next;
            value = v;
            if gain <= 1e-15 * value.abs() {
                break;
            }
        }
        (centers, value, iterations)
    }

    fn farthest_first(&self, first: usize) -> CenterSet {
        let mut chosen = vec![self.union[first].clone()];
        let mut dist: Vec<f64> = self.union.iter().map(|p| p.dist2(&chosen[0])).collect();
        while chosen.len() < self.k {
            let (i, _) =
                dist.iter().enumerate().fold(
                    (0, -1.0),
                    |best, (i, &v)| if v > best.1 { (i, v) } else { best },
                );
            let c = self.union[i].clone();
            for (dv, p) in dist.iter_mut().zip(&self.union) {
                *dv = dv.min(p.dist2(&c));
            }
            chosen.push(c);
        }
        CenterSet::new(chosen).expect("nonempty")
    }

    /// Weighted centroid of each set's point farthest from the mean of the union.
    fn farthest_centroid(&self) -> Vec<f64> {
        let n = self.union.len() as f64;
        let mut mean = vec![0.0; self.d];
        for p in &self.union {
            mean.iter_mut().zip(&p.0).for_each(|(m, v)| *m += v / n);
        }
        let mean = Point(mean);
        let mut c = vec![0.0; self.d];
        for s in self.coll.sets() {
            let mut best = (-1.0, &s.points[0]);
            for p in &s.points {
                let v = p.dist2(&mean);
                if v > best.0 {
                    best = (v, p);
                }
            }
            c.iter_mut()
                .zip(&best.1 .0)
                .for_each(|(a, v)| *a += s.weight * self.norm * v);
        }
        c
    }

    /// Number of ways to split the union into at most k labelled-by-first-use groups.
    fn assignment_count(&self) -> u128 {
        let n = self.union.len();
        let mut row = vec![0u128; self.k + 1];
        row[0] = 1;
        for _ in 0..n {
            let mut next = vec![0u128; self.k + 1];
            for j in 0..=self.k {
                if row[j] == 0 {
                    continue;
                }
                next[j] = next[j].saturating_add(row[j].saturating_mul(j as u128));
                if j < self.k {
                    next[j + 1] = next[j + 1].saturating_add(row[j]);
                }
            }
            row = next;
        }
        row.iter().fold(0u128, |a, &b| a.saturating_add(b))
    }

    fn assignments(&self) -> Vec<Vec<usize>> {
        let n = self.union.len();
        let mut out = Vec::new();
        let mut a = vec![0usize; n];
        let mut top = vec![0usize; n];
        loop {
            out.push(a.clone());
            let mut i = n;
            loop {
                if i <= 1 {
                    return out;
                }
                i -= 1;
                let limit = top[i - 1] + 1;
                if a[i] < limit && a[i] + 1 < self.k {
                    a[i] += 1;
                    top[i] = top[i - 1].max(a[i]);
                    for t in i + 1..n {
                        a[t] = 0;
                        top[t] = top[i];
                    }
                    break;
                }
            }
        }
    }

    fn solve_assignment(&self, serve: &[usize], opts: &SolveOptions) -> (CenterSet, f64, usize) {
        let mut x = vec![0.0; self.k * self.d];
        let mut count = vec![0.0; self.k];
        for (p, &b) in self.union.iter().zip(serve) {
            count[b] += 1.0;
            for t in 0..self.d {
                x[b * self.d + t] += p.0[t];
            }
        }
        for b in 0..self.k {
            for t in 0..self.d {
                x[b * self.d + t] = if count[b] > 0.0 {
                    x[b * self.d + t] / count[b]
                } else {
                    self.union[0].0[t]
                };
            }
        }
        let sol = self.assigned(serve).solve(&x, &opts.convex);
        let centers = self.centers_of(&sol.x);
        let v = gkm_cost(self.coll, &centers);
        (centers, v, sol.iterations)
    }
}

fn better(a: &(CenterSet, f64, usize), b: &(CenterSet, f64, usize)) -> bool {
    match a.1.total_cmp(&b.1) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => a.0.lex_cmp(&b.0) == Ordering::Less,
    }
}

fn argmin(cands: Vec<(CenterSet, f64, usize)>) -> Option<(CenterSet, f64, usize)> {
    let total: usize = cands.iter().map(|c| c.2).sum();
    let mut it = cands.into_iter();
    let mut best = it.next()?;
    for c in it {
        if better(&c, &best) {
            best = c;
        }
    }
    best.2 = total;
    Some(best)
}

/// Minimizes Σ wᵢ·K(Sᵢ,F) over k-point sets F.
pub fn solve_gkm(coll: &WeightedCollection, k: usize, opts: &SolveOptions) -> Result<GkmSolution> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if coll.is_empty() || coll.sets().iter().any(|s| s.points.is_empty()) {
        return Err(Error::InvalidArgument(
            "solve_gkm needs nonempty sets".into(),
        ));
    }
    let prob = Problem::new(coll, k);
    let finish = |(c, v, it): (CenterSet, f64, usize), mode| GkmSolution {
        centers: c.canonical(),
        value: v,
        mode,
        iterations: it,
    };

    if prob.union.len() <= k {
        let mut pts = prob.union.clone();
        while pts.len() < k {
            pts.push(prob.union[0].clone());
        }
        let c = CenterSet::new(pts)?;
        let v = gkm_cost(coll, &c);
        return Ok(finish((c, v, 0), SolveMode::Exact));
    }

    if k == 1 {
        let x0 = prob.farthest_centroid();
        let sol = prob
            .assigned(&vec![0; prob.union.len()])
            .solve(&x0, &opts.convex);
        let c = prob.centers_of(&sol.x);
        let v = gkm_cost(coll, &c);
        return Ok(finish((c, v, sol.iterations), SolveMode::Exact));
    }

    let exact = match opts.mode {
        SolveMode::Exact => true,
        SolveMode::Heuristic => false,
        SolveMode::Auto => prob.assignment_count() <= opts.exact_limit,
    };

    let mut starts: Vec<(CenterSet, f64, usize)> = Vec::new();
    if binomial(prob.union.len(), k) <= opts.discrete_limit {
        for_each_subset(prob.union.len(), k, |idx| {
            let c = CenterSet::new(idx.iter().map(|&i| prob.union[i].clone()).collect())
                .expect("k ≥ 1");
            let v = gkm_cost(coll, &c);
            starts.push((c, v, 0));
        });
        starts.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.lex_cmp(&b.0)));
        starts.truncate(opts.restarts.max(1));
    }
    let r = opts.restarts.max(1);
    let n = prob.union.len();
    let mut seeds: Vec<usize> = (0..r).map(|i| i * n / r).collect();
    seeds.dedup();
    for s in seeds {
        let c = prob.farthest_first(s);
        let v = gkm_cost(coll, &c);
        starts.push((c, v, 0));
    }

    let mut results = opts
        .exec
        .map_slice(&starts, |(c, _, _)| prob.alternate(c.clone(), opts));
    results.extend(starts.iter().cloned());
    if exact {
        let assignments = prob.assignments();
        results.extend(
            opts.exec
                .map_slice(&assignments, |a| prob.solve_assignment(a, opts)),
        );
    }
    let best = argmin(results).expect("at least one start");
    Ok(finish(
        best,
        if exact {
            SolveMode::Exact
        } else {
            SolveMode::Heuristic
        },
    ))
}

/// Runs alternating optimization from `start` and returns the improved centers.
pub(crate) fn refine(
    coll: &WeightedCollection,
    k: usize,
    start: &CenterSet,
    opts: &SolveOptions,
) -> (CenterSet, f64) {
    let (c, v, _) = Problem::new(coll, k).alternate(start.clone(), opts);
    (c.canonical(), v)
}

#[cfg(test)]
mod tests {
    use super::super::tests::singletons;
    use super::super::WeightedSet;
    use super::*;

    #[test]
    fn singleton_set() {
        let coll = singletons(&[(3.0, -1.0)], &[2.0]);
        let s = solve_gkm(&coll, 1, &SolveOptions::default()).unwrap();
        assert_eq!(s.value, 0.0);
        assert_eq!(s.centers.centers()[0], Point(vec![3.0, -1.0]));
    }

    #[test]
    fn midpoint_on_a_line() {
        let coll = WeightedCollection::new(vec![
            WeightedSet {
                points: vec![Point(vec![0.0])],
                weight: 1.0,
            },
            WeightedSet {
                points: vec![Point(vec![10.0])],
                weight: 1.0,
            },
        ])
        .unwrap();
        let s = solve_gkm(&coll, 1, &SolveOptions::default()).unwrap();
        assert!((s.value - 10.0).abs() < 1e-12);
        assert!((s.centers.centers()[0].0[0] - 5.0).abs() < 1e-9);
    }

    #[test]
    fn two_clusters() {
        let coll = singletons(
            &[
                (0.0, 0.0),
                (1.0, 0.0),
                (0.0, 1.0),
                (20.0, 20.0),
                (21.0, 20.0),
                (20.0, 21.0),
            ],
            &[1.0; 6],
        );
        let s = solve_gkm(&coll, 2, &SolveOptions::default()).unwrap();
        let fermat = (2.0 + 3f64.sqrt()).sqrt();
        assert!((s.value - 2.0 * fermat).abs() < 1e-9, "{}", s.value);
        assert_eq!(s.mode, SolveMode::Exact);
    }

    #[test]
    fn scaling_weights_keeps_centers() {
        let coll = singletons(
            &[(0.0, 0.0), (4.0, 1.0), (1.0, 3.0), (9.0, 9.0), (8.0, 7.0)],
            &[1.0, 2.0, 0.5, 1.5, 1.0],
        );
        for k in 1..=2 {
            let a = solve_gkm(&coll, k, &SolveOptions::default()).unwrap();
            let b = solve_gkm(&coll.scaled(4.0), k, &SolveOptions::default()).unwrap();
            assert_eq!(a.centers, b.centers);
            assert_eq!(b.value, 4.0 * a.value);
        }
    }

    #[test]
    fn piece_count() {
        let coll = WeightedCollection::new(vec![
            WeightedSet {
                points: vec![Point(vec![0.0]), Point(vec![1.0])],
                weight: 1.0,
            },
            WeightedSet {
                points: vec![Point(vec![5.0])],
                weight: 1.0,
            },
        ])
        .unwrap();
        let pieces = enumerate_pieces(&coll, 2).unwrap();
        assert_eq!(pieces.len(), (4 * 2) * 2);
        assert_eq!(
            pieces[0],
            PieceDescriptor {
                assignment: vec![vec![0, 0], vec![0]],
                argmax: vec![0, 0]
            }
        );
    }

    #[test]
    fn assignment_enumeration_matches_count() {
        let coll = singletons(
            &[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (4.0, 0.0)],
            &[1.0; 5],
        );
        for k in 1..=4 {
            let p = Problem::new(&coll, k);
            let a = p.assignments();
            assert_eq!(a.len() as u128, p.assignment_count());
            let mut sorted = a.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), a.len());
        }
    }
}
