//! Brute-force references: exhaustive enumeration, direct summation and grid search.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::gkm::{gkm_cost, sensitivity_bruteforce, SensitivityEstimate, WeightedCollection};
use crate::grid_coreset::{binomial, for_each_subset, GridCoreset};
use crate::io::{instance_to_value, to_json17};
use crate::model::{enumerate_realizations, CenterSet, Flat, Instance, Point, PointId, Shape};
use crate::objective::{expected_objective_exact, shape_value};
use crate::partition_prob::{ImageEntry, ImageMode, WeightedImage};

/// Largest number of assignments summed by `oracle_holant_direct`.
pub const MAX_DIRECT_ASSIGNMENTS: u128 = 10_000_000;
/// Largest candidate family evaluated by the grid solvers.
pub const MAX_ORACLE_CANDIDATES: u128 = 2_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub value: f64,
    pub method: String,
    /// Number of realizations, assignments or candidates enumerated.
    pub enumeration_size: u64,
}

/// E[max distance] by summing over every realization.
pub fn oracle_expected_objective(
    instance: &Instance,
    shape: &Shape,
    exec: Exec,
) -> Result<OracleReport> {
    let all = enumerate_realizations(instance, true)?;
    let parts = exec.map_chunks(all.len(), 1024, |range| {
        all[range]
            .iter()
            .map(|(r, p)| p * shape_value(r.points(instance), shape))
            .sum::<f64>()
    });
    Ok(OracleReport {
        value: parts.iter().sum(),
        method: "realization-enumeration".into(),
        enumeration_size: all.len() as u64,
    })
}

/// Pr[𝓔(P) = S] for every S, by grouping all realizations by their coreset.
pub fn oracle_partition_masses(
    instance: &Instance,
    k: usize,
    eps: f64,
    exec: Exec,
) -> Result<WeightedImage> {
    let builder = GridCoreset::new(instance.support(), k, eps)?;
    let all = enumerate_realizations(instance, true)?;
    let parts = exec.map_chunks(
        all.len(),
        256,
        |range| -> Result<BTreeMap<Vec<PointId>, f64>> {
            let mut map = BTreeMap::new();
            for (r, p) in &all[range] {
                if *p == 0.0 {
                    continue;
                }
                let ids = r.point_ids();
                let key = if ids.is_empty() {
                    Vec::new()
                } else {
                    builder.build(&ids)?.coreset
                };
                *map.entry(key).or_insert(0.0) += p;
            }
            Ok(map)
        },
    );
    let mut total: BTreeMap<Vec<PointId>, f64> = BTreeMap::new();
    for part in parts {
        for (ids, w) in part? {
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

/// Z(Λ_𝓛) by summing over all node-to-bucket assignments.
pub fn oracle_holant_direct(weights: &[Vec<f64>], seq: &[usize]) -> Result<f64> {
    let n = weights.len();
    let q = seq.len();
    let size = (q as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if size > MAX_DIRECT_ASSIGNMENTS {
        return Err(Error::StateSpaceGuardExceeded {
            size,
            limit: MAX_DIRECT_ASSIGNMENTS,
        });
    }
    let mut total = 0.0;
    let mut a = vec![0usize; n];
    let mut counts = vec![0usize; q];
    loop {
        counts.iter_mut().for_each(|c| *c = 0);
        a.iter().for_each(|&b| counts[b] += 1);
        if counts == seq {
            total += a
                .iter()
                .enumerate()
                .map(|(i, &b)| weights[i][b])
                .product::<f64>();
        }
        let Some(i) = (0..n).rev().find(|&i| a[i] + 1 < q) else {
            break;
        };
        a[i] += 1;
        a[i + 1..].iter_mut().for_each(|v| *v = 0);
    }
    Ok(total)
}

/// Candidate grid for the grid-search solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleGrid {
    /// Intervals per axis over the bounding box of the support.
    pub resolution: usize,
    /// Rounds of local refinement around the incumbent.
    pub zoom: usize,
}

impl Default for OracleGrid {
    fn default() -> Self {
        OracleGrid {
            resolution: 24,
            zoom: 8,
        }
    }
}

fn bbox(points: &[Point]) -> (Vec<f64>, Vec<f64>) {
    let d = points[0].dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in points {
        for t in 0..d {
            lo[t] = lo[t].min(p.0[t]);
            hi[t] = hi[t].max(p.0[t]);
        }
    }
    (lo, hi)
}

/// Points lo + i·(hi−lo)/res for i = 0..=res on every axis.
fn lattice(lo: &[f64], hi: &[f64], res: usize) -> Vec<Point> {
    let d = lo.len();
    let res = res.max(1);
    let mut out = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        out.push(Point(
            (0..d)
                .map(|t| {
                    if idx[t] == res {
                        hi[t]
                    } else {
                        lo[t] + (hi[t] - lo[t]) * idx[t] as f64 / res as f64
                    }
                })
                .collect(),
        ));
        let Some(i) = (0..d).rev().find(|&i| idx[i] < res) else {
            break;
        };
        idx[i] += 1;
        idx[i + 1..].iter_mut().for_each(|v| *v = 0);
    }
    out
}

fn better(a: &(CenterSet, f64), b: &(CenterSet, f64)) -> bool {
    a.1 < b.1 || (a.1 == b.1 && a.0.lex_cmp(&b.0) == std::cmp::Ordering::Less)
}

fn best_of(cands: Vec<(CenterSet, f64)>) -> Option<(CenterSet, f64)> {
    let mut it = cands.into_iter();
    let mut best = it.next()?;
    for c in it {
        if better(&c, &best) {
            best = c;
        }
    }
    Some(best)
}

/// Grid search over center sets: k-subsets of support ∪ lattice, then local zoom.
pub fn oracle_centers<F>(
    support: &[Point],
    k: usize,
    grid: &OracleGrid,
    exec: Exec,
    objective: F,
) -> Result<(CenterSet, f64, u64)>
where
    F: Fn(&CenterSet) -> f64 + Sync + Send,
{
    if support.is_empty() || k == 0 {
        return Err(Error::InvalidArgument(
            "oracle search needs points and k ≥ 1".into(),
        ));
    }
    let (lo, hi) = bbox(support);
    let mut pool: Vec<Point> = support.to_vec();
    pool.extend(lattice(&lo, &hi, grid.resolution));
    pool.sort_by(|a, b| a.lex_cmp(b));
    pool.dedup();
    let count = binomial(pool.len(), k);
    if count > MAX_ORACLE_CANDIDATES {
        return Err(Error::EnumerationGuardExceeded {
            size: count as f64,
            limit: MAX_ORACLE_CANDIDATES as f64,
        });
    }
    let mut subsets: Vec<Vec<usize>> = Vec::with_capacity(count as usize);
    for_each_subset(pool.len(), k.min(pool.len()), |s| subsets.push(s.to_vec()));
    let evaluated = exec.map_chunks(subsets.len(), 512, |range| {
        best_of(
            subsets[range]
                .iter()
                .map(|s| {
                    let mut c: Vec<Point> = s.iter().map(|&i| pool[i].clone()).collect();
                    while c.len() < k {
                        c.push(c[0].clone());
                    }
                    let c = CenterSet::new(c).expect("k ≥ 1");
                    let v = objective(&c);
                    (c, v)
                })
                .collect(),
        )
    });
    let mut best = best_of(evaluated.into_iter().flatten().collect()).expect("nonempty family");
    let mut size = subsets.len() as u64;
    let mut half: Vec<f64> = lo
        .iter()
        .zip(&hi)
        .map(|(a, b)| (b - a).max(1e-12) / grid.resolution.max(1) as f64)
        .collect();
    for _ in 0..grid.zoom {
        for c in 0..k {
            let mut cands = Vec::new();
            let center = &best.0.centers()[c];
            let l: Vec<f64> = center.0.iter().zip(&half).map(|(x, h)| x - h).collect();
            let h: Vec<f64> = center.0.iter().zip(&half).map(|(x, h)| x + h).collect();
            for p in lattice(&l, &h, 4) {
                let mut cs = best.0.centers().to_vec();
                cs[c] = p;
                let cs = CenterSet::new(cs).expect("k ≥ 1");
                let v = objective(&cs);
                cands.push((cs, v));
            }
            size += cands.len() as u64;
            cands.push(best.clone());
            best = best_of(cands).expect("incumbent");
        }
        half.iter_mut().for_each(|h| *h *= 0.5);
    }
    Ok((best.0.canonical(), best.1, size))
}

/// Minimum enclosing ball of a point set (Welzl's recursion, fixed order).
pub fn min_enclosing_ball(points: &[Point]) -> (Point, f64) {
    fn ball_of(boundary: &[Point], d: usize) -> (Vec<f64>, f64) {
        match boundary.len() {
            0 => (vec![0.0; d], -1.0),
            1 => (boundary[0].0.clone(), 0.0),
            _ => {
                let p0 = &boundary[0].0;
                let m = boundary.len() - 1;
                let a = DMatrix::from_fn(d, m, |r, c| boundary[c + 1].0[r] - p0[r]);
                let g = a.transpose() * &a * 2.0;
                let rhs =
                    DVector::from_fn(m, |i, _| (0..d).map(|r| a[(r, i)] * a[(r, i)]).sum::<f64>());
                let Some(lambda) = g.lu().solve(&rhs) else {
                    return (p0.clone(), f64::INFINITY);
                };
                let off = &a * lambda;
                let c: Vec<f64> = p0.iter().zip(off.iter()).map(|(x, o)| x + o).collect();
                let r = crate::model::dist2(&c, p0).sqrt();
                (c, r)
            }
        }
    }
    fn inside(c: &[f64], r: f64, p: &Point) -> bool {
        r >= 0.0 && crate::model::dist2(c, &p.0).sqrt() <= r * (1.0 + 1e-12) + 1e-15
    }
    fn welzl(pts: &[Point], boundary: &mut Vec<Point>, d: usize) -> (Vec<f64>, f64) {
        if pts.is_empty() || boundary.len() == d + 1 {
            return ball_of(boundary, d);
        }
        let (p, rest) = pts.split_last().expect("nonempty");
        let (c, r) = welzl(rest, boundary, d);
        if inside(&c, r, p) {
            return (c, r);
        }
        boundary.push(p.clone());
        let out = welzl(rest, boundary, d);
        boundary.pop();
        out
    }
    let Some(first) = points.first() else {
        return (Point(Vec::new()), 0.0);
    };
    let d = first.dim();
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.lex_cmp(b));
    pts.dedup();
    let (c, _) = welzl(&pts, &mut Vec::new(), d);
    let c = Point(c);
    let r = pts.iter().map(|p| p.dist(&c)).fold(0.0, f64::max);
    (c, r)
}

/// Stochastic k-center optimum by grid search, exact objective; the enclosing
/// ball center is added when the instance is deterministic and k = 1.
pub fn oracle_kcenter(
    instance: &Instance,
    k: usize,
    grid: &OracleGrid,
    exec: Exec,
) -> Result<(CenterSet, OracleReport)> {
    let obj = |c: &CenterSet| expected_objective_exact(instance, &Shape::Centers(c.clone())).value;
    let (mut c, mut v, size) = oracle_centers(instance.support(), k, grid, exec, obj)?;
    if k == 1 && instance.is_deterministic() {
        let pts: Vec<Point> = realized_points(instance);
        if !pts.is_empty() {
            let (m, _) = min_enclosing_ball(&pts);
            let mc = CenterSet::new(vec![m])?;
            let mv = obj(&mc);
            if mv < v {
                c = mc;
                v = mv;
            }
        }
    }
    Ok((
        c,
        OracleReport {
            value: v,
            method: "grid-search".into(),
            enumeration_size: size,
        },
    ))
}

/// Generalized k-median optimum by grid search over the union of the sets.
pub fn oracle_gkm(
    coll: &WeightedCollection,
    k: usize,
    grid: &OracleGrid,
    exec: Exec,
) -> Result<(CenterSet, OracleReport)> {
    let union = coll.union_points();
    let (c, v, size) = oracle_centers(&union, k, grid, exec, |c| gkm_cost(coll, c))?;
    Ok((
        c,
        OracleReport {
            value: v,
            method: "grid-search".into(),
            enumeration_size: size,
        },
    ))
}

fn realized_points(instance: &Instance) -> Vec<Point> {
    match instance {
        Instance::Existential(e) => e
            .points()
            .iter()
            .zip(e.probs())
            .filter(|(_, &p)| p == 1.0)
            .map(|(x, _)| x.clone())
            .collect(),
        Instance::Locational(l) => l
            .probs()
            .iter()
            .filter_map(|row| {
                row.iter()
                    .position(|&p| p == 1.0)
                    .map(|j| l.locations()[j].clone())
            })
            .collect(),
    }
}

/// Stochastic j-flat-center optimum by grid search.
///
/// j = 0 searches centers as for k = 1. j = 1 in the plane scans angle and
/// offset grids plus every line through two support points, then zooms.
/// In higher dimensions only lines through support pairs are tried.
pub fn oracle_flat(
    instance: &Instance,
    j: usize,
    grid: &OracleGrid,
    exec: Exec,
) -> Result<(Flat, OracleReport)> {
    crate::jflat::LinearizationMap::new(j, instance.d())?;
    let obj = |f: &Flat| expected_objective_exact(instance, &Shape::Flat(f.clone())).value;
    if j == 0 {
        let (c, r) = oracle_kcenter(instance, 1, grid, exec)?;
        return Ok((Flat::point(c.centers()[0].clone()), r));
    }
    let support = instance.support();
    let mut cands: Vec<Flat> = Vec::new();
    for a in 0..support.len() {
        for b in a + 1..support.len() {
            let dir: Vec<f64> = support[b]
                .0
                .iter()
                .zip(&support[a].0)
                .map(|(x, y)| x - y)
                .collect();
            if let Ok(f) = Flat::line(support[a].clone(), &dir) {
                cands.push(f);
            }
        }
    }
    let res = grid.resolution.max(1);
    if instance.d() == 2 {
        for ti in 0..2 * res {
            let t = std::f64::consts::PI * ti as f64 / (2 * res) as f64;
            let (dir, normal) = ([t.cos(), t.sin()], [-t.sin(), t.cos()]);
            let proj: Vec<f64> = support
                .iter()
                .map(|p| p.0[0] * normal[0] + p.0[1] * normal[1])
                .collect();
            let (lo, hi) = proj
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
                    (l.min(v), h.max(v))
                });
            for oi in 0..=res {
                let o = lo + (hi - lo) * oi as f64 / res as f64;
                cands.push(Flat::line(Point(vec![o * normal[0], o * normal[1]]), &dir)?);
            }
        }
    }
    if cands.is_empty() {
        cands.push(Flat::line(support[0].clone(), &unit(instance.d()))?);
    }
    let values = exec.map_slice(&cands, obj);
    let mut size = cands.len() as u64;
    let (mut best, mut best_v) = cands
        .into_iter()
        .zip(values)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty");
    if instance.d() == 2 {
        let (lo, hi) = bbox(support);
        let mut dt = std::f64::consts::PI / (2 * res) as f64;
        let mut doff = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| b - a)
            .fold(0.0, f64::max)
            .max(1e-12)
            / res as f64;
        for _ in 0..grid.zoom {
            let v = &best.basis()[0];
            let t0 = v[1].atan2(v[0]);
            let normal0 = [-v[1], v[0]];
            let o0 = best.base().0[0] * normal0[0] + best.base().0[1] * normal0[1];
            for i in -4i32..=4 {
                for l in -4i32..=4 {
                    let t = t0 + dt * i as f64 / 4.0;
                    let (dir, normal) = ([t.cos(), t.sin()], [-t.sin(), t.cos()]);
                    let o = o0 + doff * l as f64 / 4.0;
                    let f = Flat::line(Point(vec![o * normal[0], o * normal[1]]), &dir)?;
                    let fv = obj(&f);
                    size += 1;
                    if fv < best_v {
                        best = f;
                        best_v = fv;
                    }
                }
            }
            dt *= 0.5;
            doff *= 0.5;
        }
    }
    Ok((
        best,
        OracleReport {
            value: best_v,
            method: "grid-search".into(),
            enumeration_size: size,
        },
    ))
}

fn unit(d: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[0] = 1.0;
    v
}

/// Brute-force sensitivities over k-subsets of the union points and a lattice
/// of centers; candidates with zero cost carry no information and are skipped.
pub fn oracle_sensitivities(
    coll: &WeightedCollection,
    k: usize,
    resolution: usize,
) -> Result<SensitivityEstimate> {
    let union = coll.union_points();
    if union.is_empty() || k == 0 {
        return Err(Error::InvalidArgument(
            "sensitivities need points and k ≥ 1".into(),
        ));
    }
    let (lo, hi) = bbox(&union);
    let mut pool = union.clone();
    pool.extend(lattice(&lo, &hi, resolution));
    pool.sort_by(|a, b| a.lex_cmp(b));
    pool.dedup();
    let count = binomial(pool.len(), k);
    if count > MAX_ORACLE_CANDIDATES {
        return Err(Error::EnumerationGuardExceeded {
            size: count as f64,
            limit: MAX_ORACLE_CANDIDATES as f64,
        });
    }
    let mut family = Vec::new();
    for_each_subset(pool.len(), k.min(pool.len()), |s| {
        let c = CenterSet::new(s.iter().map(|&i| pool[i].clone()).collect()).expect("k ≥ 1");
        if gkm_cost(coll, &c) > 0.0 {
            family.push(c);
        }
    });
    if family.is_empty() {
        return Err(Error::ZeroCostCandidate);
    }
    sensitivity_bruteforce(coll, &family)
}

/// Cache key: SHA-256 of the canonical instance JSON and a parameter string.
pub fn golden_key(instance: &Instance, params: &str) -> String {
    let mut h = Sha256::new();
    h.update(to_json17(&instance_to_value(instance)).as_bytes());
    h.update([0u8]);
    h.update(params.as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Directory of reference values, one JSON file per key.
#[derive(Debug, Clone)]
pub struct GoldenCache {
    dir: PathBuf,
}

impl GoldenCache {
    pub fn new(dir: impl AsRef<Path>) -> Self {
        GoldenCache {
            dir: dir.as_ref().to_path_buf(),
        }
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get(&self, key: &str) -> Result<Option<Value>> {
        match std::fs::read_to_string(self.path(key)) {
            Ok(s) => Ok(Some(serde_json::from_str(&s)?)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    pub fn put(&self, key: &str, value: &Value) -> Result<()> {
        std::fs::create_dir_all(&self.dir)?;
        std::fs::write(self.path(key), to_json17(value))?;
        Ok(())
    }

    /// Cached value for `key`, computing and storing it on a miss.
    pub fn get_or_compute(&self, key: &str, f: impl FnOnce() -> Result<Value>) -> Result<Value> {
        if let Some(v) = self.get(key)? {
            return Ok(v);
        }
        let v = f()?;
        self.put(key, &v)?;
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ExistentialInstance;

    fn inst(pts: &[(f64, f64)], p: &[f64]) -> Instance {
        ExistentialInstance::new(
            2,
            pts.iter().map(|&(x, y)| Point(vec![x, y])).collect(),
            p.to_vec(),
        )
        .unwrap()
        .into()
    }

    #[test]
    fn objective_matches_exact() {
        let i = inst(&[(0.0, 0.0), (3.0, 0.0), (0.0, 2.0)], &[0.3, 0.6, 0.9]);
        let shape = Shape::Centers(CenterSet::new(vec![Point(vec![1.0, 1.0])]).unwrap());
        let o = oracle_expected_objective(&i, &shape, Exec::Sequential).unwrap();
        assert!((o.value - expected_objective_exact(&i, &shape).value).abs() < 1e-12);
        assert_eq!(o.enumeration_size, 8);
    }

    #[test]
    fn masses_sum_to_one() {
        let i = inst(
            &[(0.0, 0.0), (3.0, 0.0), (0.0, 2.0), (0.1, 0.1)],
            &[0.3, 0.6, 0.9, 0.5],
        );
        let img = oracle_partition_masses(&i, 1, 0.5, Exec::Sequential).unwrap();
        assert!((img.total_weight() - 1.0).abs() < 1e-12);
        let det = inst(&[(0.0, 0.0), (3.0, 0.0)], &[1.0, 1.0]);
        assert_eq!(
            oracle_partition_masses(&det, 1, 0.5, Exec::Sequential)
                .unwrap()
                .entries
                .len(),
            1
        );
    }

    #[test]
    fn holant_direct_matches_dp() {
        let w = vec![
            vec![0.2, 0.5, 0.3],
            vec![0.6, 0.1, 0.3],
            vec![0.5, 0.25, 0.25],
            vec![0.1, 0.1, 0.8],
        ];
        for seq in crate::partition_prob::compositions(4, 2) {
            let a = oracle_holant_direct(&w, &seq).unwrap();
            let b = crate::partition_prob::holant_dp(&w, &seq).unwrap();
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn enclosing_ball() {
        let pts: Vec<Point> = [(0.0, 0.0), (4.0, 0.0), (0.0, 3.0), (1.0, 1.0)]
            .iter()
            .map(|&(x, y)| Point(vec![x, y]))
            .collect();
        let (c, r) = min_enclosing_ball(&pts);
        assert!((r - 2.5).abs() < 1e-12);
        assert!((c.0[0] - 2.0).abs() < 1e-12 && (c.0[1] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn refining_grid_never_hurts() {
        let i = inst(
            &[(0.0, 0.0), (3.0, 1.0), (1.0, 2.5), (2.0, 2.0)],
            &[0.3, 0.6, 0.9, 0.5],
        );
        let coarse = oracle_kcenter(
            &i,
            1,
            &OracleGrid {
                resolution: 4,
                zoom: 0,
            },
            Exec::Sequential,
        )
        .unwrap()
        .1
        .value;
        let fine = oracle_kcenter(
            &i,
            1,
            &OracleGrid {
                resolution: 8,
                zoom: 0,
            },
            Exec::Sequential,
        )
        .unwrap()
        .1
        .value;
        assert!(fine <= coarse);
    }

    #[test]
    fn line_oracle_on_collinear_points() {
        let i = inst(&[(0.0, 1.0), (1.0, 2.0), (2.0, 3.0)], &[0.5, 0.5, 0.5]);
        let (_, r) = oracle_flat(&i, 1, &OracleGrid::default(), Exec::Sequential).unwrap();
        assert!(r.value < 1e-12);
    }

    #[test]
    fn single_set_sensitivity() {
        let coll = WeightedCollection::new(vec![crate::gkm::WeightedSet {
            points: vec![Point(vec![0.0, 0.0]), Point(vec![1.0, 1.0])],
            weight: 2.0,
        }])
        .unwrap();
        let s = oracle_sensitivities(&coll, 1, 4).unwrap();
        assert_eq!(s.values, vec![1.0]);
    }

    #[test]
    fn golden_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = GoldenCache::new(dir.path());
        let i = inst(&[(0.0, 0.0)], &[0.5]);
        let key = golden_key(&i, "k=1");
        assert_ne!(key, golden_key(&i, "k=2"));
        let v = cache
            .get_or_compute(&key, || Ok(serde_json::json!({"value": 1.5})))
            .unwrap();
        let again = cache.get_or_compute(&key, || panic!("cached")).unwrap();
        assert_eq!(v, again);
    }
}
