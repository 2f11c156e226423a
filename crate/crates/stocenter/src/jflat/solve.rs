use std::collections::BTreeMap;

use serde::Serialize;

use super::construct::{build_s1, build_s2, case1_coreset, sweep_convex_k};
use super::{case_of, check_j, line_directions, total_probability, Case, SjfcCoreset};
use crate::convex::{ConvexOptions, Group, SumMaxNorm};
use crate::error::Result;
use crate::exec::Exec;
use crate::model::{Flat, Instance, Point, RealizationSpace};
use crate::objective::expected_flatcenter_exact;

/// Largest realization count for the final refinement on the true objective.
const POLISH_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy)]
pub struct JflatOptions {
    /// Line directions scanned for j = 1.
    pub directions: usize,
    /// Best scanned directions that are refined locally.
    pub refine: usize,
    pub convex: ConvexOptions,
    /// Cheaper settings used while scanning directions.
    pub scan: ConvexOptions,
    pub exec: Exec,
}

impl Default for JflatOptions {
    fn default() -> Self {
        JflatOptions {
            directions: 64,
            refine: 3,
            convex: ConvexOptions::default(),
            scan: ConvexOptions {
                subgradient_iters: 100,
                newton_iters: 10,
                min_smoothing: 1e-6,
            },
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JflatSolution {
    pub flat: Flat,
    /// Coreset estimate at `flat`.
    pub value: f64,
}

/// (1/N)·Σ_{E∈S1} max_{x∈E} d(x,F) + Σ_{(s,w)∈S2} w·d(s,F).
pub fn estimate_j(coreset: &SjfcCoreset, flat: &Flat) -> f64 {
    let n = coreset.s1.len();
    let first = if n == 0 {
        0.0
    } else {
        coreset
            .s1
            .iter()
            .map(|e| e.iter().map(|x| flat.distance(x)).fold(0.0, f64::max))
            .sum::<f64>()
            / n as f64
    };
    first
        + coreset
            .s2
            .iter()
            .map(|(s, w)| w * flat.distance(s))
            .sum::<f64>()
}

/// Coreset as weighted point sets, identical sets merged.
fn coreset_sets(coreset: &SjfcCoreset) -> Vec<(Vec<Point>, f64)> {
    let inv = 1.0 / coreset.s1.len().max(1) as f64;
    let mut sets: Vec<(Vec<Point>, f64)> = coreset.s1.iter().map(|e| (e.clone(), inv)).collect();
    sets.extend(coreset.s2.iter().map(|(p, w)| (vec![p.clone()], *w)));
    sets
}

fn merge_sets(sets: &[(Vec<Point>, f64)]) -> Vec<(Vec<Point>, f64)> {
    let mut merged: BTreeMap<Vec<u64>, (Vec<Point>, f64)> = BTreeMap::new();
    for (pts, w) in sets {
        if pts.is_empty() || w.is_nan() || *w <= 0.0 {
            continue;
        }
        let mut pts = pts.clone();
        pts.sort_by(|a, b| a.lex_cmp(b));
        pts.dedup();
        let key: Vec<u64> = pts
            .iter()
            .flat_map(|p| p.0.iter().map(|v| v.to_bits()))
            .collect();
        merged.entry(key).or_insert_with(|| (pts, 0.0)).1 += w;
    }
    merged.into_values().collect()
}

/// Orthonormal basis of the complement of unit `v`.
fn complement(v: &[f64]) -> Vec<Vec<f64>> {
    let d = v.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()));
    for &e in &order {
        if basis.len() == d - 1 {
            break;
        }
        let mut w = vec![0.0; d];
        w[e] = 1.0;
        for b in std::iter::once(v).chain(basis.iter().map(Vec::as_slice)) {
            let dot: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            basis.push(w.into_iter().map(|x| x / n).collect());
        }
    }
    basis
}

struct SetProblem {
    sets: Vec<(Vec<Point>, f64)>,
    total: f64,
    d: usize,
}

impl SetProblem {
    fn value(&self, flat: &Flat) -> f64 {
        self.sets
            .iter()
            .map(|(e, w)| w * e.iter().map(|x| flat.distance(x)).fold(0.0, f64::max))
            .sum()
    }

    fn centroid(&self, coords: impl Fn(&Point) -> Vec<f64>, dim: usize) -> Vec<f64> {
        let mut c = vec![0.0; dim];
        for (e, w) in &self.sets {
            for x in e {
                let y = coords(x);
                c.iter_mut()
                    .zip(&y)
                    .for_each(|(a, b)| *a += w * b / (e.len() as f64 * self.total));
            }
        }
        c
    }

    fn ball(&self, opts: &ConvexOptions) -> Flat {
        let groups = self
            .sets
            .iter()
            .map(|(e, w)| Group {
                weight: w / self.total,
                members: e.iter().map(|x| (0, x.0.clone())).collect(),
            })
            .collect();
        let x0 = self.centroid(|p| p.0.clone(), self.d);
        let sol = SumMaxNorm::new(self.d, 1, groups).solve(&x0, opts);
        Flat::point(Point(sol.x))
    }

    /// Best line with direction `v`, warm-started at `start` (coordinates in v⊥).
    fn line(
        &self,
        v: &[f64],
        start: Option<&[f64]>,
        opts: &ConvexOptions,
    ) -> (Flat, f64, Vec<f64>) {
        let basis = complement(v);
        let coords = |p: &Point| -> Vec<f64> {
            basis
                .iter()
                .map(|b| b.iter().zip(&p.0).map(|(x, y)| x * y).sum())
                .collect()
        };
        let groups = self
            .sets
            .iter()
            .map(|(e, w)| Group {
                weight: w / self.total,
                members: e.iter().map(|x| (0, coords(x))).collect(),
            })
            .collect();
        let x0 = start.map_or_else(|| self.centroid(coords, self.d - 1), <[f64]>::to_vec);
        let sol = SumMaxNorm::new(self.d - 1, 1, groups).solve(&x0, opts);
        let mut base = vec![0.0; self.d];
        for (c, b) in sol.x.iter().zip(&basis) {
            base.iter_mut().zip(b).for_each(|(a, bv)| *a += c * bv);
        }
        let flat = Flat::line(Point(base), v).expect("unit direction");
        let val = self.value(&flat);
        (flat, val, sol.x)
    }

    fn refine_line(&self, v0: Vec<f64>, step0: f64, opts: &JflatOptions) -> (Flat, f64) {
        let (mut flat, mut best, mut x) = self.line(&v0, None, &opts.convex);
        let mut v = v0;
        let mut step = step0;
        let mut evals = 0;
        while step > 1e-10 && evals < 400 {
            let tangent = complement(&v);
            let mut moved = false;
            'dirs: for t in &tangent {
                for sign in [1.0, -1.0] {
                    let (s, c) = (sign * step).sin_cos();
                    let cand: Vec<f64> = v.iter().zip(t).map(|(a, b)| a * c + b * s).collect();
                    let n = cand.iter().map(|z| z * z).sum::<f64>().sqrt();
                    let cand: Vec<f64> = cand.into_iter().map(|z| z / n).collect();
                    evals += 1;
                    let (f, val, xs) = self.line(&cand, Some(&x), &opts.convex);
                    if val < best {
                        best = val;
                        flat = f;
                        v = cand;
                        x = xs;
                        moved = true;
                        break 'dirs;
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        (flat, best)
    }
}

fn flat_cmp(a: &(Flat, f64), b: &(Flat, f64)) -> std::cmp::Ordering {
    a.1.total_cmp(&b.1)
        .then_with(|| a.0.base().lex_cmp(b.0.base()))
        .then_with(|| {
            a.0.basis()
                .iter()
                .flatten()
                .zip(b.0.basis().iter().flatten())
                .fold(std::cmp::Ordering::Equal, |o, (x, y)| {
                    o.then(x.total_cmp(y))
                })
        })
}

/// Minimizes Σ w·max_{x∈E} d(x,F) over j-flats.
pub(crate) fn solve_sets(
    sets: &[(Vec<Point>, f64)],
    j: usize,
    d: usize,
    opts: &JflatOptions,
) -> Result<(Flat, f64)> {
    check_j(j, d)?;
    let sets = merge_sets(sets);
    let total: f64 = sets.iter().map(|(_, w)| w).sum();
    if sets.is_empty() {
        let flat = if j == 0 {
            Flat::point(Point::origin(d))
        } else {
            Flat::line(Point::origin(d), &unit(d))?
        };
        return Ok((flat, 0.0));
    }
    let prob = SetProblem { sets, total, d };
    if j == 0 {
        let flat = prob.ball(&opts.convex);
        let v = prob.value(&flat);
        return Ok((flat, v));
    }
    let dirs = line_directions(d, opts.directions.max(1));
    let scanned = opts.exec.map_slice(&dirs, |v| {
        let (f, val, _) = prob.line(v, None, &opts.scan);
        (f, val)
    });
    let mut order: Vec<usize> = (0..dirs.len()).collect();
    order.sort_by(|&a, &b| flat_cmp(&scanned[a], &scanned[b]));
    order.truncate(opts.refine.max(1));
    let step = std::f64::consts::PI / opts.directions.max(1) as f64;
    let refined = opts
        .exec
        .map_slice(&order, |&i| prob.refine_line(dirs[i].clone(), step, opts));
    let best = refined
        .into_iter()
        .chain(scanned)
        .min_by(flat_cmp)
        .expect("nonempty scan");
    Ok(best)
}

fn unit(d: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[0] = 1.0;
    v
}

/// Minimizes the coreset estimate over j-flats.
pub fn solve_jflat(
    coreset: &SjfcCoreset,
    j: usize,
    d: usize,
    opts: &JflatOptions,
) -> Result<JflatSolution> {
    let (flat, _) = solve_sets(&coreset_sets(coreset), j, d, opts)?;
    let value = estimate_j(coreset, &flat);
    Ok(JflatSolution { flat, value })
}

#[derive(Debug, Clone)]
pub struct SjfcOptions {
    pub seed: u64,
    /// Sweep directions, counting both signs.
    pub net_size: Option<usize>,
    pub eps_prime: Option<f64>,
    /// N, the number of sampled realizations.
    pub samples: usize,
    /// Directions used by each realization kernel.
    pub kernel_size: Option<usize>,
    /// Median coreset size.
    pub m: Option<usize>,
    pub polish: bool,
    pub solve: JflatOptions,
    pub exec: Exec,
}

impl Default for SjfcOptions {
    fn default() -> Self {
        SjfcOptions {
            seed: 0,
            net_size: None,
            eps_prime: None,
            samples: 2000,
            kernel_size: None,
            m: None,
            polish: true,
            solve: JflatOptions::default(),
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SjfcResult {
    pub flat: Flat,
    /// Exact J(𝒫,F) at `flat`.
    pub value: f64,
    /// Exact value at the coreset solution, before refinement.
    pub value_unpolished: f64,
    /// Coreset estimate at the coreset solution.
    pub estimate: f64,
    pub case: Case,
    pub total_probability: f64,
    /// (|S1|, |S2|).
    pub coreset_sizes: (usize, usize),
    pub outside_mass: f64,
    pub eps_prime: f64,
}

pub fn default_net_size(dim: usize) -> usize {
    16 * dim
}

pub fn default_kernel_size(dim: usize, eps: f64) -> usize {
    let need = 2.0 * eps.powf(-((dim as f64 - 1.0) / 2.0)).ceil();
    (need as usize).max(32 * dim).min(4096)
}

/// Builds the coreset for the instance's case, solves it and reports the exact value.
pub fn build_coreset(
    instance: &Instance,
    j: usize,
    eps: f64,
    opts: &SjfcOptions,
) -> Result<(SjfcCoreset, Case, f64)> {
    let case = case_of(instance, eps);
    match case {
        Case::Small => Ok((
            case1_coreset(instance, j, eps, opts.m, opts.seed, &opts.solve)?,
            case,
            0.0,
        )),
        Case::Large => {
            let dim = super::LinearizationMap::new(j, instance.d())?.dim;
            let net = opts.net_size.unwrap_or_else(|| default_net_size(dim));
            let k = sweep_convex_k(instance, j, eps, opts.eps_prime, net)?;
            let kernel = opts
                .kernel_size
                .unwrap_or_else(|| default_kernel_size(dim, eps));
            let s1 = build_s1(instance, &k, opts.samples, kernel, opts.seed, opts.exec);
            let s2 = build_s2(instance, &k, eps, opts.m, opts.seed, &opts.solve)?;
            Ok((
                SjfcCoreset {
                    s1,
                    s2,
                    eps,
                    eps_prime: k.eps_prime,
                    j,
                },
                case,
                k.outside_mass,
            ))
        }
    }
}

fn realization_sets(instance: &Instance) -> Option<Vec<(Vec<Point>, f64)>> {
    let space = RealizationSpace::new(instance, false).ok()?;
    if space.len() > POLISH_LIMIT {
        return None;
    }
    Some(
        space
            .iter()
            .map(|(r, p)| (r.points(instance).into_iter().cloned().collect(), p))
            .collect(),
    )
}

/// Stochastic j-flat-center: coreset, solve, exact re-evaluation.
pub fn sjfc_pipeline(
    instance: &Instance,
    j: usize,
    eps: f64,
    opts: &SjfcOptions,
) -> Result<SjfcResult> {
    check_j(j, instance.d())?;
    let (coreset, case, outside_mass) = build_coreset(instance, j, eps, opts)?;
    let sol = solve_jflat(&coreset, j, instance.d(), &opts.solve)?;
    let exact = |f: &Flat| expected_flatcenter_exact(instance, f).map(|v| v.value);
    let mut best = (sol.flat.clone(), exact(&sol.flat)?);
    let unpolished = best.1;
    if opts.polish {
        if let Some(sets) = realization_sets(instance) {
            let (f, _) = solve_sets(&sets, j, instance.d(), &opts.solve)?;
            let v = exact(&f)?;
            let cand = (f, v);
            if flat_cmp(&cand, &best) == std::cmp::Ordering::Less {
                best = cand;
            }
        }
    }
    Ok(SjfcResult {
        flat: best.0,
        value: best.1,
        value_unpolished: unpolished,
        estimate: sol.value,
        case,
        total_probability: total_probability(instance),
        coreset_sizes: (coreset.s1.len(), coreset.s2.len()),
        outside_mass,
        eps_prime: coreset.eps_prime,
    })
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

    fn coreset(s1: Vec<Vec<Point>>, s2: Vec<(Point, f64)>, j: usize) -> SjfcCoreset {
        SjfcCoreset {
            s1,
            s2,
            eps: 0.5,
            eps_prime: 0.0,
            j,
        }
    }

    #[test]
    fn estimate_examples() {
        let x = Point(vec![3.0, 4.0]);
        let c = coreset(vec![vec![x.clone()]], vec![], 0);
        assert_eq!(estimate_j(&c, &Flat::point(Point::origin(2))), 5.0);
        assert_eq!(
            estimate_j(&coreset(vec![], vec![], 0), &Flat::point(x)),
            0.0
        );
    }

    #[test]
    fn single_mass_is_fit_exactly() {
        let c = coreset(vec![], vec![(Point(vec![1.0, 2.0]), 0.3)], 0);
        for j in 0..=1 {
            let s = solve_jflat(&c, j, 2, &JflatOptions::default()).unwrap();
            assert!(s.value < 1e-9, "{}", s.value);
        }
    }

    #[test]
    fn two_masses_on_axis() {
        let c = coreset(
            vec![],
            vec![(Point(vec![1.0, 0.0]), 1.0), (Point(vec![-1.0, 0.0]), 1.0)],
            0,
        );
        let s = solve_jflat(&c, 0, 2, &JflatOptions::default()).unwrap();
        assert!((s.value - 2.0).abs() < 1e-9);
        assert!(s.flat.base().0.iter().all(|v| v.abs() < 1e-6));
    }

    #[test]
    fn line_through_collinear_points() {
        let pts: Vec<Point> = (0..5)
            .map(|i| Point(vec![i as f64, 2.0 * i as f64 + 1.0]))
            .collect();
        let c = coreset(vec![pts], vec![], 1);
        let s = solve_jflat(&c, 1, 2, &JflatOptions::default()).unwrap();
        assert!(s.value < 1e-7, "{}", s.value);
    }

    #[test]
    fn deterministic_pipeline_is_enclosing_ball() {
        let i = inst(&[(0.0, 0.0), (4.0, 0.0), (0.0, 3.0), (1.0, 1.0)], &[1.0; 4]);
        let r = sjfc_pipeline(
            &i,
            0,
            0.2,
            &SjfcOptions {
                samples: 50,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(r.case, Case::Large);
        assert!((r.value - 2.5).abs() < 1e-6, "{}", r.value);
    }

    #[test]
    fn zero_mass_instance() {
        let i = inst(&[(0.0, 0.0), (4.0, 0.0)], &[0.0, 0.0]);
        let r = sjfc_pipeline(&i, 1, 0.2, &SjfcOptions::default()).unwrap();
        assert_eq!(r.case, Case::Small);
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn boundary_takes_large_case() {
        let i = inst(&[(0.0, 0.0), (4.0, 0.0)], &[0.25, 0.25]);
        assert_eq!(case_of(&i, 0.5), Case::Large);
    }
}
