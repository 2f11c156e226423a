use rand::distributions::{Distribution, WeightedIndex};
use serde::Serialize;

use super::solve::{solve_sets, JflatOptions};
use super::{
    case_of, check_j, direction_net, total_probability, Case, LinearizationMap, SjfcCoreset,
};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::{sample_realization, Instance, Point, PointId};
use crate::objective::substream;

/// Substream index reserved for median-coreset sampling.
const MEDIAN_STREAM: u64 = u64::MAX;

/// Intersection of the sweep halfspaces {y : ⟨u,y⟩ ≤ τ_u} in lifted space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexKSpec {
    pub map: LinearizationMap,
    pub halfspaces: Vec<(Vec<f64>, f64)>,
    pub eps_prime: f64,
    pub inside: Vec<PointId>,
    pub outside: Vec<PointId>,
    /// Probability that some point outside K is realized.
    pub outside_mass: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl ConvexKSpec {
    pub fn contains(&self, y: &[f64]) -> bool {
        self.halfspaces.iter().all(|(u, t)| dot(u, y) <= *t)
    }
}

/// Per-point masses: pᵢ, or the column masses of the locational rows.
fn point_masses(instance: &Instance) -> Vec<f64> {
    match instance {
        Instance::Existential(e) => e.probs().to_vec(),
        Instance::Locational(l) => l.location_mass(),
    }
}

/// Probability that at least one of `ids` is realized, bounded by Σp in the
/// existential model and exact in the locational model.
fn set_mass(instance: &Instance, ids: &[usize]) -> f64 {
    match instance {
        Instance::Existential(e) => ids.iter().map(|&i| e.probs()[i]).sum(),
        Instance::Locational(l) => {
            let miss: f64 = l
                .probs()
                .iter()
                .map(|row| 1.0 - ids.iter().map(|&i| row[i]).sum::<f64>())
                .product();
            1.0 - miss
        }
    }
}

/// Quantile sweep: per direction, the threshold sits at the first point whose
/// swept prefix has mass at least ε′.
pub fn sweep_convex_k(
    instance: &Instance,
    j: usize,
    eps: f64,
    eps_prime: Option<f64>,
    net_size: usize,
) -> Result<ConvexKSpec> {
    let map = LinearizationMap::new(j, instance.d())?;
    if case_of(instance, eps) == Case::Small {
        return Err(Error::CaseMismatch {
            total: total_probability(instance),
            eps,
        });
    }
    let net = direction_net(map.dim, net_size.max(2));
    let eps_prime = eps_prime.unwrap_or(eps / (2.0 * net.len() as f64));
    let lifted: Vec<Vec<f64>> = instance.support().iter().map(|p| map.lift(p)).collect();
    let n = lifted.len();
    let mut halfspaces = Vec::with_capacity(net.len());
    for u in net {
        let proj: Vec<f64> = lifted.iter().map(|y| dot(&u, y)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| proj[b].total_cmp(&proj[a]).then(a.cmp(&b)));
        let mut tau = order.last().map_or(0.0, |&i| proj[i]);
        for t in 0..n {
            if set_mass(instance, &order[..=t]) >= eps_prime {
                tau = proj[order[t]];
                break;
            }
        }
        halfspaces.push((u, tau));
    }
    let mut spec = ConvexKSpec {
        map,
        halfspaces,
        eps_prime,
        inside: Vec::new(),
        outside: Vec::new(),
        outside_mass: 0.0,
    };
    for (i, y) in lifted.iter().enumerate() {
        if spec.contains(y) {
            spec.inside.push(PointId(i));
        } else {
            spec.outside.push(PointId(i));
        }
    }
    if spec.inside.is_empty() {
        return Err(Error::EmptyK);
    }
    let out: Vec<usize> = spec.outside.iter().map(|p| p.0).collect();
    spec.outside_mass = set_mass(instance, &out);
    Ok(spec)
}

/// Points of `ids` extreme in some direction of `net`, smallest id on ties.
fn net_kernel(ids: &[usize], lifted: &[Vec<f64>], net: &[Vec<f64>]) -> Vec<usize> {
    let mut keep = Vec::new();
    for u in net {
        let mut best: Option<(f64, usize)> = None;
        for &i in ids {
            let v = dot(u, &lifted[i]);
            if best.map_or(true, |(b, _)| v > b) {
                best = Some((v, i));
            }
        }
        if let Some((_, i)) = best {
            keep.push(i);
        }
    }
    keep.sort_unstable();
    keep.dedup();
    keep
}

/// N realizations truncated to K, each reduced to a directional kernel.
pub fn build_s1(
    instance: &Instance,
    k: &ConvexKSpec,
    n_samples: usize,
    kernel_size: usize,
    seed: u64,
    exec: Exec,
) -> Vec<Vec<Point>> {
    let support = instance.support();
    let lifted: Vec<Vec<f64>> = support.iter().map(|p| k.map.lift(p)).collect();
    let mut inside = vec![false; support.len()];
    for id in &k.inside {
        inside[id.0] = true;
    }
    let net = direction_net(k.map.dim, kernel_size.max(2));
    exec.map(n_samples, |s| {
        let mut rng = substream(seed, s as u64);
        let ids: Vec<usize> = sample_realization(instance, &mut rng)
            .point_ids()
            .into_iter()
            .map(|p| p.0)
            .filter(|&i| inside[i])
            .collect();
        net_kernel(&ids, &lifted, &net)
            .into_iter()
            .map(|i| support[i].clone())
            .collect()
    })
}

/// Median coreset of the points outside K, weighted by their masses.
pub fn build_s2(
    instance: &Instance,
    k: &ConvexKSpec,
    eps: f64,
    m: Option<usize>,
    seed: u64,
    opts: &JflatOptions,
) -> Result<Vec<(Point, f64)>> {
    let mass = point_masses(instance);
    let pts: Vec<Point> = k
        .outside
        .iter()
        .map(|i| instance.support()[i.0].clone())
        .collect();
    let w: Vec<f64> = k.outside.iter().map(|i| mass[i.0]).collect();
    median_coreset(&pts, &w, k.map.j, eps, m, seed, opts)
}

/// Default median coreset size ⌈max(j,1)⁴·d/ε²⌉.
fn default_median_size(j: usize, d: usize, eps: f64) -> usize {
    ((j.max(1) as f64).powi(4) * d as f64 / (eps * eps))
        .ceil()
        .max(1.0) as usize
}

/// Sensitivity-sampled coreset for Σ wᵢ·d(sᵢ,F) over j-flats F.
///
/// Sensitivities are bounded through the projection onto an approximate
/// optimal flat F̂: d(s,F̂)·w/cost plus twice the bound for the projected
/// points, w/W + w·Σ_l w_l|t−t_l|/(W·D), with t the position along F̂ and D
/// the weighted absolute deviation about the median of t.
pub fn median_coreset(
    points: &[Point],
    weights: &[f64],
    j: usize,
    eps: f64,
    m: Option<usize>,
    seed: u64,
    opts: &JflatOptions,
) -> Result<Vec<(Point, f64)>> {
    if points.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            got: weights.len(),
        });
    }
    let items: Vec<(Point, f64)> = points
        .iter()
        .cloned()
        .zip(weights.iter().copied())
        .filter(|(_, w)| *w > 0.0)
        .collect();
    let Some(first) = items.first() else {
        return Ok(Vec::new());
    };
    let d = first.0.dim();
    check_j(j, d)?;
    let m = m.unwrap_or_else(|| default_median_size(j, d, eps));
    if items.len() <= m {
        return Ok(items);
    }
    let sets: Vec<(Vec<Point>, f64)> = items.iter().map(|(p, w)| (vec![p.clone()], *w)).collect();
    let (flat, _) = solve_sets(&sets, j, d, opts)?;
    let dist: Vec<f64> = items.iter().map(|(p, _)| flat.distance(p)).collect();
    let cost: f64 = items.iter().zip(&dist).map(|((_, w), d)| w * d).sum();
    let total: f64 = items.iter().map(|(_, w)| w).sum();
    let n = items.len();
    let sigma: Vec<f64> = if cost > 0.0 {
        let t: Vec<f64> = items
            .iter()
            .map(|(p, _)| match flat.basis().first() {
                Some(v) => {
                    p.0.iter()
                        .zip(&flat.base().0)
                        .zip(v)
                        .map(|((a, b), c)| (a - b) * c)
                        .sum()
                }
                None => 0.0,
            })
            .collect();
        let dev = median_deviation(&t, &items.iter().map(|(_, w)| *w).collect::<Vec<_>>());
        items
            .iter()
            .enumerate()
            .map(|(i, (_, w))| {
                let spread = if dev > 0.0 {
                    w * items
                        .iter()
                        .zip(&t)
                        .map(|((_, wl), tl)| wl * (t[i] - tl).abs())
                        .sum::<f64>()
                        / (total * dev)
                } else {
                    0.0
                };
                (w * dist[i] / cost + 2.0 * (w / total + spread)).clamp(0.0, 1.0)
            })
            .collect()
    } else {
        vec![1.0 / n as f64; n]
    };
    let q: Vec<f64> = sigma.iter().map(|s| s + 1.0 / n as f64).collect();
    let q_total: f64 = q.iter().sum();
    let pick = WeightedIndex::new(&q)
        .map_err(|e| Error::InvalidArgument(format!("sampling scores: {e}")))?;
    let mut rng = substream(seed, MEDIAN_STREAM);
    let mut acc = vec![0.0; n];
    for _ in 0..m {
        let i = pick.sample(&mut rng);
        acc[i] += q_total * items[i].1 / (q[i] * m as f64);
    }
    Ok(items
        .into_iter()
        .zip(acc)
        .filter(|(_, a)| *a > 0.0)
        .map(|((p, _), a)| (p, a))
        .collect())
}

/// min over c of Σ wᵢ|tᵢ − c|.
fn median_deviation(t: &[f64], w: &[f64]) -> f64 {
    let mut order: Vec<usize> = (0..t.len()).collect();
    order.sort_by(|&a, &b| t[a].total_cmp(&t[b]));
    let total: f64 = w.iter().sum();
    let mut acc = 0.0;
    let mut med = t[order[0]];
    for &i in &order {
        acc += w[i];
        if acc >= total / 2.0 {
            med = t[i];
            break;
        }
    }
    t.iter().zip(w).map(|(x, wi)| wi * (x - med).abs()).sum()
}

/// Coreset for B < ε: the median instance (sᵢ, pᵢ), sampled down.
pub fn case1_coreset(
    instance: &Instance,
    j: usize,
    eps: f64,
    m: Option<usize>,
    seed: u64,
    opts: &JflatOptions,
) -> Result<SjfcCoreset> {
    check_j(j, instance.d())?;
    if case_of(instance, eps) == Case::Large {
        return Err(Error::CaseMismatch {
            total: total_probability(instance),
            eps,
        });
    }
    let s2 = median_coreset(
        instance.support(),
        &point_masses(instance),
        j,
        eps,
        m,
        seed,
        opts,
    )?;
    Ok(SjfcCoreset {
        s1: Vec::new(),
        s2,
        eps,
        eps_prime: 0.0,
        j,
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

    #[test]
    fn single_point_case1() {
        let i = inst(&[(1.0, 2.0)], &[0.5]);
        let c = case1_coreset(&i, 0, 0.6, None, 0, &JflatOptions::default()).unwrap();
        assert_eq!(c.s2, vec![(Point(vec![1.0, 2.0]), 0.5)]);
        assert!(matches!(
            case1_coreset(&i, 0, 0.5, None, 0, &JflatOptions::default()),
            Err(Error::CaseMismatch { .. })
        ));
    }

    #[test]
    fn deterministic_sweep_keeps_everything() {
        let i = inst(&[(0.0, 0.0), (3.0, 1.0), (1.0, 4.0), (2.0, 2.0)], &[1.0; 4]);
        let k = sweep_convex_k(&i, 0, 0.2, None, 16).unwrap();
        assert_eq!(k.inside.len(), 4);
        assert_eq!(k.outside_mass, 0.0);
        let s1 = build_s1(&i, &k, 3, 32, 9, Exec::Sequential);
        assert_eq!(s1.len(), 3);
        assert!(s1.iter().all(|e| e == &s1[0]));
        assert!(s1[0].iter().all(|x| i.support().contains(x)));
    }

    #[test]
    fn outside_mass_is_small() {
        let pts: Vec<(f64, f64)> = (0..20)
            .map(|i| ((i as f64 * 1.3).sin() * 5.0, (i as f64 * 0.7).cos() * 3.0))
            .collect();
        let p: Vec<f64> = (0..20).map(|i| 0.01 + 0.04 * (i % 5) as f64).collect();
        let i = inst(&pts, &p);
        let eps = 0.2;
        let k = sweep_convex_k(&i, 0, eps, None, 24).unwrap();
        assert!(k.outside_mass <= k.eps_prime * k.halfspaces.len() as f64 + 1e-12);
        assert!(k.outside_mass <= eps);
    }

    #[test]
    fn median_coreset_keeps_small_inputs() {
        let pts = vec![Point(vec![0.0, 0.0]), Point(vec![1.0, 0.0])];
        let out =
            median_coreset(&pts, &[0.2, 0.0], 1, 0.5, None, 0, &JflatOptions::default()).unwrap();
        assert_eq!(out, vec![(Point(vec![0.0, 0.0]), 0.2)]);
    }

    #[test]
    fn deviation() {
        assert_eq!(median_deviation(&[0.0, 1.0, 5.0], &[1.0, 1.0, 1.0]), 5.0);
    }
}
