use std::cmp::Ordering;

use serde::Serialize;

use super::sampling::{default_l_exp, enumerate_candidate_coresets, importance_sample_coreset};
use super::sensitivity::{sensitivity_projection_upper, SensitivityEstimate};
use super::solver::{refine, solve_gkm, SolveOptions};
use super::{WeightedCollection, WeightedSet};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::{CenterSet, Instance, Point, RealizationSpace};
use crate::objective::{expected_objective_exact, substream};
use crate::partition_prob::{build_weighted_image, ImageMode};

/// Exhaustive images are built when the realization space is at most this large.
const EXHAUSTIVE_LIMIT: usize = 1 << 20;
/// Largest realization count for the final refinement on the true objective.
const POLISH_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Strategy {
    ImportanceSampling,
    Enumeration,
    Full,
}

#[derive(Debug, Clone)]
pub struct SkcOptions {
    pub strategy: Strategy,
    pub seed: u64,
    /// Coreset size; defaults to ⌈d·k⁴/ε^(d+2)⌉ for sampling and 2 for enumeration.
    pub m: Option<usize>,
    pub l_exp: Option<usize>,
    /// Number of sampled coresets.
    pub rounds: usize,
    /// Forces an image mode instead of choosing by realization count.
    pub image_mode: Option<ImageMode>,
    pub polish: bool,
    pub solve: SolveOptions,
    pub exec: Exec,
}

impl Default for SkcOptions {
    fn default() -> Self {
        SkcOptions {
            strategy: Strategy::ImportanceSampling,
            seed: 0,
            m: None,
            l_exp: None,
            rounds: 3,
            image_mode: None,
            polish: true,
            solve: SolveOptions::default(),
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkcResult {
    pub centers: CenterSet,
    pub value: f64,
    /// Best exact value among coreset candidates, before refinement.
    pub value_unpolished: f64,
    pub strategy: Strategy,
    pub candidates_evaluated: usize,
    pub image_size: usize,
    pub image_mode: ImageMode,
    pub coreset_sizes: Vec<usize>,
}

fn default_m(d: usize, k: usize, eps: f64) -> usize {
    let v = d as f64 * (k as f64).powi(4) / eps.powi(d as i32 + 2);
    v.ceil().clamp(1.0, 1e6) as usize
}

fn choose_mode(instance: &Instance) -> ImageMode {
    match RealizationSpace::new(instance, false) {
        Ok(space) if space.len() <= EXHAUSTIVE_LIMIT => ImageMode::Exhaustive,
        _ => ImageMode::SubsetEnumeration,
    }
}

fn cmp_candidate(a: &(CenterSet, f64), b: &(CenterSet, f64)) -> Ordering {
    a.1.total_cmp(&b.1).then_with(|| a.0.lex_cmp(&b.0))
}

/// The positive-probability realizations as a weighted collection.
fn realization_collection(instance: &Instance) -> Option<WeightedCollection> {
    let space = RealizationSpace::new(instance, false).ok()?;
    if space.len() > POLISH_LIMIT {
        return None;
    }
    let sets = space
        .iter()
        .filter(|(_, p)| *p > 0.0)
        .map(|(r, p)| WeightedSet {
            points: r.points(instance).into_iter().cloned().collect(),
            weight: p,
        })
        .filter(|s| !s.points.is_empty())
        .collect();
    WeightedCollection::new(sets).ok().filter(|c| !c.is_empty())
}

/// Stochastic k-center: weighted image, coreset candidates, exact selection.
pub fn skc_pipeline(
    instance: &Instance,
    k: usize,
    eps: f64,
    opts: &SkcOptions,
) -> Result<SkcResult> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "ε = {eps} is outside (0,1)"
        )));
    }
    let mode = opts.image_mode.unwrap_or_else(|| choose_mode(instance));
    let image = build_weighted_image(instance, k, eps, mode, opts.exec)?;
    let coll = WeightedCollection::from_image(instance, &image);
    let exact = |c: &CenterSet| expected_objective_exact(instance, &c.clone().into()).value;

    if coll.is_empty() {
        let p = instance
            .support()
            .first()
            .cloned()
            .unwrap_or_else(|| Point::origin(instance.d()));
        let centers = CenterSet::new(vec![p; k])?;
        let value = exact(&centers);
        return Ok(SkcResult {
            centers,
            value,
            value_unpolished: value,
            strategy: opts.strategy,
            candidates_evaluated: 1,
            image_size: image.entries.len(),
            image_mode: mode,
            coreset_sizes: Vec::new(),
        });
    }

    let mut candidates: Vec<CenterSet> = Vec::new();
    let mut coreset_sizes = Vec::new();
    match opts.strategy {
        Strategy::Full => candidates.push(solve_gkm(&coll, k, &opts.solve)?.centers),
        Strategy::ImportanceSampling => {
            let reference = solve_gkm(&coll, k, &opts.solve)?.centers;
            let est = match sensitivity_projection_upper(&coll, &reference) {
                Ok((est, _)) => est,
                Err(Error::DegenerateCost) => SensitivityEstimate::uniform(coll.len()),
                Err(e) => return Err(e),
            };
            let m = opts.m.unwrap_or_else(|| default_m(instance.d(), k, eps));
            candidates.push(reference);
            for r in 0..opts.rounds {
                let mut rng = substream(opts.seed, r as u64);
                let cs = importance_sample_coreset(&coll, &est, m, &mut rng)?;
                coreset_sizes.push(cs.len());
                candidates.push(solve_gkm(&coll.select(&cs), k, &opts.solve)?.centers);
            }
        }
        Strategy::Enumeration => {
            let m = opts.m.unwrap_or(2);
            let l = opts
                .l_exp
                .unwrap_or_else(|| default_l_exp(m, coll.len(), k, eps));
            let coresets: Vec<_> = enumerate_candidate_coresets(&coll, m, l, eps)?.collect();
            coreset_sizes = coresets.iter().map(|c| c.len()).collect();
            let mut inner = opts.solve;
            inner.exec = Exec::Sequential;
            let solved = opts.exec.map_slice(&coresets, |cs| {
                solve_gkm(&coll.select(cs), k, &inner).map(|s| s.centers)
            });
            for s in solved {
                candidates.push(s?);
            }
        }
    }

    let values = opts.exec.map_slice(&candidates, exact);
    let evaluated = candidates.len();
    let (mut best_c, mut best_v) = candidates
        .into_iter()
        .zip(values)
        .min_by(cmp_candidate)
        .expect("at least one candidate");
    best_c = best_c.canonical();
    let unpolished = best_v;

    if opts.polish {
        if let Some(real) = realization_collection(instance) {
            let mut tries = vec![refine(&real, k, &best_c, &opts.solve).0];
            tries.push(solve_gkm(&real, k, &opts.solve)?.centers);
            for c in tries {
                let v = exact(&c);
                if cmp_candidate(&(c.clone(), v), &(best_c.clone(), best_v)) == Ordering::Less {
                    best_c = c;
                    best_v = v;
                }
            }
        }
    }

    Ok(SkcResult {
        centers: best_c,
        value: best_v,
        value_unpolished: unpolished,
        strategy: opts.strategy,
        candidates_evaluated: evaluated,
        image_size: image.entries.len(),
        image_mode: mode,
        coreset_sizes,
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
    fn deterministic_triangle() {
        let i = inst(&[(0.0, 0.0), (4.0, 0.0), (0.0, 3.0)], &[1.0; 3]);
        for strategy in [Strategy::Full, Strategy::ImportanceSampling] {
            let r = skc_pipeline(
                &i,
                1,
                0.5,
                &SkcOptions {
                    strategy,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!((r.value - 2.5).abs() < 1e-9, "{}", r.value);
        }
    }

    #[test]
    fn zero_probability_instance() {
        let i = inst(&[(1.0, 1.0), (2.0, 2.0)], &[0.0, 0.0]);
        let r = skc_pipeline(&i, 1, 0.5, &SkcOptions::default()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn enumeration_strategy() {
        let i = inst(&[(0.0, 0.0), (2.0, 0.0), (1.0, 1.5)], &[0.5, 0.7, 0.9]);
        let opts = SkcOptions {
            strategy: Strategy::Enumeration,
            m: Some(1),
            l_exp: Some(2),
            polish: false,
            ..Default::default()
        };
        let r = skc_pipeline(&i, 1, 0.5, &opts).unwrap();
        assert_eq!(r.candidates_evaluated, r.coreset_sizes.len());
        assert!(r.value > 0.0 && r.value == r.value_unpolished);
    }
}
