//! Expected k-center and j-flat-center values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::{
    draw_row, CenterSet, ExistentialInstance, Flat, Instance, LocationalInstance, Point, Shape,
};

/// How an objective value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    ExactSorted,
    ExactCdf,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveValue {
    pub value: f64,
    pub method: Method,
    /// Standard error of a Monte-Carlo estimate.
    pub stderr: Option<f64>,
}

/// K(P,F): the largest distance from a point of P to its nearest center; 0 for empty P.
pub fn kcenter_value<'a>(points: impl IntoIterator<Item = &'a Point>, centers: &CenterSet) -> f64 {
    points
        .into_iter()
        .map(|p| centers.distance(p))
        .fold(0.0, f64::max)
}

/// The largest distance from a point of P to the shape; 0 for empty P.
pub fn shape_value<'a>(points: impl IntoIterator<Item = &'a Point>, shape: &Shape) -> f64 {
    points
        .into_iter()
        .map(|p| shape.distance(p))
        .fold(0.0, f64::max)
}

/// Distance from a point to a flat.
pub fn flat_distance(x: &Point, flat: &Flat) -> Result<f64> {
    if x.dim() != flat.d() {
        return Err(Error::DimensionMismatch {
            expected: flat.d(),
            got: x.dim(),
        });
    }
    Ok(flat.distance(x))
}

/// E[max] of independent points with distances `dist` and presence probabilities `probs`.
pub fn expected_max_existential(probs: &[f64], dist: &[f64]) -> f64 {
    let mut order: Vec<usize> = (0..dist.len()).collect();
    order.sort_by(|&a, &b| dist[b].total_cmp(&dist[a]).then(a.cmp(&b)));
    let mut value = 0.0;
    let mut absent = 1.0;
    for i in order {
        if absent == 0.0 {
            break;
        }
        value += probs[i] * dist[i] * absent;
        absent *= 1.0 - probs[i];
    }
    value
}

/// E[max over nodes] where node i sits at location l w.p. `rows[i][l]` and location l has distance `dist[l]`.
pub fn expected_max_locational(rows: &[Vec<f64>], dist: &[f64]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let mut order: Vec<usize> = (0..dist.len()).collect();
    order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
    let mut below = vec![0.0; rows.len()];
    let mut prev_cdf = 0.0;
    let mut value = 0.0;
    let mut idx = 0;
    while idx < order.len() {
        let t = dist[order[idx]];
        while idx < order.len() && dist[order[idx]] == t {
            let l = order[idx];
            for (b, row) in below.iter_mut().zip(rows) {
                *b += row[l];
            }
            idx += 1;
        }
        let cdf = if idx == order.len() {
            1.0
        } else {
            below.iter().map(|b| b.min(1.0)).product()
        };
        value += t * (cdf - prev_cdf);
        prev_cdf = cdf;
    }
    value
}

/// Exact K(𝒫,F) in the existential model by the sorted prefix-product formula.
pub fn expected_kcenter_exact_existential(
    instance: &ExistentialInstance,
    centers: &CenterSet,
) -> ObjectiveValue {
    let dist: Vec<f64> = instance
        .points()
        .iter()
        .map(|p| centers.distance(p))
        .collect();
    ObjectiveValue {
        value: expected_max_existential(instance.probs(), &dist),
        method: Method::ExactSorted,
        stderr: None,
    }
}

/// Exact K(𝒫,F) in the locational model through the distribution function of the maximum.
pub fn expected_kcenter_exact_locational(
    instance: &LocationalInstance,
    centers: &CenterSet,
) -> ObjectiveValue {
    let dist: Vec<f64> = instance
        .locations()
        .iter()
        .map(|p| centers.distance(p))
        .collect();
    ObjectiveValue {
        value: expected_max_locational(instance.probs(), &dist),
        method: Method::ExactCdf,
        stderr: None,
    }
}

/// Exact J(𝒫,F) in either model.
pub fn expected_flatcenter_exact(instance: &Instance, flat: &Flat) -> Result<ObjectiveValue> {
    if instance.d() != flat.d() {
        return Err(Error::DimensionMismatch {
            expected: instance.d(),
            got: flat.d(),
        });
    }
    Ok(expected_objective_exact(
        instance,
        &Shape::Flat(flat.clone()),
    ))
}

/// Exact expected value of the shape objective in either model.
pub fn expected_objective_exact(instance: &Instance, shape: &Shape) -> ObjectiveValue {
    let dist: Vec<f64> = instance
        .support()
        .iter()
        .map(|p| shape.distance(p))
        .collect();
    match instance {
        Instance::Existential(e) => ObjectiveValue {
            value: expected_max_existential(e.probs(), &dist),
            method: Method::ExactSorted,
            stderr: None,
        },
        Instance::Locational(l) => ObjectiveValue {
            value: expected_max_locational(l.probs(), &dist),
            method: Method::ExactCdf,
            stderr: None,
        },
    }
}

const MC_CHUNK: usize = 4096;

/// Welford accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.n;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if o.n == 0.0 {
            return self;
        }
        if self.n == 0.0 {
            return o;
        }
        let n = self.n + o.n;
        let delta = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * o.n / n,
            m2: self.m2 + o.m2 + delta * delta * self.n * o.n / n,
        }
    }
}

/// Random generator for the `index`-th substream of `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Monte-Carlo estimate of the expected objective.
///
/// Samples are drawn in fixed chunks from per-chunk substreams, so the
/// estimate does not depend on the execution policy.
pub fn expected_objective_mc(
    instance: &Instance,
    shape: &Shape,
    samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<ObjectiveValue> {
    if samples == 0 {
        return Err(Error::InvalidArgument(
            "at least one sample is required".into(),
        ));
    }
    if shape.d() != instance.d() {
        return Err(Error::DimensionMismatch {
            expected: instance.d(),
            got: shape.d(),
        });
    }
    let dist: Vec<f64> = instance
        .support()
        .iter()
        .map(|p| shape.distance(p))
        .collect();
    let parts = exec.map_chunks(samples, MC_CHUNK, |range| {
        let mut rng = substream(seed, (range.start / MC_CHUNK) as u64);
        let mut m = Moments::default();
        for _ in range {
            let x = match instance {
                Instance::Existential(e) => e
                    .probs()
                    .iter()
                    .zip(&dist)
                    .filter(|(&p, _)| rng.gen::<f64>() < p)
                    .fold(0.0, |acc, (_, &d)| f64::max(acc, d)),
                Instance::Locational(l) => l
                    .probs()
                    .iter()
                    .fold(0.0, |acc, row| f64::max(acc, dist[draw_row(row, &mut rng)])),
            };
            m.push(x);
        }
        m
    });
    let m = parts.into_iter().fold(Moments::default(), Moments::merge);
    let var = if m.n > 1.0 {
        (m.m2 / (m.n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(ObjectiveValue {
        value: m.mean,
        method: Method::MonteCarlo { samples, seed },
        stderr: Some((var / m.n).sqrt()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ExistentialInstance, LocationalInstance};

    fn p(c: &[f64]) -> Point {
        Point(c.to_vec())
    }

    #[test]
    fn kcenter_examples() {
        let f = CenterSet::new(vec![p(&[3.0, 4.0])]).unwrap();
        assert_eq!(kcenter_value([&p(&[0.0, 0.0])], &f), 5.0);
        let pts = [p(&[0.0, 0.0]), p(&[10.0, 0.0])];
        let f2 = CenterSet::new(pts.to_vec()).unwrap();
        assert_eq!(kcenter_value(&pts, &f2), 0.0);
        let pts = [p(&[0.0, 0.0]), p(&[6.0, 0.0])];
        let f1 = CenterSet::new(vec![p(&[2.0, 0.0])]).unwrap();
        assert_eq!(kcenter_value(&pts, &f1), 4.0);
        assert_eq!(kcenter_value(&[], &f1), 0.0);
    }

    #[test]
    fn sorted_formula_example() {
        // distances 4 and 3: 0.25·4 + 0.25·4 + 0.25·3 + 0.25·0
        assert!((expected_max_existential(&[0.5, 0.5], &[4.0, 3.0]) - 2.75).abs() < 1e-15);
        assert_eq!(expected_max_existential(&[1.0], &[5.0]), 5.0);
        assert_eq!(expected_max_existential(&[0.0, 0.0], &[5.0, 1.0]), 0.0);
    }

    #[test]
    fn cdf_formula_example() {
        let rows = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
        assert!((expected_max_locational(&rows, &[1.0, 2.0]) - 1.75).abs() < 1e-15);
        assert_eq!(expected_max_locational(&[vec![1.0]], &[7.0]), 7.0);
        let rows = vec![vec![0.2, 0.3, 0.5]; 3];
        assert!((expected_max_locational(&rows, &[2.5, 2.5, 2.5]) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn mc_deterministic_instance_is_exact() {
        let inst: Instance =
            ExistentialInstance::new(1, vec![p(&[0.0]), p(&[3.0])], vec![1.0, 1.0])
                .unwrap()
                .into();
        let shape = Shape::Centers(CenterSet::new(vec![p(&[-1.0])]).unwrap());
        for seed in 0..3 {
            let v = expected_objective_mc(&inst, &shape, 5000, seed, Exec::default()).unwrap();
            assert_eq!(v.value, 4.0);
            assert_eq!(v.stderr, Some(0.0));
        }
    }

    #[test]
    fn mc_matches_exact_example() {
        let inst: Instance =
            ExistentialInstance::new(1, vec![p(&[4.0]), p(&[3.0])], vec![0.5, 0.5])
                .unwrap()
                .into();
        let shape = Shape::Centers(CenterSet::new(vec![p(&[0.0])]).unwrap());
        let v = expected_objective_mc(&inst, &shape, 1_000_000, 11, Exec::default()).unwrap();
        assert!((v.value - 2.75).abs() < 0.01, "{v:?}");
    }

    #[test]
    fn mc_independent_of_policy() {
        let locs = vec![p(&[0.0, 0.0]), p(&[1.0, 2.0]), p(&[-3.0, 1.0])];
        let inst: Instance =
            LocationalInstance::new(2, locs, vec![vec![0.2, 0.3, 0.5], vec![0.6, 0.4, 0.0]])
                .unwrap()
                .into();
        let shape = Shape::Centers(CenterSet::new(vec![p(&[0.5, 0.5])]).unwrap());
        let a = expected_objective_mc(&inst, &shape, 20_000, 3, Exec::Sequential).unwrap();
        let b = expected_objective_mc(&inst, &shape, 20_000, 3, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn flat_distance_checks_dimension() {
        let f = Flat::point(p(&[0.0, 0.0]));
        assert!(flat_distance(&p(&[1.0]), &f).is_err());
        assert_eq!(flat_distance(&p(&[3.0, 4.0]), &f).unwrap(), 5.0);
    }
}
