//! Stochastic minimum j-flat-center for j ∈ {0, 1}.
//!
//! When the total probability B is below ε the objective is within (1±ε) of a
//! weighted j-flat-median and a sampled median coreset suffices. Otherwise the
//! lifted points are cut by a quantile sweep into an inside part, estimated by
//! kernels of sampled realizations, and an outside part of small mass, handled
//! as a median instance.

mod construct;
mod solve;

pub use construct::{
    build_s1, build_s2, case1_coreset, median_coreset, sweep_convex_k, ConvexKSpec,
};
pub use solve::{
    build_coreset, default_kernel_size, default_net_size, estimate_j, sjfc_pipeline, solve_jflat,
    JflatOptions, JflatSolution, SjfcOptions, SjfcResult,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Flat, Instance, Point};

/// Which construction an instance falls under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case {
    /// B < ε.
    Small,
    /// B ≥ ε.
    Large,
}

/// Total probability B; for the locational model the sum of all row masses.
pub fn total_probability(instance: &Instance) -> f64 {
    match instance {
        Instance::Existential(e) => e.total_prob(),
        Instance::Locational(l) => l.location_mass().iter().sum(),
    }
}

pub fn case_of(instance: &Instance, eps: f64) -> Case {
    if total_probability(instance) < eps {
        Case::Small
    } else {
        Case::Large
    }
}

pub(crate) fn check_j(j: usize, d: usize) -> Result<()> {
    if j >= 2 {
        return Err(Error::UnsupportedFlat(j));
    }
    if j >= d {
        return Err(Error::InvalidArgument(format!(
            "a {j}-flat needs dimension above {j}, got {d}"
        )));
    }
    Ok(())
}

/// Lift under which d(x,F)² is affine in the lifted point.
///
/// j = 0: x ↦ (x, ‖x‖²). j = 1: x ↦ (x, x_a·x_b for a ≤ b).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LinearizationMap {
    pub j: usize,
    pub d: usize,
    pub dim: usize,
}

impl LinearizationMap {
    pub fn new(j: usize, d: usize) -> Result<Self> {
        check_j(j, d)?;
        let dim = if j == 0 { d + 1 } else { d + d * (d + 1) / 2 };
        Ok(LinearizationMap { j, d, dim })
    }

    pub fn lift(&self, x: &Point) -> Vec<f64> {
        let mut y = x.0.clone();
        if self.j == 0 {
            y.push(x.0.iter().map(|v| v * v).sum());
        } else {
            for a in 0..self.d {
                for b in a..self.d {
                    y.push(x.0[a] * x.0[b]);
                }
            }
        }
        y
    }

    /// (u, c) with d(x,F)² = ⟨u, lift(x)⟩ + c.
    pub fn functional(&self, flat: &Flat) -> Result<(Vec<f64>, f64)> {
        if flat.d() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: flat.d(),
            });
        }
        if flat.j() != self.j {
            return Err(Error::InvalidArgument(format!(
                "expected a {}-flat, got a {}-flat",
                self.j,
                flat.j()
            )));
        }
        let b = &flat.base().0;
        let bb: f64 = b.iter().map(|v| v * v).sum();
        let mut u: Vec<f64> = b.iter().map(|v| -2.0 * v).collect();
        if self.j == 0 {
            u.push(1.0);
            return Ok((u, bb));
        }
        let v = &flat.basis()[0];
        let vb: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
        for (ui, vi) in u.iter_mut().zip(v) {
            *ui += 2.0 * vb * vi;
        }
        for a in 0..self.d {
            for c in a..self.d {
                u.push(if a == c {
                    1.0 - v[a] * v[a]
                } else {
                    -2.0 * v[a] * v[c]
                });
            }
        }
        Ok((u, bb - vb * vb))
    }
}

fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

const PRIMES: [u64; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131,
];

/// `count` deterministic unit vectors in ℝ^dim from a Halton sequence mapped
/// through Box–Muller, followed by their negations.
pub fn direction_net(dim: usize, count: usize) -> Vec<Vec<f64>> {
    let half = count.div_ceil(2);
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(2 * half);
    if dim == 1 {
        return vec![vec![1.0], vec![-1.0]];
    }
    let pairs = dim.div_ceil(2);
    let mut i = 1u64;
    while out.len() < half {
        let mut v = Vec::with_capacity(2 * pairs);
        for p in 0..pairs {
            let u1 = halton(i, PRIMES[(2 * p) % PRIMES.len()]).max(1e-300);
            let u2 = halton(i, PRIMES[(2 * p + 1) % PRIMES.len()]);
            let r = (-2.0 * u1.ln()).sqrt();
            let t = std::f64::consts::TAU * u2;
            v.push(r * t.cos());
            v.push(r * t.sin());
        }
        v.truncate(dim);
        i += 1;
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            out.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    let neg: Vec<Vec<f64>> = out.iter().map(|v| v.iter().map(|x| -x).collect()).collect();
    out.extend(neg);
    out
}

/// Unit directions in ℝ^d up to sign.
pub(crate) fn line_directions(d: usize, count: usize) -> Vec<Vec<f64>> {
    if d == 2 {
        return (0..count)
            .map(|i| {
                let t = std::f64::consts::PI * i as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
    }
    direction_net(d, 2 * count)
        .into_iter()
        .take(count)
        .map(|v| {
            let flip = v.iter().find(|x| **x != 0.0).is_some_and(|x| *x < 0.0);
            if flip {
                v.into_iter().map(|x| -x).collect()
            } else {
                v
            }
        })
        .collect()
}

/// Sampled kernels plus weighted points; estimates J(𝒫,F).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SjfcCoreset {
    /// Kernels of sampled realizations, each of weight 1/N.
    pub s1: Vec<Vec<Point>>,
    pub s2: Vec<(Point, f64)>,
    pub eps: f64,
    pub eps_prime: f64,
    pub j: usize,
}

impl SjfcCoreset {
    pub fn n_samples(&self) -> usize {
        self.s1.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lift_reproduces_squared_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 2..=4 {
            for j in 0..=1 {
                let map = LinearizationMap::new(j, d).unwrap();
                for _ in 0..200 {
                    let x = Point((0..d).map(|_| rng.gen_range(-5.0..5.0)).collect());
                    let base = Point((0..d).map(|_| rng.gen_range(-5.0..5.0)).collect());
                    let flat = if j == 0 {
                        Flat::point(base)
                    } else {
                        let dir: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                        Flat::line(base, &dir).unwrap()
                    };
                    let (u, c) = map.functional(&flat).unwrap();
                    let lin: f64 = u.iter().zip(map.lift(&x)).map(|(a, b)| a * b).sum::<f64>() + c;
                    let want = flat.distance(&x).powi(2);
                    assert!((lin - want).abs() < 1e-9 * (1.0 + want), "{lin} {want}");
                }
            }
        }
    }

    #[test]
    fn dimensions() {
        assert_eq!(LinearizationMap::new(0, 2).unwrap().dim, 3);
        assert_eq!(LinearizationMap::new(1, 3).unwrap().dim, 9);
        assert!(matches!(
            LinearizationMap::new(2, 4),
            Err(Error::UnsupportedFlat(2))
        ));
        assert!(LinearizationMap::new(1, 1).is_err());
    }

    #[test]
    fn net_is_symmetric_unit() {
        let net = direction_net(3, 10);
        assert_eq!(net.len(), 10);
        for (a, b) in net[..5].iter().zip(&net[5..]) {
            assert!((a.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(a.iter().zip(b).all(|(x, y)| x == &-y));
        }
        assert_eq!(direction_net(3, 10), net);
    }
}
