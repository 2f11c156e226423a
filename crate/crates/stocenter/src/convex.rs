//! Minimization of weighted sums of max-of-norms.
//!
//! The variable is a list of `blocks` points in ℝ^d. Group g contributes
//! `w_g · max_{(a,b) ∈ g} ‖a − x_b‖`. The objective is convex. It is minimized
//! by a normalized subgradient method with a fixed step schedule, followed by
//! damped Newton steps on a smoothed objective with a decreasing smoothing
//! parameter. The best iterate under the true objective is returned.

use nalgebra::{DMatrix, DVector};

/// One term of the objective.
#[derive(Debug, Clone)]
pub struct Group {
    pub weight: f64,
    /// (block, anchor point) pairs.
    pub members: Vec<(usize, Vec<f64>)>,
}

#[derive(Debug, Clone)]
pub struct SumMaxNorm {
    d: usize,
    blocks: usize,
    groups: Vec<Group>,
    scale: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ConvexOptions {
    pub subgradient_iters: usize,
    pub newton_iters: usize,
    /// Smallest smoothing parameter, relative to the problem scale.
    pub min_smoothing: f64,
}

impl Default for ConvexOptions {
    fn default() -> Self {
        ConvexOptions {
            subgradient_iters: 200,
            newton_iters: 40,
            min_smoothing: 1e-13,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvexSolution {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// Best value after each improving subgradient step.
    pub trace: Vec<f64>,
}

impl SumMaxNorm {
    pub fn new(d: usize, blocks: usize, groups: Vec<Group>) -> Self {
        let mut n = 0.0;
        let mut centroid = vec![0.0; d];
        for g in &groups {
            for (_, a) in &g.members {
                n += 1.0;
                for (c, v) in centroid.iter_mut().zip(a) {
                    *c += v;
                }
            }
        }
        let mut scale: f64 = 0.0;
        if n > 0.0 {
            centroid.iter_mut().for_each(|c| *c /= n);
            for g in &groups {
                for (_, a) in &g.members {
                    scale = scale.max(crate::model::dist2(a, &centroid).sqrt());
                }
            }
        }
        let scale = if scale > 0.0 && scale.is_finite() {
            scale
        } else {
            1.0
        };
        SumMaxNorm {
            d,
            blocks,
            groups,
            scale,
        }
    }

    pub fn dim(&self) -> usize {
        self.d * self.blocks
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn block<'a>(&self, x: &'a [f64], b: usize) -> &'a [f64] {
        &x[b * self.d..(b + 1) * self.d]
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.groups
            .iter()
            .map(|g| {
                g.weight
                    * g.members
                        .iter()
                        .map(|(b, a)| crate::model::dist2(a, self.block(x, *b)))
                        .fold(0.0, f64::max)
                        .sqrt()
            })
            .sum()
    }

    fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        for grp in &self.groups {
            let mut best = (-1.0, 0);
            for (m, (b, a)) in grp.members.iter().enumerate() {
                let v = crate::model::dist2(a, self.block(x, *b));
                if v > best.0 {
                    best = (v, m);
                }
            }
            if best.0 <= 0.0 {
                continue;
            }
            let (b, a) = &grp.members[best.1];
            let r = best.0.sqrt();
            for t in 0..self.d {
                g[b * self.d + t] += grp.weight * (x[b * self.d + t] - a[t]) / r;
            }
        }
        g
    }

    /// Smoothed value, gradient and Hessian at smoothing `mu`.
    fn smoothed(
        &self,
        x: &[f64],
        mu: f64,
        want_hessian: bool,
    ) -> (f64, DVector<f64>, Option<DMatrix<f64>>) {
        let n = self.dim();
        let d = self.d;
        let mut value = 0.0;
        let mut grad = DVector::zeros(n);
        let mut hess = want_hessian.then(|| DMatrix::zeros(n, n));
        let mut phis = Vec::new();
        for grp in &self.groups {
            phis.clear();
            for (b, a) in &grp.members {
                phis.push((crate::model::dist2(a, self.block(x, *b)) + mu * mu).sqrt());
            }
            let top = phis.iter().fold(f64::NEG_INFINITY, |m, &p| m.max(p / mu));
            let weights: Vec<f64> = phis.iter().map(|&p| (p / mu - top).exp()).collect();
            let total: f64 = weights.iter().sum();
            value += grp.weight * mu * (top + total.ln());
            let mut gbar = DVector::zeros(n);
            for (m, (b, a)) in grp.members.iter().enumerate() {
                let pi = weights[m] / total;
                if pi == 0.0 {
                    continue;
                }
                let phi = phis[m];
                let xb = self.block(x, *b);
                for t in 0..d {
                    gbar[b * d + t] += pi * (xb[t] - a[t]) / phi;
                }
                if let Some(h) = hess.as_mut() {
                    let c = grp.weight * pi / phi;
                    let cross = grp.weight * pi / mu;
                    for s in 0..d {
                        let vs = (xb[s] - a[s]) / phi;
                        for t in 0..d {
                            let vt = (xb[t] - a[t]) / phi;
                            let eye = if s == t { 1.0 } else { 0.0 };
                            h[(b * d + s, b * d + t)] += c * (eye - vs * vt) + cross * vs * vt;
                        }
                    }
                }
            }
            if let Some(h) = hess.as_mut() {
                let c = grp.weight / mu;
                for s in 0..n {
                    if gbar[s] == 0.0 {
                        continue;
                    }
                    for t in 0..n {
                        h[(s, t)] -= c * gbar[s] * gbar[t];
                    }
                }
            }
            grad += gbar * grp.weight;
        }
        (value, grad, hess)
    }

    fn smoothed_value(&self, x: &[f64], mu: f64) -> f64 {
        self.smoothed(x, mu, false).0
    }

    /// Minimizes from `x0`.
    pub fn solve(&self, x0: &[f64], opts: &ConvexOptions) -> ConvexSolution {
        let mut best_x = x0.to_vec();
        let mut best = self.value(x0);
        let mut trace = vec![best];
        let mut iterations = 0;
        if self.groups.is_empty() {
            return ConvexSolution {
                x: best_x,
                value: best,
                iterations,
                trace,
            };
        }

        let mut x = x0.to_vec();
        let step0 = 0.5 * self.scale;
        for t in 0..opts.subgradient_iters {
            let g = self.subgradient(&x);
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                break;
            }
            let eta = step0 / ((t + 1) as f64).sqrt();
            for (xi, gi) in x.iter_mut().zip(&g) {
                *xi -= eta * gi / norm;
            }
            iterations += 1;
            let v = self.value(&x);
            if v < best {
                best = v;
                best_x.clone_from(&x);
                trace.push(v);
            }
        }

        let mut x = best_x.clone();
        let mut mu = 0.1 * self.scale;
        let floor = opts.min_smoothing * self.scale;
        while mu >= floor {
            for _ in 0..opts.newton_iters {
                iterations += 1;
                let (fx, g, h) = self.smoothed(&x, mu, true);
                let Some(dir) = newton_direction(h.expect("hessian requested"), &g) else {
                    break;
                };
                let slope = g.dot(&dir);
                let mut step = 1.0;
                let mut moved = false;
                for _ in 0..60 {
                    let cand: Vec<f64> = x
                        .iter()
                        .zip(dir.iter())
                        .map(|(a, b)| a + step * b)
                        .collect();
                    let fc = self.smoothed_value(&cand, mu);
                    if fc <= fx + 1e-4 * step * slope {
                        moved = fc < fx;
                        x = cand;
                        break;
                    }
                    step *= 0.5;
                }
                let v = self.value(&x);
                if v < best {
                    best = v;
                    best_x.clone_from(&x);
                }
                let dnorm = step * dir.norm();
                if !moved || dnorm <= 1e-15 * self.scale {
                    break;
                }
            }
            mu *= 0.1;
        }
        ConvexSolution {
            x: best_x,
            value: best,
            iterations,
            trace,
        }
    }
}

fn newton_direction(mut h: DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    let n = g.len();
    let diag_max = (0..n).map(|i| h[(i, i)].abs()).fold(0.0, f64::max);
    if diag_max == 0.0 || !diag_max.is_finite() {
        return None;
    }
    let mut ridge = 1e-14 * diag_max;
    for i in 0..n {
        if h[(i, i)] <= 0.0 {
            h[(i, i)] = ridge;
        }
    }
    for _ in 0..8 {
        let mut hr = h.clone();
        for i in 0..n {
            hr[(i, i)] += ridge;
        }
        if let Some(ch) = hr.cholesky() {
            let dir = -ch.solve(g);
            if dir.iter().all(|v| v.is_finite()) && g.dot(&dir) < 0.0 {
                return Some(dir);
            }
        }
        ridge *= 100.0;
    }
    let gn = g.norm();
    (gn > 0.0).then(|| -g / gn * 1e-3)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn singleton_groups(points: &[(f64, f64)], w: &[f64]) -> Vec<Group> {
        points
            .iter()
            .zip(w)
            .map(|(&(x, y), &w)| Group {
                weight: w,
                members: vec![(0, vec![x, y])],
            })
            .collect()
    }

    #[test]
    fn enclosing_ball_of_triangle() {
        let g = Group {
            weight: 1.0,
            members: vec![
                (0, vec![0.0, 0.0]),
                (0, vec![4.0, 0.0]),
                (0, vec![0.0, 3.0]),
            ],
        };
        let p = SumMaxNorm::new(2, 1, vec![g]);
        let s = p.solve(&[3.0, 3.0], &ConvexOptions::default());
        assert!((s.value - 2.5).abs() < 1e-9, "{}", s.value);
        assert!((s.x[0] - 2.0).abs() < 1e-6 && (s.x[1] - 1.5).abs() < 1e-6);
    }

    #[test]
    fn geometric_median_of_square_and_center() {
        let pts = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];
        let p = SumMaxNorm::new(2, 1, singleton_groups(&pts, &[1.0; 4]));
        let s = p.solve(&[0.9, 0.1], &ConvexOptions::default());
        assert!((s.value - 2.0 * 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn trace_is_non_increasing() {
        let pts = [(0.0, 0.0), (5.0, 1.0), (2.0, 7.0), (-3.0, 2.0)];
        let p = SumMaxNorm::new(2, 1, singleton_groups(&pts, &[1.0, 2.0, 0.5, 1.0]));
        let s = p.solve(&[10.0, 10.0], &ConvexOptions::default());
        assert!(s.trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(s.value <= *s.trace.last().unwrap());
    }

    #[test]
    fn two_blocks_separate() {
        let groups = vec![
            Group {
                weight: 1.0,
                members: vec![(0, vec![0.0, 0.0]), (0, vec![2.0, 0.0])],
            },
            Group {
                weight: 1.0,
                members: vec![(1, vec![10.0, 0.0]), (1, vec![10.0, 4.0])],
            },
        ];
        let p = SumMaxNorm::new(2, 2, groups);
        let s = p.solve(&[0.0, 1.0, 9.0, 0.0], &ConvexOptions::default());
        assert!((s.value - 3.0).abs() < 1e-9, "{}", s.value);
    }
}
