use serde::Serialize;

use super::{gkm_cost, WeightedCollection};
use crate::error::{Error, Result};
use crate::model::{CenterSet, Point};
use crate::objective::kcenter_value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SensitivityKind {
    BruteForceLower,
    ProjectionUpper,
    Uniform,
}

/// Per-set sensitivity values and the sampling scores qᵢ = σ̂ᵢ + 1/N.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityEstimate {
    pub values: Vec<f64>,
    pub kind: SensitivityKind,
    pub q: Vec<f64>,
}

impl SensitivityEstimate {
    fn from_values(values: Vec<f64>, kind: SensitivityKind) -> Self {
        let inv = 1.0 / values.len().max(1) as f64;
        let q = values.iter().map(|v| v + inv).collect();
        SensitivityEstimate { values, kind, q }
    }

    /// σ̂ᵢ = 1/N for every set.
    pub fn uniform(n: usize) -> Self {
        Self::from_values(vec![1.0 / n.max(1) as f64; n], SensitivityKind::Uniform)
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// σ̂ᵢ = max over the family of wᵢK(Sᵢ,F)/cost(F), a lower bound on the sensitivity.
pub fn sensitivity_bruteforce(
    coll: &WeightedCollection,
    family: &[CenterSet],
) -> Result<SensitivityEstimate> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("candidate family is empty".into()));
    }
    let mut values = vec![0.0f64; coll.len()];
    let mut terms = vec![0.0; coll.len()];
    for f in family {
        for (t, s) in terms.iter_mut().zip(coll.sets()) {
            *t = s.weight * kcenter_value(&s.points, f);
        }
        let cost: f64 = terms.iter().sum();
        if cost <= 0.0 {
            return Err(Error::ZeroCostCandidate);
        }
        for (v, t) in values.iter_mut().zip(&terms) {
            *v = v.max(t / cost);
        }
    }
    Ok(SensitivityEstimate::from_values(
        values,
        SensitivityKind::BruteForceLower,
    ))
}

/// The projected k-median instance P* used by the upper bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityProjection {
    /// s*ᵢ, the farthest point of Sᵢ from the reference centers.
    pub farthest: Vec<Point>,
    /// Index of f*ᵢ, the reference center nearest to s*ᵢ.
    pub nearest: Vec<usize>,
    /// Total weight of P* at each reference center.
    pub center_weight: Vec<f64>,
}

/// σ̂ᵢ = wᵢK(Sᵢ,F̂)/cost(F̂) + 2·wᵢ/W(f*ᵢ), clamped to [0,1].
///
/// P* puts weight wᵢ at f*ᵢ, so every point of P* lies on a reference center.
/// A point of P* at center c carrying wᵢ out of the total W(c) at c has
/// sensitivity at most wᵢ/W(c) for k-median.
pub fn sensitivity_projection_upper(
    coll: &WeightedCollection,
    reference: &CenterSet,
) -> Result<(SensitivityEstimate, SensitivityProjection)> {
    let cost = gkm_cost(coll, reference);
    if cost.is_nan() || cost <= 0.0 {
        return Err(Error::DegenerateCost);
    }
    let mut farthest = Vec::with_capacity(coll.len());
    let mut nearest = Vec::with_capacity(coll.len());
    let mut center_weight = vec![0.0; reference.k()];
    for s in coll.sets() {
        let mut best = (-1.0, 0);
        for (i, p) in s.points.iter().enumerate() {
            let d = reference.distance(p);
            if d > best.0 {
                best = (d, i);
            }
        }
        let p = s.points[best.1].clone();
        let c = reference.nearest(&p);
        center_weight[c] += s.weight;
        nearest.push(c);
        farthest.push(p);
    }
    let values = coll
        .sets()
        .iter()
        .zip(&nearest)
        .map(|(s, &c)| {
            let direct = s.weight * kcenter_value(&s.points, reference) / cost;
            (direct + 2.0 * s.weight / center_weight[c]).clamp(0.0, 1.0)
        })
        .collect();
    Ok((
        SensitivityEstimate::from_values(values, SensitivityKind::ProjectionUpper),
        SensitivityProjection {
            farthest,
            nearest,
            center_weight,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::super::tests::singletons;
    use super::super::WeightedSet;
    use super::*;

    fn c(x: f64, y: f64) -> CenterSet {
        CenterSet::new(vec![Point(vec![x, y])]).unwrap()
    }

    #[test]
    fn single_set_has_sensitivity_one() {
        let coll = singletons(&[(1.0, 2.0)], &[3.0]);
        let est = sensitivity_bruteforce(&coll, &[c(0.0, 0.0), c(5.0, 5.0)]).unwrap();
        assert_eq!(est.values, vec![1.0]);
    }

    #[test]
    fn mirror_sets_are_equal() {
        let coll = singletons(&[(-1.0, 0.0), (1.0, 0.0)], &[1.0, 1.0]);
        let fam = [c(0.0, 0.0), c(0.0, 2.0), c(0.0, -3.0)];
        let est = sensitivity_bruteforce(&coll, &fam).unwrap();
        assert_eq!(est.values[0], est.values[1]);
    }

    #[test]
    fn zero_cost_candidate() {
        let coll = singletons(&[(1.0, 1.0)], &[1.0]);
        assert!(matches!(
            sensitivity_bruteforce(&coll, &[c(1.0, 1.0)]),
            Err(Error::ZeroCostCandidate)
        ));
    }

    #[test]
    fn degenerate_reference() {
        let p = Point(vec![1.0, 1.0]);
        let coll = WeightedCollection::new(vec![
            WeightedSet {
                points: vec![p.clone()],
                weight: 1.0,
            },
            WeightedSet {
                points: vec![p.clone()],
                weight: 1.0,
            },
        ])
        .unwrap();
        assert!(matches!(
            sensitivity_projection_upper(&coll, &c(1.0, 1.0)),
            Err(Error::DegenerateCost)
        ));
        assert_eq!(SensitivityEstimate::uniform(2).values, vec![0.5, 0.5]);
    }

    #[test]
    fn clamped_to_one() {
        let coll = singletons(&[(0.0, 0.0), (10.0, 0.0), (0.0, 7.0)], &[1.0, 5.0, 1.0]);
        let (est, proj) = sensitivity_projection_upper(&coll, &c(1.0, 1.0)).unwrap();
        assert!(est.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert_eq!(proj.center_weight, vec![7.0]);
    }
}
