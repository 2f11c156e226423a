//! Generalized k-median over weighted collections of point sets.
//!
//! An instance is a list of point sets Sᵢ with weights wᵢ > 0, and the cost of
//! k centers F is Σ wᵢ·K(Sᵢ,F). The weighted coreset image of a stochastic
//! instance is such a collection, so solving it solves stochastic k-center.

mod pipeline;
mod sampling;
mod sensitivity;
mod solver;

pub use pipeline::{skc_pipeline, SkcOptions, SkcResult, Strategy};
pub use sampling::{
    default_l_exp, enumerate_candidate_coresets, importance_sample_coreset, CandidateStream,
    MAX_CANDIDATES,
};
pub use sensitivity::{
    sensitivity_bruteforce, sensitivity_projection_upper, SensitivityEstimate, SensitivityKind,
    SensitivityProjection,
};
pub use solver::{
    enumerate_pieces, solve_gkm, GkmSolution, PieceDescriptor, SolveMode, SolveOptions,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CenterSet, Instance, Point};
use crate::objective::kcenter_value;
use crate::partition_prob::WeightedImage;

/// One weighted point set.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSet {
    pub points: Vec<Point>,
    pub weight: f64,
}

/// A generalized k-median instance.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightedCollection {
    sets: Vec<WeightedSet>,
}

impl WeightedCollection {
    pub fn new(sets: Vec<WeightedSet>) -> Result<Self> {
        let d = sets
            .iter()
            .flat_map(|s| s.points.first())
            .map(Point::dim)
            .next();
        for s in &sets {
            if !(s.weight > 0.0 && s.weight.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "set weight {} is not positive",
                    s.weight
                )));
            }
            if let Some(d) = d {
                if let Some(p) = s.points.iter().find(|p| p.dim() != d) {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: p.dim(),
                    });
                }
            }
        }
        Ok(WeightedCollection { sets })
    }

    /// The nonempty coreset classes of a weighted image.
    pub fn from_image(instance: &Instance, image: &WeightedImage) -> Self {
        let support = instance.support();
        let sets = image
            .entries
            .iter()
            .filter(|e| !e.ids.is_empty() && e.weight > 0.0)
            .map(|e| WeightedSet {
                points: e.ids.iter().map(|i| support[i.0].clone()).collect(),
                weight: e.weight,
            })
            .collect();
        WeightedCollection { sets }
    }

    pub fn sets(&self) -> &[WeightedSet] {
        &self.sets
    }
    pub fn len(&self) -> usize {
        self.sets.len()
    }
    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
    /// L, the largest set size.
    pub fn max_set_size(&self) -> usize {
        self.sets.iter().map(|s| s.points.len()).max().unwrap_or(0)
    }
    pub fn d(&self) -> Option<usize> {
        self.sets
            .iter()
            .flat_map(|s| s.points.first())
            .map(Point::dim)
            .next()
    }
    pub fn total_weight(&self) -> f64 {
        self.sets.iter().map(|s| s.weight).sum()
    }

    /// Distinct points of all sets, in lexicographic order.
    pub fn union_points(&self) -> Vec<Point> {
        let mut pts: Vec<Point> = self
            .sets
            .iter()
            .flat_map(|s| s.points.iter().cloned())
            .collect();
        pts.sort_by(|a, b| a.lex_cmp(b));
        pts.dedup();
        pts
    }

    /// The collection restricted to a coreset, with the coreset's weights.
    pub fn select(&self, coreset: &GeneralizedCoreset) -> WeightedCollection {
        WeightedCollection {
            sets: coreset
                .entries
                .iter()
                .map(|&(i, w)| WeightedSet {
                    points: self.sets[i].points.clone(),
                    weight: w,
                })
                .collect(),
        }
    }

    /// The same sets with every weight multiplied by `c`.
    pub fn scaled(&self, c: f64) -> WeightedCollection {
        WeightedCollection {
            sets: self
                .sets
                .iter()
                .map(|s| WeightedSet {
                    points: s.points.clone(),
                    weight: s.weight * c,
                })
                .collect(),
        }
    }
}

/// A weighted subset of a collection, by set index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralizedCoreset {
    /// (set index, weight), sorted by index.
    pub entries: Vec<(usize, f64)>,
}

impl GeneralizedCoreset {
    pub fn len(&self) -> usize {
        self.entries.len()
    }
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Σᵢ wᵢ·K(Sᵢ,F).
pub fn gkm_cost(coll: &WeightedCollection, centers: &CenterSet) -> f64 {
    coll.sets
        .iter()
        .map(|s| s.weight * kcenter_value(&s.points, centers))
        .sum()
}

/// Σ w′·K(Sᵢ,F) over a coreset of `coll`.
pub fn coreset_cost(
    coll: &WeightedCollection,
    coreset: &GeneralizedCoreset,
    centers: &CenterSet,
) -> f64 {
    coreset
        .entries
        .iter()
        .map(|&(i, w)| w * kcenter_value(&coll.sets[i].points, centers))
        .sum()
}
