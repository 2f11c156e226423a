//! Seeded instance generators.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::Serialize;
use stocenter::model::{ExistentialInstance, Instance, LocationalInstance, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Uniform,
    Clustered,
    Annulus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Existential,
    Locational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenParams {
    /// Side of the bounding cube for uniform points and cluster centers.
    pub scale: f64,
    pub clusters: usize,
    /// Standard deviation around each cluster center.
    pub spread: f64,
    pub radius: f64,
    /// Radial thickness of the annulus.
    pub width: f64,
    pub p_min: f64,
    pub p_max: f64,
    /// Locations in the locational model.
    pub m: usize,
    /// Locations each node can take.
    pub row_support: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            scale: 10.0,
            clusters: 3,
            spread: 0.5,
            radius: 5.0,
            width: 1.0,
            p_min: 0.1,
            p_max: 0.9,
            m: 8,
            row_support: 3,
        }
    }
}

fn gaussian(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn points(
    kind: Kind,
    count: usize,
    d: usize,
    params: &GenParams,
    rng: &mut ChaCha8Rng,
) -> Vec<Point> {
    match kind {
        Kind::Uniform => (0..count)
            .map(|_| Point((0..d).map(|_| rng.gen::<f64>() * params.scale).collect()))
            .collect(),
        Kind::Clustered => {
            let centers: Vec<Vec<f64>> = (0..params.clusters.max(1))
                .map(|_| (0..d).map(|_| rng.gen::<f64>() * params.scale).collect())
                .collect();
            (0..count)
                .map(|_| {
                    let c = &centers[rng.gen_range(0..centers.len())];
                    Point(
                        c.iter()
                            .zip(gaussian(rng, d))
                            .map(|(x, z)| x + params.spread * z)
                            .collect(),
                    )
                })
                .collect()
        }
        Kind::Annulus => (0..count)
            .map(|_| {
                let mut dir = gaussian(rng, d);
                let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
                let r = params.radius + params.width * (rng.gen::<f64>() - 0.5);
                dir.iter_mut().for_each(|x| *x *= r / norm);
                Point(dir)
            })
            .collect(),
    }
}

/// A random instance; the same arguments always give the same instance.
pub fn generate_instance(
    kind: Kind,
    model: Model,
    n: usize,
    d: usize,
    seed: u64,
    params: &GenParams,
) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match model {
        Model::Existential => {
            let pts = points(kind, n, d, params, &mut rng);
            let probs = (0..n)
                .map(|_| params.p_min + (params.p_max - params.p_min) * rng.gen::<f64>())
                .collect();
            ExistentialInstance::new(d, pts, probs)
                .expect("generated instance is valid")
                .into()
        }
        Model::Locational => {
            let m = params.m.max(1);
            let locs = points(kind, m, d, params, &mut rng);
            let s = params.row_support.clamp(1, m);
            let rows = (0..n)
                .map(|_| {
                    let mut row = vec![0.0; m];
                    for j in sample(&mut rng, m, s) {
                        row[j] = Exp1.sample(&mut rng);
                    }
                    let total: f64 = row.iter().sum();
                    let mut row: Vec<f64> = row.iter().map(|x| x / total).collect();
                    let last = row.iter().rposition(|&x| x > 0.0).expect("nonempty row");
                    row[last] = 0.0;
                    row[last] = (1.0 - row.iter().sum::<f64>()).max(0.0);
                    row
                })
                .collect();
            LocationalInstance::new(d, locs, rows)
                .expect("generated instance is valid")
                .into()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use stocenter::io::{instance_to_value, to_json17};

    #[test]
    fn seeded_output_is_stable() {
        for kind in [Kind::Uniform, Kind::Clustered, Kind::Annulus] {
            for model in [Model::Existential, Model::Locational] {
                let a = generate_instance(kind, model, 12, 3, 7, &GenParams::default());
                let b = generate_instance(kind, model, 12, 3, 7, &GenParams::default());
                assert_eq!(
                    to_json17(&instance_to_value(&a)),
                    to_json17(&instance_to_value(&b))
                );
                assert_eq!(a.d(), 3);
            }
        }
    }

    #[test]
    fn locational_rows_sum_to_one() {
        let i = generate_instance(
            Kind::Clustered,
            Model::Locational,
            20,
            2,
            1,
            &GenParams::default(),
        );
        let Instance::Locational(l) = i else { panic!() };
        assert_eq!(l.n(), 20);
        for row in l.probs() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert_eq!(row.iter().filter(|&&p| p > 0.0).count(), 3);
        }
    }

    #[test]
    fn annulus_radii() {
        let p = GenParams::default();
        let i = generate_instance(Kind::Annulus, Model::Existential, 50, 2, 3, &p);
        for x in i.support() {
            let r = x.dist(&Point::origin(2));
            assert!((r - p.radius).abs() <= p.width / 2.0 + 1e-12);
        }
    }
}
