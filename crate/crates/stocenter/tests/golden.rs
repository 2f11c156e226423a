//! Fast evaluators checked against cached brute-force values in `tests/golden`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use stocenter::model::{
    CenterSet, ExistentialInstance, Instance, LocationalInstance, Point, PointId, Shape,
};
use stocenter::objective::expected_objective_exact;
use stocenter::oracle::{
    golden_key, oracle_expected_objective, oracle_partition_masses, GoldenCache,
};
use stocenter::partition_prob::Partition;
use stocenter::Exec;

fn cache() -> GoldenCache {
    GoldenCache::new(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden"))
}

fn instances() -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut pt = |d: usize| {
        Point(
            (0..d)
                .map(|_| (rng.gen::<f64>() * 40.0).round() / 4.0)
                .collect(),
        )
    };
    let pts: Vec<Point> = (0..18).map(|_| pt(2)).collect();
    let locs: Vec<Point> = (0..4).map(|_| pt(3)).collect();
    let probs: Vec<f64> = (0..18)
        .map(|i| [0.15, 0.5, 0.85, 1.0, 0.3, 0.6][i % 6])
        .collect();
    let rows: Vec<Vec<f64>> = (0..7)
        .map(|i| {
            [
                [0.25, 0.25, 0.25, 0.25],
                [0.7, 0.0, 0.3, 0.0],
                [0.0, 0.0, 0.5, 0.5],
            ][i % 3]
                .to_vec()
        })
        .collect();
    vec![
        ExistentialInstance::new(2, pts, probs).unwrap().into(),
        LocationalInstance::new(3, locs, rows).unwrap().into(),
    ]
}

fn shapes(inst: &Instance) -> Vec<Shape> {
    let s = inst.support();
    vec![
        Shape::Centers(CenterSet::new(vec![s[0].clone()]).unwrap()),
        Shape::Centers(CenterSet::new(vec![s[1].clone(), Point(vec![5.0; inst.d()])]).unwrap()),
    ]
}

#[test]
fn objective_matches_cached_enumeration() {
    let cache = cache();
    for inst in instances() {
        for (i, shape) in shapes(&inst).iter().enumerate() {
            let key = golden_key(&inst, &format!("objective shape={i}"));
            let v = cache
                .get_or_compute(&key, || Ok(json!({ "value": oracle_expected_objective(&inst, shape, Exec::default())?.value })))
                .unwrap();
            let exact = expected_objective_exact(&inst, shape).value;
            assert!((exact - v["value"].as_f64().unwrap()).abs() < 1e-9);
        }
    }
}

#[test]
fn masses_match_cached_enumeration() {
    let cache = cache();
    for inst in instances() {
        for k in 1..=2 {
            let key = golden_key(&inst, &format!("masses k={k} eps=0.5"));
            let v = cache
                .get_or_compute(&key, || {
                    Ok(serde_json::to_value(oracle_partition_masses(
                        &inst,
                        k,
                        0.5,
                        Exec::default(),
                    )?)?)
                })
                .unwrap();
            let part = Partition::new(&inst, k, 0.5).unwrap();
            let mut total = 0.0;
            for e in v["entries"].as_array().unwrap() {
                let ids: Vec<PointId> = e["ids"]
                    .as_array()
                    .unwrap()
                    .iter()
                    .map(|x| PointId(x.as_u64().unwrap() as usize))
                    .collect();
                let w = e["weight"].as_f64().unwrap();
                assert!((part.prob(&ids).unwrap() - w).abs() < 1e-12);
                total += w;
            }
            assert!((total - 1.0).abs() < 1e-9);
        }
    }
}
