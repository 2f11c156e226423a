mod common;

use common::*;
use proptest::prelude::*;
use stocenter::model::{CenterSet, Instance, Shape};
use stocenter::objective::{expected_objective_exact, kcenter_value};
use stocenter::oracle::{oracle_holant_direct, oracle_partition_masses};
use stocenter::partition_prob::{
    build_weighted_image, compositions, holant_dp, ImageMode, Partition,
};
use stocenter::Exec;

fn setting(inst: impl Strategy<Value = Instance>) -> impl Strategy<Value = (Instance, usize, f64)> {
    (inst, 1..=2usize, prop_oneof![Just(0.25), Just(0.5)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(80))]

    #[test]
    fn masses_match_grouped_enumeration((inst, k, eps) in setting(instance(7, 2))) {
        let oracle = oracle_partition_masses(&inst, k, eps, Exec::Sequential).unwrap();
        prop_assert!((oracle.total_weight() - 1.0).abs() < 1e-9);
        let part = Partition::new(&inst, k, eps).unwrap();
        for e in &oracle.entries {
            let p = part.prob(&e.ids).unwrap();
            prop_assert!((p - e.weight).abs() < 1e-12, "{:?}: {p} vs {}", e.ids, e.weight);
        }
        for mode in [ImageMode::Exhaustive, ImageMode::SubsetEnumeration] {
            let img = build_weighted_image(&inst, k, eps, mode, Exec::Sequential).unwrap();
            let nonzero: Vec<_> = oracle.entries.iter().filter(|e| e.weight > 0.0 && !e.ids.is_empty()).collect();
            for e in &nonzero {
                let w = img.get(&e.ids).unwrap_or(0.0);
                prop_assert!((w - e.weight).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn image_sandwiches_objective((inst, k, eps) in setting(existential(7, 2)), tests in prop::collection::vec(centers(2, 2), 20)) {
        prop_assume!(inst.d() == 2);
        let img = build_weighted_image(&inst, k, eps, ImageMode::Exhaustive, Exec::Sequential).unwrap();
        let support = inst.support();
        for f in tests {
            let f = CenterSet::new(f.centers()[..k].to_vec()).unwrap();
            let truth = expected_objective_exact(&inst, &Shape::Centers(f.clone())).value;
            let est: f64 = img.entries.iter().map(|e| e.weight * kcenter_value(e.ids.iter().map(|i| &support[i.0]), &f)).sum();
            prop_assert!(est >= (1.0 - eps) * truth - 1e-9 && est <= (1.0 + eps) * truth + 1e-9);
        }
    }

    #[test]
    fn holant_dp_matches_direct_sum(w in prop::collection::vec(prop::collection::vec(0.0..1.0f64, 3), 1..=5)) {
        let n = w.len();
        for seq in compositions(n, 2) {
            let a = holant_dp(&w, &seq).unwrap();
            let b = oracle_holant_direct(&w, &seq).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn locational_holant_total((inst, k, eps) in setting(locational(4, 4, 2))) {
        let oracle = oracle_partition_masses(&inst, k, eps, Exec::Sequential).unwrap();
        let part = Partition::new(&inst, k, eps).unwrap();
        let mut total = 0.0;
        for e in &oracle.entries {
            let p = part.prob(&e.ids).unwrap();
            prop_assert!((p - e.weight).abs() < 1e-12);
            total += p;
        }
        prop_assert!((total - 1.0).abs() < 1e-9);
    }
}

#[test]
fn policies_agree_on_image() {
    let inst: Instance = stocenter::model::ExistentialInstance::new(
        2,
        (0..10)
            .map(|i| stocenter::model::Point(vec![i as f64 * 0.7, (i * i % 7) as f64]))
            .collect(),
        (0..10).map(|i| 0.05 + 0.09 * i as f64).collect(),
    )
    .unwrap()
    .into();
    let a = build_weighted_image(&inst, 2, 0.5, ImageMode::Exhaustive, Exec::Sequential).unwrap();
    let b = build_weighted_image(&inst, 2, 0.5, ImageMode::Exhaustive, Exec::Parallel).unwrap();
    assert_eq!(a, b);
}
