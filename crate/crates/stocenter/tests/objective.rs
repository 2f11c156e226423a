mod common;

use common::*;
use proptest::prelude::*;
use stocenter::model::{realization_probability, RealizationSpace, Shape};
use stocenter::objective::{expected_objective_exact, expected_objective_mc, shape_value};
use stocenter::oracle::oracle_expected_objective;
use stocenter::Exec;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exact_matches_enumeration((inst, shape) in with_shape(instance(8, 3))) {
        let exact = expected_objective_exact(&inst, &shape).value;
        let oracle = oracle_expected_objective(&inst, &shape, Exec::Sequential).unwrap().value;
        prop_assert!(close(exact, oracle, 1e-9), "{exact} vs {oracle}");
    }

    #[test]
    fn realization_probabilities_sum_to_one(inst in instance(8, 2)) {
        let space = RealizationSpace::new(&inst, true).unwrap();
        let total: f64 = space.iter().map(|(r, p)| {
            assert_eq!(realization_probability(&inst, &r).unwrap(), p);
            p
        }).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bounded_by_extremes((inst, shape) in with_shape(instance(8, 3))) {
        let v = expected_objective_exact(&inst, &shape).value;
        let far = shape_value(inst.support(), &shape);
        prop_assert!(v >= -1e-12 && v <= far * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn monte_carlo_is_policy_independent((inst, shape) in with_shape(instance(6, 2)), seed in any::<u64>()) {
        let a = expected_objective_mc(&inst, &shape, 3000, seed, Exec::Sequential).unwrap();
        let b = expected_objective_mc(&inst, &shape, 3000, seed, Exec::Parallel).unwrap();
        prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn monte_carlo_converges((inst, shape) in with_shape(existential(6, 2)), seed in any::<u64>()) {
        let exact = expected_objective_exact(&inst, &shape).value;
        let mc = expected_objective_mc(&inst, &shape, 20_000, seed, Exec::default()).unwrap();
        let far = shape_value(inst.support(), &shape);
        prop_assert!((mc.value - exact).abs() <= 6.0 * far / (20_000f64).sqrt() + 1e-12);
    }
}

#[test]
fn deterministic_instance_is_plain_objective() {
    let inst = common_det();
    let shape = Shape::Centers(
        stocenter::model::CenterSet::new(vec![stocenter::model::Point(vec![0.0, 0.0])]).unwrap(),
    );
    assert_eq!(expected_objective_exact(&inst, &shape).value, 5.0);
}

fn common_det() -> stocenter::model::Instance {
    stocenter::model::ExistentialInstance::new(
        2,
        vec![
            stocenter::model::Point(vec![3.0, 4.0]),
            stocenter::model::Point(vec![1.0, 0.0]),
        ],
        vec![1.0, 1.0],
    )
    .unwrap()
    .into()
}
