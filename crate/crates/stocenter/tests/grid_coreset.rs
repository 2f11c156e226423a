mod common;

use common::*;
use proptest::prelude::*;
use stocenter::grid_coreset::{build_additive_coreset, coreset_image_size_bound, r_value};
use stocenter::model::{CenterSet, Point, PointId};
use stocenter::objective::kcenter_value;

fn realization() -> impl Strategy<Value = (Vec<Point>, usize, f64, Vec<CenterSet>)> {
    (1..=24usize, 1..=2usize, prop_oneof![Just(0.25), Just(0.5)]).prop_flat_map(|(n, k, eps)| {
        (
            prop::collection::vec(point(2), n),
            Just(k),
            Just(eps),
            prop::collection::vec(centers(2, k), 40),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn coreset_covers((pts, k, eps, tests) in realization()) {
        let ids: Vec<PointId> = (0..pts.len()).map(PointId).collect();
        let out = build_additive_coreset(&ids, &pts, k, eps).unwrap();
        prop_assert!(out.coreset.len() as u64 <= coreset_image_size_bound(k, 2, eps));
        let core: Vec<&Point> = out.coreset.iter().map(|i| &pts[i.0]).collect();
        for f in &tests {
            let full = kcenter_value(&pts, f);
            let sub = kcenter_value(core.iter().copied(), f);
            prop_assert!(full <= (1.0 + eps) * sub + 1e-9 * (1.0 + full));
        }
    }

    #[test]
    fn radius_monotone_and_idempotent((pts, k, eps, _) in realization()) {
        let ids: Vec<PointId> = (0..pts.len()).map(PointId).collect();
        let out = build_additive_coreset(&ids, &pts, k, eps).unwrap();
        let r_core = r_value(&out.coreset.iter().map(|i| pts[i.0].clone()).collect::<Vec<_>>(), &pts, k).unwrap();
        prop_assert!((1.0 - eps) * out.r <= r_core && r_core <= out.r);
        let again = build_additive_coreset(&out.coreset, &pts, k, eps).unwrap();
        prop_assert_eq!(&again.coreset, &out.coreset);
        prop_assert_eq!(again.grid, out.grid);
        prop_assert_eq!(again.cells, out.cells);
    }

    #[test]
    fn order_invariant((pts, k, eps, _) in realization(), rot in 0usize..24) {
        let mut ids: Vec<PointId> = (0..pts.len()).map(PointId).collect();
        let a = build_additive_coreset(&ids, &pts, k, eps).unwrap();
        let len = ids.len();
        ids.rotate_left(rot % len);
        let b = build_additive_coreset(&ids, &pts, k, eps).unwrap();
        prop_assert_eq!(a.coreset, b.coreset);
    }
}

#[test]
fn at_most_k_distinct_points_is_its_own_coreset() {
    let pts = vec![Point(vec![0.0, 0.0]), Point(vec![5.0, 5.0])];
    let ids = vec![PointId(0), PointId(1)];
    let out = build_additive_coreset(&ids, &pts, 2, 0.5).unwrap();
    assert_eq!(out.coreset, ids);
    assert_eq!(out.r, 0.0);
}
