#![allow(dead_code)]

use proptest::prelude::*;
use stocenter::model::{
    CenterSet, ExistentialInstance, Flat, Instance, LocationalInstance, Point, Shape,
};

pub fn coord() -> impl Strategy<Value = f64> {
    prop_oneof![(-40i32..=40).prop_map(|v| v as f64 * 0.25), -10.0..10.0f64]
}

pub fn point(d: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(coord(), d).prop_map(Point)
}

pub fn prob() -> impl Strategy<Value = f64> {
    prop_oneof![1 => Just(0.0), 1 => Just(1.0), 6 => 0.0..=1.0f64]
}

pub fn existential(n_max: usize, d_max: usize) -> impl Strategy<Value = Instance> {
    (1..=d_max, 1..=n_max).prop_flat_map(|(d, n)| {
        (
            prop::collection::vec(point(d), n),
            prop::collection::vec(prob(), n),
        )
            .prop_map(move |(pts, p)| Instance::from(ExistentialInstance::new(d, pts, p).unwrap()))
    })
}

pub fn locational(n_max: usize, m_max: usize, d_max: usize) -> impl Strategy<Value = Instance> {
    (1..=d_max, 1..=n_max, 1..=m_max).prop_flat_map(|(d, n, m)| {
        (
            prop::collection::vec(point(d), m),
            prop::collection::vec(
                prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.01..1.0f64], m),
                n,
            ),
        )
            .prop_map(move |(locs, raw)| {
                let rows = raw
                    .into_iter()
                    .map(|mut r| {
                        if r.iter().all(|&x| x == 0.0) {
                            r[0] = 1.0;
                        }
                        let s: f64 = r.iter().sum();
                        r.iter().map(|x| x / s).collect()
                    })
                    .collect();
                Instance::from(LocationalInstance::new(d, locs, rows).unwrap())
            })
    })
}

pub fn instance(n_max: usize, d_max: usize) -> impl Strategy<Value = Instance> {
    prop_oneof![
        existential(n_max, d_max),
        locational(n_max.min(4), 4, d_max)
    ]
}

pub fn centers(d: usize, k: usize) -> impl Strategy<Value = CenterSet> {
    prop::collection::vec(point(d), k).prop_map(|c| CenterSet::new(c).unwrap())
}

pub fn flat(d: usize, j: usize) -> impl Strategy<Value = Flat> {
    (point(d), prop::collection::vec(-1.0..1.0f64, d)).prop_map(move |(b, mut v)| {
        if j == 0 {
            return Flat::point(b);
        }
        if v.iter().all(|x| x.abs() < 1e-3) {
            v[0] = 1.0;
        }
        Flat::line(b, &v).unwrap()
    })
}

pub fn shape(d: usize) -> impl Strategy<Value = Shape> {
    let lines: usize = if d >= 2 { 1 } else { 0 };
    prop_oneof![
        (1..=2usize)
            .prop_flat_map(move |k| centers(d, k))
            .prop_map(Shape::Centers),
        (0..=lines)
            .prop_flat_map(move |j| flat(d, j))
            .prop_map(Shape::Flat),
    ]
}

pub fn with_shape(
    inst: impl Strategy<Value = Instance>,
) -> impl Strategy<Value = (Instance, Shape)> {
    inst.prop_flat_map(|i| {
        let d = i.d();
        (Just(i), shape(d))
    })
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}
