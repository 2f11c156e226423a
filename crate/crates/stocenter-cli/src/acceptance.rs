//! The acceptance suite run by `verify` and by the acceptance test target.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use serde_json::{json, Value};
use stocenter::gkm::{
    coreset_cost, default_l_exp, enumerate_candidate_coresets, gkm_cost, skc_pipeline, SkcOptions,
    WeightedCollection, WeightedSet,
};
use stocenter::grid_coreset::{coreset_image_size_bound, GridCoreset};
use stocenter::io::to_json17;
use stocenter::jflat::{
    build_coreset, case1_coreset, estimate_j, sjfc_pipeline, JflatOptions, SjfcOptions,
};
use stocenter::model::{
    CenterSet, ExistentialInstance, Flat, Instance, LocationalInstance, Point, PointId, Shape,
};
use stocenter::objective::{
    expected_flatcenter_exact, expected_objective_exact, kcenter_value, substream,
};
use stocenter::oracle::{
    min_enclosing_ball, oracle_expected_objective, oracle_holant_direct, oracle_kcenter,
    oracle_partition_masses, oracle_sensitivities, OracleGrid,
};
use stocenter::partition_prob::{
    build_weighted_image, compositions, holant_dp, ImageMode, Partition, WeightedImage,
};
use stocenter::Exec;

use crate::bench::{run_bench, strip_timing, BenchConfig};
use crate::generate::{points, GenParams, Kind};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Relative error injected into every computed partition mass.
    pub perturb_weights: f64,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 0,
            perturb_weights: 0.0,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub summary: String,
    pub metrics: BTreeMap<&'static str, Value>,
    #[serde(skip)]
    pub seconds: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {}: {} [{:.1}s]",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.summary,
            self.seconds
        )
    }
}

pub const NAMES: [&str; 12] = [
    "exact objective equals enumeration",
    "additive coreset coverage",
    "coreset radius and idempotence",
    "partition masses equal grouped enumeration",
    "locational holant sums",
    "weighted image sandwich",
    "total sensitivity bound",
    "enumerated coreset existence",
    "end-to-end stochastic k-center",
    "small-mass flat surrogate",
    "large-mass flat estimate",
    "determinism",
];

struct Tally {
    metrics: BTreeMap<&'static str, Value>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            metrics: BTreeMap::new(),
        }
    }
    fn set(&mut self, key: &'static str, v: impl Into<Value>) {
        self.metrics.insert(key, v.into());
    }
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Point> {
    let kind = [Kind::Uniform, Kind::Clustered, Kind::Annulus][rng.gen_range(0..3)];
    let mut pts = points(kind, n, d, &GenParams::default(), rng);
    if rng.gen_bool(0.2) {
        for p in &mut pts {
            p.0.iter_mut().for_each(|x| *x = (*x * 2.0).round() / 2.0);
        }
    }
    pts
}

fn random_prob(rng: &mut ChaCha8Rng) -> f64 {
    match rng.gen_range(0..10) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.gen(),
    }
}

fn random_existential(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Instance {
    let pts = random_points(rng, n, d);
    let probs = (0..n).map(|_| random_prob(rng)).collect();
    ExistentialInstance::new(d, pts, probs)
        .expect("valid")
        .into()
}

fn random_locational(rng: &mut ChaCha8Rng, n: usize, m: usize, d: usize) -> Instance {
    let locs = random_points(rng, m, d);
    let rows = (0..n)
        .map(|_| {
            let mut row: Vec<f64> = (0..m)
                .map(|_| {
                    if rng.gen_bool(0.25) {
                        0.0
                    } else {
                        rng.gen::<f64>() + 0.01
                    }
                })
                .collect();
            if row.iter().all(|&x| x == 0.0) {
                row[rng.gen_range(0..m)] = 1.0;
            }
            let s: f64 = row.iter().sum();
            row.iter().map(|x| x / s).collect()
        })
        .collect();
    LocationalInstance::new(d, locs, rows)
        .expect("valid")
        .into()
}

fn bbox(pts: &[Point]) -> (Vec<f64>, Vec<f64>) {
    let d = pts[0].dim();
    let lo = (0..d)
        .map(|t| pts.iter().map(|p| p.0[t]).fold(f64::INFINITY, f64::min))
        .collect();
    let hi = (0..d)
        .map(|t| pts.iter().map(|p| p.0[t]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    (lo, hi)
}

/// A test point: uniform in the enlarged bounding box or jittered around a support point.
fn random_probe(rng: &mut ChaCha8Rng, pts: &[Point]) -> Point {
    let (lo, hi) = bbox(pts);
    let diam: f64 = lo
        .iter()
        .zip(&hi)
        .map(|(a, b)| (b - a) * (b - a))
        .sum::<f64>()
        .sqrt()
        .max(1.0);
    if rng.gen_bool(0.5) {
        Point(
            lo.iter()
                .zip(&hi)
                .map(|(a, b)| a - 0.2 * diam + rng.gen::<f64>() * (b - a + 0.4 * diam))
                .collect(),
        )
    } else {
        let base = &pts[rng.gen_range(0..pts.len())];
        let z: f64 = StandardNormal.sample(rng);
        Point(
            base.0
                .iter()
                .map(|x| x + 0.1 * diam * z * rng.gen::<f64>())
                .collect(),
        )
    }
}

fn random_centers(rng: &mut ChaCha8Rng, pts: &[Point], k: usize) -> CenterSet {
    CenterSet::new((0..k).map(|_| random_probe(rng, pts)).collect()).expect("k ≥ 1")
}

fn random_flat(rng: &mut ChaCha8Rng, pts: &[Point], j: usize) -> Flat {
    let base = random_probe(rng, pts);
    if j == 0 {
        return Flat::point(base);
    }
    let t: f64 = rng.gen::<f64>() * std::f64::consts::PI;
    let mut dir = vec![0.0; base.dim()];
    dir[0] = t.cos();
    dir[1] = t.sin();
    Flat::line(base, &dir).expect("unit direction")
}

fn perturbed(mut img: WeightedImage, cfg: &VerifyConfig) -> WeightedImage {
    img.entries
        .iter_mut()
        .for_each(|e| e.weight *= 1.0 + cfg.perturb_weights);
    img
}

fn c1(cfg: &VerifyConfig) -> Tally {
    let mut rng = substream(cfg.seed, 1);
    let mut t = Tally::new();
    let (mut worst, mut checks, mut bad) = (0.0f64, 0u64, 0u64);
    for _ in 0..200 {
        let (n, d, k) = (
            rng.gen_range(1..=15),
            rng.gen_range(1..=3),
            rng.gen_range(1..=2),
        );
        let inst = random_existential(&mut rng, n, d);
        for _ in 0..50 {
            let shape = Shape::Centers(random_centers(&mut rng, inst.support(), k));
            let exact = expected_objective_exact(&inst, &shape).value;
            let oracle = oracle_expected_objective(&inst, &shape, cfg.exec)
                .expect("guarded")
                .value;
            worst = worst.max((exact - oracle).abs());
            checks += 1;
            bad += u64::from((exact - oracle).abs() > 1e-9);
        }
    }
    let mut worst_loc = 0.0f64;
    for _ in 0..100 {
        let (n, m, d, k) = (
            rng.gen_range(1..=6),
            rng.gen_range(1..=4),
            rng.gen_range(1..=3),
            rng.gen_range(1..=2),
        );
        let inst = random_locational(&mut rng, n, m, d);
        for _ in 0..50 {
            let shape = Shape::Centers(random_centers(&mut rng, inst.support(), k));
            let exact = expected_objective_exact(&inst, &shape).value;
            let oracle = oracle_expected_objective(&inst, &shape, cfg.exec)
                .expect("guarded")
                .value;
            worst_loc = worst_loc.max((exact - oracle).abs());
            checks += 1;
            bad += u64::from((exact - oracle).abs() > 1e-9);
        }
    }
    t.set("checks", checks);
    t.set("violations", bad);
    t.set("max_abs_error_existential", worst);
    t.set("max_abs_error_locational", worst_loc);
    t
}

struct CoverageCase {
    support: Vec<Point>,
    ids: Vec<PointId>,
    k: usize,
    eps: f64,
}

fn coverage_cases(seed: u64) -> Vec<CoverageCase> {
    let mut rng = substream(seed, 2);
    (0..200)
        .map(|i| {
            let n = rng.gen_range(1..=40);
            let support = random_points(&mut rng, n, 2);
            let mut ids: Vec<PointId> = (0..n).filter(|_| rng.gen_bool(0.7)).map(PointId).collect();
            if ids.is_empty() {
                ids.push(PointId(rng.gen_range(0..n)));
            }
            CoverageCase {
                support,
                ids,
                k: rng.gen_range(1..=2),
                eps: if i % 2 == 0 { 0.25 } else { 0.5 },
            }
        })
        .collect()
}

fn c2(cfg: &VerifyConfig) -> Tally {
    let cases = coverage_cases(cfg.seed);
    let mut rng = substream(cfg.seed, 20);
    let (mut bad, mut size_bad, mut checks, mut worst) = (0u64, 0u64, 0u64, 0.0f64);
    for c in &cases {
        let out = GridCoreset::new(&c.support, c.k, c.eps)
            .and_then(|g| g.build(&c.ids))
            .expect("guarded");
        size_bad += u64::from(out.coreset.len() as u64 > coreset_image_size_bound(c.k, 2, c.eps));
        let full: Vec<&Point> = c.ids.iter().map(|i| &c.support[i.0]).collect();
        let core: Vec<&Point> = out.coreset.iter().map(|i| &c.support[i.0]).collect();
        let owned: Vec<Point> = full.iter().map(|p| (*p).clone()).collect();
        for _ in 0..500 {
            let f = random_centers(&mut rng, &owned, c.k);
            let kp = kcenter_value(full.iter().copied(), &f);
            let ke = kcenter_value(core.iter().copied(), &f);
            checks += 1;
            if ke > 0.0 {
                worst = worst.max(kp / ke - 1.0);
            }
            bad += u64::from(kp > (1.0 + c.eps) * ke * (1.0 + 1e-12));
        }
    }
    let mut t = Tally::new();
    t.set("checks", checks);
    t.set("violations", bad);
    t.set("size_bound_violations", size_bad);
    t.set("max_excess_ratio", worst);
    t
}

fn c3(cfg: &VerifyConfig) -> Tally {
    let (mut radius_bad, mut idem_bad, mut min_ratio) = (0u64, 0u64, f64::INFINITY);
    for c in coverage_cases(cfg.seed) {
        let g = GridCoreset::new(&c.support, c.k, c.eps).expect("guarded");
        let out = g.build(&c.ids).expect("nonempty");
        let r_core = g.r(&out.coreset);
        if out.r > 0.0 {
            min_ratio = min_ratio.min(r_core / out.r);
        }
        radius_bad += u64::from(!((1.0 - c.eps) * out.r <= r_core && r_core <= out.r));
        let again = g.build(&out.coreset).expect("nonempty");
        let same = again.coreset == out.coreset
            && again.grid.side.to_bits() == out.grid.side.to_bits()
            && again.grid.level == out.grid.level
            && again.cells == out.cells;
        idem_bad += u64::from(!same);
    }
    let mut t = Tally::new();
    t.set("radius_violations", radius_bad);
    t.set("idempotence_violations", idem_bad);
    t.set(
        "min_radius_ratio",
        if min_ratio.is_finite() {
            min_ratio
        } else {
            1.0
        },
    );
    t
}

fn mass_cases(seed: u64) -> Vec<(Instance, usize)> {
    let mut rng = substream(seed, 4);
    (0..100)
        .map(|_| {
            let (n, d) = (rng.gen_range(1..=12), rng.gen_range(1..=2));
            (random_existential(&mut rng, n, d), rng.gen_range(1..=2))
        })
        .collect()
}

fn c4(cfg: &VerifyConfig) -> Tally {
    let (mut worst, mut worst_sum, mut classes) = (0.0f64, 0.0f64, 0u64);
    for (inst, k) in mass_cases(cfg.seed) {
        for eps in [0.25, 0.5] {
            let oracle = oracle_partition_masses(&inst, k, eps, cfg.exec).expect("guarded");
            let alg = perturbed(
                build_weighted_image(&inst, k, eps, ImageMode::SubsetEnumeration, cfg.exec)
                    .expect("guarded"),
                cfg,
            );
            let keys: BTreeSet<_> = oracle
                .entries
                .iter()
                .chain(&alg.entries)
                .map(|e| e.ids.clone())
                .collect();
            for key in keys {
                let a = alg.get(&key).unwrap_or(0.0);
                let b = oracle.get(&key).unwrap_or(0.0);
                worst = worst.max((a - b).abs());
                classes += 1;
            }
            worst_sum = worst_sum.max((alg.total_weight() - 1.0).abs());
        }
    }
    let mut t = Tally::new();
    t.set("classes", classes);
    t.set("max_abs_error", worst);
    t.set("max_total_deviation", worst_sum);
    t
}

fn c5(cfg: &VerifyConfig) -> Tally {
    let mut rng = substream(cfg.seed, 5);
    let (mut worst, mut worst_seq, mut worst_sum, mut seqs) = (0.0f64, 0.0f64, 0.0f64, 0u64);
    for _ in 0..50 {
        let (n, m, d, k) = (
            rng.gen_range(1..=5),
            rng.gen_range(1..=4),
            rng.gen_range(1..=2),
            rng.gen_range(1..=2),
        );
        let eps = if rng.gen_bool(0.5) { 0.25 } else { 0.5 };
        let inst = random_locational(&mut rng, n, m, d);
        let oracle = oracle_partition_masses(&inst, k, eps, cfg.exec).expect("guarded");
        let part = Partition::new(&inst, k, eps).expect("guarded");
        let mut total = 0.0;
        for mask in 0u32..(1 << m) {
            let s: Vec<PointId> = (0..m).filter(|b| mask >> b & 1 == 1).map(PointId).collect();
            let p = part.prob_locational(&s).expect("guarded") * (1.0 + cfg.perturb_weights);
            total += p;
            worst = worst.max((p - oracle.get(&s).unwrap_or(0.0)).abs());
            if let Some(w) = part.holant_weights(&s).expect("guarded") {
                for seq in compositions(n, s.len()) {
                    let a = holant_dp(&w, &seq).expect("guarded");
                    let b = oracle_holant_direct(&w, &seq).expect("guarded");
                    worst_seq = worst_seq.max((a - b).abs());
                    seqs += 1;
                }
            }
        }
        worst_sum = worst_sum.max((total - 1.0).abs());
    }
    let mut t = Tally::new();
    t.set("sequences", seqs);
    t.set("max_abs_error", worst);
    t.set("max_sequence_error", worst_seq);
    t.set("max_total_deviation", worst_sum);
    t
}

fn c6(cfg: &VerifyConfig) -> Tally {
    let mut rng = substream(cfg.seed, 6);
    let (mut bad, mut checks, mut lo, mut hi) = (0u64, 0u64, f64::INFINITY, 0.0f64);
    for (inst, k) in mass_cases(cfg.seed) {
        let support = inst.support();
        let tests: Vec<CenterSet> = (0..200)
            .map(|_| random_centers(&mut rng, support, k))
            .collect();
        for eps in [0.25, 0.5] {
            let img = perturbed(
                build_weighted_image(&inst, k, eps, ImageMode::SubsetEnumeration, cfg.exec)
                    .expect("guarded"),
                cfg,
            );
            for f in &tests {
                let truth = expected_objective_exact(&inst, &Shape::Centers(f.clone())).value;
                let est: f64 = img
                    .entries
                    .iter()
                    .map(|e| e.weight * kcenter_value(e.ids.iter().map(|i| &support[i.0]), f))
                    .sum();
                checks += 1;
                if truth > 0.0 {
                    lo = lo.min(est / truth);
                    hi = hi.max(est / truth);
                }
                let slack = 1e-12 * truth.max(1e-300);
                bad += u64::from(
                    est < (1.0 - eps) * truth - slack || est > (1.0 + eps) * truth + slack,
                );
            }
        }
    }
    let mut t = Tally::new();
    t.set("checks", checks);
    t.set("violations", bad);
    t.set("min_ratio", if lo.is_finite() { lo } else { 1.0 });
    t.set("max_ratio", hi);
    t
}

fn random_collection(rng: &mut ChaCha8Rng, sets: usize, size: usize) -> WeightedCollection {
    let pts = random_points(rng, sets * size, 2);
    let mut it = pts.into_iter();
    WeightedCollection::new(
        (0..sets)
            .map(|_| WeightedSet {
                points: (0..rng.gen_range(1..=size))
                    .map(|_| it.next().expect("enough points"))
                    .collect(),
                weight: 0.1 + rng.gen::<f64>() * 2.0,
            })
            .collect(),
    )
    .expect("valid")
}

fn c7(cfg: &VerifyConfig) -> Tally {
    let mut rng = substream(cfg.seed, 7);
    let (mut bad, mut worst, mut degenerate) = (0u64, 0.0f64, 0u64);
    for _ in 0..100 {
        let sets = rng.gen_range(1..=8);
        let coll = random_collection(&mut rng, sets, 4);
        let k = rng.gen_range(1..=2);
        match oracle_sensitivities(&coll, k, 6) {
            Ok(s) => {
                let total = s.total();
                worst = worst.max(total / (4 * k + 3) as f64);
                bad += u64::from(total > (4 * k + 3) as f64 + 1e-9);
            }
            Err(stocenter::Error::ZeroCostCandidate) => degenerate += 1,
            Err(e) => panic!("sensitivity oracle failed: {e}"),
        }
    }
    let mut t = Tally::new();
    t.set("violations", bad);
    t.set("degenerate", degenerate);
    t.set("max_fraction_of_bound", worst);
    t
}

/// Center sets of size k drawn from a lattice over the union bounding box.
fn test_grid(coll: &WeightedCollection, k: usize) -> Vec<CenterSet> {
    let union = coll.union_points();
    let (lo, hi) = bbox(&union);
    let res = if k == 1 { 10 } else { 5 };
    let mut lattice: Vec<Point> = Vec::new();
    for i in 0..=res {
        for j in 0..=res {
            let pad = |t: usize| 0.1 * (hi[t] - lo[t]).max(1e-9);
            lattice.push(Point(vec![
                lo[0] - pad(0) + (hi[0] - lo[0] + 2.0 * pad(0)) * i as f64 / res as f64,
                lo[1] - pad(1) + (hi[1] - lo[1] + 2.0 * pad(1)) * j as f64 / res as f64,
            ]));
        }
    }
    lattice.extend(union);
    let mut out = Vec::new();
    for a in 0..lattice.len() {
        if k == 1 {
            out.push(CenterSet::new(vec![lattice[a].clone()]).expect("k = 1"));
        } else {
            for b in a + 1..lattice.len() {
                out.push(
                    CenterSet::new(vec![lattice[a].clone(), lattice[b].clone()]).expect("k = 2"),
                );
            }
        }
    }
    out
}

fn c8(cfg: &VerifyConfig) -> Tally {
    let mut rng = substream(cfg.seed, 8);
    let eps = 0.5;
    let (mut missing, mut worst_best, mut streamed) = (0u64, 0.0f64, 0u64);
    for _ in 0..50 {
        let sets = rng.gen_range(1..=4);
        let coll = random_collection(&mut rng, sets, 3);
        let k = rng.gen_range(1..=2);
        let l = default_l_exp(2, coll.len(), k, eps).min(6);
        let grid: Vec<(CenterSet, f64)> = test_grid(&coll, k)
            .into_iter()
            .map(|f| {
                let c = gkm_cost(&coll, &f);
                (f, c)
            })
            .filter(|(_, c)| *c > 0.0)
            .collect();
        let mut best = f64::INFINITY;
        for cs in enumerate_candidate_coresets(&coll, 2, l, eps).expect("guarded") {
            streamed += 1;
            let mut dev = 0.0f64;
            for (f, full) in &grid {
                dev = dev.max((coreset_cost(&coll, &cs, f) / full - 1.0).abs());
                if dev >= best {
                    break;
                }
            }
            best = best.min(dev);
        }
        worst_best = worst_best.max(best);
        missing += u64::from(best.is_nan() || best >= 3.0 * eps);
    }
    let mut t = Tally::new();
    t.set("candidates_streamed", streamed);
    t.set("instances_without_candidate", missing);
    t.set("max_best_deviation", worst_best);
    t
}

fn c9(cfg: &VerifyConfig) -> Tally {
    let mut rng = substream(cfg.seed, 9);
    let eps = 0.5;
    let (mut bad, mut det_bad, mut worst_ratio, mut worst_det) = (0u64, 0u64, 0.0f64, 0.0f64);
    for i in 0..50 {
        let n = rng.gen_range(1..=10);
        let mut inst = random_existential(&mut rng, n, 2);
        let deterministic = i % 5 == 0;
        if deterministic {
            let pts = inst.support().to_vec();
            inst = ExistentialInstance::new(2, pts, vec![1.0; n])
                .expect("valid")
                .into();
        }
        let opts = SkcOptions {
            seed: cfg.seed.wrapping_add(i),
            exec: cfg.exec,
            ..Default::default()
        };
        let r = skc_pipeline(&inst, 1, eps, &opts).expect("pipeline");
        let (_, oracle) = oracle_kcenter(
            &inst,
            1,
            &OracleGrid {
                resolution: 16,
                zoom: 10,
            },
            cfg.exec,
        )
        .expect("guarded");
        if oracle.value > 0.0 {
            worst_ratio = worst_ratio.max(r.value / oracle.value);
        }
        bad += u64::from(r.value > (1.0 + eps) * oracle.value + 1e-12);
        if deterministic {
            let gap = (r.value - oracle.value).abs();
            worst_det = worst_det.max(gap);
            det_bad += u64::from(gap > 1e-6);
        }
    }
    let mut t = Tally::new();
    t.set("violations", bad);
    t.set("deterministic_mismatches", det_bad);
    t.set("max_ratio_to_oracle", worst_ratio);
    t.set("max_deterministic_gap", worst_det);
    t
}

fn c10(cfg: &VerifyConfig) -> Tally {
    let mut rng = substream(cfg.seed, 10);
    let (mut bad, mut checks, mut worst) = (0u64, 0u64, 0.0f64);
    for i in 0..50 {
        let eps = [0.2, 0.3, 0.5][i % 3];
        let n = rng.gen_range(1..=20);
        let pts = random_points(&mut rng, n, 2);
        let raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-3).collect();
        let target = eps * (0.05 + 0.94 * rng.gen::<f64>());
        let s: f64 = raw.iter().sum();
        let inst: Instance =
            ExistentialInstance::new(2, pts, raw.iter().map(|r| r * target / s).collect())
                .expect("valid")
                .into();
        for j in 0..=1 {
            let cs = case1_coreset(&inst, j, eps, Some(n), cfg.seed, &JflatOptions::default())
                .expect("small case");
            for _ in 0..100 {
                let f = random_flat(&mut rng, inst.support(), j);
                let truth = expected_flatcenter_exact(&inst, &f).expect("valid").value;
                let est = estimate_j(&cs, &f);
                checks += 1;
                if truth > 0.0 {
                    worst = worst.max((est / truth - 1.0).abs() / eps);
                }
                let slack = 1e-12 * truth.max(1e-300);
                bad += u64::from(
                    est < (1.0 - eps) * truth - slack || est > (1.0 + eps) * truth + slack,
                );
            }
        }
    }
    let mut t = Tally::new();
    t.set("checks", checks);
    t.set("violations", bad);
    t.set("max_error_over_eps", worst);
    t
}

fn c11(cfg: &VerifyConfig) -> Tally {
    let mut rng = substream(cfg.seed, 11);
    let eps = 0.2;
    let (mut outside_bad, mut failures, mut max_rel, mut max_outside) =
        (0u64, 0u64, 0.0f64, 0.0f64);
    for i in 0..20 {
        let n = rng.gen_range(2..=30);
        let pts = random_points(&mut rng, n, 2);
        let probs: Vec<f64> = (0..n).map(|_| 0.05 + 0.9 * rng.gen::<f64>()).collect();
        let inst: Instance = ExistentialInstance::new(2, pts, probs)
            .expect("valid")
            .into();
        let opts = SjfcOptions {
            seed: cfg.seed.wrapping_add(i),
            samples: 2000,
            exec: cfg.exec,
            ..Default::default()
        };
        let (cs, _, outside) = match build_coreset(&inst, 0, eps, &opts) {
            Ok(v) => v,
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        max_outside = max_outside.max(outside);
        outside_bad += u64::from(outside > eps);
        for _ in 0..50 {
            let f = random_flat(&mut rng, inst.support(), 0);
            let truth = expected_flatcenter_exact(&inst, &f).expect("valid").value;
            if truth > 0.0 {
                max_rel = max_rel.max((estimate_j(&cs, &f) / truth - 1.0).abs());
            }
        }
    }
    let delta = (max_rel - 4.0 * eps).max(0.0);
    let (mut det_bad, mut worst_det) = (0u64, 0.0f64);
    for i in 0..5 {
        let n = rng.gen_range(3..=30);
        let pts = random_points(&mut rng, n, 2);
        let (_, radius) = min_enclosing_ball(&pts);
        let inst: Instance = ExistentialInstance::new(2, pts, vec![1.0; n])
            .expect("valid")
            .into();
        let opts = SjfcOptions {
            seed: cfg.seed.wrapping_add(100 + i),
            samples: 2000,
            exec: cfg.exec,
            ..Default::default()
        };
        match sjfc_pipeline(&inst, 0, eps, &opts) {
            Ok(r) => {
                let gap = (r.value - radius).abs();
                worst_det = worst_det.max(gap);
                det_bad += u64::from(gap > 1e-4);
            }
            Err(_) => det_bad += 1,
        }
    }
    let mut t = Tally::new();
    t.set("construction_failures", failures);
    t.set("outside_mass_violations", outside_bad);
    t.set("max_outside_mass", max_outside);
    t.set("max_relative_error", max_rel);
    t.set("delta", delta);
    t.set("deterministic_mismatches", det_bad);
    t.set("max_deterministic_gap", worst_det);
    t
}

fn count(t: &Tally, key: &str) -> u64 {
    t.metrics
        .get(key)
        .and_then(Value::as_u64)
        .unwrap_or(u64::MAX)
}

fn real(t: &Tally, key: &str) -> f64 {
    t.metrics
        .get(key)
        .and_then(Value::as_f64)
        .unwrap_or(f64::NAN)
}

fn judge(id: u8, t: &Tally) -> (bool, String) {
    match id {
        1 => (
            count(t, "violations") == 0,
            format!(
                "{} checks, max error {:.2e}",
                count(t, "checks"),
                real(t, "max_abs_error_existential").max(real(t, "max_abs_error_locational"))
            ),
        ),
        2 => (
            count(t, "violations") == 0 && count(t, "size_bound_violations") == 0,
            format!(
                "{} checks, {} violations",
                count(t, "checks"),
                count(t, "violations")
            ),
        ),
        3 => (
            count(t, "radius_violations") == 0 && count(t, "idempotence_violations") == 0,
            format!("min r ratio {:.4}", real(t, "min_radius_ratio")),
        ),
        4 => (
            real(t, "max_abs_error") <= 1e-12 && real(t, "max_total_deviation") <= 1e-9,
            format!(
                "{} classes, max error {:.2e}",
                count(t, "classes"),
                real(t, "max_abs_error")
            ),
        ),
        5 => (
            real(t, "max_abs_error") <= 1e-12
                && real(t, "max_sequence_error") <= 1e-12
                && real(t, "max_total_deviation") <= 1e-9,
            format!(
                "{} sequences, max error {:.2e}",
                count(t, "sequences"),
                real(t, "max_abs_error").max(real(t, "max_sequence_error"))
            ),
        ),
        6 => (
            count(t, "violations") == 0,
            format!(
                "ratio range [{:.4}, {:.4}]",
                real(t, "min_ratio"),
                real(t, "max_ratio")
            ),
        ),
        7 => (
            count(t, "violations") == 0,
            format!("max total/(4k+3) {:.4}", real(t, "max_fraction_of_bound")),
        ),
        8 => (
            count(t, "instances_without_candidate") == 0,
            format!("worst best deviation {:.4}", real(t, "max_best_deviation")),
        ),
        9 => (
            count(t, "violations") == 0 && count(t, "deterministic_mismatches") == 0,
            format!(
                "max ratio {:.6}, deterministic gap {:.2e}",
                real(t, "max_ratio_to_oracle"),
                real(t, "max_deterministic_gap")
            ),
        ),
        10 => (
            count(t, "violations") == 0,
            format!("max error/eps {:.4}", real(t, "max_error_over_eps")),
        ),
        11 => (
            count(t, "construction_failures") == 0
                && count(t, "outside_mass_violations") == 0
                && real(t, "delta") <= 0.2
                && count(t, "deterministic_mismatches") == 0,
            format!(
                "delta {:.4}, max rel error {:.4}, deterministic gap {:.2e}",
                real(t, "delta"),
                real(t, "max_relative_error"),
                real(t, "max_deterministic_gap")
            ),
        ),
        _ => (false, String::new()),
    }
}

fn measure(id: u8, cfg: &VerifyConfig) -> Tally {
    match id {
        1 => c1(cfg),
        2 => c2(cfg),
        3 => c3(cfg),
        4 => c4(cfg),
        5 => c5(cfg),
        6 => c6(cfg),
        7 => c7(cfg),
        8 => c8(cfg),
        9 => c9(cfg),
        10 => c10(cfg),
        11 => c11(cfg),
        _ => Tally::new(),
    }
}

/// Runs one of the criteria 1 to 11.
pub fn run_criterion(id: u8, cfg: &VerifyConfig) -> Outcome {
    assert!(
        (1..=11).contains(&id),
        "criterion {id} is not a measurement"
    );
    let start = Instant::now();
    let t = measure(id, cfg);
    let (passed, summary) = judge(id, &t);
    Outcome {
        id,
        name: NAMES[id as usize - 1],
        passed,
        summary,
        metrics: t.metrics,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Small sweep used by the determinism check.
pub fn determinism_bench(seed: u64) -> BenchConfig {
    BenchConfig {
        ns: vec![6, 12],
        seed,
        samples: 300,
        ..Default::default()
    }
}

/// Re-runs criteria 1 to 11 and a bench sweep, comparing against `first`. The
/// second bench run uses the other execution policy.
pub fn run_determinism(cfg: &VerifyConfig, first: &[Outcome]) -> Outcome {
    let start = Instant::now();
    let mut t = Tally::new();
    let mut differing = Vec::new();
    for o in first.iter().filter(|o| o.id <= 11) {
        let again = run_criterion(o.id, cfg);
        if to_json17(&json!(o)) != to_json17(&json!(again)) {
            differing.push(o.id);
        }
    }
    let bench = determinism_bench(cfg.seed);
    let a = run_bench(&bench, cfg.exec).map(|s| strip_timing(&s));
    let other = match cfg.exec {
        Exec::Sequential => Exec::Parallel,
        Exec::Parallel => Exec::Sequential,
    };
    let b = run_bench(&bench, other).map(|s| strip_timing(&s));
    let bench_same = matches!((&a, &b), (Ok(x), Ok(y)) if x == y);
    t.set(
        "criteria_compared",
        first.iter().filter(|o| o.id <= 11).count(),
    );
    t.set("bench_identical", bench_same);
    t.set("differing_criteria", differing.clone());
    Outcome {
        id: 12,
        name: NAMES[11],
        passed: differing.is_empty() && bench_same,
        summary: format!(
            "{} criteria and a bench sweep re-run, {} differ",
            first.len(),
            differing.len() + usize::from(!bench_same)
        ),
        metrics: t.metrics,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs all twelve criteria, calling `report` after each.
pub fn run_all(cfg: &VerifyConfig, mut report: impl FnMut(&Outcome)) -> Vec<Outcome> {
    let mut out = Vec::new();
    for id in 1..=11 {
        let o = run_criterion(id, cfg);
        report(&o);
        out.push(o);
    }
    let o = run_determinism(cfg, &out);
    report(&o);
    out.push(o);
    out
}

/// The JSON report without timings.
pub fn report_json(cfg: &VerifyConfig, outcomes: &[Outcome]) -> Value {
    json!({
        "config": cfg,
        "passed": outcomes.iter().all(|o| o.passed),
        "criteria": outcomes,
    })
}

/// Checks on a supplied instance: the exact objective against enumeration and
/// every coreset class mass against grouped enumeration.
pub fn instance_checks(inst: &Instance, cfg: &VerifyConfig) -> stocenter::Result<Outcome> {
    let start = Instant::now();
    let mut rng = substream(cfg.seed, 0);
    let mut obj_err = 0.0f64;
    for i in 0..50 {
        let shape = Shape::Centers(random_centers(&mut rng, inst.support(), 1 + i % 2));
        let exact = expected_objective_exact(inst, &shape).value;
        obj_err = obj_err.max(rel_gap(
            exact,
            oracle_expected_objective(inst, &shape, cfg.exec)?.value,
        ));
    }
    let mut mass_err = 0.0f64;
    for k in 1..=2 {
        let oracle = oracle_partition_masses(inst, k, 0.5, cfg.exec)?;
        let part = Partition::new(inst, k, 0.5)?;
        for e in &oracle.entries {
            mass_err =
                mass_err.max((part.prob(&e.ids)? * (1.0 + cfg.perturb_weights) - e.weight).abs());
        }
    }
    let mut t = Tally::new();
    t.set("max_objective_error", obj_err);
    t.set("max_mass_error", mass_err);
    Ok(Outcome {
        id: 0,
        name: "supplied instance",
        passed: obj_err <= 1e-9 && mass_err <= 1e-12,
        summary: format!("objective error {obj_err:.2e}, mass error {mass_err:.2e}"),
        metrics: t.metrics,
        seconds: start.elapsed().as_secs_f64(),
    })
}
