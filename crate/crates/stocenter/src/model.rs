//! Stochastic point sets, realizations, centers and flats.

use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of free points enumerated in the existential model.
pub const MAX_EXISTENTIAL_ENUM: usize = 24;
/// Largest number of assignments enumerated in the locational model.
pub const MAX_LOCATIONAL_ENUM: u64 = 1 << 24;
/// Products over more factors than this are accumulated in log space.
pub const LOG_SPACE_THRESHOLD: usize = 50;

/// A point in d-dimensional Euclidean space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn origin(d: usize) -> Self {
        Point(vec![0.0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dist2(&self, other: &Point) -> f64 {
        dist2(&self.0, &other.0)
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.dist2(other).sqrt()
    }

    /// Total order on coordinates, used for canonical orderings.
    pub fn lex_cmp(&self, other: &Point) -> Ordering {
        lex_cmp(&self.0, &other.0)
    }
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Index of a support point, equal to its position in the input file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointId(pub usize);

fn check_points(d: usize, pts: &[Point], what: &str) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidInstance(
            "dimension must be at least 1".into(),
        ));
    }
    for (i, p) in pts.iter().enumerate() {
        if p.dim() != d {
            return Err(Error::InvalidInstance(format!(
                "{what} {i} has dimension {} (expected {d})",
                p.dim()
            )));
        }
        if p.0.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInstance(format!(
                "{what} {i} has a non-finite coordinate"
            )));
        }
    }
    Ok(())
}

fn check_prob(p: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidInstance(format!(
            "{what}: probability {p} outside [0,1]"
        )));
    }
    Ok(())
}

/// Existential model: point i is present independently with probability `probs[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExistentialInstance {
    d: usize,
    points: Vec<Point>,
    probs: Vec<f64>,
    total_prob: f64,
}

impl ExistentialInstance {
    pub fn new(d: usize, points: Vec<Point>, probs: Vec<f64>) -> Result<Self> {
        check_points(d, &points, "point")?;
        if points.len() != probs.len() {
            return Err(Error::InvalidInstance(
                "points and probabilities differ in length".into(),
            ));
        }
        for (i, &p) in probs.iter().enumerate() {
            check_prob(p, &format!("point {i}"))?;
        }
        let total_prob = probs.iter().sum();
        Ok(ExistentialInstance {
            d,
            points,
            probs,
            total_prob,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn n(&self) -> usize {
        self.points.len()
    }
    pub fn points(&self) -> &[Point] {
        &self.points
    }
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
    pub fn point(&self, id: PointId) -> &Point {
        &self.points[id.0]
    }
    pub fn prob(&self, id: PointId) -> f64 {
        self.probs[id.0]
    }
    /// B, the sum of all presence probabilities.
    pub fn total_prob(&self) -> f64 {
        self.total_prob
    }

    /// The sub-instance on `ids`, renumbered in the given order.
    pub fn restrict(&self, ids: &[PointId]) -> ExistentialInstance {
        let points = ids.iter().map(|&i| self.points[i.0].clone()).collect();
        let probs = ids.iter().map(|&i| self.probs[i.0]).collect::<Vec<_>>();
        ExistentialInstance {
            d: self.d,
            points,
            total_prob: probs.iter().sum(),
            probs,
        }
    }
}

/// Locational model: node i sits at location j with probability `probs[i][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocationalInstance {
    d: usize,
    locations: Vec<Point>,
    probs: Vec<Vec<f64>>,
}

impl LocationalInstance {
    pub fn new(d: usize, locations: Vec<Point>, probs: Vec<Vec<f64>>) -> Result<Self> {
        check_points(d, &locations, "location")?;
        for (i, row) in probs.iter().enumerate() {
            if row.len() != locations.len() {
                return Err(Error::InvalidInstance(format!(
                    "node {i} has {} probabilities for {} locations",
                    row.len(),
                    locations.len()
                )));
            }
            for &p in row {
                check_prob(p, &format!("node {i}"))?;
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidInstance(format!("node {i}: row sums to {s}")));
            }
        }
        Ok(LocationalInstance {
            d,
            locations,
            probs,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }
    /// Number of nodes.
    pub fn n(&self) -> usize {
        self.probs.len()
    }
    /// Number of locations.
    pub fn m(&self) -> usize {
        self.locations.len()
    }
    pub fn locations(&self) -> &[Point] {
        &self.locations
    }
    pub fn probs(&self) -> &[Vec<f64>] {
        &self.probs
    }
    pub fn location(&self, id: PointId) -> &Point {
        &self.locations[id.0]
    }

    /// Per-location mass p_j = Σ_i p_{ij}.
    pub fn location_mass(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.m()];
        for row in &self.probs {
            for (o, p) in out.iter_mut().zip(row) {
                *o += p;
            }
        }
        out
    }
}

/// A stochastic point set in either uncertainty model.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Existential(ExistentialInstance),
    Locational(LocationalInstance),
}

impl Instance {
    pub fn d(&self) -> usize {
        match self {
            Instance::Existential(e) => e.d(),
            Instance::Locational(l) => l.d(),
        }
    }

    /// All points that can ever be realized, indexed by `PointId`.
    pub fn support(&self) -> &[Point] {
        match self {
            Instance::Existential(e) => e.points(),
            Instance::Locational(l) => l.locations(),
        }
    }

    /// Whether the instance has exactly one realization of positive probability.
    pub fn is_deterministic(&self) -> bool {
        match self {
            Instance::Existential(e) => e.probs().iter().all(|&p| p == 0.0 || p == 1.0),
            Instance::Locational(l) => l
                .probs()
                .iter()
                .all(|r| r.iter().all(|&p| p == 0.0 || p == 1.0)),
        }
    }
}

impl From<ExistentialInstance> for Instance {
    fn from(e: ExistentialInstance) -> Self {
        Instance::Existential(e)
    }
}

impl From<LocationalInstance> for Instance {
    fn from(l: LocationalInstance) -> Self {
        Instance::Locational(l)
    }
}

/// One outcome of a stochastic instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Realization {
    /// Sorted ids of the present points.
    Existential(Vec<PointId>),
    /// Location of every node, in node order.
    Locational(Vec<PointId>),
}

impl Realization {
    /// Sorted distinct ids of the realized support points.
    pub fn point_ids(&self) -> Vec<PointId> {
        match self {
            Realization::Existential(ids) => ids.clone(),
            Realization::Locational(a) => {
                let mut ids = a.clone();
                ids.sort_unstable();
                ids.dedup();
                ids
            }
        }
    }

    pub fn points<'a>(&self, instance: &'a Instance) -> Vec<&'a Point> {
        let support = instance.support();
        self.point_ids()
            .into_iter()
            .map(|i| &support[i.0])
            .collect()
    }
}

fn product(factors: impl Iterator<Item = f64>, n: usize) -> f64 {
    if n > LOG_SPACE_THRESHOLD {
        let mut log = 0.0;
        for f in factors {
            if f == 0.0 {
                return 0.0;
            }
            log += f.ln();
        }
        log.exp()
    } else {
        factors.product()
    }
}

pub(crate) fn product_of(factors: &[f64]) -> f64 {
    product(factors.iter().copied(), factors.len())
}

/// Pr[⊨P] for a realization of `instance`.
pub fn realization_probability(instance: &Instance, realization: &Realization) -> Result<f64> {
    match (instance, realization) {
        (Instance::Existential(e), Realization::Existential(ids)) => {
            let mut present = vec![false; e.n()];
            for id in ids {
                if id.0 >= e.n() {
                    return Err(Error::InvalidArgument(format!("unknown point id {}", id.0)));
                }
                present[id.0] = true;
            }
            Ok(product(
                e.probs()
                    .iter()
                    .zip(&present)
                    .map(|(&p, &x)| if x { p } else { 1.0 - p }),
                e.n(),
            ))
        }
        (Instance::Locational(l), Realization::Locational(a)) => {
            if a.len() != l.n() || a.iter().any(|j| j.0 >= l.m()) {
                return Err(Error::InvalidArgument(
                    "assignment does not match instance".into(),
                ));
            }
            Ok(product(
                l.probs().iter().zip(a).map(|(row, j)| row[j.0]),
                l.n(),
            ))
        }
        _ => Err(Error::InvalidArgument(
            "realization model differs from instance model".into(),
        )),
    }
}

/// Draws one realization.
pub fn sample_realization<R: Rng + ?Sized>(instance: &Instance, rng: &mut R) -> Realization {
    match instance {
        Instance::Existential(e) => Realization::Existential(
            e.probs()
                .iter()
                .enumerate()
                .filter(|&(_, &p)| rng.gen::<f64>() < p)
                .map(|(i, _)| PointId(i))
                .collect(),
        ),
        Instance::Locational(l) => Realization::Locational(
            l.probs()
                .iter()
                .map(|row| PointId(draw_row(row, rng)))
                .collect(),
        ),
    }
}

pub(crate) fn draw_row<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (j, &p) in row.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = j;
            if u < acc {
                return j;
            }
        }
    }
    last
}

/// Index-addressable enumeration of all realizations of an instance.
#[derive(Debug, Clone)]
pub struct RealizationSpace<'a> {
    instance: &'a Instance,
    kind: SpaceKind,
    len: u64,
}

#[derive(Debug, Clone)]
enum SpaceKind {
    Existential { free: Vec<usize>, fixed: Vec<usize> },
    Locational { choices: Vec<Vec<usize>> },
}

impl<'a> RealizationSpace<'a> {
    /// With `keep_zero == false` only positive-probability realizations are
    /// addressed; points with p ∈ {0,1} and zero row entries are then fixed.
    pub fn new(instance: &'a Instance, keep_zero: bool) -> Result<Self> {
        match instance {
            Instance::Existential(e) => {
                let (free, fixed): (Vec<usize>, Vec<usize>) = if keep_zero {
                    ((0..e.n()).collect(), Vec::new())
                } else {
                    let free = (0..e.n())
                        .filter(|&i| e.probs[i] > 0.0 && e.probs[i] < 1.0)
                        .collect();
                    let fixed = (0..e.n()).filter(|&i| e.probs[i] == 1.0).collect();
                    (free, fixed)
                };
                if free.len() > MAX_EXISTENTIAL_ENUM {
                    return Err(Error::InstanceTooLarge(format!(
                        "{} uncertain points exceed the enumeration limit of {MAX_EXISTENTIAL_ENUM}",
                        free.len()
                    )));
                }
                let len = 1u64 << free.len();
                Ok(RealizationSpace {
                    instance,
                    kind: SpaceKind::Existential { free, fixed },
                    len,
                })
            }
            Instance::Locational(l) => {
                let choices: Vec<Vec<usize>> = l
                    .probs()
                    .iter()
                    .map(|row| {
                        (0..row.len())
                            .filter(|&j| keep_zero || row[j] > 0.0)
                            .collect()
                    })
                    .collect();
                let mut len: u64 = 1;
                for c in &choices {
                    len = len.saturating_mul(c.len() as u64);
                    if len > MAX_LOCATIONAL_ENUM {
                        return Err(Error::InstanceTooLarge(format!(
                            "more than {MAX_LOCATIONAL_ENUM} locational assignments"
                        )));
                    }
                }
                Ok(RealizationSpace {
                    instance,
                    kind: SpaceKind::Locational { choices },
                    len,
                })
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The `idx`-th realization and its probability.
    pub fn get(&self, idx: usize) -> (Realization, f64) {
        match (&self.kind, self.instance) {
            (SpaceKind::Existential { free, fixed }, Instance::Existential(e)) => {
                let mut ids: Vec<PointId> = fixed.iter().map(|&i| PointId(i)).collect();
                for (b, &i) in free.iter().enumerate() {
                    if idx >> b & 1 == 1 {
                        ids.push(PointId(i));
                    }
                }
                ids.sort_unstable();
                let r = Realization::Existential(ids);
                let p = realization_probability_unchecked_existential(e, &r);
                (r, p)
            }
            (SpaceKind::Locational { choices }, Instance::Locational(l)) => {
                let mut rest = idx;
                let mut a = vec![PointId(0); choices.len()];
                for (node, c) in choices.iter().enumerate().rev() {
                    a[node] = PointId(c[rest % c.len()]);
                    rest /= c.len();
                }
                let p = product(l.probs().iter().zip(&a).map(|(row, j)| row[j.0]), l.n());
                (Realization::Locational(a), p)
            }
            _ => unreachable!("space built from this instance"),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Realization, f64)> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }
}

fn realization_probability_unchecked_existential(e: &ExistentialInstance, r: &Realization) -> f64 {
    let Realization::Existential(ids) = r else {
        unreachable!()
    };
    let mut it = ids.iter().peekable();
    let factors = (0..e.n()).map(|i| {
        if it.peek().is_some_and(|id| id.0 == i) {
            it.next();
            e.probs[i]
        } else {
            1.0 - e.probs[i]
        }
    });
    product(factors, e.n())
}

/// Every realization with its probability.
///
/// Zero-probability realizations are skipped unless `keep_zero` is set.
pub fn enumerate_realizations(
    instance: &Instance,
    keep_zero: bool,
) -> Result<Vec<(Realization, f64)>> {
    let space = RealizationSpace::new(instance, keep_zero)?;
    Ok(space.iter().collect())
}

/// A multiset of k centers.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct CenterSet {
    centers: Vec<Point>,
}

impl CenterSet {
    pub fn new(centers: Vec<Point>) -> Result<Self> {
        let Some(first) = centers.first() else {
            return Err(Error::InvalidArgument(
                "a center set needs at least one center".into(),
            ));
        };
        let d = first.dim();
        for c in &centers {
            if c.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: c.dim(),
                });
            }
        }
        Ok(CenterSet { centers })
    }

    pub fn k(&self) -> usize {
        self.centers.len()
    }
    pub fn d(&self) -> usize {
        self.centers[0].dim()
    }
    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    /// Distance from `x` to its nearest center.
    pub fn distance(&self, x: &Point) -> f64 {
        self.centers
            .iter()
            .map(|c| x.dist2(c))
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }

    /// Index of the nearest center (smallest index among ties).
    pub fn nearest(&self, x: &Point) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (i, c) in self.centers.iter().enumerate() {
            let d = x.dist2(c);
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }

    /// Centers sorted lexicographically.
    pub fn canonical(&self) -> CenterSet {
        let mut centers = self.centers.clone();
        centers.sort_by(|a, b| a.lex_cmp(b));
        CenterSet { centers }
    }

    /// Lexicographic comparison of canonical forms.
    pub fn lex_cmp(&self, other: &CenterSet) -> Ordering {
        let (a, b) = (self.canonical(), other.canonical());
        for (x, y) in a.centers.iter().zip(&b.centers) {
            match x.lex_cmp(y) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        a.k().cmp(&b.k())
    }
}

/// A j-dimensional affine subspace given by a base point and an orthonormal basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Flat {
    base: Point,
    basis: Vec<Vec<f64>>,
}

impl Flat {
    pub fn new(base: Point, basis: Vec<Vec<f64>>) -> Result<Self> {
        let d = base.dim();
        if d == 0 || basis.len() >= d {
            return Err(Error::InvalidArgument(format!(
                "a {}-flat does not fit in dimension {d}",
                basis.len()
            )));
        }
        for (i, b) in basis.iter().enumerate() {
            if b.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: b.len(),
                });
            }
            for (l, c) in basis.iter().enumerate().skip(i) {
                let dot: f64 = b.iter().zip(c).map(|(x, y)| x * y).sum();
                let want = if l == i { 1.0 } else { 0.0 };
                if (dot - want).abs() > 1e-10 {
                    return Err(Error::InvalidArgument(
                        "flat basis is not orthonormal".into(),
                    ));
                }
            }
        }
        Ok(Flat { base, basis })
    }

    /// The 0-flat at `c`.
    pub fn point(c: Point) -> Self {
        Flat {
            base: c,
            basis: Vec::new(),
        }
    }

    /// The line through `base` along `dir` (normalized here).
    pub fn line(base: Point, dir: &[f64]) -> Result<Self> {
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm.is_nan() || norm <= 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument(
                "line direction must be nonzero".into(),
            ));
        }
        Flat::new(base, vec![dir.iter().map(|x| x / norm).collect()])
    }

    pub fn j(&self) -> usize {
        self.basis.len()
    }
    pub fn d(&self) -> usize {
        self.base.dim()
    }
    pub fn base(&self) -> &Point {
        &self.base
    }
    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Euclidean distance from `x` to the flat.
    pub fn distance(&self, x: &Point) -> f64 {
        let mut r: Vec<f64> = x.0.iter().zip(&self.base.0).map(|(a, b)| a - b).collect();
        for b in &self.basis {
            let dot: f64 = r.iter().zip(b).map(|(a, c)| a * c).sum();
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri -= dot * bi;
            }
        }
        r.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Either a center set (k-center) or a flat (j-flat-center).
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Centers(CenterSet),
    Flat(Flat),
}

impl Shape {
    pub fn d(&self) -> usize {
        match self {
            Shape::Centers(c) => c.d(),
            Shape::Flat(f) => f.d(),
        }
    }

    pub fn distance(&self, x: &Point) -> f64 {
        match self {
            Shape::Centers(c) => c.distance(x),
            Shape::Flat(f) => f.distance(x),
        }
    }
}

impl From<CenterSet> for Shape {
    fn from(c: CenterSet) -> Self {
        Shape::Centers(c)
    }
}

impl From<Flat> for Shape {
    fn from(f: Flat) -> Self {
        Shape::Flat(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ex(probs: &[f64]) -> Instance {
        let pts = (0..probs.len()).map(|i| Point(vec![i as f64])).collect();
        ExistentialInstance::new(1, pts, probs.to_vec())
            .unwrap()
            .into()
    }

    #[test]
    fn single_point_complement() {
        let all = enumerate_realizations(&ex(&[0.3]), false).unwrap();
        assert_eq!(all.len(), 2);
        assert_eq!(all[0], (Realization::Existential(vec![]), 0.7));
        assert_eq!(all[1], (Realization::Existential(vec![PointId(0)]), 0.3));
    }

    #[test]
    fn certain_points_collapse() {
        let inst = ex(&[1.0, 1.0]);
        let all = enumerate_realizations(&inst, false).unwrap();
        assert_eq!(
            all,
            vec![(Realization::Existential(vec![PointId(0), PointId(1)]), 1.0)]
        );
        let kept = enumerate_realizations(&inst, true).unwrap();
        assert_eq!(kept.len(), 4);
        assert_eq!(kept.iter().filter(|(_, p)| *p > 0.0).count(), 1);
    }

    #[test]
    fn locational_products() {
        let locs = vec![Point(vec![0.0]), Point(vec![1.0])];
        let inst: Instance = LocationalInstance::new(1, locs, vec![vec![0.5, 0.5], vec![0.2, 0.8]])
            .unwrap()
            .into();
        let probs: Vec<f64> = enumerate_realizations(&inst, false)
            .unwrap()
            .iter()
            .map(|r| r.1)
            .collect();
        assert_eq!(probs, vec![0.1, 0.4, 0.1, 0.4]);
    }

    #[test]
    fn probability_examples() {
        let r = Realization::Existential(vec![PointId(0)]);
        assert_eq!(realization_probability(&ex(&[0.5, 0.5]), &r).unwrap(), 0.25);
        let r = Realization::Existential(vec![PointId(1), PointId(2)]);
        let p = realization_probability(&ex(&[0.1, 0.2, 0.3]), &r).unwrap();
        assert!((p - 0.054).abs() < 1e-15);
    }

    #[test]
    fn log_space_matches_direct() {
        let probs: Vec<f64> = (0..60).map(|i| 0.2 + 0.01 * i as f64).collect();
        let inst = ex(&probs);
        let ids: Vec<PointId> = (0..60).step_by(3).map(PointId).collect();
        let p = realization_probability(&inst, &Realization::Existential(ids.clone())).unwrap();
        let direct: f64 = (0..60)
            .map(|i| if i % 3 == 0 { probs[i] } else { 1.0 - probs[i] })
            .product();
        assert!((p / direct - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let full = ex(&[1.0, 1.0, 1.0]);
        let none = ex(&[0.0, 0.0]);
        for _ in 0..100 {
            assert_eq!(sample_realization(&full, &mut rng).point_ids().len(), 3);
            assert!(sample_realization(&none, &mut rng).point_ids().is_empty());
        }
    }

    #[test]
    fn sampling_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let inst = ex(&[0.5]);
        let hits = (0..100_000)
            .filter(|_| !sample_realization(&inst, &mut rng).point_ids().is_empty())
            .count();
        assert!((hits as f64 / 1e5 - 0.5).abs() < 0.01);
    }

    #[test]
    fn guards() {
        let big = ex(&[0.5; 25]);
        assert!(matches!(
            enumerate_realizations(&big, false),
            Err(Error::InstanceTooLarge(_))
        ));
        let locs: Vec<Point> = (0..16).map(|i| Point(vec![i as f64])).collect();
        let rows = vec![vec![1.0 / 16.0; 16]; 7];
        let inst: Instance = LocationalInstance::new(1, locs, rows).unwrap().into();
        assert!(RealizationSpace::new(&inst, false).is_err());
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(ExistentialInstance::new(1, vec![Point(vec![0.0])], vec![1.5]).is_err());
        assert!(ExistentialInstance::new(2, vec![Point(vec![0.0])], vec![0.5]).is_err());
        assert!(LocationalInstance::new(1, vec![Point(vec![0.0])], vec![vec![0.9]]).is_err());
        assert!(Flat::new(Point(vec![0.0, 0.0]), vec![vec![1.0, 1.0]]).is_err());
    }

    #[test]
    fn flat_distance_examples() {
        let f = Flat::point(Point(vec![0.0, 0.0]));
        assert_eq!(f.distance(&Point(vec![3.0, 4.0])), 5.0);
        let line = Flat::new(Point(vec![0.0, 0.0]), vec![vec![1.0, 0.0]]).unwrap();
        assert_eq!(line.distance(&Point(vec![9.0, 2.0])), 2.0);
        assert_eq!(line.distance(&Point(vec![-4.0, 0.0])), 0.0);
    }
}
