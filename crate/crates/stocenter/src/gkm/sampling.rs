use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use super::{GeneralizedCoreset, SensitivityEstimate, WeightedCollection};
use crate::error::{Error, Result};

/// Largest allowed |𝐒|^M · M^(L+1) for enumeration.
pub const MAX_CANDIDATES: f64 = 1e7;

/// ⌈(10/ε)(ln M + ln N + ln k)⌉, at least 1.
pub fn default_l_exp(m: usize, n: usize, k: usize, eps: f64) -> usize {
    let logs = (m.max(1) as f64).ln() + (n.max(1) as f64).ln() + (k.max(1) as f64).ln();
    ((10.0 / eps) * logs).ceil().max(1.0) as usize
}

/// M draws with replacement, Pr(Sᵢ) ∝ qᵢ, each adding q_𝐒·wᵢ/(qᵢ·M).
pub fn importance_sample_coreset<R: Rng + ?Sized>(
    coll: &WeightedCollection,
    est: &SensitivityEstimate,
    m: usize,
    rng: &mut R,
) -> Result<GeneralizedCoreset> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "coreset size M must be at least 1".into(),
        ));
    }
    if est.q.len() != coll.len() {
        return Err(Error::DimensionMismatch {
            expected: coll.len(),
            got: est.q.len(),
        });
    }
    if coll.is_empty() {
        return Ok(GeneralizedCoreset {
            entries: Vec::new(),
        });
    }
    let dist = WeightedIndex::new(&est.q)
        .map_err(|e| Error::InvalidArgument(format!("sampling scores: {e}")))?;
    let q_total: f64 = est.q.iter().sum();
    let mut weight = vec![0.0; coll.len()];
    for _ in 0..m {
        let i = dist.sample(rng);
        weight[i] += q_total * coll.sets()[i].weight / (est.q[i] * m as f64);
    }
    let entries = weight
        .into_iter()
        .enumerate()
        .filter(|&(_, w)| w > 0.0)
        .collect();
    Ok(GeneralizedCoreset { entries })
}

/// All subcollections of size 1..=M, each crossed with every exponent
/// sequence in [0, L]^size; weight (1+ε)^a·w/M.
#[derive(Debug, Clone)]
pub struct CandidateStream<'a> {
    coll: &'a WeightedCollection,
    m: usize,
    l_exp: usize,
    base: f64,
    subset: Vec<usize>,
    exps: Vec<usize>,
    done: bool,
}

/// Streams candidate coresets in lexicographic order of (size, subset, exponents).
pub fn enumerate_candidate_coresets(
    coll: &WeightedCollection,
    m: usize,
    l_exp: usize,
    eps: f64,
) -> Result<CandidateStream<'_>> {
    let n = coll.len() as f64;
    let size = n.powi(m as i32) * (m as f64).powi(l_exp as i32 + 1);
    if size > MAX_CANDIDATES {
        return Err(Error::EnumerationGuardExceeded {
            size,
            limit: MAX_CANDIDATES,
        });
    }
    let done = coll.is_empty() || m == 0;
    Ok(CandidateStream {
        coll,
        m,
        l_exp,
        base: 1.0 + eps,
        subset: vec![0],
        exps: vec![0],
        done,
    })
}

impl CandidateStream<'_> {
    fn current(&self) -> GeneralizedCoreset {
        let m = self.m as f64;
        let entries = self
            .subset
            .iter()
            .zip(&self.exps)
            .map(|(&i, &a)| (i, self.base.powi(a as i32) * self.coll.sets()[i].weight / m))
            .collect();
        GeneralizedCoreset { entries }
    }

    fn advance(&mut self) {
        for e in self.exps.iter_mut().rev() {
            if *e < self.l_exp {
                *e += 1;
                return;
            }
            *e = 0;
        }
        let n = self.coll.len();
        let s = self.subset.len();
        let mut i = s;
        while i > 0 {
            i -= 1;
            if self.subset[i] < n - s + i {
                self.subset[i] += 1;
                for j in i + 1..s {
                    self.subset[j] = self.subset[j - 1] + 1;
                }
                return;
            }
        }
        if s < self.m.min(n) {
            self.subset = (0..=s).collect();
            self.exps = vec![0; s + 1];
        } else {
            self.done = true;
        }
    }
}

impl Iterator for CandidateStream<'_> {
    type Item = GeneralizedCoreset;

    fn next(&mut self) -> Option<GeneralizedCoreset> {
        if self.done {
            return None;
        }
        let out = self.current();
        self.advance();
        Some(out)
    }
}
