//! Execution policy for the data-parallel loops.
//!
//! Every parallel helper returns results in index order, so reductions
//! performed afterwards are identical under both policies.

/// Sequential or data-parallel execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Whether this policy actually runs on the thread pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// `(0..n).map(f)` collected in order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Maps a slice in order.
    pub fn map_slice<'a, A, T, F>(self, items: &'a [A], f: F) -> Vec<T>
    where
        A: Sync,
        T: Send,
        F: Fn(&'a A) -> T + Sync + Send,
    {
        self.map(items.len(), |i| f(&items[i]))
    }

    /// Splits `0..n` into fixed chunks, maps each chunk range, and returns the
    /// per-chunk results in order. The chunking does not depend on the policy.
    pub fn map_chunks<T, F>(self, n: usize, chunk: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
    {
        let chunk = chunk.max(1);
        let chunks = n.div_ceil(chunk);
        self.map(chunks, |c| f(c * chunk..((c + 1) * chunk).min(n)))
    }
}
