//! Execution strategy for the data-parallel inner loops (catalog scans,
//! scoring, pairwise joinability).
//!
//! With the `parallel` feature enabled the [`Execution::Parallel`] strategy
//! runs on the rayon global pool. Without it, every strategy runs
//! sequentially, so callers never need to cfg-gate their own code.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below these sizes the rayon split costs more than the work itself, so
/// `Parallel` runs inline.
#[cfg(feature = "parallel")]
const MIN_PARALLEL_ITEMS: usize = 2048;
#[cfg(feature = "parallel")]
const MIN_PARALLEL_RANGE: usize = 128;

/// How a batch operation is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// True when this strategy actually fans out across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Keeps the items for which `keep` returns true, preserving input order.
    pub fn filter<T, F>(self, items: &[T], keep: F) -> Vec<T>
    where
        T: Clone + Send + Sync,
        F: Fn(&T) -> bool + Send + Sync,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() && items.len() >= MIN_PARALLEL_ITEMS {
            return items.par_iter().filter(|t| keep(t)).cloned().collect();
        }
        items.iter().filter(|t| keep(t)).cloned().collect()
    }

    /// Maps every item, preserving input order.
    pub fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Send + Sync,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() && items.len() >= MIN_PARALLEL_ITEMS {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Maps every index in `0..len` and flattens the results, preserving
    /// index order.
    pub fn flat_map_range<U, F>(self, len: usize, f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(usize) -> Vec<U> + Send + Sync,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() && len >= MIN_PARALLEL_RANGE {
            return (0..len).into_par_iter().flat_map_iter(f).collect();
        }
        (0..len).flat_map(f).collect()
    }
}
