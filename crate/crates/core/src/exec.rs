//! Execution strategy for the data-parallel loops (Monte Carlo trials,
//! subset enumeration, placement sweeps).
//!
//! Every loop routed through here is order-independent: results are pure
//! functions of the index, so both strategies return identical values.
//! The rayon path is compiled only with the `parallel` feature.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

impl Exec {
    /// Counts indices in `0..n` for which `pred` holds.
    pub fn count<F>(self, n: u64, pred: F) -> u64
    where
        F: Fn(u64) -> bool + Sync + Send,
    {
        match self {
            Exec::Sequential => (0..n).filter(|&i| pred(i)).count() as u64,
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().filter(|&i| pred(i)).count() as u64,
        }
    }

    /// First item (in slice order) satisfying `pred`.
    pub fn find_first<T, F>(self, items: &[T], pred: F) -> Option<&T>
    where
        T: Sync,
        F: Fn(&T) -> bool + Sync + Send,
    {
        match self {
            Exec::Sequential => items.iter().find(|t| pred(t)),
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_iter().find_first(|t| pred(t)),
        }
    }

    /// Maps every item, preserving order.
    pub fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        match self {
            Exec::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_iter().map(f).collect(),
        }
    }

    pub fn all<T, F>(self, items: &[T], pred: F) -> bool
    where
        T: Sync,
        F: Fn(&T) -> bool + Sync + Send,
    {
        match self {
            Exec::Sequential => items.iter().all(pred),
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_iter().all(pred),
        }
    }
}
