//! Data-parallel map kernel with a sequential fallback.
//!
//! All evaluation batches (population screens, candidate promotions, oracle
//! sweeps, random-search budgets) go through [`map_indexed`]. With the
//! `parallel` feature the kernel runs on rayon's current thread pool; without
//! it the same call compiles to a plain loop. Results come back in input
//! order either way, so the choice never affects outputs.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `items`, preserving input order in the output.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> U + Sync,
{
    items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect()
}

/// Map `f` over `items`, preserving input order in the output.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> U + Sync,
{
    items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
}

/// Always-sequential variant, kept as the reference path for benchmarks.
pub fn map_indexed_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(usize, &T) -> U,
{
    items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
}
