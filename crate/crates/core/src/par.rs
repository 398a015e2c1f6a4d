//! Data-parallel helpers with a sequential fallback.
//!
//! Built with the `parallel` feature (the default) these dispatch to rayon;
//! without it they degrade to plain iteration so the crate stays dependency
//! free on single-threaded targets. Benchmarks compare both paths.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map over a slice, in parallel when the `parallel` feature is enabled.
#[cfg(feature = "parallel")]
pub fn maybe_par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn maybe_par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Sequential map with the same signature, kept as the benchmark baseline.
pub fn seq_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// True when rayon is compiled in.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}
