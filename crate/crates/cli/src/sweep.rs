//! Ordered parallel map over grid points.
//!
//! Each point is computed by a pure function and results are collected in
//! input order, so the output is bit-identical for any worker count.

use rayon::prelude::*;

use crate::error::{CliError, Result};

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

pub fn sweep<T, R, F>(items: &[T], workers: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Config(vec![format!("cannot start {workers} workers: {e}")]))?;
    // the first failure in input order is reported
    pool.install(|| items.par_iter().map(&f).collect::<Vec<_>>())
        .into_iter()
        .collect()
}
