//! Monte Carlo experiments comparing empirical behavior of `𝒞(A)` with closed-form bounds.
//!
//! Every sample is an independent work item with its own [`RngStream`](crate::rng::RngStream);
//! results are collected in sample-index order, so outputs do not depend on the worker count.

pub mod bounds;
pub mod config;
pub mod persist;
pub mod properties;
pub mod sampler_check;
pub mod stats;
pub mod tail;
pub mod tube;
pub mod wendel;

use rayon::prelude::*;

use crate::error::{Error, Result};

pub use config::{CenterSource, ExperimentConfig, ExperimentKind, TubeCase};
pub use persist::{run_experiment, write_outputs, Summary};

/// Evaluates `f(0..len)` on a pool of `workers` threads (machine default when `None`),
/// returning results in index order.
pub(crate) fn par_map<R, F>(workers: Option<usize>, len: usize, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| (0..len).into_par_iter().map(f).collect()))
}

/// Stream index for sample `i` of sub-experiment `tag`.
pub(crate) fn stream_index(tag: u64, i: u64) -> u64 {
    (tag << 40) | i
}
