//! Feasibility frequency of uniform random instances against the exact Wendel probability.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::origin_in_conv;
use crate::rng::RngStream;
use crate::sampler::uniform_sphere;

use super::bounds::{wendel_probability, Rational};
use super::config::ExperimentConfig;
use super::stats::Proportion;
use super::{par_map, stream_index};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WendelRow {
    pub k: usize,
    /// Exact value as a reduced fraction.
    pub p_exact: String,
    pub p: f64,
    pub p_hat: f64,
    pub se: f64,
    /// `4√(p(1-p)/N)`.
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialSum {
    pub upper: usize,
    pub sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WendelReport {
    pub m: usize,
    pub samples: usize,
    pub rows: Vec<WendelRow>,
    /// `Σ_{k=4m+1}^{K} k p(k, m)` for increasing `K`, exact formula only.
    pub partial_sums: Vec<PartialSum>,
    /// The same sum continued until terms drop below `1e-18`.
    pub series_limit: f64,
}

impl WendelReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Frequency with which `k` uniform points on `S^m` admit a nonzero `x` with `Ax <= 0`.
pub fn feasibility_frequency(m: usize, k: usize, samples: usize, seed: u64, workers: Option<usize>) -> Result<Proportion> {
    let hits = par_map(workers, samples, |i| {
        let s = RngStream::new(seed, stream_index(k as u64, i as u64));
        let pts: Vec<_> = (0..k).map(|j| uniform_sphere(m, &mut s.substream(j as u64))).collect();
        !origin_in_conv(&pts)
    })?;
    Ok(Proportion::new(hits.iter().filter(|h| **h).count(), samples))
}

fn wendel_partial_sums(m: usize, upper: usize) -> (Vec<PartialSum>, f64) {
    let start = 4 * m + 1;
    let mut sums = Vec::new();
    let mut acc = 0.0;
    let mut k = start;
    loop {
        let term = k as f64 * wendel_probability::<f64>(k, m);
        acc += term;
        if k <= upper.max(start + 15) {
            sums.push(PartialSum { upper: k, sum: acc });
        }
        if term < 1e-18 && k > upper {
            break;
        }
        k += 1;
    }
    (sums, acc)
}

pub fn run_wendel_experiment(cfg: &ExperimentConfig) -> Result<WendelReport> {
    cfg.validate()?;
    let (lo, hi) = cfg.k_range;
    if lo <= cfg.m {
        return Err(Error::Config(format!("Wendel range needs k > m; got k = {lo}")));
    }
    let mut rows = Vec::new();
    for k in lo..=hi {
        let exact: Rational = wendel_probability(k, cfg.m);
        let p = wendel_probability::<f64>(k, cfg.m);
        let freq = feasibility_frequency(cfg.m, k, cfg.samples, cfg.seed, cfg.workers)?;
        let tolerance = 4.0 * (p * (1.0 - p) / cfg.samples as f64).sqrt();
        rows.push(WendelRow {
            k,
            p_exact: exact.to_string(),
            p,
            p_hat: freq.estimate,
            se: freq.se,
            tolerance,
            pass: (freq.estimate - p).abs() <= tolerance,
        });
    }
    let (partial_sums, series_limit) = wendel_partial_sums(cfg.m, hi);
    Ok(WendelReport { m: cfg.m, samples: cfg.samples, rows, partial_sums, series_limit })
}
