//! Tail-probability and expectation experiments over adversarial perturbations of a center.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::lp::FeasibilityClass;
use crate::rng::RngStream;
use crate::sampler::CapSampler;
use crate::sic::cond_and_class;
use crate::sphere::angle_between_unit;

use super::bounds::{bound_emain, bound_f, bound_i, EmainBound};
use super::config::{CenterSource, ExperimentConfig};
use super::stats::{mean_and_se, Proportion};
use super::{par_map, stream_index};

/// Condition numbers above this are treated as infinite.
pub const OVERFLOW_COND: f64 = 1e15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample_index: u64,
    pub seed_hi: u64,
    pub seed_lo: u64,
    pub class: FeasibilityClass,
    pub rho: f64,
    pub cond: f64,
    /// `None` when `cond` overflows.
    pub ln_cond: Option<f64>,
    /// `√(m+n)(ln(m+n) + ln 𝒞)`, an iteration-count proxy for interior-point methods.
    pub ipm_proxy: Option<f64>,
    /// `max_i d(a_i, ā_i)`.
    pub max_displacement: f64,
}

impl SampleRecord {
    pub fn overflow(&self) -> bool {
        self.ln_cond.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub sample_index: u64,
    pub seed_hi: u64,
    pub seed_lo: u64,
    pub error: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub records: Vec<SampleRecord>,
    pub failures: Vec<SampleFailure>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub sf: usize,
    pub ip: usize,
    #[serde(rename = "if")]
    pub infeasible: usize,
    pub overflow: usize,
    pub failed: usize,
}

impl SampleBatch {
    pub fn counts(&self) -> Counts {
        let mut c = Counts { failed: self.failures.len(), ..Counts::default() };
        for r in &self.records {
            match r.class {
                FeasibilityClass::StrictlyFeasible => c.sf += 1,
                FeasibilityClass::IllPosed => c.ip += 1,
                FeasibilityClass::Infeasible => c.infeasible += 1,
            }
            c.overflow += r.overflow() as usize;
        }
        c
    }

    /// Errors if more than 0.1% of samples failed.
    pub fn check_failures(&self) -> Result<()> {
        let total = self.records.len() + self.failures.len();
        if self.failures.len() * 1000 > total {
            return Err(Error::TooManyFailures { failed: self.failures.len(), total });
        }
        Ok(())
    }
}

fn record_for(index: u64, stream: RngStream, center: &Instance<f64>, a: &Instance<f64>) -> Result<SampleRecord> {
    let r = cond_and_class(a)?;
    let finite = r.cond.is_finite() && r.cond <= OVERFLOW_COND;
    let ln_cond = finite.then(|| r.cond.ln());
    let mn = (a.m() + a.n()) as f64;
    let max_displacement = a
        .rows()
        .iter()
        .zip(center.rows())
        .map(|(x, c)| angle_between_unit(x.coords(), c.coords()))
        .fold(0.0, f64::max);
    Ok(SampleRecord {
        sample_index: index,
        seed_hi: stream.seed,
        seed_lo: stream.stream,
        class: r.class,
        rho: r.rho,
        cond: r.cond,
        ln_cond,
        ipm_proxy: ln_cond.map(|l| mn.sqrt() * (mn.ln() + l)),
        max_displacement,
    })
}

/// Draws `N` instances from `μ_Ā` and solves each; sample `i` uses stream `(seed, tag·2^40 + i)`.
pub fn draw_samples(cfg: &ExperimentConfig, center: &Instance<f64>, tag: u64) -> Result<SampleBatch> {
    let sampler = CapSampler::new(cfg.params.clone())?;
    let results = par_map(cfg.workers, cfg.samples, |i| {
        let stream = RngStream::new(cfg.seed, stream_index(tag, i as u64));
        sampler
            .sample_instance(center, stream)
            .and_then(|a| record_for(i as u64, stream, center, &a))
            .map_err(|e| SampleFailure {
                sample_index: i as u64,
                seed_hi: stream.seed,
                seed_lo: stream.stream,
                error: e.to_string(),
            })
    })?;
    let mut batch = SampleBatch::default();
    for r in results {
        match r {
            Ok(rec) => batch.records.push(rec),
            Err(f) => batch.failures.push(f),
        }
    }
    batch.check_failures()?;
    Ok(batch)
}

/// One grid point of the tail comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub t: f64,
    #[serde(rename = "emp_F")]
    pub emp_f: f64,
    #[serde(rename = "se_F")]
    pub se_f: f64,
    #[serde(rename = "bound_F")]
    pub bound_f: f64,
    /// `None` below the validity threshold of the feasible bound.
    #[serde(rename = "pass_F")]
    pub pass_f: Option<bool>,
    #[serde(rename = "vacuous_F")]
    pub vacuous_f: bool,
    #[serde(rename = "emp_I")]
    pub emp_i: f64,
    #[serde(rename = "se_I")]
    pub se_i: f64,
    #[serde(rename = "bound_I")]
    pub bound_i: f64,
    #[serde(rename = "pass_I")]
    pub pass_i: Option<bool>,
    #[serde(rename = "vacuous_I")]
    pub vacuous_i: bool,
    /// Whether the feasible bound's threshold holds at `t`.
    pub covered: bool,
}

impl TailRow {
    pub fn passed(&self) -> bool {
        self.pass_f != Some(false) && self.pass_i != Some(false)
    }
}

/// Empirical `P{SF ∧ 𝒞 >= t}` and `P{IF ∧ 𝒞 >= t}` against both bounds. Ill-posed samples
/// count toward neither class. The denominator is the number of solved samples; with no
/// samples every comparison is left undecided.
pub fn tail_table(batch: &SampleBatch, cfg: &ExperimentConfig) -> Vec<TailRow> {
    let total = batch.records.len();
    cfg.t_grid
        .iter()
        .map(|&t| {
            let count = |class| batch.records.iter().filter(|r| r.class == class && r.cond >= t).count();
            let pf = Proportion::new(count(FeasibilityClass::StrictlyFeasible), total);
            let pi = Proportion::new(count(FeasibilityClass::Infeasible), total);
            let bf = bound_f(t, &cfg.params, cfg.n, cfg.m);
            let bi = bound_i(t, &cfg.params, cfg.n, cfg.m);
            TailRow {
                t,
                emp_f: pf.estimate,
                se_f: pf.se,
                bound_f: bf.raw,
                pass_f: (bf.covered && total > 0).then(|| pf.below(bf.raw)),
                vacuous_f: bf.vacuous(),
                emp_i: pi.estimate,
                se_i: pi.se,
                bound_i: bi.raw,
                pass_i: (bi.covered && total > 0).then(|| pi.below(bi.raw)),
                vacuous_i: bi.vacuous(),
                covered: bf.covered,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub counts: Counts,
    pub table: Vec<TailRow>,
    pub batch: SampleBatch,
}

impl TailReport {
    pub fn passed(&self) -> bool {
        self.table.iter().all(TailRow::passed)
    }
}

pub fn run_tail_experiment(cfg: &ExperimentConfig) -> Result<TailReport> {
    cfg.validate()?;
    let center = cfg.center.build(cfg.n, cfg.m, cfg.seed)?;
    let batch = draw_samples(cfg, &center, 0)?;
    Ok(TailReport { counts: batch.counts(), table: tail_table(&batch, cfg), batch })
}

/// Mean of `ln 𝒞` with its bound for one center.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectationRow {
    pub center: String,
    pub mean: f64,
    /// `None` when fewer than two finite values were observed.
    pub se: Option<f64>,
    /// `None` when the bound is informational only (`β > 0`).
    pub bound: Option<f64>,
    /// `None` when the bound is informational or the precision gate failed.
    pub pass: Option<bool>,
    pub precision_ok: bool,
    pub used: usize,
    pub overflow: usize,
    pub failed: usize,
}

fn expectation_row(label: String, batch: &SampleBatch, cfg: &ExperimentConfig) -> ExpectationRow {
    let values: Vec<f64> = batch.records.iter().filter_map(|r| r.ln_cond).collect();
    let est = mean_and_se(&values);
    let bound = match bound_emain(&cfg.params, cfg.n, cfg.m) {
        EmainBound::Explicit(v) => Some(v),
        EmainBound::InformationalOnly => None,
    };
    let precision_ok = est.se.is_some_and(f64::is_finite);
    let pass = match (bound, est.se) {
        (Some(b), Some(se)) if precision_ok => Some(est.mean + 3.0 * se <= b),
        _ => None,
    };
    let counts = batch.counts();
    ExpectationRow {
        center: label,
        mean: est.mean,
        se: est.se,
        bound,
        pass,
        precision_ok,
        used: values.len(),
        overflow: counts.overflow,
        failed: counts.failed,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectationReport {
    pub mean: f64,
    pub se: Option<f64>,
    pub bound: Option<f64>,
    pub pass: Option<bool>,
    pub precision_ok: bool,
    pub overflow: usize,
    /// The configured center first, then the coincident and great-circle centers.
    pub sweep: Vec<ExpectationRow>,
    #[serde(skip)]
    pub counts: Counts,
    #[serde(skip)]
    pub batch: SampleBatch,
}

impl ExpectationReport {
    pub fn passed(&self) -> bool {
        self.sweep.iter().all(|r| r.pass != Some(false))
    }
}

pub fn run_expectation_experiment(cfg: &ExperimentConfig) -> Result<ExpectationReport> {
    cfg.validate()?;
    let center = cfg.center.build(cfg.n, cfg.m, cfg.seed)?;
    let batch = draw_samples(cfg, &center, 0)?;
    let main = expectation_row(cfg.center.label(), &batch, cfg);
    let mut sweep = vec![main.clone()];
    for (tag, source) in [(1, CenterSource::Coincident), (2, CenterSource::GreatCircle)] {
        let c = source.build(cfg.n, cfg.m, cfg.seed)?;
        let b = draw_samples(cfg, &c, tag)?;
        sweep.push(expectation_row(source.label(), &b, cfg));
    }
    Ok(ExpectationReport {
        mean: main.mean,
        se: main.se,
        bound: main.bound,
        pass: main.pass,
        precision_ok: main.precision_ok,
        overflow: main.overflow,
        sweep,
        counts: batch.counts(),
        batch,
    })
}
