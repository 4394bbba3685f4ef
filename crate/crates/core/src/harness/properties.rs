//! Randomized checks of four structural facts used in the tail-bound proofs:
//!
//! * AF: a strictly feasible `A` with `𝒞(A) >= (m+1)/ε` has a row `a_i ∉ K_i` within `φ`
//!   of `∂K_i`, where `K_i = -sconv(A \ a_i)` and `ε = sin φ`.
//! * IF: for `b ∈ K_A = -sconv(A)`, `𝒞(A, b) · sin d(b, ∂K_A) <= 10 𝒞(A)`.
//! * CCine: if the prefix `A_{k+1}` is infeasible then `𝒞(A_{k+1}) >= 𝒞(A)`.
//! * Product tails: `P{UV >= x}` obeys the bound for variables with power tails.

use serde::{Deserialize, Serialize};

use crate::cone::{contains, distance_to_boundary, SpherePolytope};
use crate::error::Result;
use crate::instance::Instance;
use crate::lp::FeasibilityClass;
use crate::rng::{RngStream, Substream};
use crate::sampler::{uniform_sphere, AdversarialParams, CapSampler};
use crate::sic::{cond_and_class, prefix_cond_profile};
use crate::sphere::SpherePoint;

use super::bounds::product_tail_bound;
use super::config::{geometric_grid, ExperimentConfig};
use super::stats::Proportion;
use super::{par_map, stream_index};

/// Below this many qualifying samples a check is inconclusive.
pub const MIN_QUALIFYING: usize = 20;
/// Proposal cap when drawing `b ∈ K_A` by rejection.
pub const MAX_PROPOSALS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub drawn: usize,
    pub qualifying: usize,
    pub violations: usize,
    /// Samples dropped before the check could run (e.g. rejection budget exhausted).
    pub skipped: usize,
    /// Smallest slack `rhs - lhs` over qualifying samples, in the check's own units.
    pub min_slack: Option<f64>,
    pub status: CheckStatus,
}

impl CheckReport {
    fn new(name: &str, drawn: usize, outcomes: &[Outcome]) -> Self {
        let mut qualifying = 0;
        let mut violations = 0;
        let mut skipped = 0;
        let mut min_slack: Option<f64> = None;
        for o in outcomes {
            match *o {
                Outcome::NotQualifying => {}
                Outcome::Skipped => skipped += 1,
                Outcome::Checked { ok, slack } => {
                    qualifying += 1;
                    violations += (!ok) as usize;
                    min_slack = Some(min_slack.map_or(slack, |s| s.min(slack)));
                }
            }
        }
        let status = Self::status_for(qualifying, violations);
        CheckReport { name: name.into(), drawn, qualifying, violations, skipped, min_slack, status }
    }

    fn status_for(qualifying: usize, violations: usize) -> CheckStatus {
        if violations > 0 {
            CheckStatus::Fail
        } else if qualifying < MIN_QUALIFYING {
            CheckStatus::Inconclusive
        } else {
            CheckStatus::Pass
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Outcome {
    NotQualifying,
    Skipped,
    Checked { ok: bool, slack: f64 },
}

fn others(a: &Instance<f64>, i: usize) -> Vec<SpherePoint<f64>> {
    a.rows().iter().enumerate().filter(|(j, _)| *j != i).map(|(_, r)| r.clone()).collect()
}

/// Rows close to the great subsphere `q^⊥`, all on the `q` side, so `A` is strictly
/// feasible with a large condition number.
pub fn near_ill_posed_instance(n: usize, m: usize, height: f64, rng: &mut Substream) -> Result<Instance<f64>> {
    let q = rng.unit_vector(m + 1);
    let rows = (0..n)
        .map(|_| {
            let g = rng.unit_vector(m + 1);
            let gq: f64 = g.iter().zip(&q).map(|(x, y)| x * y).sum();
            let y: Vec<f64> = g.iter().zip(&q).map(|(x, y)| x - gq * y).collect();
            let ny = crate::linalg::norm(&y);
            let h = height * rng.uniform();
            let c = (1.0 - h * h).sqrt();
            SpherePoint::normalized(y.iter().zip(&q).map(|(yy, qq)| c * yy / ny + h * qq).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Instance::new(rows)
}

fn af_outcome(a: &Instance<f64>, phi: f64) -> Result<Outcome> {
    let m = a.m();
    let eps = phi.sin();
    let r = cond_and_class(a)?;
    if r.class != FeasibilityClass::StrictlyFeasible || r.cond < (m as f64 + 1.0) / eps {
        return Ok(Outcome::NotQualifying);
    }
    let mut best = f64::INFINITY;
    for i in 0..a.n() {
        let k = SpherePolytope::negated(&others(a, i))?;
        let x = &a.rows()[i];
        if !contains(x, &k)? {
            best = best.min(distance_to_boundary(x, &k)?);
        }
    }
    let slack = phi + 1e-6 - best;
    Ok(Outcome::Checked { ok: slack >= 0.0, slack })
}

pub fn check_af(m: usize, n: usize, phi: f64, draws: usize, seed: u64, workers: Option<usize>) -> Result<CheckReport> {
    let height = 1.5 * phi.sin() / (m as f64 + 1.0);
    let outcomes = par_map(workers, draws, |i| {
        let mut rng = RngStream::new(seed, stream_index(10, i as u64)).substream(0);
        near_ill_posed_instance(n, m, height, &mut rng).and_then(|a| af_outcome(&a, phi))
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(CheckReport::new("AF", draws, &outcomes))
}

fn if_outcome(a: &Instance<f64>, proposals: &CapSampler, rng: &mut Substream) -> Result<Outcome> {
    let ra = cond_and_class(a)?;
    if ra.class != FeasibilityClass::StrictlyFeasible {
        return Ok(Outcome::NotQualifying);
    }
    let k = SpherePolytope::negated(a.rows())?;
    let pole = SpherePoint::basis(a.m() + 1, 0).antipode();
    for _ in 0..MAX_PROPOSALS {
        let b = proposals.sample(&pole, rng)?;
        if !contains(&b, &k)? {
            continue;
        }
        let d = distance_to_boundary(&b, &k)?;
        let rab = cond_and_class(&a.extended(b)?)?;
        if rab.class == FeasibilityClass::StrictlyFeasible {
            return Ok(Outcome::Checked { ok: false, slack: f64::NEG_INFINITY });
        }
        let lhs = rab.cond * d.sin();
        let rhs = 10.0 * ra.cond * (1.0 + 1e-6);
        return Ok(Outcome::Checked { ok: lhs <= rhs, slack: (rhs - lhs) / ra.cond });
    }
    Ok(Outcome::Skipped)
}

/// Rows from `μ` around `e_0`; `b` uniform in `K_A` by rejection from `B(-e_0, α)`, which
/// contains `K_A` because `sconv(A) ⊆ B(e_0, α)`.
pub fn check_if(params: &AdversarialParams, n: usize, draws: usize, seed: u64, workers: Option<usize>) -> Result<CheckReport> {
    let m = params.m;
    let rows = CapSampler::new(params.clone())?;
    let proposals = CapSampler::new(AdversarialParams::uniform(m, params.alpha)?)?;
    let center = Instance::new(vec![SpherePoint::basis(m + 1, 0); n])?;
    let outcomes = par_map(workers, draws, |i| {
        let stream = RngStream::new(seed, stream_index(11, i as u64));
        let a = rows.sample_instance(&center, stream)?;
        if_outcome(&a, &proposals, &mut stream.substream(n as u64))
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(CheckReport::new("IF", draws, &outcomes))
}

/// Instance size for the prefix check; long enough that infeasible prefixes are common.
pub fn ccine_rows(m: usize, n: usize) -> usize {
    n.max(2 * m + 4)
}

fn ccine_outcome(a: &Instance<f64>) -> Result<Outcome> {
    let profile = prefix_cond_profile(a)?;
    let full = profile.last().expect("profile ends at n").cond;
    let tol = 1e-9 * (1.0 + full * full);
    let mut slack: Option<f64> = None;
    for e in profile.iter().filter(|e| e.k < a.n() && e.class == FeasibilityClass::Infeasible) {
        let s = e.cond - full + tol;
        slack = Some(slack.map_or(s, |x: f64| x.min(s)));
    }
    Ok(match slack {
        None => Outcome::NotQualifying,
        Some(s) => Outcome::Checked { ok: s >= 0.0, slack: s },
    })
}

pub fn check_ccine(m: usize, n: usize, draws: usize, seed: u64, workers: Option<usize>) -> Result<CheckReport> {
    let n = ccine_rows(m, n);
    let outcomes = par_map(workers, draws, |i| {
        let s = RngStream::new(seed, stream_index(12, i as u64));
        let a = Instance::new((0..n).map(|j| uniform_sphere(m, &mut s.substream(j as u64))).collect())?;
        ccine_outcome(&a)
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(CheckReport::new("CCine", draws, &outcomes))
}

/// Parameters of the synthetic product-tail check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductTailSetup {
    pub c: f64,
    pub x_u: f64,
    pub x_v: f64,
    /// `V` depends on `U` when set, with the conditional tail still bounded by `β x^{-c}`.
    pub dependent: bool,
}

impl ProductTailSetup {
    /// Tail constants `α = x_U^c`, `β = x_V^c` of the Pareto constructions below.
    pub fn constants(&self) -> (f64, f64) {
        (self.x_u.powf(self.c), self.x_v.powf(self.c))
    }

    /// `U = x_U W_1^{-1/c}`; `V = x_V max(1, W_2^{-1/c} s(U))` with `s ≡ 1` or `s(U) = x_U/U`.
    pub fn draw(&self, rng: &mut Substream) -> (f64, f64) {
        let u = self.x_u * rng.uniform().powf(-1.0 / self.c);
        let shrink = if self.dependent { self.x_u / u } else { 1.0 };
        let v = self.x_v * (rng.uniform().powf(-1.0 / self.c) * shrink).max(1.0);
        (u, v)
    }
}

pub fn check_product_tail(setup: ProductTailSetup, draws: usize, seed: u64, workers: Option<usize>) -> Result<CheckReport> {
    let tag = 13 + setup.dependent as u64;
    let products = par_map(workers, draws, |i| {
        let (u, v) = setup.draw(&mut RngStream::new(seed, stream_index(tag, i as u64)).substream(0));
        u * v
    })?;
    let (alpha, beta) = setup.constants();
    let grid = geometric_grid(1.0, 1e4, 16);
    let outcomes: Vec<Outcome> = grid
        .iter()
        .map(|&x| {
            let p = Proportion::new(products.iter().filter(|&&w| w >= x).count(), draws);
            let bound = product_tail_bound(x, alpha, beta, setup.x_u, setup.x_v, setup.c);
            let slack = bound - (p.estimate - 3.0 * p.se);
            Outcome::Checked { ok: slack >= 0.0, slack }
        })
        .collect();
    let name = if setup.dependent { "multrva-dependent" } else { "multrva-independent" };
    let mut r = CheckReport::new(name, draws, &outcomes);
    // every draw enters every grid point
    r.qualifying = if r.qualifying > 0 { draws } else { 0 };
    r.status = CheckReport::status_for(r.qualifying, r.violations);
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertySuiteReport {
    pub phi: f64,
    pub checks: Vec<CheckReport>,
}

impl PropertySuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn conclusive(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Inconclusive)
    }
}

pub fn run_property_suite(cfg: &ExperimentConfig) -> Result<PropertySuiteReport> {
    cfg.validate()?;
    let (m, n, draws, seed, w) = (cfg.m, cfg.n, cfg.samples, cfg.seed, cfg.workers);
    let mut checks = vec![
        check_af(m, n, cfg.phi, draws, seed, w)?,
        check_if(&cfg.params, n, draws, seed, w)?,
        check_ccine(m, n, draws, seed, w)?,
    ];
    for dependent in [false, true] {
        let setup = ProductTailSetup { c: 0.5, x_u: 2.0, x_v: 3.0, dependent };
        checks.push(check_product_tail(setup, draws * 100, seed, w)?);
    }
    Ok(PropertySuiteReport { phi: cfg.phi, checks })
}
