use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::io::read_instance;
use crate::rng::RngStream;
use crate::sampler::{uniform_sphere, AdversarialParams};
use crate::sphere::SpherePoint;

use super::bounds::f_threshold;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Tail,
    Expectation,
    Wendel,
    Tube,
    SamplerCheck,
    PropertySuite,
}

/// Where the center instance `Ā` comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "path", rename_all = "kebab-case")]
pub enum CenterSource {
    File(PathBuf),
    /// Uniform rows drawn from the reserved stream [`CENTER_STREAM`] of the master seed.
    Random,
    /// All rows equal to `e_0`.
    Coincident,
    /// Rows equally spaced on the great circle through `e_0` and `e_1`.
    GreatCircle,
}

/// Stream index reserved for drawing a random center; sample streams count up from zero.
pub const CENTER_STREAM: u64 = u64::MAX;

impl CenterSource {
    pub fn label(&self) -> String {
        match self {
            CenterSource::File(p) => format!("file:{}", p.display()),
            CenterSource::Random => "random".into(),
            CenterSource::Coincident => "coincident".into(),
            CenterSource::GreatCircle => "great-circle".into(),
        }
    }

    pub fn build(&self, n: usize, m: usize, seed: u64) -> Result<Instance<f64>> {
        let a = match self {
            CenterSource::File(p) => read_instance(p)?,
            CenterSource::Random => {
                let s = RngStream::new(seed, CENTER_STREAM);
                Instance::new((0..n).map(|i| uniform_sphere(m, &mut s.substream(i as u64))).collect())?
            }
            CenterSource::Coincident => Instance::new(vec![SpherePoint::basis(m + 1, 0); n])?,
            CenterSource::GreatCircle => Instance::new(
                (0..n)
                    .map(|i| {
                        let t = 2.0 * PI * i as f64 / n as f64;
                        let mut v = vec![0.0; m + 1];
                        v[0] = t.cos();
                        v[1] = t.sin();
                        SpherePoint::from_unit_unchecked(v)
                    })
                    .collect(),
            )?,
        };
        if a.n() != n || a.m() != m {
            return Err(Error::Config(format!(
                "center instance is {} x S^{}, configuration expects {n} x S^{m}",
                a.n(),
                a.m()
            )));
        }
        Ok(a)
    }
}

/// One tube-volume configuration: `K = B(c, kappa)`, sampling caps `B(±a, α)` with
/// `d(a, c) = offset`, neighborhood radius `φ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeCase {
    pub m: usize,
    pub alpha: f64,
    pub phi: f64,
    pub kappa: f64,
    pub offset: f64,
}

impl TubeCase {
    pub fn sigma(&self) -> f64 {
        self.alpha.sin()
    }

    pub fn eps(&self) -> f64 {
        self.phi.sin()
    }

    /// Three placements per dimension: `a` on `∂K` with `ε = σ/8`, `a` inside `K` with the
    /// sampling cap straddling `∂K`, and `a` outside `K`.
    pub fn battery(m: usize) -> Vec<TubeCase> {
        let mf = m as f64;
        let phi_for = |alpha: f64, frac: f64| (frac * alpha.sin() / (2.0 * mf)).asin();
        vec![
            TubeCase { m, alpha: PI / 6.0, phi: phi_for(PI / 6.0, (mf / 4.0).min(1.0)), kappa: PI / 4.0, offset: PI / 4.0 },
            TubeCase { m, alpha: PI / 4.0, phi: phi_for(PI / 4.0, 1.0), kappa: PI / 3.0, offset: PI / 3.0 - PI / 8.0 },
            TubeCase { m, alpha: PI / 3.0, phi: phi_for(PI / 3.0, 0.5), kappa: PI / 6.0, offset: PI / 6.0 + PI / 9.0 },
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub m: usize,
    pub n: usize,
    pub center: CenterSource,
    pub params: AdversarialParams,
    /// Sample count `N` (per grid point or per check where applicable).
    pub samples: usize,
    pub t_grid: Vec<f64>,
    /// Neighborhood radius for property checks.
    pub phi: f64,
    pub k_range: (usize, usize),
    pub tube_cases: Vec<TubeCase>,
    pub seed: u64,
    /// Worker cap; excluded from outputs so results do not depend on it.
    #[serde(skip)]
    pub workers: Option<usize>,
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
}

/// Default grid: 12 geometric points over four decades from the feasible-tail threshold.
pub fn default_t_grid(params: &AdversarialParams, m: usize) -> Vec<f64> {
    geometric_grid(f_threshold(params, m), f_threshold(params, m) * 1e4, 12)
}

pub fn geometric_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let r = (hi / lo).ln() / (points - 1) as f64;
    (0..points).map(|j| if j + 1 == points { hi } else { lo * (r * j as f64).exp() }).collect()
}

impl ExperimentConfig {
    /// Defaults: `m = 2`, `n = 5`, `α = π/6`, uniform law, `N = 10^5`, random center, seed 1.
    pub fn new(kind: ExperimentKind) -> Self {
        let params = AdversarialParams::uniform(2, PI / 6.0).expect("default parameters are valid");
        ExperimentConfig {
            kind,
            m: 2,
            n: 5,
            center: CenterSource::Random,
            t_grid: default_t_grid(&params, 2),
            params,
            samples: 100_000,
            phi: 0.1,
            k_range: (4, 10),
            tube_cases: TubeCase::battery(2),
            seed: 1,
            workers: None,
            out_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |msg: String| Err(Error::Config(msg));
        if self.samples < 1 {
            return cfg("sample count N must be at least 1".into());
        }
        if self.params.m != self.m {
            return cfg(format!("distribution built for m = {}, experiment uses m = {}", self.params.m, self.m));
        }
        let needs_instance = matches!(self.kind, ExperimentKind::Tail | ExperimentKind::Expectation | ExperimentKind::PropertySuite);
        if needs_instance && self.n <= self.m + 1 {
            return cfg(format!("need n > m + 1, got n = {} and m = {}", self.n, self.m));
        }
        if self.kind == ExperimentKind::Tail {
            if self.t_grid.is_empty() {
                return cfg("t-grid is empty".into());
            }
            if self.t_grid.windows(2).any(|w| !(w[1] > w[0])) || self.t_grid.iter().any(|t| !(*t > 0.0)) {
                return cfg("t-grid must be positive and strictly increasing".into());
            }
        }
        if self.kind == ExperimentKind::Wendel {
            let (lo, hi) = self.k_range;
            if lo <= self.m {
                return cfg(format!("Wendel range needs k > m; got k = {lo} with m = {}", self.m));
            }
            if hi < lo {
                return cfg(format!("empty k range {lo}:{hi}"));
            }
        }
        if self.kind == ExperimentKind::Tube {
            if self.tube_cases.is_empty() {
                return cfg("no tube configurations".into());
            }
            for c in &self.tube_cases {
                if c.eps() > c.sigma() / (2.0 * c.m as f64) * (1.0 + 1e-12) {
                    return cfg(format!(
                        "tube case needs sin φ <= sin α/(2m); got sin φ = {} > {}",
                        c.eps(),
                        c.sigma() / (2.0 * c.m as f64)
                    ));
                }
                if !(c.phi > 0.0 && c.alpha > 0.0 && c.alpha <= PI / 2.0 && c.kappa > 0.0 && c.kappa <= PI / 2.0) {
                    return cfg("tube case angles out of range".into());
                }
            }
        }
        if self.kind == ExperimentKind::PropertySuite && !(self.phi > 0.0 && self.phi <= PI / 2.0) {
            return cfg(format!("phi = {} outside (0, π/2]", self.phi));
        }
        Ok(())
    }
}
