//! Goodness-of-fit checks of the cap samplers.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::rng::RngStream;
use crate::sampler::{radial_mass, uniform_sphere, AdversarialParams, CapSampler, HSpec};
use crate::sphere::{angle_between_unit, SpherePoint};

use super::config::{ExperimentConfig, CENTER_STREAM};
use super::stats::{ks_statistic_sorted, ks_threshold, ks_two_sample, ks_threshold_two_sample};
use super::{par_map, stream_index};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl KsResult {
    fn new(statistic: f64, threshold: f64) -> Self {
        KsResult { statistic, threshold, pass: statistic <= threshold }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerCheckReport {
    pub m: usize,
    pub alpha: f64,
    pub beta: f64,
    pub samples: usize,
    /// Samples with `d(x, ā) > α + 1e-10`.
    pub support_violations: usize,
    /// `sin d(x, ā)` against the CDF from direct quadrature of the density.
    pub radial: KsResult,
    /// Azimuth in a fixed plane orthogonal to `ā` against the uniform law (`m >= 2`).
    pub direction: Option<KsResult>,
    /// Uniform-cap law only: two-sample test against a rejection sampler.
    pub rejection: Option<KsResult>,
    /// Uniform-cap law only: rejection samples against the quadrature CDF.
    pub rejection_oracle: Option<KsResult>,
}

impl SamplerCheckReport {
    pub fn passed(&self) -> bool {
        self.support_violations == 0
            && self.radial.pass
            && [self.direction, self.rejection, self.rejection_oracle].iter().flatten().all(|k| k.pass)
    }
}

/// KS statistic of colatitudes against the exact law, accumulating the quadrature mass
/// between consecutive order statistics.
pub fn radial_ks(params: &AdversarialParams, colatitudes: &[f64]) -> f64 {
    let mut th = colatitudes.to_vec();
    th.sort_by(f64::total_cmp);
    let total = radial_mass(params, 0.0, params.alpha);
    let mut acc = 0.0;
    let mut prev = 0.0;
    let cdf: Vec<f64> = th
        .iter()
        .map(|&t| {
            let t = t.min(params.alpha);
            acc += radial_mass(params, prev, t);
            prev = t;
            acc / total
        })
        .collect();
    ks_statistic_sorted(&cdf)
}

fn orthonormal_pair(center: &SpherePoint<f64>) -> (Vec<f64>, Vec<f64>) {
    let dim = center.ambient_dim();
    let refs = [center.coords()];
    let basis = crate::linalg::orthogonal_complement(&refs, dim);
    (basis[0].clone(), basis[1].clone())
}

pub fn run_sampler_check(cfg: &ExperimentConfig) -> Result<SamplerCheckReport> {
    cfg.validate()?;
    let params = &cfg.params;
    let m = params.m;
    let sampler = CapSampler::new(params.clone())?;
    let center = uniform_sphere(m, &mut RngStream::new(cfg.seed, CENTER_STREAM).substream(0));
    let n = cfg.samples;
    let draws = par_map(cfg.workers, n, |i| {
        sampler.sample(&center, &mut RngStream::new(cfg.seed, stream_index(0, i as u64)).substream(0))
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let theta: Vec<f64> = draws.iter().map(|x| angle_between_unit(x.coords(), center.coords())).collect();
    let support_violations = theta.iter().filter(|&&t| t > params.alpha + 1e-10).count();
    let radial = KsResult::new(radial_ks(params, &theta), ks_threshold(n));

    let direction = (m >= 2).then(|| {
        let (e1, e2) = orthonormal_pair(&center);
        let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
        let mut psi: Vec<f64> = draws
            .iter()
            .map(|x| (dot(x.coords(), &e2).atan2(dot(x.coords(), &e1)) + std::f64::consts::PI) / std::f64::consts::TAU)
            .collect();
        psi.sort_by(f64::total_cmp);
        KsResult::new(ks_statistic_sorted(&psi), ks_threshold(n))
    });

    let uniform_law = params.beta == 0.0 && params.h_spec == HSpec::ConstantOne;
    let (rejection, rejection_oracle) = if uniform_law {
        let cos_alpha = params.alpha.cos();
        let mut rng = RngStream::new(cfg.seed, stream_index(1, 0)).substream(0);
        let mut accepted = Vec::with_capacity(n);
        while accepted.len() < n {
            let x = uniform_sphere(m, &mut rng);
            if x.dot(&center) >= cos_alpha {
                accepted.push(angle_between_unit(x.coords(), center.coords()));
            }
        }
        let sin = |v: &[f64]| v.iter().map(|t| t.sin()).collect::<Vec<_>>();
        (
            Some(KsResult::new(ks_two_sample(&sin(&theta), &sin(&accepted)), ks_threshold_two_sample(n, n))),
            Some(KsResult::new(radial_ks(params, &accepted), ks_threshold(n))),
        )
    } else {
        (None, None)
    };

    Ok(SamplerCheckReport {
        m,
        alpha: params.alpha,
        beta: params.beta,
        samples: n,
        support_violations,
        radial,
        direction,
        rejection,
        rejection_oracle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::ExperimentKind;
    use crate::sampler::DeltaMode;

    #[test]
    fn small_checks_pass() {
        for beta in [0.0, 0.5, 1.0] {
            let mut c = ExperimentConfig::new(ExperimentKind::SamplerCheck);
            c.samples = 5000;
            c.params = AdversarialParams::new(2, 0.5, beta, HSpec::ConstantOne, DeltaMode::Lemma).unwrap();
            let r = run_sampler_check(&c).unwrap();
            assert!(r.passed(), "{r:?}");
            assert_eq!(r.rejection.is_some(), beta == 0.0);
        }
    }

    #[test]
    fn ks_detects_wrong_law() {
        let p = AdversarialParams::uniform(2, 0.5).unwrap();
        let wrong: Vec<f64> = (0..2000).map(|j| 0.5 * (j as f64 + 0.5) / 2000.0).collect();
        assert!(radial_ks(&p, &wrong) > ks_threshold(2000));
    }
}
