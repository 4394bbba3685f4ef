//! Relative volume of boundary neighborhoods of a convex body inside the cap pair `B(±a, α)`.

use serde::{Deserialize, Serialize};

use crate::cone::{in_cap_neighborhood, in_neighborhood, Side, SpherePolytope};
use crate::error::Result;
use crate::rng::RngStream;
use crate::sampler::{AdversarialParams, CapSampler};
use crate::sphere::{Cap, SpherePoint};

use super::bounds::tube_bound;
use super::config::{ExperimentConfig, TubeCase};
use super::stats::Proportion;
use super::{par_map, stream_index};

/// A convex body `K ⊂ S^m`.
#[derive(Clone, Debug)]
pub enum TubeBody {
    Cap(Cap<f64>),
    Polytope(SpherePolytope<f64>),
}

impl TubeBody {
    fn near(&self, x: &SpherePoint<f64>, phi: f64, side: Side) -> Result<bool> {
        match self {
            TubeBody::Cap(c) => in_cap_neighborhood(x, c, phi, side),
            TubeBody::Polytope(p) => in_neighborhood(x, p, phi, side),
        }
    }
}

/// Outer and inner relative-volume estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TubeEstimate {
    pub outer: Proportion,
    pub inner: Proportion,
}

/// Uniform samples from `B(a, α) ∪ B(-a, α)` (each cap with probability 1/2) tested for
/// membership in `T_o(∂K, φ)` and `T_i(∂K, φ)`.
pub fn estimate_tube_volume(
    body: &TubeBody,
    a: &SpherePoint<f64>,
    alpha: f64,
    phi: f64,
    samples: usize,
    stream: (u64, u64),
    workers: Option<usize>,
) -> Result<TubeEstimate> {
    let sampler = CapSampler::new(AdversarialParams::uniform(a.dim(), alpha)?)?;
    let neg = a.antipode();
    let hits = par_map(workers, samples, |i| -> Result<(bool, bool)> {
        let s = RngStream::new(stream.0, stream_index(stream.1, i as u64));
        let center = if s.substream(0).uniform() < 0.5 { a } else { &neg };
        let x = sampler.sample(center, &mut s.substream(1))?;
        Ok((body.near(&x, phi, Side::Outer)?, body.near(&x, phi, Side::Inner)?))
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(TubeEstimate {
        outer: Proportion::new(hits.iter().filter(|h| h.0).count(), samples),
        inner: Proportion::new(hits.iter().filter(|h| h.1).count(), samples),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeRow {
    #[serde(flatten)]
    pub case: TubeCase,
    pub eps: f64,
    pub sigma: f64,
    pub bound: f64,
    pub outer: f64,
    pub outer_se: f64,
    pub inner: f64,
    pub inner_se: f64,
    pub pass_outer: bool,
    pub pass_inner: bool,
    pub vacuous: bool,
}

impl TubeRow {
    pub fn passed(&self) -> bool {
        self.pass_outer && self.pass_inner
    }
}

/// `K = B(e_0, κ)` and `a` at angle `offset` from `e_0` toward `e_1`.
pub fn case_geometry(case: &TubeCase) -> Result<(TubeBody, SpherePoint<f64>)> {
    let dim = case.m + 1;
    let k = Cap::new(SpherePoint::basis(dim, 0), case.kappa)?;
    let mut a = vec![0.0; dim];
    a[0] = case.offset.cos();
    a[1] = case.offset.sin();
    Ok((TubeBody::Cap(k), SpherePoint::normalized(a)?))
}

pub fn run_tube_case(case: &TubeCase, samples: usize, seed: u64, tag: u64, workers: Option<usize>) -> Result<TubeRow> {
    let (body, a) = case_geometry(case)?;
    let est = estimate_tube_volume(&body, &a, case.alpha, case.phi, samples, (seed, tag), workers)?;
    let bound = tube_bound(case.m, case.eps(), case.sigma());
    Ok(TubeRow {
        case: *case,
        eps: case.eps(),
        sigma: case.sigma(),
        bound,
        outer: est.outer.estimate,
        outer_se: est.outer.se,
        inner: est.inner.estimate,
        inner_se: est.inner.se,
        pass_outer: est.outer.below(bound),
        pass_inner: est.inner.below(bound),
        vacuous: bound >= 1.0,
    })
}

pub fn run_tube_experiment(cfg: &ExperimentConfig) -> Result<Vec<TubeRow>> {
    cfg.validate()?;
    cfg.tube_cases
        .iter()
        .enumerate()
        .map(|(j, case)| run_tube_case(case, cfg.samples, cfg.seed, j as u64, cfg.workers))
        .collect()
}

/// An offset `d(a, c)` for which `B(a, α)` lies inside `K = B(c, κ)` at distance more than
/// `φ` from `∂K`, if one exists.
pub fn deep_inside_offset(kappa: f64, alpha: f64, phi: f64) -> Option<f64> {
    let room = kappa - alpha - phi;
    (room > 0.0).then_some(room / 2.0)
}
