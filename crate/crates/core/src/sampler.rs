//! Uniform and adversarial samplers on the sphere.
//!
//! The adversarial law `μ_ā` on `B(ā, α)` has density `g(sin d(x, ā))` with respect to the
//! uniform cap measure, where `g(r) = C r^{-β} h(r)`. In colatitude `θ` this is proportional
//! to `sin(θ)^{m-1-β} h(sin θ)`, which is sampled by a tabled inverse CDF.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::quad::{integral_i, integrate, sinc};
use crate::rng::{RngStream, Substream};
use crate::sphere::{rotation_to, SpherePoint};

/// Cells of the inverse-CDF table.
pub const RADIAL_CELLS: usize = 4096;
const MASS_TOL: f64 = 1e-8;

/// Piecewise-linear `h` on `[0, σ]`, clamped beyond the last node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HTable {
    points: Vec<(f64, f64)>,
}

impl HTable {
    /// Nodes must start at `r = 0`, ascend strictly, and carry `h >= 0` with `h(0) > 0`.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        let first = points.first().ok_or_else(|| Error::invalid("h table is empty"))?;
        if first.0 != 0.0 {
            return Err(Error::invalid("h table must start at r = 0"));
        }
        if !(first.1 > 0.0) {
            return Err(Error::invalid("h(0) must be positive"));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::invalid(format!("h table abscissae not strictly ascending at r = {}", w[1].0)));
            }
        }
        if let Some(&(r, h)) = points.iter().find(|(r, h)| !(r.is_finite() && h.is_finite() && *h >= 0.0)) {
            return Err(Error::invalid(format!("h table entry ({r}, {h}) is not a finite nonnegative value")));
        }
        Ok(HTable { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn eval(&self, r: f64) -> f64 {
        let p = &self.points;
        let j = p.partition_point(|&(x, _)| x <= r);
        if j == 0 {
            return p[0].1;
        }
        if j == p.len() {
            return p[j - 1].1;
        }
        let ((x0, y0), (x1, y1)) = (p[j - 1], p[j]);
        y0 + (y1 - y0) * (r - x0) / (x1 - x0)
    }

    fn sup_on(&self, sigma: f64) -> f64 {
        let interior = self.points.iter().filter(|(r, _)| *r <= sigma).map(|&(_, h)| h);
        interior.fold(self.eval(sigma), f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HSpec {
    ConstantOne,
    Table(HTable),
}

/// How the tolerance `δ_c` and exponent `c` are chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaMode {
    /// `c = (1 - β/m)/2` with the general tolerance formula.
    #[default]
    Lemma,
    /// `β = 0` only: `c = 1/2`, `δ = 1/H²`.
    Beta0Remark,
}

impl std::str::FromStr for DeltaMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lemma" => Ok(DeltaMode::Lemma),
            "beta0-remark" => Ok(DeltaMode::Beta0Remark),
            other => Err(Error::invalid(format!("unknown delta mode `{other}` (expected lemma or beta0-remark)"))),
        }
    }
}

/// Validated parameters of the adversarial law. `h_scale` is the global factor applied to
/// the user's `h` so that the law has unit mass; `big_h` is the sup of the rescaled `h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdversarialParams {
    pub m: usize,
    pub alpha: f64,
    pub sigma: f64,
    pub beta: f64,
    pub h_spec: HSpec,
    pub h_scale: f64,
    pub big_h: f64,
    pub c_norm: f64,
    pub c_exponent: f64,
    pub delta_c: f64,
    pub delta_mode: DeltaMode,
}

/// `∫_0^α sin(t)^{e} φ(t) dt` for `e > -1`, through `u = t^{e+1}` so a pole at zero is smooth.
fn weighted_integral(e: f64, alpha: f64, phi: impl Fn(f64) -> f64) -> f64 {
    let k = e + 1.0;
    integrate(|u: f64| regular_part(u, k, e, &phi), 0.0, alpha.powf(k), 1e-13).value
}

fn regular_part(u: f64, k: f64, e: f64, phi: &impl Fn(f64) -> f64) -> f64 {
    let t = u.powf(1.0 / k);
    sinc(t).powf(e) * phi(t) / k
}

impl AdversarialParams {
    pub fn new(m: usize, alpha: f64, beta: f64, h_spec: HSpec, delta_mode: DeltaMode) -> Result<Self> {
        if m < 1 {
            return Err(Error::invalid("sphere dimension m must be at least 1"));
        }
        if !(alpha > 0.0 && alpha <= FRAC_PI_2 + 1e-15) {
            return Err(Error::invalid(format!("alpha = {alpha} outside (0, π/2]")));
        }
        let alpha = alpha.min(FRAC_PI_2);
        let mf = m as f64;
        if !(beta >= 0.0 && beta < mf) {
            return Err(Error::invalid(format!("beta = {beta} outside [0, m) for m = {m}")));
        }
        if delta_mode == DeltaMode::Beta0Remark && beta != 0.0 {
            return Err(Error::invalid("delta mode beta0-remark requires beta = 0"));
        }
        let sigma = alpha.sin();
        let i_m = integral_i(mf, alpha)?;
        let i_mb = integral_i(mf - beta, alpha)?;
        let (h_scale, big_h) = match &h_spec {
            HSpec::ConstantOne => (1.0, 1.0),
            HSpec::Table(table) => {
                let last = table.points.last().map_or(0.0, |p| p.0);
                if last < sigma * (1.0 - 1e-9) {
                    return Err(Error::invalid(format!("h table ends at r = {last}, short of σ = {sigma}")));
                }
                let mass = weighted_integral(mf - beta - 1.0, alpha, |t| table.eval(t.sin()));
                if !(mass > 0.0) {
                    return Err(Error::invalid("h table has zero mass on [0, σ]"));
                }
                let scale = i_mb / mass;
                (scale, scale * table.sup_on(sigma))
            }
        };
        let mut p = AdversarialParams {
            m,
            alpha,
            sigma,
            beta,
            h_spec,
            h_scale,
            big_h,
            c_norm: i_m / i_mb,
            c_exponent: 0.0,
            delta_c: 0.0,
            delta_mode,
        };
        let (c, delta) = match delta_mode {
            DeltaMode::Lemma => (0.5 * (1.0 - beta / mf), compute_delta_c(&p, m)),
            DeltaMode::Beta0Remark => (0.5, 1.0 / (big_h * big_h)),
        };
        p.c_exponent = c;
        p.delta_c = delta;
        let residual = p.mass_residual();
        if residual.abs() > MASS_TOL {
            return Err(Error::invalid(format!("normalized h violates the mass identity by {residual:e}")));
        }
        Ok(p)
    }

    /// Uniform law on the cap: `β = 0`, `h ≡ 1`.
    pub fn uniform(m: usize, alpha: f64) -> Result<Self> {
        Self::new(m, alpha, 0.0, HSpec::ConstantOne, DeltaMode::Lemma)
    }

    /// Rescaled `h` at `r`.
    pub fn h(&self, r: f64) -> f64 {
        match &self.h_spec {
            HSpec::ConstantOne => 1.0,
            HSpec::Table(t) => self.h_scale * t.eval(r),
        }
    }

    /// `∫_0^α sin(t)^{m-β-1} h(sin t) dt - I_{m-β}(α)`.
    pub fn mass_residual(&self) -> f64 {
        let e = self.m as f64 - self.beta - 1.0;
        let lhs = weighted_integral(e, self.alpha, |t| self.h(t.sin()));
        lhs - integral_i(self.m as f64 - self.beta, self.alpha).unwrap_or(f64::NAN)
    }

    fn exponent(&self) -> f64 {
        self.m as f64 - 1.0 - self.beta
    }
}

/// `δ_c = (2/(πm)) · ((1/H)·√(1 - (2/(πm))^{1/m}))^{1/c}` with `c = (1 - β/m)/2`.
pub fn compute_delta_c(params: &AdversarialParams, m: usize) -> f64 {
    let mf = m as f64;
    let c = 0.5 * (1.0 - params.beta / mf);
    let q = 2.0 / (PI * mf);
    q * ((1.0 / params.big_h) * (1.0 - q.powf(1.0 / mf)).sqrt()).powf(1.0 / c)
}

/// `∫_a^b sin(t)^{m-1-β} h(sin t) dt` for `0 <= a <= b <= α`, the unnormalized colatitude
/// mass, computed through the same pole-removing substitution as the normalization.
pub fn radial_mass(params: &AdversarialParams, a: f64, b: f64) -> f64 {
    let e = params.exponent();
    let k = e + 1.0;
    let phi = |t: f64| params.h(t.sin());
    integrate(|u: f64| regular_part(u, k, e, &phi), a.powf(k), b.powf(k), 1e-14).value
}

/// Unnormalized colatitude density `C sin(θ)^{m-1-β} h(sin θ)` on `[0, α]`, zero beyond.
pub fn radial_density(theta: f64, params: &AdversarialParams, m: usize) -> f64 {
    if theta > params.alpha || theta < 0.0 {
        return 0.0;
    }
    let e = m as f64 - 1.0 - params.beta;
    params.c_norm * theta.sin().powf(e) * params.h(theta.sin())
}

/// Inverse CDF of the colatitude, tabled on a uniform grid in `u = θ^{e+1}`, `e = m-1-β`.
#[derive(Clone, Debug)]
pub struct RadialCdf {
    k: f64,
    u_max: f64,
    /// Normalized CDF at the `RADIAL_CELLS + 1` grid nodes.
    cdf: Vec<f64>,
    alpha: f64,
}

pub fn build_radial_cdf(params: &AdversarialParams, m: usize) -> Result<RadialCdf> {
    if !(params.beta < m as f64) {
        return Err(Error::invalid(format!("beta = {} is not integrable for m = {m}", params.beta)));
    }
    let e = m as f64 - 1.0 - params.beta;
    let k = e + 1.0;
    let u_max = params.alpha.powf(k);
    let du = u_max / RADIAL_CELLS as f64;
    let phi = |t: f64| params.h(t.sin());
    let mut cdf = Vec::with_capacity(RADIAL_CELLS + 1);
    let mut acc = 0.0;
    cdf.push(0.0);
    for j in 0..RADIAL_CELLS {
        let (a, b) = (j as f64 * du, (j + 1) as f64 * du);
        acc += integrate(|u: f64| regular_part(u, k, e, &phi), a, b, 1e-15).value;
        cdf.push(acc);
    }
    if !(acc > 0.0) {
        return Err(Error::invalid("radial law has zero mass"));
    }
    cdf.iter_mut().for_each(|v| *v /= acc);
    Ok(RadialCdf { k, u_max, cdf, alpha: params.alpha })
}

impl RadialCdf {
    /// Colatitude with CDF value `p ∈ [0, 1]`.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let j = self.cdf.partition_point(|&v| v <= p).clamp(1, RADIAL_CELLS);
        let (f0, f1) = (self.cdf[j - 1], self.cdf[j]);
        let frac = if f1 > f0 { (p - f0) / (f1 - f0) } else { 0.0 };
        let u = (j as f64 - 1.0 + frac) * self.u_max / RADIAL_CELLS as f64;
        u.powf(1.0 / self.k).min(self.alpha)
    }

    /// CDF of the colatitude by interpolation in the table.
    pub fn cdf(&self, theta: f64) -> f64 {
        if theta <= 0.0 {
            return 0.0;
        }
        if theta >= self.alpha {
            return 1.0;
        }
        let x = theta.powf(self.k) / self.u_max * RADIAL_CELLS as f64;
        let j = (x.floor() as usize).min(RADIAL_CELLS - 1);
        let frac = x - j as f64;
        self.cdf[j] + frac * (self.cdf[j + 1] - self.cdf[j])
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Uniform point on `S^m`: normalized vector of `m + 1` standard normals.
pub fn uniform_sphere(m: usize, rng: &mut Substream) -> SpherePoint<f64> {
    SpherePoint::from_unit_unchecked(rng.unit_vector(m + 1))
}

/// One draw from `μ_ā`: colatitude by inverse CDF, then a uniform direction at the pole,
/// rotated so the pole `e_0` lands on `ā`.
pub fn sample_cap(center: &SpherePoint<f64>, radial: &RadialCdf, rng: &mut Substream) -> Result<SpherePoint<f64>> {
    let dim = center.ambient_dim();
    let theta = radial.quantile(rng.uniform());
    let dir = rng.unit_vector(dim - 1);
    let (s, c) = theta.sin_cos();
    let mut local = Vec::with_capacity(dim);
    local.push(c);
    local.extend(dir.iter().map(|d| s * d));
    let rot = rotation_to(&SpherePoint::basis(dim, 0), center)?;
    SpherePoint::normalized(rot.apply(&local))
}

/// A parameter set with its radial table, ready to draw from.
#[derive(Clone, Debug)]
pub struct CapSampler {
    pub params: AdversarialParams,
    pub radial: RadialCdf,
}

impl CapSampler {
    pub fn new(params: AdversarialParams) -> Result<Self> {
        let radial = build_radial_cdf(&params, params.m)?;
        Ok(CapSampler { params, radial })
    }

    pub fn sample(&self, center: &SpherePoint<f64>, rng: &mut Substream) -> Result<SpherePoint<f64>> {
        if center.dim() != self.params.m {
            return Err(Error::DimensionMismatch { expected: self.params.m + 1, got: center.ambient_dim() });
        }
        sample_cap(center, &self.radial, rng)
    }

    /// Row `i` is drawn from substream `i` of `stream`.
    pub fn sample_instance(&self, center: &Instance<f64>, stream: RngStream) -> Result<Instance<f64>> {
        let rows = center
            .rows()
            .iter()
            .enumerate()
            .map(|(i, a)| self.sample(a, &mut stream.substream(i as u64)))
            .collect::<Result<Vec<_>>>()?;
        Instance::new(rows)
    }

    pub fn exponent(&self) -> f64 {
        self.params.exponent()
    }
}

pub fn sample_instance(center: &Instance<f64>, sampler: &CapSampler, stream: RngStream) -> Result<Instance<f64>> {
    sampler.sample_instance(center, stream)
}

/// Instance with `n` independent uniform rows on `S^m`; row `i` from substream `i`.
pub fn uniform_instance(n: usize, m: usize, stream: RngStream) -> Result<Instance<f64>> {
    Instance::new((0..n).map(|i| uniform_sphere(m, &mut stream.substream(i as u64))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::angular_distance;

    #[test]
    fn delta_c_direct_evaluation() {
        let p = AdversarialParams::uniform(2, PI / 6.0).unwrap();
        let expected = (1.0 / PI) * (1.0 - (1.0 / PI).sqrt());
        assert!((p.delta_c - expected).abs() < 1e-15);
        assert_eq!(p.c_exponent, 0.5);
        let r = AdversarialParams::new(2, PI / 6.0, 0.0, HSpec::ConstantOne, DeltaMode::Beta0Remark).unwrap();
        assert_eq!(r.delta_c, 1.0);
        assert_ne!(r.delta_c, p.delta_c);
    }

    #[test]
    fn delta_c_limits() {
        let mut p = AdversarialParams::uniform(3, 0.5).unwrap();
        let mut last = f64::INFINITY;
        for h in [1.0, 2.0, 10.0, 1e3] {
            p.big_h = h;
            let d = compute_delta_c(&p, 3);
            assert!(d < last);
            last = d;
        }
        p.big_h = 1.0;
        let mut last = f64::INFINITY;
        for beta in [0.0, 1.0, 2.0, 2.9, 2.999] {
            p.beta = beta;
            let d = compute_delta_c(&p, 3);
            assert!(d < last);
            last = d;
        }
        assert!(last < 1e-100);
    }

    #[test]
    fn parameter_validation() {
        assert!(AdversarialParams::new(2, 0.5, 2.0, HSpec::ConstantOne, DeltaMode::Lemma).is_err());
        assert!(AdversarialParams::new(2, 0.5, -0.1, HSpec::ConstantOne, DeltaMode::Lemma).is_err());
        assert!(AdversarialParams::new(2, 1.7, 0.0, HSpec::ConstantOne, DeltaMode::Lemma).is_err());
        assert!(AdversarialParams::new(2, 0.5, 1.0, HSpec::ConstantOne, DeltaMode::Beta0Remark).is_err());
        assert!(AdversarialParams::new(2, 0.5, 1.5, HSpec::ConstantOne, DeltaMode::Lemma).is_ok());
    }

    #[test]
    fn table_normalization() {
        let table = HTable::new(vec![(0.0, 3.0), (0.2, 1.0), (0.6, 1.0)]).unwrap();
        let p = AdversarialParams::new(2, PI / 6.0, 0.5, HSpec::Table(table), DeltaMode::Lemma).unwrap();
        assert!(p.mass_residual().abs() < 1e-8);
        assert!(p.big_h >= 1.0);
        assert!((p.big_h - 3.0 * p.h_scale).abs() < 1e-12);
        assert!(HTable::new(vec![(0.1, 1.0)]).is_err());
        assert!(HTable::new(vec![(0.0, 0.0), (0.5, 1.0)]).is_err());
        assert!(HTable::new(vec![(0.0, 1.0), (0.5, 1.0), (0.4, 1.0)]).is_err());
    }

    #[test]
    fn radial_density_examples() {
        let p = AdversarialParams::uniform(2, 1.0).unwrap();
        assert!((radial_density(0.7, &p, 2) - 0.7f64.sin()).abs() < 1e-15);
        assert_eq!(radial_density(1.1, &p, 2), 0.0);
        let p = AdversarialParams::new(2, 1.0, 1.0, HSpec::ConstantOne, DeltaMode::Lemma).unwrap();
        let a = radial_density(0.2, &p, 2);
        assert!((a - radial_density(0.9, &p, 2)).abs() < 1e-15 && (a - p.c_norm).abs() < 1e-15);
        let p = AdversarialParams::new(3, 1.0, 0.5, HSpec::ConstantOne, DeltaMode::Lemma).unwrap();
        assert_eq!(radial_density(0.0, &p, 3), 0.0);
    }

    #[test]
    fn radial_table_hemisphere_closed_form() {
        let p = AdversarialParams::uniform(2, FRAC_PI_2).unwrap();
        let cdf = build_radial_cdf(&p, 2).unwrap();
        assert_eq!(cdf.quantile(0.0), 0.0);
        assert!((cdf.quantile(1.0) - FRAC_PI_2).abs() < 1e-15);
        for i in 1..100 {
            let u = i as f64 / 100.0;
            assert!((cdf.quantile(u) - (1.0 - u).acos()).abs() < 1e-6, "u = {u}");
            let th = u * FRAC_PI_2;
            assert!((cdf.cdf(th) - (1.0 - th.cos())).abs() < 1e-6);
        }
    }

    #[test]
    fn radial_table_matches_direct_quadrature() {
        for (m, beta) in [(2usize, 0.5), (2, 1.0), (3, 2.5), (4, 0.0)] {
            let p = AdversarialParams::new(m, 0.8, beta, HSpec::ConstantOne, DeltaMode::Lemma).unwrap();
            let cdf = build_radial_cdf(&p, m).unwrap();
            let e = m as f64 - 1.0 - beta;
            // independent oracle: plain adaptive quadrature of the density away from the pole
            let total = integrate(|t: f64| t.sin().powf(e), 1e-9, 0.8, 1e-14).value
                + 1e-9f64.powf(e + 1.0) / (e + 1.0);
            for th in [0.1, 0.4, 0.79] {
                let part = integrate(|t: f64| t.sin().powf(e), 1e-9, th, 1e-14).value
                    + 1e-9f64.powf(e + 1.0) / (e + 1.0);
                assert!((cdf.cdf(th) - part / total).abs() < 1e-6, "m={m} beta={beta} th={th}");
            }
        }
    }

    #[test]
    fn cap_samples_stay_in_support() {
        let s = CapSampler::new(AdversarialParams::new(3, 0.4, 1.0, HSpec::ConstantOne, DeltaMode::Lemma).unwrap()).unwrap();
        let center = SpherePoint::normalized(vec![0.3, -0.2, 0.9, 0.1]).unwrap();
        let mut rng = RngStream::new(3, 0).substream(0);
        for _ in 0..2000 {
            let x = s.sample(&center, &mut rng).unwrap();
            assert!(angular_distance(&x, &center).unwrap() <= 0.4 + 1e-10);
        }
    }

    #[test]
    fn hemisphere_samples_have_nonnegative_inner_product() {
        let s = CapSampler::new(AdversarialParams::uniform(2, FRAC_PI_2).unwrap()).unwrap();
        let center = SpherePoint::normalized(vec![1.0, 1.0, 0.0]).unwrap();
        let mut rng = RngStream::new(4, 0).substream(0);
        for _ in 0..2000 {
            assert!(s.sample(&center, &mut rng).unwrap().dot(&center) >= -1e-12);
        }
    }

    #[test]
    fn instance_sampling_is_deterministic() {
        let s = CapSampler::new(AdversarialParams::uniform(2, 0.3).unwrap()).unwrap();
        let center = uniform_instance(5, 2, RngStream::new(1, 1)).unwrap();
        let a = s.sample_instance(&center, RngStream::new(9, 17)).unwrap();
        let b = s.sample_instance(&center, RngStream::new(9, 17)).unwrap();
        for (x, y) in a.rows().iter().zip(b.rows()) {
            assert_eq!(x.coords(), y.coords());
        }
        for (x, c) in a.rows().iter().zip(center.rows()) {
            assert!(angular_distance(x, c).unwrap() <= 0.3 + 1e-10);
        }
    }
}
