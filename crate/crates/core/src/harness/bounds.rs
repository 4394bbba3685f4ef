//! Closed-form bound values compared against the Monte Carlo estimates.

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{FromPrimitive, One, Zero};
use serde::Serialize;

use crate::sampler::AdversarialParams;

pub type Rational = Ratio<BigInt>;

/// A bound value with its display clamp and the hypothesis check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundValue {
    pub raw: f64,
    /// `min(raw, 1)` for probability bounds.
    pub display: f64,
    /// Whether the bound's hypothesis on `t` holds.
    pub covered: bool,
}

impl BoundValue {
    pub fn vacuous(&self) -> bool {
        self.raw >= 1.0
    }
}

/// Smallest `t` covered by the feasible-tail bound: `13m(m+1)/(2σδ_c)`.
pub fn f_threshold(params: &AdversarialParams, m: usize) -> f64 {
    let mf = m as f64;
    13.0 * mf * (mf + 1.0) / (2.0 * params.sigma * params.delta_c)
}

/// `n (13m(m+1)/(2σ))^c t^{-c}`.
pub fn bound_f(t: f64, params: &AdversarialParams, n: usize, m: usize) -> BoundValue {
    let mf = m as f64;
    let c = params.c_exponent;
    let raw = n as f64 * (13.0 * mf * (mf + 1.0) / (2.0 * params.sigma)).powf(c) * t.powf(-c);
    BoundValue { raw, display: raw.min(1.0), covered: t >= f_threshold(params, m) }
}

/// `n (1690 m²(m+1)/(4σ²))^c t^{-c} (δ_c^{-c} + c n ln t)`, covered for `t >= 1`.
pub fn bound_i(t: f64, params: &AdversarialParams, n: usize, m: usize) -> BoundValue {
    let (mf, nf) = (m as f64, n as f64);
    let c = params.c_exponent;
    let s = params.sigma;
    let base = 1690.0 * mf * mf * (mf + 1.0) / (4.0 * s * s);
    let raw = nf * base.powf(c) * t.powf(-c) * (params.delta_c.powf(-c) + c * nf * t.ln());
    BoundValue { raw, display: raw.min(1.0), covered: t >= 1.0 }
}

/// Bound on `E ln 𝒞(A)`; only the `β = 0` case has explicit constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum EmainBound {
    Explicit(f64),
    InformationalOnly,
}

/// `12 ln n + 17 ln m + 6 ln(1/σ) + 8 ln H + 29` for `β = 0`.
pub fn bound_emain(params: &AdversarialParams, n: usize, m: usize) -> EmainBound {
    if params.beta != 0.0 {
        return EmainBound::InformationalOnly;
    }
    EmainBound::Explicit(
        12.0 * (n as f64).ln() + 17.0 * (m as f64).ln() + 6.0 * (1.0 / params.sigma).ln() + 8.0 * params.big_h.ln() + 29.0,
    )
}

/// `p(k, m) = 2^{-(k-1)} Σ_{i=0}^{m} C(k-1, i)` in any field, by the binomial recurrence.
pub fn wendel_probability<T>(k: usize, m: usize) -> T
where
    T: Clone + Zero + One + FromPrimitive + std::ops::Div<Output = T> + std::ops::Mul<Output = T>,
{
    let top = k - 1;
    let mut term = T::one();
    let mut sum = T::zero();
    for i in 0..=m.min(top) {
        sum = sum + term.clone();
        let num = T::from_usize(top - i).expect("small integer");
        let den = T::from_usize(i + 1).expect("small integer");
        term = term * num / den;
    }
    let mut pow = T::one();
    let two = T::from_u8(2).expect("small integer");
    for _ in 0..top {
        pow = pow * two.clone();
    }
    sum / pow
}

/// Exact `p(k, m)` through factorials, kept independent of [`wendel_probability`].
pub fn wendel_probability_factorial(k: usize, m: usize) -> Rational {
    let fact = |x: usize| (1..=x).fold(BigInt::one(), |acc, j| acc * BigInt::from(j));
    let top = k - 1;
    let num: BigInt = (0..=m.min(top)).map(|i| fact(top) / (fact(i) * fact(top - i))).sum();
    Rational::new(num, BigInt::one() << top)
}

/// `13m/4 · ε/σ`, valid for `ε <= σ/(2m)`.
pub fn tube_bound(m: usize, eps: f64, sigma: f64) -> f64 {
    13.0 * m as f64 / 4.0 * eps / sigma
}

/// `c αβ x^{-c} ln max(x/(x_U x_V), 1) + min(α x_V^c, β x_U^c) x^{-c}`.
pub fn product_tail_bound(x: f64, alpha: f64, beta: f64, x_u: f64, x_v: f64, c: f64) -> f64 {
    let xc = x.powf(-c);
    c * alpha * beta * xc * (x / (x_u * x_v)).max(1.0).ln() + (alpha * x_v.powf(c)).min(beta * x_u.powf(c)) * xc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{DeltaMode, HSpec};
    use std::f64::consts::PI;

    fn params(beta: f64) -> AdversarialParams {
        AdversarialParams::new(2, PI / 6.0, beta, HSpec::ConstantOne, DeltaMode::Lemma).unwrap()
    }

    #[test]
    fn bound_f_direct_evaluation() {
        let p = params(0.0);
        assert!((p.sigma - 0.5).abs() < 1e-15);
        let b = bound_f(7800.0, &p, 5, 2);
        assert!((b.raw - 0.5).abs() < 1e-12);
        assert!(b.covered && !b.vacuous());
        assert!(bound_f(1e300, &p, 5, 2).raw < 1e-140);
        let mut q = p.clone();
        q.sigma = 2.0 * p.sigma;
        assert!((bound_f(7800.0, &q, 5, 2).raw / b.raw - 2f64.powf(-0.5)).abs() < 1e-12);
        assert!(!bound_f(f_threshold(&p, 2) * 0.99, &p, 5, 2).covered);
    }

    #[test]
    fn bound_i_properties() {
        let p = params(0.0);
        let at_one = bound_i(1.0, &p, 5, 2).raw;
        let expected = 5.0 * (1690.0 * 4.0 * 3.0 / (4.0 * 0.25f64)).sqrt() * p.delta_c.powf(-0.5);
        assert!((at_one - expected).abs() < 1e-9 * expected);
        let start = (1.0 / p.c_exponent).exp();
        let mut last = f64::INFINITY;
        for j in 0..200 {
            let t = start * 1.1f64.powi(j);
            let v = bound_i(t, &p, 5, 2).raw;
            assert!(v < last);
            last = v;
        }
        let q = params(1.0);
        for t in [2.0f64, 50.0, 1e4] {
            assert!(t.powf(-p.c_exponent) < t.powf(-q.c_exponent));
        }
    }

    #[test]
    fn emain_direct_evaluation() {
        let p = params(0.0);
        let expected = 12.0 * 5f64.ln() + 17.0 * 2f64.ln() + 6.0 * 2f64.ln() + 29.0;
        assert_eq!(bound_emain(&p, 5, 2), EmainBound::Explicit(expected));
        assert_eq!(bound_emain(&params(0.5), 5, 2), EmainBound::InformationalOnly);
    }

    #[test]
    fn wendel_values() {
        let r = |a: i64, b: i64| Rational::new(BigInt::from(a), BigInt::from(b));
        assert_eq!(wendel_probability::<Rational>(4, 2), r(7, 8));
        assert_eq!(wendel_probability::<Rational>(6, 2), r(1, 2));
        assert_eq!(wendel_probability::<Rational>(8, 2), r(29, 128));
        for m in 1..6 {
            assert_eq!(wendel_probability::<Rational>(m + 1, m), r(1, 1));
        }
        assert!((wendel_probability::<f64>(8, 2) - 29.0 / 128.0).abs() < 1e-16);
    }

    #[test]
    fn wendel_paths_agree_exactly() {
        for m in 1..=6 {
            for k in m + 1..=64 {
                assert_eq!(wendel_probability::<Rational>(k, m), wendel_probability_factorial(k, m), "k={k} m={m}");
            }
        }
    }

    #[test]
    fn product_tail_bound_cases() {
        // below x_U x_V the log term vanishes
        let b = product_tail_bound(4.0, 2.0, 3.0, 2.0, 3.0, 0.5);
        assert!((b - (2.0 * 3f64.sqrt()).min(3.0 * 2f64.sqrt()) / 2.0).abs() < 1e-15);
        let x = 600.0;
        let b = product_tail_bound(x, 2.0, 3.0, 2.0, 3.0, 0.5);
        let expected = 0.5 * 6.0 * x.powf(-0.5) * (x / 6.0).ln() + (2.0 * 3f64.sqrt()).min(3.0 * 2f64.sqrt()) * x.powf(-0.5);
        assert!((b - expected).abs() < 1e-15);
    }
}
