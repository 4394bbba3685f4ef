//! Adaptive Gauss–Kronrod quadrature and the `I_k` / `J_{m,k}` angle integrals.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd-indexed Kronrod nodes (7-point rule).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_DEPTH: usize = 60;

/// Integral value plus the number of integrand evaluations spent.
#[derive(Clone, Copy, Debug)]
pub struct Quadrature<T> {
    pub value: T,
    pub evaluations: usize,
}

fn gk15<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = T::lit(0.5);
    let c = (a + b) * half;
    let h = (b - a) * half;
    let fc = f(c);
    let mut kron = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = h * T::lit(XGK[j]);
        let s = f(c - dx) + f(c + dx);
        kron = kron + s * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + s * T::lit(WG[j / 2]);
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive GK15 with global absolute tolerance `tol`, split evenly on bisection.
pub fn integrate<T: Scalar, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> Quadrature<T> {
    let mut evaluations = 0;
    let value = adapt(&f, a, b, tol, 0, &mut evaluations);
    Quadrature { value, evaluations }
}

fn adapt<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T, tol: T, depth: usize, evals: &mut usize) -> T {
    let (v, err) = gk15(f, a, b);
    *evals += 15;
    if err <= tol || depth >= MAX_DEPTH || (b - a).abs() <= T::epsilon() * a.abs().max(T::one()) {
        return v;
    }
    let mid = (a + b) * T::lit(0.5);
    let half_tol = tol * T::lit(0.5);
    adapt(f, a, mid, half_tol, depth + 1, evals) + adapt(f, mid, b, half_tol, depth + 1, evals)
}

fn check_angle<T: Scalar>(alpha: T) -> Result<()> {
    if !(alpha > T::zero()) || alpha > T::FRAC_PI_2() + T::tol(1e-15) {
        return Err(Error::invalid(format!("angle {alpha} outside (0, π/2]")));
    }
    Ok(())
}

/// `I_k(α) = ∫_0^α sin(t)^{k-1} dt` for real order `k > 0`.
///
/// For `k < 1` the integrand has an integrable pole at zero; the substitution `u = t^k`
/// turns it into the smooth integrand `(sin t / t)^{k-1} / k`.
pub fn integral_i<T: Scalar>(k: T, alpha: T) -> Result<T> {
    integral_i_detailed(k, alpha).map(|q| q.value)
}

pub fn integral_i_detailed<T: Scalar>(k: T, alpha: T) -> Result<Quadrature<T>> {
    check_angle(alpha)?;
    if !(k > T::zero()) {
        return Err(Error::invalid(format!("order k = {k} must be positive")));
    }
    let tol = T::tol(1e-13);
    if k < T::one() {
        let inv_k = T::one() / k;
        let q = integrate(
            |u: T| {
                let t = u.powf(inv_k);
                sinc(t).powf(k - T::one()) * inv_k
            },
            T::zero(),
            alpha.powf(k),
            tol,
        );
        Ok(q)
    } else {
        Ok(integrate(|t: T| t.sin().powf(k - T::one()), T::zero(), alpha, tol))
    }
}

/// `sin(t)/t`, with the removable singularity filled in.
pub(crate) fn sinc<T: Scalar>(t: T) -> T {
    if t.abs() < T::lit(1e-8) {
        T::one() - t * t / T::lit(6.0)
    } else {
        t.sin() / t
    }
}

/// `J_{m,k}(α) = ∫_0^α sin(ρ)^{k-1} cos(ρ)^{m-k} dρ` for `1 <= k <= m`.
pub fn integral_j<T: Scalar>(m: usize, k: usize, alpha: T) -> Result<T> {
    IntegralTable::evaluate(m, k, alpha).map(|t| t.value)
}

/// One evaluated `J_{m,k}(α)` with its quadrature cost.
#[derive(Clone, Debug, Serialize)]
pub struct IntegralTable<T: Scalar> {
    pub m: usize,
    pub k: usize,
    pub alpha: T,
    pub value: T,
    pub node_count: usize,
}

impl<T: Scalar> IntegralTable<T> {
    pub fn evaluate(m: usize, k: usize, alpha: T) -> Result<Self> {
        if k < 1 || k > m {
            return Err(Error::invalid(format!("J_{{m,k}} needs 1 <= k <= m, got m={m}, k={k}")));
        }
        check_angle(alpha)?;
        let (ps, pc) = ((k - 1) as i32, (m - k) as i32);
        let q = integrate(|t: T| t.sin().powi(ps) * t.cos().powi(pc), T::zero(), alpha, T::tol(1e-13));
        Ok(IntegralTable { m, k, alpha, value: q.value.max(T::zero()), node_count: q.evaluations })
    }
}
