//! Smallest including caps (SICs) and the GCC condition number `𝒞(A) = 1/|cos ρ(A)|`.
//!
//! Two solvers are provided. [`sic_bruteforce`] enumerates every candidate support subset
//! and is exact up to roundoff. [`sic_solve`] runs multi-start projected subgradient ascent
//! on `f(p) = min_i <a_i, p>` and then polishes the detected support with the same
//! equidistant-cap construction, so both report bitwise-comparable radii when they find
//! the same support.

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::linalg::{self, dot, norm};
use crate::lp::FeasibilityClass;
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::sphere::{angle_between_unit, Cap, SpherePoint};

/// Width of the band `|ρ - π/2| <= ILL_POSED_BAND` classified as ill-posed.
pub const ILL_POSED_BAND: f64 = 1e-8;
/// Angular slack when testing that a candidate cap contains every row.
pub const CONTAINMENT_TOL: f64 = 1e-9;
/// Subset count above which the exhaustive solver refuses to run.
pub const BRUTEFORCE_LIMIT: u128 = 10_000_000;
/// Subset count up to which [`cond_and_class`] uses the exhaustive solver.
pub const AUTO_EXHAUSTIVE_LIMIT: u128 = 20_000;

/// Largest accepted condition number of a support subset (of `A_S`, not its Gram matrix).
const SUBSET_COND_LIMIT: f64 = 1e12;
const SUBGRADIENT_RESTARTS: usize = 50;
const SUBGRADIENT_ITERATIONS: usize = 2000;
const SUBGRADIENT_SEED: u64 = 0x5eed_c0de_2009_0001;

#[derive(Clone, Debug, Serialize)]
pub struct SicResult<T: Scalar> {
    pub center: SpherePoint<T>,
    pub rho: T,
    /// Indices of the rows that determine the cap (at most `m + 1`).
    pub support: Vec<usize>,
    pub class: FeasibilityClass,
    /// `1/|cos ρ|`, or `+∞` inside the ill-posed band.
    pub cond: T,
    /// `d(A, Σ) = |π/2 - ρ|`.
    pub dist_to_sigma: T,
}

impl<T: Scalar> SicResult<T> {
    fn new(center: Vec<T>, rho: T, support: Vec<usize>) -> Self {
        let (class, cond, dist_to_sigma) = classify_radius(rho);
        SicResult {
            center: SpherePoint::from_unit_unchecked(center),
            rho,
            support,
            class,
            cond,
            dist_to_sigma,
        }
    }

    pub fn cap(&self) -> Cap<T> {
        Cap { center: self.center.clone(), radius: self.rho }
    }
}

/// Class, condition number and distance to ill-posedness implied by a SIC radius.
pub fn classify_radius<T: Scalar>(rho: T) -> (FeasibilityClass, T, T) {
    let offset = rho - T::FRAC_PI_2();
    let dist = offset.abs();
    if dist <= T::lit(ILL_POSED_BAND) {
        (FeasibilityClass::IllPosed, T::infinity(), dist)
    } else if offset < T::zero() {
        (FeasibilityClass::StrictlyFeasible, T::one() / rho.cos().abs(), dist)
    } else {
        (FeasibilityClass::Infeasible, T::one() / rho.cos().abs(), dist)
    }
}

/// Equidistant cap through the given points.
///
/// The center is `sign · normalize(Σ λ_i a_i)` with `Gλ = 1` for the Gram matrix `G`, so
/// `<a_i, p>` is the same for every input. Subsets whose rows are numerically dependent
/// are rejected with [`Error::DegenerateSubset`].
pub fn circumcap<T: Scalar>(points: &[SpherePoint<T>], sign: i8) -> Result<Cap<T>> {
    let coords: Vec<&[T]> = points.iter().map(|p| p.coords()).collect();
    if let Some(bad) = points.iter().find(|p| p.ambient_dim() != points[0].ambient_dim()) {
        return Err(Error::DimensionMismatch { expected: points[0].ambient_dim(), got: bad.ambient_dim() });
    }
    if points.is_empty() || points.len() > points[0].ambient_dim() {
        return Err(Error::invalid("circumcap needs between 1 and m + 1 points"));
    }
    let c = equidistant_center(&coords, sign)?;
    Ok(Cap { center: SpherePoint::from_unit_unchecked(c.center), radius: c.radius })
}

struct Candidate<T> {
    center: Vec<T>,
    radius: T,
    /// Coefficients `G^{-1} 1`; all nonnegative at a KKT point.
    weights: Vec<T>,
}

fn equidistant_center<T: Scalar>(points: &[&[T]], sign: i8) -> Result<Candidate<T>> {
    let k = points.len();
    // with A_S^T = QR and p = Qy, the conditions <a_i, p> = 1 read R^T y = 1; working with R
    // rather than the Gram matrix R^T R keeps near-degenerate supports (rows close to a
    // great subsphere) solvable
    let (q, r) = linalg::thin_qr(points);
    let rt: Vec<Vec<T>> = (0..k).map(|i| (0..k).map(|j| r[j][i]).collect()).collect();
    let (y, cond) = linalg::solve_with_cond(&rt, &vec![T::one(); k]).ok_or(Error::DegenerateSubset)?;
    if !(cond.to_f64_lossy() < SUBSET_COND_LIMIT) {
        return Err(Error::DegenerateSubset);
    }
    let weights = linalg::solve(&r, &y).ok_or(Error::DegenerateSubset)?;
    let qs: Vec<&[T]> = q.iter().map(|c| c.as_slice()).collect();
    let mut center = linalg::combine(&qs, &y, points[0].len());
    let n = norm(&center);
    if !(n > T::zero()) {
        return Err(Error::DegenerateSubset);
    }
    let s = if sign >= 0 { T::one() } else { -T::one() };
    for c in center.iter_mut() {
        *c = *c * s / n;
    }
    let radius = points.iter().map(|p| angle_between_unit(p, &center)).fold(T::zero(), T::max);
    Ok(Candidate { center, radius, weights })
}

fn contains_all<T: Scalar>(rows: &[&[T]], center: &[T], radius: T) -> bool {
    let limit = radius + T::tol(CONTAINMENT_TOL);
    rows.iter().all(|r| angle_between_unit(r, center) <= limit)
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of candidate supports the exhaustive solver visits.
pub fn support_subset_count(n: usize, m: usize) -> u128 {
    (1..=m + 1).map(|s| binomial(n, s)).sum()
}

/// Tracks the smallest containing cap seen so far; ties keep the earlier candidate.
struct Best<T> {
    rho: T,
    center: Vec<T>,
    support: Vec<usize>,
}

impl<T: Scalar> Best<T> {
    fn empty() -> Self {
        Best { rho: T::infinity(), center: Vec::new(), support: Vec::new() }
    }

    fn offer(&mut self, rows: &[&[T]], center: Vec<T>, radius: T, support: &[usize]) -> bool {
        if radius < self.rho && contains_all(rows, &center, radius) {
            self.rho = radius;
            self.center = center;
            self.support = support.to_vec();
            return true;
        }
        false
    }
}

/// Hemisphere candidates: caps of radius π/2 centered on normals of hyperplanes spanned by
/// `m` rows. They realize the SIC of instances lying exactly on the ill-posed set, where the
/// KKT weights sum to zero and the center leaves the span of the support.
fn offer_hemispheres<T: Scalar>(rows: &[&[T]], subset_pool: &[usize], best: &mut Best<T>) {
    let dim = rows[0].len();
    let tol = T::tol(1e-12);
    let mut try_normal = |normal: Vec<T>, support: &[usize]| {
        for s in [T::one(), -T::one()] {
            let p: Vec<T> = normal.iter().map(|&c| c * s).collect();
            if rows.iter().all(|r| dot(r, &p) >= -tol) {
                let radius = rows.iter().map(|r| angle_between_unit(r, &p)).fold(T::zero(), T::max);
                best.offer(rows, p, radius, support);
            }
        }
    };
    for subset in subset_pool.iter().copied().combinations(dim - 1) {
        let span: Vec<&[T]> = subset.iter().map(|&i| rows[i]).collect();
        if let Some(n) = linalg::hyperplane_normal(&span, dim) {
            try_normal(n, &subset);
        }
    }
    let all: Vec<&[T]> = subset_pool.iter().map(|&i| rows[i]).collect();
    if linalg::rank(&all, dim) < dim {
        if let Some(n) = linalg::orthogonal_complement(&all, dim).into_iter().next() {
            try_normal(n, subset_pool);
        }
    }
}

/// Exact SIC by enumeration of all support subsets of size `1..=m+1` and both center signs.
pub fn sic_bruteforce<T: Scalar>(a: &Instance<T>) -> Result<SicResult<T>> {
    let (n, m) = (a.n(), a.m());
    let subsets = support_subset_count(n, m);
    if subsets > BRUTEFORCE_LIMIT {
        return Err(Error::TooLarge { subsets, limit: BRUTEFORCE_LIMIT });
    }
    let rows: Vec<&[T]> = a.rows().iter().map(|r| r.coords()).collect();
    let all: Vec<usize> = (0..n).collect();
    let mut best = Best::empty();
    for size in 1..=m + 1 {
        for subset in (0..n).combinations(size) {
            let pts: Vec<&[T]> = subset.iter().map(|&i| rows[i]).collect();
            for sign in [1i8, -1] {
                if let Ok(c) = equidistant_center(&pts, sign) {
                    best.offer(&rows, c.center, c.radius, &subset);
                }
            }
        }
    }
    if best.rho > T::FRAC_PI_2() - T::lit(ILL_POSED_BAND) {
        offer_hemispheres(&rows, &all, &mut best);
    }
    if !best.rho.is_finite() {
        return Err(Error::NonConvergence { lower: 0.0, upper: std::f64::consts::PI });
    }
    Ok(SicResult::new(best.center, best.rho, best.support))
}

fn min_row<T: Scalar>(rows: &[&[T]], p: &[T]) -> (usize, T) {
    rows.iter()
        .enumerate()
        .map(|(i, r)| (i, dot(r, p)))
        .fold((0, T::infinity()), |b, c| if c.1 < b.1 { c } else { b })
}

fn normalize_in_place<T: Scalar>(p: &mut [T]) {
    let n = norm(p);
    for c in p.iter_mut() {
        *c = *c / n;
    }
}

/// Projected subgradient ascent of `min_i <a_i, p>` over the sphere from one start.
fn ascend<T: Scalar>(rows: &[&[T]], start: Vec<T>) -> (Vec<T>, T) {
    let mut p = start;
    normalize_in_place(&mut p);
    let (mut best_p, mut best_f) = (p.clone(), T::neg_infinity());
    let half = T::lit(0.5);
    for t in 1..=SUBGRADIENT_ITERATIONS {
        let (i, f) = min_row(rows, &p);
        if f > best_f {
            best_f = f;
            best_p.copy_from_slice(&p);
        }
        let step = half / T::from_usize_lossy(t).sqrt();
        let a = rows[i];
        for (pc, &ac) in p.iter_mut().zip(a) {
            *pc = *pc + step * (ac - f * *pc);
        }
        if norm(&p) == T::zero() {
            break;
        }
        normalize_in_place(&mut p);
    }
    let (_, f) = min_row(rows, &p);
    if f > best_f {
        best_f = f;
        best_p = p;
    }
    (best_p, best_f)
}

/// Active-set polish around an approximate maximizer: enumerate supports among near-active
/// rows, widening the slack until a KKT-certified containing cap no larger than the cap
/// already certified by `p` (radius `arccos f`) appears.
fn polish<T: Scalar>(rows: &[&[T]], p: &[T], f: T) -> Option<(Vec<T>, T, Vec<usize>)> {
    let dim = p.len();
    let weight_tol = T::tol(1e-9);
    let ceiling = crate::scalar::clamp(f, -T::one(), T::one()).acos() + T::tol(1e-9);
    let mut slack = 1e-6;
    while slack <= 2.0 {
        let active: Vec<usize> =
            (0..rows.len()).filter(|&i| dot(rows[i], p) <= f + T::lit(slack)).collect();
        if active.len() > 16 {
            break;
        }
        let mut best = Best::empty();
        for size in 1..=dim.min(active.len()) {
            for subset in active.iter().copied().combinations(size) {
                let pts: Vec<&[T]> = subset.iter().map(|&i| rows[i]).collect();
                for sign in [1i8, -1] {
                    if let Ok(c) = equidistant_center(&pts, sign) {
                        if c.weights.iter().all(|&w| w >= -weight_tol) {
                            best.offer(rows, c.center, c.radius, &subset);
                        }
                    }
                }
            }
        }
        if best.rho > T::FRAC_PI_2() - T::lit(ILL_POSED_BAND) {
            offer_hemispheres(rows, &active, &mut best);
        }
        if best.rho <= ceiling {
            return Some((best.center, best.rho, best.support));
        }
        slack *= 10.0;
    }
    None
}

/// SIC by multi-start projected subgradient ascent plus active-set polish.
pub fn sic_solve<T: Scalar>(a: &Instance<T>) -> Result<SicResult<T>> {
    let rows: Vec<&[T]> = a.rows().iter().map(|r| r.coords()).collect();
    let dim = a.m() + 1;
    let mut starts: Vec<Vec<T>> = rows.iter().map(|r| r.to_vec()).collect();
    let mut rng = RngStream::new(SUBGRADIENT_SEED, (a.n() * 131 + dim) as u64).substream(0);
    for _ in 0..SUBGRADIENT_RESTARTS {
        starts.push(rng.unit_vector(dim).into_iter().map(T::lit).collect());
    }
    let mut ascents: Vec<(Vec<T>, T)> = starts.into_iter().map(|s| ascend(&rows, s)).collect();
    ascents.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap_or(std::cmp::Ordering::Equal));

    let mut best: Option<(Vec<T>, T, Vec<usize>)> = None;
    let mut upper = T::PI();
    let mut polished: Vec<Vec<T>> = Vec::new();
    for (p, f) in &ascents {
        upper = upper.min(crate::scalar::clamp(*f, -T::one(), T::one()).acos());
        if polished.iter().any(|q| dot(q, p) > T::one() - T::tol(1e-10)) {
            continue;
        }
        polished.push(p.clone());
        if let Some(cand) = polish(&rows, p, *f) {
            if best.as_ref().is_none_or(|b| cand.1 < b.1) {
                best = Some(cand);
            }
        }
    }
    match best {
        Some((center, rho, support)) => Ok(SicResult::new(center, rho, support)),
        None => {
            // any cap containing two rows has radius at least half their distance
            let lower = (0..rows.len())
                .tuple_combinations()
                .map(|(i, j)| angle_between_unit(rows[i], rows[j]) * T::lit(0.5))
                .fold(T::zero(), T::max);
            Err(Error::NonConvergence { lower: lower.to_f64_lossy(), upper: upper.to_f64_lossy() })
        }
    }
}

/// Which SIC solver to run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SicMethod {
    Exhaustive,
    Subgradient,
    /// Exhaustive when at most [`AUTO_EXHAUSTIVE_LIMIT`] subsets, otherwise subgradient.
    #[default]
    Auto,
}

pub fn sic_with<T: Scalar>(a: &Instance<T>, method: SicMethod) -> Result<SicResult<T>> {
    match method {
        SicMethod::Exhaustive => sic_bruteforce(a),
        SicMethod::Subgradient => sic_solve(a),
        SicMethod::Auto => {
            if support_subset_count(a.n(), a.m()) <= AUTO_EXHAUSTIVE_LIMIT {
                sic_bruteforce(a)
            } else {
                sic_solve(a)
            }
        }
    }
}

/// Condition number, class and distance to the ill-posed set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CondReport<T> {
    pub cond: T,
    pub class: FeasibilityClass,
    pub dist_to_sigma: T,
    pub rho: T,
}

pub fn cond_and_class<T: Scalar>(a: &Instance<T>) -> Result<CondReport<T>> {
    let r = sic_with(a, SicMethod::Auto)?;
    Ok(CondReport { cond: r.cond, class: r.class, dist_to_sigma: r.dist_to_sigma, rho: r.rho })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PrefixEntry<T> {
    pub k: usize,
    pub cond: T,
    pub class: FeasibilityClass,
}

/// `𝒞(A_k)` and class for every prefix `k = m+2, …, n`.
pub fn prefix_cond_profile<T: Scalar>(a: &Instance<T>) -> Result<Vec<PrefixEntry<T>>> {
    (a.m() + 2..=a.n())
        .map(|k| {
            let r = cond_and_class(&a.prefix(k)?)?;
            Ok(PrefixEntry { k, cond: r.cond, class: r.class })
        })
        .collect()
}
