//! Dense two-phase simplex with Bland's rule, and the feasibility classification of
//! instances it supports (Gordan's alternative).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::scalar::Scalar;
use crate::sphere::SpherePoint;

/// `min c^T x` subject to `Ax = b`, `x >= 0`.
#[derive(Clone, Debug)]
pub struct SimplexProblem<T> {
    pub objective: Vec<T>,
    pub matrix: Vec<Vec<T>>,
    pub rhs: Vec<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimplexStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct SimplexSolution<T> {
    pub status: SimplexStatus,
    pub x: Vec<T>,
    pub objective: T,
}

/// Tolerance on the phase-one objective below which a problem counts as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-9;

struct Tableau<T> {
    rows: Vec<Vec<T>>, // each row: [coefficients..., rhs]
    basis: Vec<usize>,
    width: usize, // number of structural + artificial columns
}

impl<T: Scalar> Tableau<T> {
    fn pivot(&mut self, r: usize, c: usize, cost: &mut [T]) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v = *v / p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != T::zero() {
                for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                    *v = *v - f * pv;
                }
                row[c] = T::zero();
            }
        }
        let f = cost[c];
        if f != T::zero() {
            for (v, &pv) in cost.iter_mut().zip(&pivot_row) {
                *v = *v - f * pv;
            }
            cost[c] = T::zero();
        }
        self.basis[r] = c;
    }

    /// Runs Bland-rule pivots on `cost` (reduced costs with `-z` in the last slot) over the
    /// columns `< allowed`. Returns `false` on unboundedness.
    fn optimize(&mut self, cost: &mut [T], allowed: usize, guard: &mut usize, limit: usize) -> Result<bool> {
        let enter_tol = T::tol(1e-11);
        let pivot_tol = T::tol(1e-12);
        loop {
            let Some(c) = (0..allowed).find(|&j| cost[j] < -enter_tol) else {
                return Ok(true);
            };
            let mut best: Option<(usize, T)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[c];
                if a > pivot_tol {
                    let ratio = row[self.width] / a;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br || (ratio == br && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = best else { return Ok(false) };
            self.pivot(r, c, cost);
            *guard += 1;
            if *guard > limit {
                return Err(Error::CyclingGuard(*guard));
            }
        }
    }
}

/// Solves the problem by the two-phase method with Bland's anti-cycling rule.
pub fn simplex_solve<T: Scalar>(p: &SimplexProblem<T>) -> Result<SimplexSolution<T>> {
    let m = p.matrix.len();
    let n = p.objective.len();
    if p.rhs.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: p.rhs.len() });
    }
    if let Some(row) = p.matrix.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: row.len() });
    }
    if p.rhs.iter().any(|b| !b.is_finite()) {
        return Err(Error::invalid("simplex right-hand side must be finite"));
    }
    let width = n + m;
    let mut rows = Vec::with_capacity(m);
    for (i, (a, &b)) in p.matrix.iter().zip(&p.rhs).enumerate() {
        let flip = if b < T::zero() { -T::one() } else { T::one() };
        let mut row = vec![T::zero(); width + 1];
        for (j, &v) in a.iter().enumerate() {
            row[j] = v * flip;
        }
        row[n + i] = T::one();
        row[width] = b * flip;
        rows.push(row);
    }
    let mut tab = Tableau { rows, basis: (n..n + m).collect(), width };

    // phase one: minimize the sum of artificials
    let mut cost = vec![T::zero(); width + 1];
    for row in &tab.rows {
        for j in 0..n {
            cost[j] = cost[j] - row[j];
        }
        cost[width] = cost[width] - row[width];
    }
    let limit = 10_000 + 50 * (m + n);
    let mut guard = 0;
    tab.optimize(&mut cost, width, &mut guard, limit)?;
    let infeasibility = -cost[width];
    let scale = p.rhs.iter().fold(T::one(), |s, b| s.max(b.abs()));
    if infeasibility > T::tol(FEASIBILITY_TOL) * scale {
        return Ok(SimplexSolution { status: SimplexStatus::Infeasible, x: vec![T::zero(); n], objective: T::nan() });
    }
    // drive remaining artificials out of the basis where possible
    let pivot_tol = T::tol(1e-10);
    for r in 0..m {
        if tab.basis[r] >= n {
            if let Some(c) = (0..n).find(|&j| tab.rows[r][j].abs() > pivot_tol) {
                let mut dummy = vec![T::zero(); width + 1];
                tab.pivot(r, c, &mut dummy);
            }
        }
    }

    // phase two
    let mut cost = vec![T::zero(); width + 1];
    cost[..n].copy_from_slice(&p.objective);
    for r in 0..m {
        let b = tab.basis[r];
        let cb = if b < n { p.objective[b] } else { T::zero() };
        if cb != T::zero() {
            for (v, &a) in cost.iter_mut().zip(&tab.rows[r]) {
                *v = *v - cb * a;
            }
        }
    }
    if !tab.optimize(&mut cost, n, &mut guard, limit)? {
        return Ok(SimplexSolution { status: SimplexStatus::Unbounded, x: vec![T::zero(); n], objective: T::neg_infinity() });
    }
    let mut x = vec![T::zero(); n];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rows[r][width].max(T::zero());
        }
    }
    let objective = x.iter().zip(&p.objective).fold(T::zero(), |s, (&xi, &ci)| s + xi * ci);
    Ok(SimplexSolution { status: SimplexStatus::Optimal, x, objective })
}

/// Whether `0 ∈ conv(points)`: a phase-one LP on `Σλ_i a_i = 0, Σλ_i = 1, λ >= 0`.
pub fn origin_in_conv<T: Scalar>(points: &[SpherePoint<T>]) -> bool {
    if points.is_empty() {
        return false;
    }
    let d = points[0].ambient_dim();
    let k = points.len();
    let mut matrix: Vec<Vec<T>> = (0..d).map(|j| points.iter().map(|p| p[j]).collect()).collect();
    matrix.push(vec![T::one(); k]);
    let mut rhs = vec![T::zero(); d];
    rhs.push(T::one());
    let problem = SimplexProblem { objective: vec![T::zero(); k], matrix, rhs };
    match simplex_solve(&problem) {
        Ok(sol) => sol.status == SimplexStatus::Optimal,
        Err(_) => false,
    }
}

/// Feasibility class of an instance `Ax <= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeasibilityClass {
    #[serde(rename = "SF")]
    StrictlyFeasible,
    #[serde(rename = "IP")]
    IllPosed,
    #[serde(rename = "IF")]
    Infeasible,
}

impl FeasibilityClass {
    pub fn code(self) -> &'static str {
        match self {
            FeasibilityClass::StrictlyFeasible => "SF",
            FeasibilityClass::IllPosed => "IP",
            FeasibilityClass::Infeasible => "IF",
        }
    }

    pub fn is_feasible(self) -> bool {
        !matches!(self, FeasibilityClass::Infeasible)
    }
}

impl fmt::Display for FeasibilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Largest `t` with `<a_i, x> <= -t` for all rows, over `x` on the boundary of the unit
/// `∞`-norm cube. Positive iff strictly feasible, zero iff weakly feasible (some nonzero
/// `x` with `Ax <= 0`), negative iff infeasible.
pub fn max_boundary_slack<T: Scalar>(points: &[SpherePoint<T>]) -> Result<T> {
    let d = points.first().ok_or_else(|| Error::invalid("no rows"))?.ambient_dim();
    let n = points.len();
    // variables: y (d) = x + 1, t+, t-, row slacks (n), box slacks (d)
    let nv = d + 2 + n + d;
    let (tp, tm) = (d, d + 1);
    let mut best = T::neg_infinity();
    for j in 0..d {
        for sign in [T::one(), -T::one()] {
            let mut matrix = Vec::with_capacity(n + d + 1);
            let mut rhs = Vec::with_capacity(n + d + 1);
            for (i, a) in points.iter().enumerate() {
                let mut row = vec![T::zero(); nv];
                row[..d].copy_from_slice(a.coords());
                row[tp] = T::one();
                row[tm] = -T::one();
                row[d + 2 + i] = T::one();
                matrix.push(row);
                rhs.push(a.coords().iter().fold(T::zero(), |s, &v| s + v));
            }
            for l in 0..d {
                let mut row = vec![T::zero(); nv];
                row[l] = T::one();
                row[d + 2 + n + l] = T::one();
                matrix.push(row);
                rhs.push(T::lit(2.0));
            }
            let mut fix = vec![T::zero(); nv];
            fix[j] = T::one();
            matrix.push(fix);
            rhs.push(T::one() + sign);
            let mut objective = vec![T::zero(); nv];
            objective[tp] = -T::one();
            objective[tm] = T::one();
            let sol = simplex_solve(&SimplexProblem { objective, matrix, rhs })?;
            if sol.status == SimplexStatus::Optimal {
                best = best.max(-sol.objective);
            }
        }
    }
    Ok(best)
}

/// Classifies arbitrary row sets (no `n > m + 1` requirement).
pub fn classify_points<T: Scalar>(points: &[SpherePoint<T>]) -> Result<FeasibilityClass> {
    if !origin_in_conv(points) {
        return Ok(FeasibilityClass::StrictlyFeasible);
    }
    let slack = max_boundary_slack(points)?;
    Ok(if slack >= -T::tol(FEASIBILITY_TOL) {
        FeasibilityClass::IllPosed
    } else {
        FeasibilityClass::Infeasible
    })
}

/// Gordan-based classification: strictly feasible iff `0 ∉ conv(A)`, otherwise ill-posed
/// iff some nonzero `x` has `Ax <= 0`.
pub fn gordan_classify<T: Scalar>(a: &Instance<T>) -> Result<FeasibilityClass> {
    classify_points(a.rows())
}
