//! Points, caps and rotations on the unit sphere `S^m ⊂ R^{m+1}`.

use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::scalar::{clamp, Scalar};

/// Inputs further than this from unit norm are rejected rather than normalized.
pub const UNIT_TOLERANCE: f64 = 1e-6;

/// A unit vector in `R^{m+1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpherePoint<T: Scalar> {
    coords: Vec<T>,
}

impl<T: Scalar> SpherePoint<T> {
    /// Accepts a vector whose norm is within `1e-6` of one and renormalizes it. Vectors already
    /// unit to rounding are kept bit for bit, so stored instances read back unchanged.
    pub fn new(coords: Vec<T>) -> Result<Self> {
        let n = norm(&coords);
        if (n - T::one()).abs().to_f64_lossy() > UNIT_TOLERANCE || !n.is_finite() {
            return Err(Error::NotUnit { row: 0, norm: n.to_f64_lossy() });
        }
        if coords.len() >= 2 && (n - T::one()).abs() <= T::epsilon() * T::lit(4.0) {
            return Ok(SpherePoint { coords });
        }
        Self::normalized(coords)
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(mut coords: Vec<T>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::invalid("sphere points need ambient dimension >= 2"));
        }
        let n = norm(&coords);
        if n == T::zero() || !n.is_finite() {
            return Err(Error::invalid("cannot normalize a zero or non-finite vector"));
        }
        for c in coords.iter_mut() {
            *c = *c / n;
        }
        Ok(SpherePoint { coords })
    }

    /// `i`-th standard basis vector of `R^dim`.
    pub fn basis(dim: usize, i: usize) -> Self {
        assert!(dim >= 2 && i < dim);
        let mut coords = vec![T::zero(); dim];
        coords[i] = T::one();
        SpherePoint { coords }
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }

    /// Ambient dimension `m + 1`.
    pub fn ambient_dim(&self) -> usize {
        self.coords.len()
    }

    /// Sphere dimension `m`.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn antipode(&self) -> Self {
        SpherePoint { coords: self.coords.iter().map(|&c| -c).collect() }
    }

    pub fn dot(&self, other: &Self) -> T {
        dot(&self.coords, &other.coords)
    }

    pub(crate) fn from_unit_unchecked(coords: Vec<T>) -> Self {
        SpherePoint { coords }
    }
}

impl<T: Scalar> Index<usize> for SpherePoint<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.coords[i]
    }
}

fn check_dims<T: Scalar>(x: &SpherePoint<T>, y: &SpherePoint<T>) -> Result<()> {
    if x.ambient_dim() != y.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: x.ambient_dim(), got: y.ambient_dim() });
    }
    Ok(())
}

/// Geodesic distance in `[0, π]`.
///
/// Evaluated as `2 atan2(|x - y|, |x + y|)`, which equals `arccos(<x, y>)` but keeps full
/// relative precision near `0` and `π`.
pub fn angular_distance<T: Scalar>(x: &SpherePoint<T>, y: &SpherePoint<T>) -> Result<T> {
    check_dims(x, y)?;
    Ok(angle_between_unit(x.coords(), y.coords()))
}

pub(crate) fn angle_between_unit<T: Scalar>(x: &[T], y: &[T]) -> T {
    let mut d2 = T::zero();
    let mut s2 = T::zero();
    for (&a, &b) in x.iter().zip(y) {
        d2 = d2 + (a - b) * (a - b);
        s2 = s2 + (a + b) * (a + b);
    }
    let two = T::one() + T::one();
    clamp(two * d2.sqrt().atan2(s2.sqrt()), T::zero(), T::PI())
}

/// `sin` of the angular distance; identifies antipodal points.
pub fn projective_distance<T: Scalar>(x: &SpherePoint<T>, y: &SpherePoint<T>) -> Result<T> {
    Ok(angular_distance(x, y)?.sin().max(T::zero()))
}

/// `vol S^m = 2 π^{(m+1)/2} / Γ((m+1)/2)`, via the recurrence `O_m = 2π/(m-1) · O_{m-2}`.
pub fn sphere_volume<T: Scalar>(m: usize) -> T {
    let two = T::lit(2.0);
    let (mut v, start) = if m % 2 == 0 { (two, 0) } else { (two * T::PI(), 1) };
    let mut k = start;
    while k < m {
        k += 2;
        v = v * two * T::PI() / T::from_usize_lossy(k - 1);
    }
    v
}

/// Spherical cap `B(center, radius) = {x : d(x, center) <= radius}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cap<T: Scalar> {
    pub center: SpherePoint<T>,
    pub radius: T,
}

impl<T: Scalar> Cap<T> {
    pub fn new(center: SpherePoint<T>, radius: T) -> Result<Self> {
        if !(radius >= T::zero() && radius <= T::PI()) {
            return Err(Error::invalid(format!("cap radius {radius} outside [0, π]")));
        }
        Ok(Cap { center, radius })
    }

    /// Membership with an additive tolerance on the inner-product test.
    pub fn contains(&self, x: &SpherePoint<T>, tol: T) -> bool {
        self.center.dot(x) >= self.radius.cos() - tol
    }

    /// Membership measured in angle: `d(x, center) <= radius + tol`.
    pub fn contains_angle(&self, x: &SpherePoint<T>, tol: T) -> bool {
        angle_between_unit(self.center.coords(), x.coords()) <= self.radius + tol
    }
}

/// An orthogonal map stored as a dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Rotation<T: Scalar> {
    dim: usize,
    matrix: Vec<T>,
}

impl<T: Scalar> Rotation<T> {
    pub fn identity(dim: usize) -> Self {
        let mut matrix = vec![T::zero(); dim * dim];
        for i in 0..dim {
            matrix[i * dim + i] = T::one();
        }
        Rotation { dim, matrix }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> T {
        self.matrix[i * self.dim + j]
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        (0..self.dim).map(|i| dot(&self.matrix[i * self.dim..(i + 1) * self.dim], x)).collect()
    }

    pub fn apply_point(&self, x: &SpherePoint<T>) -> SpherePoint<T> {
        SpherePoint::from_unit_unchecked(self.apply(x.coords()))
    }

    /// Left-multiplies by the reflection `I - 2 v v^T / |v|^2`.
    fn reflect(&mut self, v: &[T]) {
        let vv = dot(v, v);
        let n = self.dim;
        for j in 0..n {
            let d = (0..n).fold(T::zero(), |s, i| s + v[i] * self.matrix[i * n + j]);
            let f = (d + d) / vv;
            for i in 0..n {
                self.matrix[i * n + j] = self.matrix[i * n + j] - f * v[i];
            }
        }
    }

    /// `max |R^T R - I|` entrywise.
    pub fn orthogonality_defect(&self) -> T {
        let n = self.dim;
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                let s = (0..n).fold(T::zero(), |s, k| s + self.entry(k, i) * self.entry(k, j));
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((s - target).abs());
            }
        }
        worst
    }
}

/// A proper rotation mapping `source` onto `target`, built from two Householder reflections:
/// `v = source - target` sends `source` to `target`, and a second reflection across a fixed
/// hyperplane containing `target` restores determinant `+1`.
pub fn rotation_to<T: Scalar>(source: &SpherePoint<T>, target: &SpherePoint<T>) -> Result<Rotation<T>> {
    check_dims(source, target)?;
    let dim = source.ambient_dim();
    let mut r = Rotation::identity(dim);
    let v: Vec<T> = source.coords().iter().zip(target.coords()).map(|(&s, &t)| s - t).collect();
    if norm(&v) <= T::epsilon() {
        return Ok(r);
    }
    r.reflect(&v);
    // fixed second mirror: the coordinate axis least aligned with target, made orthogonal to it
    let t = target.coords();
    let k = (0..dim)
        .min_by(|&a, &b| t[a].abs().partial_cmp(&t[b].abs()).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap_or(0);
    let mut w: Vec<T> = t.iter().map(|&ti| -t[k] * ti).collect();
    w[k] = w[k] + T::one();
    r.reflect(&w);
    Ok(r)
}
