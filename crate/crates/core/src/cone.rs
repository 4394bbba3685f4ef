//! Spherical convex hulls `sconv(M) = cone(M) ∩ S^m`: projection onto the generated cone,
//! distances to the hull, to its dual set and to its boundary, and neighborhood tests.

use std::sync::OnceLock;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm};
use crate::scalar::{clamp, Scalar};
use crate::sphere::{angle_between_unit, Cap, SpherePoint};

/// Spherical convex hull of finitely many generators.
#[derive(Debug)]
pub struct SpherePolytope<T: Scalar> {
    generators: Vec<SpherePoint<T>>,
    facets: OnceLock<Facets<T>>,
}

impl<T: Scalar> Clone for SpherePolytope<T> {
    fn clone(&self) -> Self {
        SpherePolytope { generators: self.generators.clone(), facets: OnceLock::new() }
    }
}

/// Outward facet normals `n` (with `<n, b> <= 0` for every generator `b`) and the rank of
/// the generator set.
#[derive(Clone, Debug)]
pub struct Facets<T> {
    pub rank: usize,
    pub normals: Vec<Vec<T>>,
}

/// Result of projecting a point onto `cone(generators)`.
#[derive(Clone, Debug)]
pub struct ConeProjection<T> {
    /// Nearest point of the cone.
    pub point: Vec<T>,
    /// Nonnegative coefficients with `point = Σ λ_i b_i`.
    pub coefficients: Vec<T>,
    /// `max_j <b_j, x - point>`; nonpositive up to tolerance at optimality.
    pub kkt_residual: T,
}

impl<T: Scalar> SpherePolytope<T> {
    pub fn new(generators: Vec<SpherePoint<T>>) -> Result<Self> {
        let first = generators.first().ok_or_else(|| Error::invalid("polytope needs a generator"))?;
        let dim = first.ambient_dim();
        if let Some(bad) = generators.iter().find(|g| g.ambient_dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: bad.ambient_dim() });
        }
        Ok(SpherePolytope { generators, facets: OnceLock::new() })
    }

    /// `-sconv(points)`.
    pub fn negated(points: &[SpherePoint<T>]) -> Result<Self> {
        Self::new(points.iter().map(SpherePoint::antipode).collect())
    }

    pub fn generators(&self) -> &[SpherePoint<T>] {
        &self.generators
    }

    pub fn ambient_dim(&self) -> usize {
        self.generators[0].ambient_dim()
    }

    fn check(&self, x: &SpherePoint<T>) -> Result<()> {
        if x.ambient_dim() != self.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim(), got: x.ambient_dim() });
        }
        Ok(())
    }

    /// Facet normals, enumerated once from all `m`-subsets of generators.
    pub fn facets(&self) -> &Facets<T> {
        self.facets.get_or_init(|| enumerate_facets(&self.generators))
    }

    /// Properly convex test: the cone is pointed iff `0 ∉ conv(generators)`.
    pub fn is_properly_convex(&self) -> bool {
        !crate::lp::origin_in_conv(&self.generators)
    }
}

fn enumerate_facets<T: Scalar>(generators: &[SpherePoint<T>]) -> Facets<T> {
    let dim = generators[0].ambient_dim();
    let vecs: Vec<&[T]> = generators.iter().map(|g| g.coords()).collect();
    let rank = linalg::rank(&vecs, dim);
    let mut normals = Vec::new();
    if rank < dim {
        return Facets { rank, normals };
    }
    let side_tol = T::tol(1e-10);
    for subset in (0..generators.len()).combinations(dim - 1) {
        let span: Vec<&[T]> = subset.iter().map(|&i| vecs[i]).collect();
        let Some(n) = linalg::hyperplane_normal(&span, dim) else { continue };
        let (mut lo, mut hi) = (T::zero(), T::zero());
        for v in &vecs {
            let s = dot(&n, v);
            lo = lo.min(s);
            hi = hi.max(s);
        }
        if hi <= side_tol && lo < -side_tol {
            normals.push(n);
        } else if lo >= -side_tol && hi > side_tol {
            normals.push(n.iter().map(|&c| -c).collect());
        }
    }
    Facets { rank, normals }
}

/// Nonnegative least squares `min_{λ >= 0} |Bλ - x|` by the Lawson–Hanson active-set method.
pub fn nnls<T: Scalar>(columns: &[&[T]], x: &[T]) -> ConeProjection<T> {
    let k = columns.len();
    let dim = x.len();
    let kkt_tol = T::tol(1e-12);
    let max_iter = 100 * k.max(1);
    let mut lambda = vec![T::zero(); k];
    let mut passive = vec![false; k];
    let mut excluded = vec![false; k];
    let residual_grad = |lambda: &[T]| -> Vec<T> {
        let z = linalg::combine(columns, lambda, dim);
        let r = linalg::sub(x, &z);
        columns.iter().map(|c| dot(c, &r)).collect()
    };

    for _ in 0..max_iter {
        let w = residual_grad(&lambda);
        let candidate = (0..k)
            .filter(|&j| !passive[j] && !excluded[j])
            .max_by(|&a, &b| w[a].partial_cmp(&w[b]).unwrap_or(std::cmp::Ordering::Equal));
        let Some(j) = candidate else { break };
        if w[j] <= kkt_tol {
            break;
        }
        passive[j] = true;
        let mut progressed = false;
        for _ in 0..max_iter {
            let idx: Vec<usize> = (0..k).filter(|&i| passive[i]).collect();
            let cols: Vec<&[T]> = idx.iter().map(|&i| columns[i]).collect();
            let Some(s) = linalg::lstsq(&cols, x) else {
                // numerically dependent column; drop it for this round
                passive[j] = false;
                excluded[j] = true;
                break;
            };
            if s.iter().all(|&v| v > T::zero()) {
                for (&i, &v) in idx.iter().zip(&s) {
                    lambda[i] = v;
                }
                progressed = true;
                break;
            }
            // step back toward feasibility
            let mut step = T::one();
            for (&i, &v) in idx.iter().zip(&s) {
                if v <= T::zero() {
                    let denom = lambda[i] - v;
                    if denom > T::zero() {
                        step = step.min(lambda[i] / denom);
                    } else {
                        step = T::zero();
                    }
                }
            }
            for (&i, &v) in idx.iter().zip(&s) {
                lambda[i] = lambda[i] + step * (v - lambda[i]);
                if lambda[i] <= T::epsilon() * T::lit(16.0) {
                    lambda[i] = T::zero();
                    passive[i] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
        if progressed {
            excluded.iter_mut().for_each(|e| *e = false);
        }
    }
    let point = linalg::combine(columns, &lambda, dim);
    let w = residual_grad(&lambda);
    let kkt_residual = w.iter().copied().fold(T::neg_infinity(), T::max);
    ConeProjection { point, coefficients: lambda, kkt_residual }
}

/// Euclidean projection of `x` onto `cone(generators)`.
pub fn project_onto_cone<T: Scalar>(x: &SpherePoint<T>, p: &SpherePolytope<T>) -> Result<ConeProjection<T>> {
    p.check(x)?;
    let cols: Vec<&[T]> = p.generators.iter().map(|g| g.coords()).collect();
    Ok(nnls(&cols, x.coords()))
}

fn zero_threshold<T: Scalar>() -> T {
    T::tol(1e-13)
}

/// `d(x, sconv(P))`.
///
/// With `z` the projection onto the cone: if `z ≠ 0` the nearest hull point is `z/|z|`;
/// otherwise `x` lies in the polar cone and the best hull point is a generator.
pub fn distance_to_sconv<T: Scalar>(x: &SpherePoint<T>, p: &SpherePolytope<T>) -> Result<T> {
    let proj = project_onto_cone(x, p)?;
    let zn = norm(&proj.point);
    if zn > zero_threshold() {
        let rn = norm(&linalg::sub(x.coords(), &proj.point));
        return Ok(rn.atan2(zn));
    }
    let best = p
        .generators
        .iter()
        .map(|g| angle_between_unit(x.coords(), g.coords()))
        .fold(T::infinity(), T::min);
    Ok(best)
}

/// `d(x, K̆)` where `K̆ = {a : <a, y> <= 0 for all y ∈ sconv(P)}`.
///
/// Uses the Moreau decomposition `x = proj_cone(x) + proj_polar(x)`. When `x` is in the cone
/// the polar component vanishes and the answer comes from the extreme rays of the polar cone,
/// which are the outward facet normals.
pub fn distance_to_dual<T: Scalar>(x: &SpherePoint<T>, p: &SpherePolytope<T>) -> Result<T> {
    let proj = project_onto_cone(x, p)?;
    let polar = linalg::sub(x.coords(), &proj.point);
    let pn = norm(&polar);
    if pn > zero_threshold() {
        return Ok(norm(&proj.point).atan2(pn));
    }
    let facets = p.facets();
    if facets.rank < p.ambient_dim() {
        // the polar cone contains span(P)^⊥, orthogonal to x
        return Ok(T::FRAC_PI_2());
    }
    if facets.normals.is_empty() {
        return Err(Error::DualEmpty);
    }
    let best = facets.normals.iter().map(|n| dot(n, x.coords())).fold(T::neg_infinity(), T::max);
    Ok(clamp(best, -T::one(), T::one()).acos())
}

/// Whether `x ∈ sconv(P)` by the facet description (full-dimensional hulls only).
pub fn contains<T: Scalar>(x: &SpherePoint<T>, p: &SpherePolytope<T>) -> Result<bool> {
    p.check(x)?;
    let facets = full_dimensional_facets(p)?;
    Ok(max_facet_product(x, facets) <= T::tol(1e-12))
}

fn full_dimensional_facets<T: Scalar>(p: &SpherePolytope<T>) -> Result<&Facets<T>> {
    let facets = p.facets();
    if facets.rank < p.ambient_dim() {
        return Err(Error::DegenerateHull { rank: facets.rank, dim: p.ambient_dim() });
    }
    if facets.normals.is_empty() {
        return Err(Error::DualEmpty);
    }
    Ok(facets)
}

fn max_facet_product<T: Scalar>(x: &SpherePoint<T>, facets: &Facets<T>) -> T {
    facets.normals.iter().map(|n| dot(n, x.coords())).fold(T::neg_infinity(), T::max)
}

/// `d(x, ∂K)` for `K = sconv(P)` full-dimensional: the hull distance outside `K`, the
/// smallest facet great-subsphere distance inside.
pub fn distance_to_boundary<T: Scalar>(x: &SpherePoint<T>, p: &SpherePolytope<T>) -> Result<T> {
    p.check(x)?;
    let facets = full_dimensional_facets(p)?;
    let worst = max_facet_product(x, facets);
    if worst <= T::tol(1e-12) {
        Ok(clamp(-worst, T::zero(), T::one()).asin())
    } else {
        distance_to_sconv(x, p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Outer,
    Inner,
    Both,
}

fn check_phi<T: Scalar>(phi: T) -> Result<()> {
    if !(phi > T::zero() && phi <= T::FRAC_PI_2()) {
        return Err(Error::invalid(format!("neighborhood radius {phi} outside (0, π/2]")));
    }
    Ok(())
}

/// Membership in `T_o(∂K, φ)`, `T_i(∂K, φ)` or their union. Distances are compared strictly.
pub fn in_neighborhood<T: Scalar>(x: &SpherePoint<T>, p: &SpherePolytope<T>, phi: T, side: Side) -> Result<bool> {
    check_phi(phi)?;
    let inside = contains(x, p)?;
    let d = distance_to_boundary(x, p)?;
    Ok(side_test(inside, d, phi, side))
}

fn side_test<T: Scalar>(inside: bool, d: T, phi: T, side: Side) -> bool {
    let near = d < phi;
    match side {
        Side::Outer => near && !inside,
        Side::Inner => near && inside,
        Side::Both => near,
    }
}

/// Closed-form distances from `x` to a cap `K = B(c, r)`, its dual `B(-c, π/2 - r)` and its
/// boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapDistances<T> {
    pub to_set: T,
    pub to_dual: T,
    pub to_boundary: T,
}

pub fn cap_distance_suite<T: Scalar>(x: &SpherePoint<T>, cap: &Cap<T>) -> Result<CapDistances<T>> {
    if cap.radius > T::FRAC_PI_2() {
        return Err(Error::invalid(format!("cap radius {} exceeds π/2", cap.radius)));
    }
    if x.ambient_dim() != cap.center.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: cap.center.ambient_dim(), got: x.ambient_dim() });
    }
    let s = angle_between_unit(x.coords(), cap.center.coords());
    let r = cap.radius;
    let to_antipode = T::PI() - s;
    Ok(CapDistances {
        to_set: (s - r).max(T::zero()),
        to_dual: (to_antipode - (T::FRAC_PI_2() - r)).max(T::zero()),
        to_boundary: (s - r).abs(),
    })
}

/// Neighborhood test against a cap using the closed forms.
pub fn in_cap_neighborhood<T: Scalar>(x: &SpherePoint<T>, cap: &Cap<T>, phi: T, side: Side) -> Result<bool> {
    check_phi(phi)?;
    let d = cap_distance_suite(x, cap)?;
    let s = angle_between_unit(x.coords(), cap.center.coords());
    Ok(side_test(s <= cap.radius, d.to_boundary, phi, side))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn pt(v: &[f64]) -> SpherePoint<f64> {
        SpherePoint::normalized(v.to_vec()).unwrap()
    }

    fn poly(v: &[&[f64]]) -> SpherePolytope<f64> {
        SpherePolytope::new(v.iter().map(|c| pt(c)).collect()).unwrap()
    }

    #[test]
    fn projection_examples() {
        let p = poly(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        let proj = project_onto_cone(&pt(&[1.0, 0.0, 0.0]), &p).unwrap();
        assert!((proj.point[0] - 1.0).abs() < 1e-14);
        assert!((proj.coefficients[0] - 1.0).abs() < 1e-14 && proj.coefficients[1] == 0.0);

        let single = poly(&[&[1.0, 0.0, 0.0]]);
        let proj = project_onto_cone(&pt(&[-1.0, 0.0, 0.0]), &single).unwrap();
        assert!(norm(&proj.point) == 0.0);

        let proj = project_onto_cone(&pt(&[0.0, 0.0, 1.0]), &p).unwrap();
        assert!(norm(&proj.point) < 1e-15);
        assert!(proj.kkt_residual <= 1e-10);
    }

    #[test]
    fn sconv_distance_examples() {
        let p = poly(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        assert!(distance_to_sconv(&pt(&[0.0, 1.0, 0.0]), &p).unwrap() < 1e-15);
        assert!((distance_to_sconv(&pt(&[0.0, 0.0, 1.0]), &p).unwrap() - FRAC_PI_2).abs() < 1e-14);
        let single = poly(&[&[1.0, 0.0, 0.0]]);
        assert!((distance_to_sconv(&pt(&[-1.0, 0.0, 0.0]), &single).unwrap() - PI).abs() < 1e-14);
    }

    #[test]
    fn dual_distance_examples() {
        let single = poly(&[&[1.0, 0.0, 0.0]]);
        assert!(distance_to_dual(&pt(&[-1.0, 0.0, 0.0]), &single).unwrap() < 1e-14);
        assert!((distance_to_dual(&pt(&[1.0, 0.0, 0.0]), &single).unwrap() - FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn dual_of_whole_sphere_is_an_error() {
        let p = poly(&[
            &[1.0, 0.0, 0.0],
            &[-1.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0],
            &[0.0, -1.0, 0.0],
            &[0.0, 0.0, 1.0],
            &[0.0, 0.0, -1.0],
        ]);
        assert!(matches!(distance_to_dual(&pt(&[1.0, 2.0, 3.0]), &p), Err(Error::DualEmpty)));
    }

    #[test]
    fn boundary_distance_examples() {
        let p = poly(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let centre = pt(&[1.0, 1.0, 1.0]);
        let d = distance_to_boundary(&centre, &p).unwrap();
        assert!((d - (1.0 / 3f64.sqrt()).asin()).abs() < 1e-14);
        assert!(distance_to_boundary(&pt(&[1.0, 1.0, 0.0]), &p).unwrap() < 1e-14);
        let out = pt(&[-1.0, 2.0, 0.5]);
        assert_eq!(distance_to_boundary(&out, &p).unwrap(), distance_to_sconv(&out, &p).unwrap());
        let flat = poly(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        assert!(matches!(distance_to_boundary(&centre, &flat), Err(Error::DegenerateHull { .. })));
    }

    #[test]
    fn neighborhood_examples() {
        let p = poly(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let on_facet = pt(&[1.0, 1.0, 0.0]);
        assert!(in_neighborhood(&on_facet, &p, 1e-3, Side::Both).unwrap());
        let far = pt(&[0.0, -1.0, -1.0]);
        assert!((distance_to_sconv(&far, &p).unwrap() - FRAC_PI_2).abs() < 1e-14);
        assert!(!in_neighborhood(&far, &p, FRAC_PI_4, Side::Outer).unwrap());
        assert!(in_neighborhood(&on_facet, &p, 0.0, Side::Both).is_err());
        assert!(in_neighborhood(&on_facet, &p, 2.0, Side::Both).is_err());
    }

    #[test]
    fn cap_suite_examples() {
        let r = 0.4;
        let cap = Cap::new(pt(&[0.0, 0.0, 1.0]), r).unwrap();
        let at_centre = cap_distance_suite(&cap.center, &cap).unwrap();
        assert_eq!(at_centre.to_set, 0.0);
        assert!((at_centre.to_boundary - r).abs() < 1e-15);
        assert!((at_centre.to_dual - (FRAC_PI_2 + r)).abs() < 1e-15);
        assert!(cap_distance_suite(&cap.center.antipode(), &cap).unwrap().to_dual < 1e-15);
        let rim = pt(&[r.sin(), 0.0, r.cos()]);
        assert!(cap_distance_suite(&rim, &cap).unwrap().to_boundary < 1e-15);
        let wide = Cap::new(pt(&[0.0, 0.0, 1.0]), 2.0).unwrap();
        assert!(cap_distance_suite(&rim, &wide).is_err());
    }
}
