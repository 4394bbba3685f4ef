//! Small dense linear algebra on `Vec`-backed matrices. Dimensions here never exceed a few
//! dozen, so everything is straightforward O(n^3) elimination.

use crate::scalar::Scalar;

#[inline]
pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
}

#[inline]
pub fn norm<T: Scalar>(x: &[T]) -> T {
    // scaled to avoid overflow/underflow on tiny residual vectors
    let scale = x.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if scale == T::zero() {
        return T::zero();
    }
    let s = x.iter().fold(T::zero(), |acc, &v| {
        let r = v / scale;
        acc + r * r
    });
    scale * s.sqrt()
}

#[inline]
pub fn sub<T: Scalar>(x: &[T], y: &[T]) -> Vec<T> {
    x.iter().zip(y).map(|(&a, &b)| a - b).collect()
}

#[inline]
pub fn add<T: Scalar>(x: &[T], y: &[T]) -> Vec<T> {
    x.iter().zip(y).map(|(&a, &b)| a + b).collect()
}

#[inline]
pub fn scale<T: Scalar>(x: &[T], s: T) -> Vec<T> {
    x.iter().map(|&a| a * s).collect()
}

/// Returns `sum_i coeffs[i] * vectors[i]`.
pub fn combine<T: Scalar>(vectors: &[&[T]], coeffs: &[T], dim: usize) -> Vec<T> {
    let mut out = vec![T::zero(); dim];
    for (v, &c) in vectors.iter().zip(coeffs) {
        for (o, &x) in out.iter_mut().zip(v.iter()) {
            *o = *o + c * x;
        }
    }
    out
}

/// LU factorization with partial pivoting, stored in place.
struct Lu<T> {
    lu: Vec<Vec<T>>,
    perm: Vec<usize>,
}

fn lu_factor<T: Scalar>(a: &[Vec<T>]) -> Option<Lu<T>> {
    let n = a.len();
    let mut lu: Vec<Vec<T>> = a.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let amax = a.iter().flatten().fold(T::zero(), |m, v| m.max(v.abs()));
    if amax == T::zero() {
        return None;
    }
    let tiny = amax * T::epsilon() * T::from_usize_lossy(n.max(1));
    for k in 0..n {
        let (p, pv) = (k..n)
            .map(|i| (i, lu[i][k].abs()))
            .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pv <= tiny {
            return None;
        }
        lu.swap(k, p);
        perm.swap(k, p);
        for i in k + 1..n {
            let f = lu[i][k] / lu[k][k];
            lu[i][k] = f;
            for j in k + 1..n {
                let u = lu[k][j];
                lu[i][j] = lu[i][j] - f * u;
            }
        }
    }
    Some(Lu { lu, perm })
}

impl<T: Scalar> Lu<T> {
    fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.lu.len();
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] = x[i] - self.lu[i][j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] = x[i] - self.lu[i][j] * x[j];
            }
            x[i] = x[i] / self.lu[i][i];
        }
        x
    }
}

/// Solves `a x = b` for square `a`; `None` if numerically singular.
pub fn solve<T: Scalar>(a: &[Vec<T>], b: &[T]) -> Option<Vec<T>> {
    lu_factor(a).map(|lu| lu.solve(b))
}

/// Solves `a x = b` and returns `(x, cond_1(a))`, with the 1-norm condition number
/// computed from the explicit inverse.
pub fn solve_with_cond<T: Scalar>(a: &[Vec<T>], b: &[T]) -> Option<(Vec<T>, T)> {
    let n = a.len();
    let lu = lu_factor(a)?;
    let x = lu.solve(b);
    let norm1 = |cols: &dyn Fn(usize) -> Vec<T>| {
        (0..n)
            .map(|j| cols(j).iter().fold(T::zero(), |s, v| s + v.abs()))
            .fold(T::zero(), T::max)
    };
    let a_norm = norm1(&|j| a.iter().map(|row| row[j]).collect());
    let inv_norm = norm1(&|j| {
        let mut e = vec![T::zero(); n];
        e[j] = T::one();
        lu.solve(&e)
    });
    Some((x, a_norm * inv_norm))
}

/// Thin QR of the matrix whose columns are `vectors`: returns orthonormal columns `Q` and
/// the upper-triangular `R` (row-major) with `vectors[j] = Σ_i R[i][j] Q[i]`. Modified
/// Gram-Schmidt with one reorthogonalization pass; a dependent column leaves a zero
/// diagonal entry and a zero column in `Q`.
pub fn thin_qr<T: Scalar>(vectors: &[&[T]]) -> (Vec<Vec<T>>, Vec<Vec<T>>) {
    let s = vectors.len();
    let mut q: Vec<Vec<T>> = Vec::with_capacity(s);
    let mut r = vec![vec![T::zero(); s]; s];
    for (j, v) in vectors.iter().enumerate() {
        let mut w = v.to_vec();
        for _ in 0..2 {
            for (i, qi) in q.iter().enumerate() {
                let c = dot(qi, &w);
                r[i][j] = r[i][j] + c;
                for (wk, &qk) in w.iter_mut().zip(qi) {
                    *wk = *wk - c * qk;
                }
            }
        }
        let n = norm(&w);
        r[j][j] = n;
        if n > T::zero() {
            w.iter_mut().for_each(|x| *x = *x / n);
        } else {
            w.iter_mut().for_each(|x| *x = T::zero());
        }
        q.push(w);
    }
    (q, r)
}

/// Householder QR of the `rows x cols` matrix given column-wise; returns the explicit
/// orthogonal factor `Q` (rows x rows, column-major) and the diagonal of `R`.
fn householder_qr<T: Scalar>(columns: &[Vec<T>], rows: usize) -> (Vec<Vec<T>>, Vec<T>) {
    let cols = columns.len();
    // a[j] is column j
    let mut a: Vec<Vec<T>> = columns.to_vec();
    let mut reflectors: Vec<Vec<T>> = Vec::with_capacity(cols);
    let mut rdiag = Vec::with_capacity(cols);
    for k in 0..cols.min(rows) {
        let x: Vec<T> = a[k][k..].to_vec();
        let alpha = norm(&x);
        let mut v = x.clone();
        let sign = if x[0] >= T::zero() { T::one() } else { -T::one() };
        v[0] = v[0] + sign * alpha;
        let vn = norm(&v);
        if vn == T::zero() {
            reflectors.push(vec![T::zero(); rows - k]);
            rdiag.push(T::zero());
            continue;
        }
        for e in v.iter_mut() {
            *e = *e / vn;
        }
        for col in a.iter_mut().skip(k) {
            let d = dot(&v, &col[k..]);
            for (i, vi) in v.iter().enumerate() {
                col[k + i] = col[k + i] - (d + d) * *vi;
            }
        }
        rdiag.push(a[k][k]);
        reflectors.push(v);
    }
    // Q = H_0 H_1 ... H_{p-1}; build by applying to identity columns in reverse
    let mut q: Vec<Vec<T>> = (0..rows)
        .map(|j| {
            let mut e = vec![T::zero(); rows];
            e[j] = T::one();
            e
        })
        .collect();
    for (k, v) in reflectors.iter().enumerate().rev() {
        for col in q.iter_mut() {
            let d = dot(v, &col[k..]);
            for (i, vi) in v.iter().enumerate() {
                col[k + i] = col[k + i] - (d + d) * *vi;
            }
        }
    }
    (q, rdiag)
}

/// Unit normal of the hyperplane spanned by `vectors` (exactly `dim - 1` vectors in
/// `R^dim`), or `None` when they are numerically dependent.
pub fn hyperplane_normal<T: Scalar>(vectors: &[&[T]], dim: usize) -> Option<Vec<T>> {
    debug_assert_eq!(vectors.len() + 1, dim);
    let cols: Vec<Vec<T>> = vectors.iter().map(|v| v.to_vec()).collect();
    let (q, rdiag) = householder_qr(&cols, dim);
    let scale = vectors.iter().map(|v| norm(v)).fold(T::zero(), T::max);
    let thresh = scale * T::tol(1e-10);
    if rdiag.iter().any(|r| r.abs() <= thresh) {
        return None;
    }
    Some(q[dim - 1].clone())
}

/// Orthonormal basis of the orthogonal complement of `span(vectors)` in `R^dim`.
pub fn orthogonal_complement<T: Scalar>(vectors: &[&[T]], dim: usize) -> Vec<Vec<T>> {
    let r = rank(vectors, dim);
    if vectors.is_empty() {
        return householder_qr::<T>(&[], dim).0;
    }
    // column pivoting is not needed: we only need an orthonormal basis of the complement,
    // which QR of an orthonormalized spanning set provides
    let basis = orthonormal_span(vectors, dim);
    let (q, _) = householder_qr(&basis, dim);
    q.into_iter().skip(r).collect()
}

/// Orthonormal basis of `span(vectors)` via modified Gram-Schmidt with re-orthogonalization.
pub fn orthonormal_span<T: Scalar>(vectors: &[&[T]], dim: usize) -> Vec<Vec<T>> {
    let scale = vectors.iter().map(|v| norm(v)).fold(T::zero(), T::max);
    let thresh = scale * T::tol(1e-10);
    let mut basis: Vec<Vec<T>> = Vec::new();
    for v in vectors {
        let mut w = v.to_vec();
        for _ in 0..2 {
            for b in &basis {
                let d = dot(&w, b);
                for (wi, &bi) in w.iter_mut().zip(b) {
                    *wi = *wi - d * bi;
                }
            }
        }
        let n = norm(&w);
        if n > thresh {
            basis.push(scale_vec(w, T::one() / n));
        }
        if basis.len() == dim {
            break;
        }
    }
    basis
}

fn scale_vec<T: Scalar>(mut v: Vec<T>, s: T) -> Vec<T> {
    for x in v.iter_mut() {
        *x = *x * s;
    }
    v
}

/// Numerical rank of the set of vectors.
pub fn rank<T: Scalar>(vectors: &[&[T]], dim: usize) -> usize {
    orthonormal_span(vectors, dim).len()
}

/// Least-squares solution of `sum_j x_j columns[j] ≈ rhs` for linearly independent columns.
pub fn lstsq<T: Scalar>(columns: &[&[T]], rhs: &[T]) -> Option<Vec<T>> {
    let k = columns.len();
    if k == 0 {
        return Some(Vec::new());
    }
    let dim = rhs.len();
    if k > dim {
        return None;
    }
    // QR with the rhs appended as an extra column so it gets the same reflections
    let mut cols: Vec<Vec<T>> = columns.iter().map(|c| c.to_vec()).collect();
    let scale = columns.iter().map(|v| norm(v)).fold(T::zero(), T::max);
    let mut b = rhs.to_vec();
    let mut r = vec![vec![T::zero(); k]; k];
    for j in 0..k {
        let x: Vec<T> = cols[j][j..].to_vec();
        let alpha = norm(&x);
        if alpha <= scale * T::tol(1e-13) {
            return None;
        }
        let sign = if x[0] >= T::zero() { T::one() } else { -T::one() };
        let mut v = x;
        v[0] = v[0] + sign * alpha;
        let vn = norm(&v);
        for e in v.iter_mut() {
            *e = *e / vn;
        }
        for col in cols.iter_mut().skip(j) {
            let d = dot(&v, &col[j..]);
            for (i, vi) in v.iter().enumerate() {
                col[j + i] = col[j + i] - (d + d) * *vi;
            }
        }
        let d = dot(&v, &b[j..]);
        for (i, vi) in v.iter().enumerate() {
            b[j + i] = b[j + i] - (d + d) * *vi;
        }
    }
    for (j, col) in cols.iter().enumerate() {
        for (i, row) in r.iter_mut().enumerate().take(j + 1) {
            row[j] = col[i];
        }
    }
    let mut x = vec![T::zero(); k];
    for i in (0..k).rev() {
        let mut s = b[i];
        for j in i + 1..k {
            s = s - r[i][j] * x[j];
        }
        x[i] = s / r[i][i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_small_system() {
        let a = vec![vec![2.0f64, 1.0], vec![1.0, 3.0]];
        let x = solve(&a, &[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
        let singular = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve(&singular, &[1.0, 1.0]).is_none());
    }

    #[test]
    fn condition_of_identity_is_one() {
        let a = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let (_, c) = solve_with_cond(&a, &[1.0, 1.0]).unwrap();
        assert!((c - 1.0f64).abs() < 1e-15);
    }

    #[test]
    fn hyperplane_normal_is_orthogonal() {
        let a = [1.0f64, 2.0, 0.5];
        let b = [-0.3, 0.1, 1.0];
        let n = hyperplane_normal(&[&a[..], &b[..]], 3).unwrap();
        assert!(dot(&n, &a).abs() < 1e-14 && dot(&n, &b).abs() < 1e-14);
        assert!((norm(&n) - 1.0f64).abs() < 1e-14);
        assert!(hyperplane_normal(&[&a[..], &a[..]], 3).is_none());
    }

    #[test]
    fn thin_qr_reconstructs() {
        let a = [1.0f64, 2.0, 0.5, -1.0];
        let b = [0.3, -0.1, 1.0, 2.0];
        let c = [0.0, 1.0, 1.0, 0.0];
        let (q, r) = thin_qr(&[&a[..], &b[..], &c[..]]);
        for (j, v) in [&a, &b, &c].iter().enumerate() {
            for k in 0..4 {
                let rebuilt: f64 = (0..3).map(|i| r[i][j] * q[i][k]).sum();
                assert!((rebuilt - v[k]).abs() < 1e-14);
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot(&q[i], &q[j]) - expected).abs() < 1e-14);
                if i > j {
                    assert_eq!(r[i][j], 0.0);
                }
            }
        }
    }

    #[test]
    fn complement_and_rank() {
        let a = [1.0f64, 0.0, 0.0];
        let b = [2.0, 0.0, 0.0];
        assert_eq!(rank(&[&a[..], &b[..]], 3), 1);
        let comp = orthogonal_complement(&[&a[..], &b[..]], 3);
        assert_eq!(comp.len(), 2);
        for c in &comp {
            assert!(dot(c, &a).abs() < 1e-14);
        }
    }

    #[test]
    fn lstsq_matches_projection() {
        let c1 = [1.0, 0.0, 0.0];
        let c2 = [1.0, 1.0, 0.0];
        let x = lstsq(&[&c1[..], &c2[..]], &[3.0, 2.0, 7.0]).unwrap();
        assert!((x[0] - 1.0f64).abs() < 1e-13 && (x[1] - 2.0f64).abs() < 1e-13);
    }
}
