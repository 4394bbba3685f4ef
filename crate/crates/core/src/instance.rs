use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sphere::SpherePoint;

/// Rows `a_1, …, a_n ∈ S^m` of a feasibility instance `Ax <= 0`, with `n > m + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance<T: Scalar> {
    rows: Vec<SpherePoint<T>>,
}

impl<T: Scalar> Instance<T> {
    pub fn new(rows: Vec<SpherePoint<T>>) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::invalid("instance has no rows"))?;
        let dim = first.ambient_dim();
        for r in &rows {
            if r.ambient_dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: r.ambient_dim() });
            }
        }
        if rows.len() <= dim {
            return Err(Error::invalid(format!(
                "instance needs n > m + 1 rows; got n = {} with m = {}",
                rows.len(),
                dim - 1
            )));
        }
        Ok(Instance { rows })
    }

    /// Builds an instance from raw row vectors, rejecting rows that are not unit to `1e-6`.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let pts = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                SpherePoint::new(r).map_err(|e| match e {
                    Error::NotUnit { norm, .. } => Error::NotUnit { row: i + 1, norm },
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(pts)
    }

    pub fn rows(&self) -> &[SpherePoint<T>] {
        &self.rows
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// Sphere dimension `m`.
    pub fn m(&self) -> usize {
        self.rows[0].dim()
    }

    /// The prefix `A_k = (a_1, …, a_k)`; requires `k > m + 1`.
    pub fn prefix(&self, k: usize) -> Result<Self> {
        if k > self.n() {
            return Err(Error::invalid(format!("prefix length {k} exceeds n = {}", self.n())));
        }
        Self::new(self.rows[..k].to_vec())
    }

    /// `(a_1, …, a_n, b)`.
    pub fn extended(&self, b: SpherePoint<T>) -> Result<Self> {
        let mut rows = self.rows.clone();
        rows.push(b);
        Self::new(rows)
    }

    pub fn map_rows(&self, f: impl Fn(&SpherePoint<T>) -> SpherePoint<T>) -> Self {
        Instance { rows: self.rows.iter().map(f).collect() }
    }

    pub fn into_rows(self) -> Vec<SpherePoint<T>> {
        self.rows
    }
}
