//! Strategy distributions, tangent vectors and the zero-sum basis.

use nalgebra::{DMatrix, DVector};

use crate::error::{dim, param, Result};

/// Tolerance on `|sum(x) - 1|` accepted when validating a distribution.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// A population state: nonnegative shares summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexState(DVector<f64>);

impl SimplexState {
    pub fn new(x: DVector<f64>) -> Result<Self> {
        if x.len() < 2 {
            return Err(param(format!("a population needs at least 2 strategies, got {}", x.len())));
        }
        if let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(param(format!("share x_{} = {} is not a nonnegative number", i + 1, v)));
        }
        let s = x.sum();
        if (s - 1.0).abs() > SIMPLEX_TOL {
            return Err(param(format!("shares sum to {s}, expected 1")));
        }
        Ok(Self(x))
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(x))
    }

    /// The uniform distribution over `n` strategies.
    pub fn barycenter(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(param(format!("a population needs at least 2 strategies, got {n}")));
        }
        Ok(Self(DVector::from_element(n, 1.0 / n as f64)))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.0
    }

    /// True when every share is strictly positive.
    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|v| *v > 0.0)
    }
}

/// A zero-sum direction, i.e. an admissible velocity on the simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector(DVector<f64>);

impl TangentVector {
    pub fn new(z: DVector<f64>) -> Result<Self> {
        let s = z.sum();
        if !(s.abs() <= SIMPLEX_TOL) {
            return Err(param(format!("tangent vector sums to {s}, expected 0")));
        }
        Ok(Self(z))
    }

    /// Wraps a vector field value without re-checking its sum; the field
    /// formulas are tangent by construction up to rounding.
    pub(crate) fn from_field(z: DVector<f64>) -> Self {
        Self(z)
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.0
    }
}

/// Orthonormal basis of the zero-sum subspace, stored as an `n x (n-1)` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentBasis(DMatrix<f64>);

impl TangentBasis {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// Coordinates of `v` in the basis, `N^T v`.
    pub fn project(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        if v.len() != self.0.nrows() {
            return Err(dim(format!("vector of length {} against basis of dimension {}", v.len(), self.0.nrows())));
        }
        Ok(self.0.tr_mul(v))
    }

    /// Reduces a square operator to the subspace, `N^T M N`.
    pub fn reduce(&self, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let n = self.0.nrows();
        if m.nrows() != n || m.ncols() != n {
            return Err(dim(format!("{}x{} matrix against basis of dimension {n}", m.nrows(), m.ncols())));
        }
        Ok(self.0.tr_mul(m) * &self.0)
    }
}

/// Gram-Schmidt on `e_1 - e_2, e_2 - e_3, ...` in that order.
pub fn tangent_basis(n: usize) -> Result<TangentBasis> {
    if n < 2 {
        return Err(param(format!("tangent basis needs n >= 2, got {n}")));
    }
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(n - 1);
    for k in 0..n - 1 {
        let mut v = DVector::zeros(n);
        v[k] = 1.0;
        v[k + 1] = -1.0;
        // modified Gram-Schmidt, two passes
        for _ in 0..2 {
            for q in &cols {
                let c = q.dot(&v);
                v.axpy(-c, q, 1.0);
            }
        }
        let norm = v.norm();
        cols.push(v / norm);
    }
    Ok(TangentBasis(DMatrix::from_columns(&cols)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_distributions() {
        assert!(SimplexState::from_slice(&[1.0]).is_err());
        assert!(SimplexState::from_slice(&[0.6, 0.6]).is_err());
        assert!(SimplexState::from_slice(&[1.1, -0.1]).is_err());
        assert!(SimplexState::from_slice(&[f64::NAN, 1.0]).is_err());
        assert!(SimplexState::from_slice(&[0.5, 0.5 + 5e-10]).is_ok());
    }

    #[test]
    fn basis_for_two_strategies() {
        let b = tangent_basis(2).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((b.matrix()[(0, 0)] - r).abs() < 1e-15);
        assert!((b.matrix()[(1, 0)] + r).abs() < 1e-15);
    }

    #[test]
    fn basis_is_orthonormal_and_tangent() {
        for n in 2..=50 {
            let b = tangent_basis(n).unwrap();
            let m = b.matrix();
            assert_eq!(m.shape(), (n, n - 1));
            let gram = m.tr_mul(m);
            assert!((gram - DMatrix::identity(n - 1, n - 1)).amax() < 1e-12, "n = {n}");
            for col in m.column_iter() {
                assert!(col.sum().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn basis_is_deterministic() {
        assert_eq!(tangent_basis(7).unwrap(), tangent_basis(7).unwrap());
        assert!(tangent_basis(1).is_err());
    }

    #[test]
    fn tangent_vector_checks_sum() {
        assert!(TangentVector::new(DVector::from_vec(vec![1.0, -1.0])).is_ok());
        assert!(TangentVector::new(DVector::from_vec(vec![1.0, -0.5])).is_err());
    }
}
