use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

pub(crate) const SYMMETRY_TOL: f64 = 1e-12;
pub(crate) const PSD_FLOOR: f64 = 1e-12;

/// Symmetric quadratic form `x ↦ xᵀQx`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct QuadraticForm {
    matrix: DMatrix<f64>,
}

impl QuadraticForm {
    /// Rejects non-square or asymmetric input (beyond `1e-12` relative to the entries).
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::input("quadratic form needs a nonempty square matrix"));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::input("quadratic form entries must be finite"));
        }
        let m = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
        let scale = m.amax().max(1.0);
        let asym = (&m - m.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::input(format!(
                "quadratic form is not symmetric (max |Q − Qᵀ| = {asym:e})"
            )));
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(QuadraticForm { matrix: sym })
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        QuadraticForm {
            matrix: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
        }
    }

    pub fn scaled_identity(dim: usize, c: f64) -> Self {
        QuadraticForm {
            matrix: DMatrix::identity(dim, dim) * c,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::scaled_identity(dim, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.matrix.row(i).iter().copied().collect())
            .collect()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        let mut total = 0.0;
        for i in 0..d {
            let mut row = 0.0;
            for j in 0..d {
                row += self.matrix[(i, j)] * x[j];
            }
            total += x[i] * row;
        }
        total
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let v = &self.matrix * DVector::from_column_slice(x);
        v.iter().map(|g| 2.0 * g).collect()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Largest absolute eigenvalue, i.e. the ℓ2 operator norm.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues().into_iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.amax()
    }

    /// `Q = P₁ − P₂` with `P₁, P₂` positive semidefinite and sharing `Q`'s eigenbasis.
    pub fn dc_split(&self) -> (QuadraticForm, QuadraticForm) {
        if self.is_diagonal() {
            let d = self.dim();
            let diag: Vec<f64> = (0..d).map(|i| self.matrix[(i, i)]).collect();
            let p: Vec<f64> = diag.iter().map(|v| v.max(0.0)).collect();
            let n: Vec<f64> = diag.iter().map(|v| (-v).max(0.0)).collect();
            return (Self::from_diagonal(&p), Self::from_diagonal(&n));
        }
        let eig = SymmetricEigen::new(self.matrix.clone());
        let d = self.dim();
        if eig.eigenvalues.min() >= 0.0 {
            return (self.clone(), Self::zero(d));
        }
        if eig.eigenvalues.max() <= 0.0 {
            return (Self::zero(d), Self::zero(d).sub(self));
        }
        let u = &eig.eigenvectors;
        let build = |diag: DVector<f64>| {
            let m = u * DMatrix::from_diagonal(&diag) * u.transpose();
            QuadraticForm {
                matrix: (&m + m.transpose()) * 0.5,
            }
        };
        (
            build(eig.eigenvalues.map(|l| l.max(0.0))),
            build(eig.eigenvalues.map(|l| (-l).max(0.0))),
        )
    }

    fn is_diagonal(&self) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| i == j || self.matrix[(i, j)] == 0.0))
    }

    pub fn sub(&self, other: &QuadraticForm) -> QuadraticForm {
        QuadraticForm {
            matrix: &self.matrix - &other.matrix,
        }
    }
}

impl TryFrom<Vec<Vec<f64>>> for QuadraticForm {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        QuadraticForm::new(rows)
    }
}

impl From<QuadraticForm> for Vec<Vec<f64>> {
    fn from(q: QuadraticForm) -> Self {
        q.rows()
    }
}

/// Spectral splitting into positive semidefinite parts.
pub fn quadratic_dc_split(q: &QuadraticForm) -> (QuadraticForm, QuadraticForm) {
    q.dc_split()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_split() {
        let q = QuadraticForm::from_diagonal(&[1.0, -2.0]);
        let (p1, p2) = q.dc_split();
        assert_eq!(p1, QuadraticForm::from_diagonal(&[1.0, 0.0]));
        assert_eq!(p2, QuadraticForm::from_diagonal(&[0.0, 2.0]));
    }

    #[test]
    fn psd_input_has_zero_negative_part() {
        let q = QuadraticForm::new(vec![vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let (p1, p2) = q.dc_split();
        assert_eq!(p1, q);
        assert_eq!(p2, QuadraticForm::zero(2));
    }

    #[test]
    fn asymmetric_rejected() {
        assert!(matches!(
            QuadraticForm::new(vec![vec![1.0, 2.0], vec![0.0, 1.0]]),
            Err(Error::Input(_))
        ));
    }
}
