use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Largest tolerated `max |M - M^H|`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Largest tolerated deviation of a state's norm from 1.
pub const NORM_TOL: f64 = 1e-12;
/// Components smaller than this are skipped when fixing eigenvector phases.
const PHASE_THRESHOLD: f64 = 1e-8;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest entry modulus of a matrix or vector.
pub fn max_abs<'a>(m: impl IntoIterator<Item = &'a Complex64>) -> f64 {
    m.into_iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A self-adjoint matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
}

/// Eigenvalues in ascending order; `vectors` holds the matching eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> CVector {
        self.vectors.column(k).into_owned()
    }

    /// Groups of (numerically) equal eigenvalues as `(value, column indices)`.
    pub fn eigenspaces(&self, tol: f64) -> Vec<(f64, Vec<usize>)> {
        let mut out: Vec<(f64, Vec<usize>)> = Vec::new();
        for (k, &v) in self.values.iter().enumerate() {
            match out.last_mut() {
                Some((w, idx)) if (v - *w).abs() <= tol => idx.push(k),
                _ => out.push((v, vec![k])),
            }
        }
        out
    }

    /// `sum_k lambda_k v_k v_k^H`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.values.len();
        let lambda = CMatrix::from_diagonal(&CVector::from_iterator(n, self.values.iter().map(|&l| c(l, 0.0))));
        &self.vectors * lambda * self.vectors.adjoint()
    }
}

impl HermitianOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidArgument(format!(
                "operator must be a non-empty square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let dev = max_abs(&(&matrix - matrix.adjoint()));
        if !(dev < HERMITIAN_TOL) {
            return Err(Error::NonHermitian(dev));
        }
        Ok(Self { matrix })
    }

    /// Symmetrizes `(M + M^H) / 2` first; for products known to be Hermitian up to round-off.
    pub fn hermitize(matrix: CMatrix) -> Result<Self> {
        let dev = max_abs(&(&matrix - matrix.adjoint()));
        if !(dev < 1e-9) {
            return Err(Error::NonHermitian(dev));
        }
        let sym = (&matrix + matrix.adjoint()) * c(0.5, 0.0);
        Self::new(sym)
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        let d = CVector::from_iterator(values.len(), values.iter().map(|&v| c(v, 0.0)));
        Self {
            matrix: CMatrix::from_diagonal(&d),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim),
        }
    }

    /// Seeded random Hermitian matrix with standard normal entries.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let mut m = CMatrix::from_fn(dim, dim, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        m = (&m + m.adjoint()) * c(0.5, 0.0);
        Self { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// `A B`, which is Hermitian when `A` and `B` commute.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Self::hermitize(&self.matrix * &other.matrix)
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Self::new(&self.matrix + &other.matrix)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            matrix: &self.matrix * c(s, 0.0),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    /// `A (x) B` on the tensor product space (first factor's index major).
    pub fn kron(&self, other: &Self) -> Self {
        Self {
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }

    /// `max |[A, B]|`.
    pub fn commutator_norm(&self, other: &Self) -> f64 {
        max_abs(&(&self.matrix * &other.matrix - &other.matrix * &self.matrix))
    }

    /// `max |A - B|`.
    pub fn distance(&self, other: &Self) -> f64 {
        max_abs(&(&self.matrix - &other.matrix))
    }

    pub fn expectation(&self, state: &FiniteState) -> Result<f64> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: state.dim(),
            });
        }
        let v = state.amplitudes();
        Ok((v.adjoint() * &self.matrix * v)[(0, 0)].re)
    }

    /// Ascending eigenvalues with orthonormal eigenvectors. Each eigenvector's
    /// first component of modulus above 1e-8 is made real and positive.
    pub fn eigendecompose(&self) -> Eigen {
        let eig = SymmetricEigen::new(self.matrix.clone());
        let n = self.dim();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vectors = CMatrix::zeros(n, n);
        for (k, &i) in order.iter().enumerate() {
            let mut col = eig.eigenvectors.column(i).into_owned();
            if let Some(z) = col.iter().find(|z| z.norm() > PHASE_THRESHOLD).copied() {
                let phase = z.conj() / z.norm();
                col *= phase;
            }
            vectors.set_column(k, &col);
        }
        Eigen { values, vectors }
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

/// Pauli matrices.
pub fn pauli_x() -> HermitianOperator {
    HermitianOperator {
        matrix: CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]),
    }
}

pub fn pauli_y() -> HermitianOperator {
    HermitianOperator {
        matrix: CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]),
    }
}

pub fn pauli_z() -> HermitianOperator {
    HermitianOperator::from_real_diagonal(&[1.0, -1.0])
}

/// A normalized vector `sum_n c_n e_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteState {
    amps: CVector,
}

impl FiniteState {
    pub fn new(amps: CVector) -> Result<Self> {
        let norm = amps.norm();
        if !((norm - 1.0).abs() < NORM_TOL) {
            return Err(Error::InvalidArgument(format!("state norm is {norm}, expected 1")));
        }
        Ok(Self { amps })
    }

    pub fn normalized(amps: CVector) -> Result<Self> {
        let norm = amps.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(Self { amps: amps / c(norm, 0.0) })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
/// Real and imaginary parts of a matrix, row-major, for JSON reports.
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        let rows = |f: fn(&Complex64) -> f64| (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect();
        Self {
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }
}

/// Seeded Haar-ish random unitary from the QR factorization of a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // fix the phases of R's diagonal so the distribution does not depend on the QR convention
    let d = CVector::from_iterator(dim, (0..dim).map(|i| {
        let z = r[(i, i)];
        if z.norm() > 0.0 { z / z.norm() } else { c(1.0, 0.0) }
    }));
    q * CMatrix::from_diagonal(&d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;

    #[test]
    fn diagonal_decomposition_is_sorted() {
        let e = HermitianOperator::from_real_diagonal(&[1.0, -1.0]).eigendecompose();
        assert_eq!(e.values, vec![-1.0, 1.0]);
        assert_eq!(e.vector(0)[1], c(1.0, 0.0));
        assert_eq!(e.vector(1)[0], c(1.0, 0.0));
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(HermitianOperator::new(m), Err(Error::NonHermitian(_))));
    }

    #[test]
    fn random_unitary_is_unitary() {
        let u = random_unitary(5, &mut rng_for(3, 0));
        assert!(max_abs(&(&u * u.adjoint() - CMatrix::identity(5, 5))) < 1e-12);
    }
}
