use serde::{Deserialize, Serialize};
use crate::error::{Error, Result};
use crate::hilbert::{c, max_abs, CMatrix, CVector, HermitianOperator};

/// Orthonormality tolerance for the Schmidt bases.
pub const BASIS_TOL: f64 = 1e-12;
/// Tolerance of the eigen-relations `O psi_n = lambda_n psi_n`, `O~ phi_n = lambda_n phi_n`.
pub const PAIR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    One,
    Two,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::One => Side::Two,
            Side::Two => Side::One,
        }
    }
}

/// `(1 / sqrt N) sum_n psi_n (x) phi_n` for orthonormal bases `{psi_n}`, `{phi_n}` (matrix columns).
#[derive(Debug, Clone, PartialEq)]
pub struct MaxEntangledState {
    basis_1: CMatrix,
    basis_2: CMatrix,
}

fn orthonormality_defect(b: &CMatrix) -> f64 {
    max_abs(&(b.adjoint() * b - CMatrix::identity(b.ncols(), b.ncols())))
}

impl MaxEntangledState {
    pub fn new(basis_1: CMatrix, basis_2: CMatrix) -> Result<Self> {
        for b in [&basis_1, &basis_2] {
            if !b.is_square() || b.nrows() == 0 {
                return Err(Error::InvalidArgument("a basis must be N vectors of length N".into()));
            }
        }
        if basis_1.nrows() != basis_2.nrows() {
            return Err(Error::DimensionMismatch {
                expected: basis_1.nrows(),
                found: basis_2.nrows(),
            });
        }
        for b in [&basis_1, &basis_2] {
            let d = orthonormality_defect(b);
            if !(d < BASIS_TOL) {
                return Err(Error::NonOrthonormal(d));
            }
        }
        Ok(Self { basis_1, basis_2 })
    }

    /// `sum_n e_n (x) e_n / sqrt N`.
    pub fn standard(n: usize) -> Result<Self> {
        Self::new(CMatrix::identity(n, n), CMatrix::identity(n, n))
    }

    /// `(|up down> - |down up>) / sqrt 2`, with `psi = (up, -down)` and `phi = (down, up)`.
    pub fn singlet() -> Self {
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        let b1 = CMatrix::from_columns(&[CVector::from_vec(vec![one, z]), CVector::from_vec(vec![z, -one])]);
        let b2 = CMatrix::from_columns(&[CVector::from_vec(vec![z, one]), CVector::from_vec(vec![one, z])]);
        Self::new(b1, b2).expect("standard bases are orthonormal")
    }

    pub fn dim(&self) -> usize {
        self.basis_1.nrows()
    }

    pub fn basis(&self, side: Side) -> &CMatrix {
        match side {
            Side::One => &self.basis_1,
            Side::Two => &self.basis_2,
        }
    }

    /// The same state with the factors exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            basis_1: self.basis_2.clone(),
            basis_2: self.basis_1.clone(),
        }
    }

    /// `U = sum_n psi_n phi_n^T`, unitary, with `Psi = (1 / sqrt N) sum_ij U_ij e_i (x) e_j`.
    pub fn schmidt_unitary(&self) -> CMatrix {
        &self.basis_1 * self.basis_2.transpose()
    }

    /// `M = U / sqrt N`, the coefficient matrix of the state.
    pub fn coefficients(&self) -> CMatrix {
        self.schmidt_unitary() * c(1.0 / (self.dim() as f64).sqrt(), 0.0)
    }

    /// State vector on the product space, index `i N + j`.
    pub fn vector(&self) -> CVector {
        let m = self.coefficients();
        let n = self.dim();
        CVector::from_iterator(n * n, (0..n * n).map(|k| m[(k / n, k % n)]))
    }

    pub fn reduced_density(&self, side: Side) -> CMatrix {
        let m = self.coefficients();
        match side {
            Side::One => &m * m.adjoint(),
            Side::Two => m.transpose() * m.conjugate(),
        }
    }
}

/// `O` on factor 1, its correspondent `O~` on factor 2, and the paired eigenbases.
#[derive(Debug, Clone)]
pub struct CorrespondencePair {
    pub o: HermitianOperator,
    pub o_tilde: HermitianOperator,
    /// Ascending eigenvalues shared by `O` and `O~`.
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors of `O` (columns).
    pub psi: CMatrix,
    /// Matching eigenvectors of `O~`, with `Psi = (1 / sqrt N) sum_n psi_n (x) phi_n`.
    pub phi: CMatrix,
    /// True when every `psi_n` is (up to phase) a vector of the state's first basis.
    pub aligned_to_basis_1: bool,
}

/// Builds `O~` with `(O (x) I) Psi = (I (x) O~) Psi`.
///
/// With `U = sqrt N M` (`M` the coefficient matrix), `O~ = U^T conj(O) conj(U)`.
/// Rewriting the state in the eigenbasis `{psi_n}` of `O` gives `phi_n = U^T conj(psi_n)`,
/// so a compatible Schmidt decomposition always exists, degenerate or not.
pub fn correspond(o: &HermitianOperator, state: &MaxEntangledState) -> Result<CorrespondencePair> {
    let n = state.dim();
    if o.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: o.dim(),
        });
    }
    let u = state.schmidt_unitary();
    let o_tilde = HermitianOperator::hermitize(u.transpose() * o.matrix().conjugate() * u.conjugate())?;
    let eig = o.eigendecompose();
    let phi = u.transpose() * eig.vectors.conjugate();

    for k in 0..n {
        let lambda = c(eig.values[k], 0.0);
        let p = eig.vectors.column(k);
        let f = phi.column(k);
        let r1 = max_abs(&(o.matrix() * p - p * lambda));
        let r2 = max_abs(&(o_tilde.matrix() * f - f * lambda));
        if r1.max(r2) > PAIR_TOL {
            return Err(Error::Stability(format!("eigen-relation residual {:e} for pair {k}", r1.max(r2))));
        }
    }
    let aligned = (0..n).all(|k| {
        let p = eig.vectors.column(k);
        (0..n).any(|j| ((state.basis_1.column(j).adjoint() * p)[(0, 0)].norm() - 1.0).abs() < PAIR_TOL)
    });
    Ok(CorrespondencePair {
        o: o.clone(),
        o_tilde,
        eigenvalues: eig.values,
        psi: eig.vectors,
        phi,
        aligned_to_basis_1: aligned,
    })
}

/// Inverse map: the factor-1 operator whose correspondent is `o_tilde`, `O = U conj(O~) U^H`.
pub fn inverse_correspond(o_tilde: &HermitianOperator, state: &MaxEntangledState) -> Result<HermitianOperator> {
    let n = state.dim();
    if o_tilde.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: o_tilde.dim(),
        });
    }
    let u = state.schmidt_unitary();
    HermitianOperator::hermitize(&u * o_tilde.matrix().conjugate() * u.adjoint())
}
