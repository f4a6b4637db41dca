//! Effective Hamiltonian coefficient matrices `H = -i G K` and the
//! fictitious-time flow `tau -> expm(tau K)`.

use serde::Serialize;

use crate::group::{self, metric_left, FormClass, Generator, ScatteringMatrix};
use crate::linalg::{self, frobenius, ComplexMatrix, C64};
use crate::logm::expm;
use crate::{Error, Result};

/// Hermitian `2n x 2n` coefficient matrix of the quadratic form
/// `1/2 (a^+, a) H (a; a^+)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HamiltonianMatrix {
    n: usize,
    #[serde(skip)]
    matrix: ComplexMatrix,
}

pub fn hermiticity_residual(m: &ComplexMatrix) -> f64 {
    frobenius(&(m - m.adjoint()))
}

impl HamiltonianMatrix {
    pub fn new(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        linalg::ensure_tolerance(tol)?;
        linalg::ensure_finite(&matrix)?;
        let n = group::mode_count(&matrix).ok_or_else(|| {
            Error::InvalidDimension(format!(
                "Hamiltonian must be 2n x 2n, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            ))
        })?;
        let residual = hermiticity_residual(&matrix);
        if residual > tol * frobenius(&matrix).max(1.0) {
            return Err(Error::NotHermitian { residual });
        }
        Ok(HamiltonianMatrix { n, matrix })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// `H = -i G K`. Hermitian exactly when `K` satisfies the Lie condition.
pub fn effective_hamiltonian(k: &Generator) -> Result<HamiltonianMatrix> {
    if k.form_class() == FormClass::None {
        return Err(Error::NotGenerator {
            residual: group::lie_residual(k.matrix()),
        });
    }
    let matrix = metric_left(k.matrix()) * C64::new(0.0, -1.0);
    Ok(HamiltonianMatrix { n: k.n(), matrix })
}

/// `K = i G H`, the inverse of [`effective_hamiltonian`].
pub fn generator_from_hamiltonian(h: &HamiltonianMatrix, tol: f64) -> Result<Generator> {
    Generator::new(metric_left(h.matrix()) * linalg::I, tol)
}

/// `expm(tau K)`: the classical matrix of the network truncated at
/// fractional depth `tau`.
pub fn scattering_at_time(k: &Generator, tau: f64) -> Result<ScatteringMatrix> {
    if !tau.is_finite() {
        return Err(Error::ParameterDomain("tau must be finite".into()));
    }
    let m = expm(&(k.matrix() * C64::new(tau, 0.0)))?;
    // Quasi-unitarity is exact in exact arithmetic; the threshold only
    // absorbs round-off of the exponential.
    let tol = crate::DEFAULT_TOL.max(1e3 * f64::EPSILON * (tau.abs() * frobenius(k.matrix())).max(1.0));
    ScatteringMatrix::new(m, tol)
}
