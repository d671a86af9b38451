use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const EIGEN_TOL: f64 = 1e-9;

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        Self::with_tolerances(entries, HERMITIAN_TOL, TRACE_TOL, EIGEN_TOL)
    }

    pub fn with_tolerances(entries: DMatrix<Complex64>, herm_tol: f64, trace_tol: f64, eig_tol: f64) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || entries.ncols() != n {
            return Err(Error::invalid("density", "matrix must be square and non-empty"));
        }
        for i in 0..n {
            for j in 0..n {
                if (entries[(i, j)] - entries[(j, i)].conj()).norm() > herm_tol {
                    return Err(Error::invalid("density", format!("not Hermitian at ({i}, {j})")));
                }
            }
        }
        let tr = entries.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > trace_tol {
            return Err(Error::invalid("density", format!("trace {tr} differs from 1")));
        }
        let min = min_eigenvalue(&entries);
        if min < -eig_tol {
            return Err(Error::invalid("density", format!("negative eigenvalue {min:.3e}")));
        }
        Ok(DensityMatrix { entries })
    }

    /// |ψ⟩⟨ψ| for a normalised state vector.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        Self::new(&v * v.adjoint())
    }

    pub(crate) fn from_trusted(entries: DMatrix<Complex64>) -> Self {
        DensityMatrix { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.entries)
    }

    /// Tr ρ²
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }
}

fn min_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    // symmetrise first so round-off asymmetry does not upset the solver
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}
