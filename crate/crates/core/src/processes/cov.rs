use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymEigen};
use crate::math::{abs, sqrt};

use super::kernel::Kernel;

/// Relative eigenvalue floor: eigenvalues in `[-PSD_CLIP_TOL·λmax, 0)` are
/// rounding noise and clipped to zero, anything below is an error.
pub const PSD_CLIP_TOL: f64 = 1e-8;

const SYMMETRY_TOL: f64 = 1e-12;

/// Symmetric positive semi-definite matrix with its factor `T` (`T·Tᵀ = C`)
/// computed once at construction.
#[derive(Debug, Clone)]
pub struct CovMatrix {
    entries: Matrix,
    factor: Matrix,
    eigen: SymEigen,
    provenance: Option<Kernel>,
}

impl CovMatrix {
    pub fn new(entries: Matrix) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch { op: "CovMatrix", expected: entries.rows(), found: entries.cols() });
        }
        if entries.rows() == 0 {
            return Err(Error::TooShort { op: "CovMatrix", needed: 1, found: 0 });
        }
        if !entries.is_finite() {
            return Err(Error::domain("CovMatrix", "non-finite entry"));
        }
        if !entries.is_symmetric(SYMMETRY_TOL * entries.max_abs().max(1.0)) {
            return Err(Error::domain("CovMatrix", "matrix is not symmetric"));
        }
        let eigen = entries.sym_eigen()?;
        let factor = factor_from_eigen(&eigen)?;
        Ok(CovMatrix { entries, factor, eigen, provenance: None })
    }

    /// Attaches the stationary kernel the matrix was built from.
    pub fn with_provenance(mut self, kernel: Kernel) -> Self {
        self.provenance = Some(kernel);
        self
    }

    pub fn provenance(&self) -> Option<&Kernel> {
        self.provenance.as_ref()
    }

    pub fn identity(n: usize) -> Self {
        CovMatrix::new(Matrix::identity(n)).expect("identity is a valid covariance")
    }

    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    /// `T = U·√Λ` with eigenvalues in descending order.
    pub fn factor(&self) -> &Matrix {
        &self.factor
    }

    pub fn eigen(&self) -> &SymEigen {
        &self.eigen
    }

    /// Sum of all entries.
    pub fn grand_sum(&self) -> f64 {
        self.entries.grand_sum()
    }
}

/// Factor of a symmetric PSD matrix: `T = U·√Λ` from the symmetric eigen
/// decomposition, with eigenvalues down to `-PSD_CLIP_TOL·λmax` clipped to 0.
pub fn factorize(m: &Matrix) -> Result<Matrix> {
    factor_from_eigen(&m.sym_eigen()?)
}

pub(crate) fn check_psd(eigen: &SymEigen) -> Result<()> {
    let max = eigen.max_value();
    let min = eigen.min_value();
    if min < -PSD_CLIP_TOL * abs(max) || (max <= 0.0 && min < 0.0) {
        return Err(Error::NotPositiveSemidefinite { min_eigenvalue: min, max_eigenvalue: max });
    }
    Ok(())
}

fn factor_from_eigen(eigen: &SymEigen) -> Result<Matrix> {
    check_psd(eigen)?;
    let n = eigen.values.len();
    let roots: alloc::vec::Vec<f64> = eigen.values.iter().map(|&l| sqrt(l.max(0.0))).collect();
    Ok(Matrix::from_fn(n, n, |i, j| eigen.vectors[(i, j)] * roots[j]))
}
