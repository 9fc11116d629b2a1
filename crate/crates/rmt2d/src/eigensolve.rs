//! Dense non-Hermitian eigenvalues with a similarity-invariant accuracy
//! contract.
//!
//! The solver is LAPACK's Hessenberg-QR path (zgeev) through the system
//! OpenBLAS. OpenBLAS is pinned to one thread per solve; parallelism belongs
//! to the sample level, where it is deterministic.

use ndarray::Array2;
use ndarray_linalg::EigVals;
use num_complex::Complex64;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix must be square and non-empty, got {0}x{1}")]
    BadShape(usize, usize),
    #[error("QR iteration failed to converge: {0}")]
    NonConvergence(String),
}

/// Eigenvalues plus solver metadata.
#[derive(Debug, Clone)]
pub struct EigenReport {
    pub eigenvalues: Vec<Complex64>,
    /// Residual bound from spot-checked eigenpairs; zero in the default
    /// eigenvalues-only mode where no vectors are formed.
    pub max_residual: f64,
    pub backend_tag: &'static str,
}

extern "C" {
    fn openblas_set_num_threads(n: i32);
}

fn pin_blas_threads() {
    static ONCE: OnceLock<()> = OnceLock::new();
    ONCE.get_or_init(|| unsafe { openblas_set_num_threads(1) });
}

/// All eigenvalues of a dense complex matrix.
pub fn eigenvalues(j: &Array2<Complex64>) -> Result<EigenReport, EigenError> {
    let (rows, cols) = j.dim();
    if rows != cols || rows == 0 {
        return Err(EigenError::BadShape(rows, cols));
    }
    if j.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(EigenError::NonFinite);
    }
    pin_blas_threads();
    let eigs = j.eigvals().map_err(|e| EigenError::NonConvergence(e.to_string()))?;
    Ok(EigenReport {
        eigenvalues: eigs.to_vec(),
        max_residual: 0.0,
        backend_tag: "lapack-zgeev/openblas",
    })
}
