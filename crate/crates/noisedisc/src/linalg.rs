//! Thin wrappers around the LAPACK-backed routines shared across modules.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Determinant, EigVals, Eigh, Inverse, UPLO};
use num_complex::Complex64;

use crate::{Error, Result};

/// Eigendecomposition of a real symmetric matrix; eigenvalues ascending.
pub fn eigh(m: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    m.eigh(UPLO::Lower).map_err(|e| Error::Linalg(e.to_string()))
}

/// Eigendecomposition of a complex Hermitian matrix; eigenvalues ascending.
pub fn eigh_complex(m: &Array2<Complex64>) -> Result<(Array1<f64>, Array2<Complex64>)> {
    m.eigh(UPLO::Lower).map_err(|e| Error::Linalg(e.to_string()))
}

/// Eigenvalues of a general real matrix.
pub fn eigvals(m: &Array2<f64>) -> Result<Array1<Complex64>> {
    m.eigvals().map_err(|e| Error::Linalg(e.to_string()))
}

pub fn det(m: &Array2<f64>) -> Result<f64> {
    m.det().map_err(|e| Error::Linalg(e.to_string()))
}

pub fn inv(m: &Array2<f64>) -> Result<Array2<f64>> {
    m.inv().map_err(|e| Error::Linalg(e.to_string()))
}

/// Symmetric square root via eigendecomposition.
///
/// Eigenvalues in `[-clip, 0)` are clamped to zero; anything more negative is
/// rejected so that silent square roots of indefinite matrices cannot occur.
pub fn sym_sqrt(m: &Array2<f64>, clip: f64) -> Result<Array2<f64>> {
    let (e, v) = eigh(m)?;
    let n = e.len();
    let mut d = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        if e[i] < -clip {
            return Err(Error::Linalg(format!(
                "negative eigenvalue {:.3e} in symmetric square root",
                e[i]
            )));
        }
        d[(i, i)] = e[i].max(0.0).sqrt();
    }
    Ok(v.dot(&d).dot(&v.t()))
}

/// Smallest eigenvalue of a real symmetric matrix.
pub fn min_sym_eigenvalue(m: &Array2<f64>) -> Result<f64> {
    let (e, _) = eigh(m)?;
    Ok(e[0])
}

pub fn norm2(v: &Array1<f64>) -> f64 {
    v.dot(v).sqrt()
}

pub fn max_abs(m: &Array2<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn sym_sqrt_squares_back() {
        let m = array![[2.0, 0.5], [0.5, 1.0]];
        let r = sym_sqrt(&m, 1e-12).unwrap();
        let back = r.dot(&r);
        assert!(max_abs(&(&back - &m)) < 1e-12);
    }

    #[test]
    fn sym_sqrt_rejects_indefinite() {
        let m = array![[1.0, 0.0], [0.0, -1.0]];
        assert!(sym_sqrt(&m, 1e-12).is_err());
    }

    #[test]
    fn det_and_inv_roundtrip() {
        let m = array![[3.0, 1.0], [1.0, 2.0]];
        assert!((det(&m).unwrap() - 5.0).abs() < 1e-12);
        let mi = inv(&m).unwrap();
        let id = m.dot(&mi);
        assert!(max_abs(&(&id - &Array2::<f64>::eye(2))) < 1e-12);
    }
}
