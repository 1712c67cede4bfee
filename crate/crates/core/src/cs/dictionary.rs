//! Orthonormal N x N dictionaries; atoms are the columns.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TeletError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DictionaryKind {
    Haar,
    Dct,
}

impl DictionaryKind {
    pub fn build(self, n: usize) -> Result<DMatrix<f64>> {
        match self {
            DictionaryKind::Haar => haar_dictionary(n),
            DictionaryKind::Dct => dct_dictionary(n),
        }
    }
}

/// Haar wavelet basis for a power-of-two `n`. Column 0 is the constant
/// atom; the remaining columns are wavelets from coarse to fine.
pub fn haar_dictionary(n: usize) -> Result<DMatrix<f64>> {
    if n == 0 || !n.is_power_of_two() {
        return Err(TeletError::Config(format!(
            "Haar dictionary needs a power-of-two size, got {n}"
        )));
    }
    // Rows of h are the basis functions; h_{2m} = [h_m (x) (1, 1); I_m (x) (1, -1)] / sqrt(2).
    let mut h = DMatrix::from_element(1, 1, 1.0);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    while h.nrows() < n {
        let m = h.nrows();
        let mut next = DMatrix::zeros(2 * m, 2 * m);
        for r in 0..m {
            for c in 0..m {
                next[(r, 2 * c)] = h[(r, c)] * s;
                next[(r, 2 * c + 1)] = h[(r, c)] * s;
            }
            next[(m + r, 2 * r)] = s;
            next[(m + r, 2 * r + 1)] = -s;
        }
        h = next;
    }
    Ok(h.transpose())
}

/// Orthonormal DCT-II basis; column `k` is the frequency-`k` cosine.
pub fn dct_dictionary(n: usize) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(TeletError::Config("DCT dictionary needs n > 0".into()));
    }
    let nf = n as f64;
    Ok(DMatrix::from_fn(n, n, |j, k| {
        let a = if k == 0 {
            (1.0 / nf).sqrt()
        } else {
            (2.0 / nf).sqrt()
        };
        a * (std::f64::consts::PI * (2.0 * j as f64 + 1.0) * k as f64 / (2.0 * nf)).cos()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_orthonormal(m: &DMatrix<f64>, tol: f64) {
        let n = m.nrows();
        let err = (m * m.transpose() - DMatrix::<f64>::identity(n, n))
            .abs()
            .max();
        assert!(err <= tol, "deviation {err}");
        let err = (m.transpose() * m - DMatrix::<f64>::identity(n, n))
            .abs()
            .max();
        assert!(err <= tol, "deviation {err}");
    }

    #[test]
    fn haar_two() {
        let h = haar_dictionary(2).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expected = DMatrix::from_row_slice(2, 2, &[s, s, s, -s]);
        assert!((h - expected).abs().max() < 1e-15);
    }

    #[test]
    fn haar_is_orthonormal() {
        for n in [1, 2, 4, 8, 32, 64] {
            assert_orthonormal(&haar_dictionary(n).unwrap(), 1e-12);
        }
    }

    #[test]
    fn haar_atoms_are_piecewise_constant() {
        let h = haar_dictionary(8).unwrap();
        // the constant atom
        for j in 0..8 {
            assert!((h[(j, 0)] - 1.0 / 8f64.sqrt()).abs() < 1e-15);
        }
        // the finest wavelets have exactly two nonzeros
        let nnz = h.column(7).iter().filter(|v| v.abs() > 1e-15).count();
        assert_eq!(nnz, 2);
    }

    #[test]
    fn haar_rejects_other_sizes() {
        for n in [0, 3, 6, 12, 33] {
            assert!(haar_dictionary(n).is_err());
        }
    }

    #[test]
    fn dct_columns_unit_norm() {
        let c = dct_dictionary(4).unwrap();
        for col in c.column_iter() {
            assert!((col.norm() - 1.0).abs() < 1e-14);
        }
        for n in [1, 5, 16, 32] {
            assert_orthonormal(&dct_dictionary(n).unwrap(), 1e-12);
        }
    }
}
