use nalgebra::DMatrix;

use crate::error::{Result, TeletError};

fn same_shape(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(TeletError::Shape(format!(
            "shapes {:?} and {:?} differ",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// `||U_hat - U_star||_F^2 / (d R)` with `R` the number of columns and `d`
/// the measurement dimension.
pub fn mse(u_hat: &DMatrix<f64>, u_star: &DMatrix<f64>, d: usize) -> Result<f64> {
    same_shape(u_hat, u_star)?;
    if d == 0 || u_star.ncols() == 0 {
        return Err(TeletError::Config(
            "mse needs d > 0 and at least one signal".into(),
        ));
    }
    Ok((u_hat - u_star).norm_squared() / (d * u_star.ncols()) as f64)
}

/// Peak signal-to-noise ratio in dB over the 8-bit range. Identical inputs
/// give `f64::INFINITY`.
pub fn psnr(reference: &DMatrix<f64>, reconstructed: &DMatrix<f64>) -> Result<f64> {
    same_shape(reference, reconstructed)?;
    if reference.is_empty() {
        return Err(TeletError::Shape("empty blocks".into()));
    }
    let err = (reference - reconstructed).norm_squared() / reference.len() as f64;
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (255.0f64 * 255.0 / err).log10())
}

/// `(mu_a - mu_b) / mu_a * 100`, signed.
pub fn percent_decrease(mu_a: f64, mu_b: f64) -> Result<f64> {
    if !(mu_a > 0.0) {
        return Err(TeletError::Domain(format!(
            "reference coherence must be positive, got {mu_a}"
        )));
    }
    Ok((mu_a - mu_b) / mu_a * 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percent_decrease_values() {
        assert!((percent_decrease(0.3257, 0.2178).unwrap() - 33.13).abs() < 5e-3);
        assert_eq!(percent_decrease(0.4, 0.4).unwrap(), 0.0);
        assert!(percent_decrease(0.2, 0.3).unwrap() < 0.0);
        assert!(percent_decrease(0.0, 0.1).is_err());
        assert!(percent_decrease(-1.0, 0.1).is_err());
    }

    #[test]
    fn psnr_identical_is_infinite() {
        let a = DMatrix::from_fn(8, 8, |i, j| (i * 8 + j) as f64);
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
    }

    #[test]
    fn psnr_known_value() {
        let a = DMatrix::from_element(4, 4, 100.0);
        let b = DMatrix::from_element(4, 4, 101.0);
        // error 1 per pixel
        assert!((psnr(&a, &b).unwrap() - 20.0 * 255f64.log10()).abs() < 1e-12);
        assert!(psnr(&a, &DMatrix::zeros(4, 3)).is_err());
    }

    #[test]
    fn mse_normalization() {
        let a = DMatrix::from_element(6, 5, 1.0);
        let b = DMatrix::zeros(6, 5);
        assert!((mse(&a, &b, 3).unwrap() - 30.0 / 15.0).abs() < 1e-15);
        assert_eq!(mse(&a, &a, 3).unwrap(), 0.0);
        assert!(mse(&a, &b, 0).is_err());
    }
}
