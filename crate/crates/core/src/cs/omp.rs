//! Orthogonal matching pursuit.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, TeletError};

/// Residuals at or below this norm count as fully explained.
const RESIDUAL_EPS: f64 = 1e-12;

/// Recover a `k`-sparse `s` from `y = A s`.
///
/// Each round picks the column with the largest normalized correlation with
/// the residual, refits by least squares on the selected columns and updates
/// the residual. Stops early once the residual vanishes.
pub fn omp_recover(y: &DVector<f64>, a: &DMatrix<f64>, k: usize) -> Result<DVector<f64>> {
    let (d, n) = a.shape();
    if y.len() != d {
        return Err(TeletError::Shape(format!(
            "measurement has {} entries, matrix has {d} rows",
            y.len()
        )));
    }
    if k > d {
        return Err(TeletError::Config(format!(
            "sparsity {k} exceeds measurement dimension {d}"
        )));
    }
    let norms: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    if let Some(idx) = norms.iter().position(|&v| v == 0.0) {
        return Err(TeletError::Degenerate(format!("column {idx} is zero")));
    }
    let scale = y.norm().max(1.0);
    let mut support: Vec<usize> = Vec::with_capacity(k);
    let mut coef = DVector::zeros(0);
    let mut residual = y.clone();
    for _ in 0..k {
        if residual.norm() <= RESIDUAL_EPS * scale {
            break;
        }
        let corr = a.tr_mul(&residual);
        let mut best: Option<(usize, f64)> = None;
        for (j, (&c, &nj)) in corr.iter().zip(&norms).enumerate() {
            if support.contains(&j) {
                continue;
            }
            let v = c.abs() / nj;
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((j, v));
            }
        }
        let Some((j, _)) = best else { break };
        support.push(j);
        let sub = a.select_columns(&support);
        coef = sub
            .clone()
            .svd(true, true)
            .solve(y, 1e-14)
            .map_err(|e| TeletError::Numerical(e.to_string()))?;
        residual = y - sub * &coef;
    }
    let mut s = DVector::zeros(n);
    for (&j, &v) in support.iter().zip(coef.iter()) {
        s[j] = v;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherence::coherence;
    use crate::coherence::recoverability_bound;
    use crate::cs::frame_to_matrix;
    use crate::frame::Field;
    use crate::init::init_frame;
    use crate::rng::{stream_rng, Stream};
    use rand::seq::index::sample;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn zero_measurement_gives_zero() {
        let a = DMatrix::from_fn(4, 8, |i, j| ((i + 2 * j) as f64).sin() + 0.1);
        let s = omp_recover(&DVector::zeros(4), &a, 3).unwrap();
        assert_eq!(s, DVector::zeros(8));
    }

    #[test]
    fn single_atom_recovered() {
        let frame = init_frame(5, 12, Field::Real, 4.0, 3).unwrap();
        let a = frame_to_matrix(&frame).unwrap();
        assert!(coherence(&frame) < 1.0);
        for j in 0..12 {
            let mut s = DVector::zeros(12);
            s[j] = -1.7;
            let got = omp_recover(&(&a * &s), &a, 1).unwrap();
            assert!((got - s).norm() < 1e-12);
        }
    }

    #[test]
    fn exact_recovery_below_coherence_bound() {
        // identity next to the DCT basis
        let d = 16;
        let mut a = DMatrix::zeros(d, 2 * d);
        a.view_mut((0, 0), (d, d))
            .copy_from(&DMatrix::<f64>::identity(d, d));
        a.view_mut((0, d), (d, d))
            .copy_from(&crate::cs::dct_dictionary(d).unwrap());
        let mu = crate::cs::matrix_coherence(&a).unwrap();
        let mut rng = stream_rng(11, Stream::CsTrials);
        let bound = recoverability_bound(mu).unwrap();
        let kmax = (1..=d).filter(|&k| (k as f64) < bound).max().unwrap();
        assert!(kmax >= 1);
        for _ in 0..100 {
            let k = rng.random_range(1..=kmax);
            let mut s = DVector::zeros(2 * d);
            for j in sample(&mut rng, 2 * d, k) {
                s[j] = rng.sample::<f64, _>(StandardNormal)
                    + 0.5f64.copysign(rng.random::<f64>() - 0.5);
            }
            let got = omp_recover(&(&a * &s), &a, k).unwrap();
            assert!((got - &s).norm() <= 1e-10 * s.norm(), "failed at k = {k}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        let a = DMatrix::from_element(3, 5, 1.0);
        assert!(omp_recover(&DVector::zeros(2), &a, 1).is_err());
        assert!(omp_recover(&DVector::zeros(3), &a, 4).is_err());
        let mut z = a.clone();
        z.column_mut(2).fill(0.0);
        assert!(omp_recover(&DVector::from_element(3, 1.0), &z, 1).is_err());
    }
}
