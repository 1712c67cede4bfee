#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use telet_core::{Field, Frame};

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng, field: Field) -> Complex64 {
    match field {
        Field::Real => Complex64::new(rng.sample(StandardNormal), 0.0),
        Field::Complex => Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)),
    }
}

pub fn random_vector(rng: &mut impl Rng, field: Field, len: usize) -> Vec<Complex64> {
    (0..len).map(|_| gaussian(rng, field)).collect()
}

pub fn random_frame(rng: &mut impl Rng, field: Field, d: usize, n: usize) -> Frame {
    Frame::normalized(field, d, n, random_vector(rng, field, d * n)).unwrap()
}

pub fn perturb(rng: &mut impl Rng, frame: &Frame, scale: f64) -> Frame {
    let data = frame
        .as_slice()
        .iter()
        .map(|z| z + gaussian(rng, frame.field()) * scale)
        .collect();
    Frame::normalized(frame.field(), frame.d(), frame.n(), data).unwrap()
}

pub fn random_simplex(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..len)
        .map(|_| -rng.random::<f64>().max(1e-300).ln())
        .collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|v| v / total).collect()
}

pub fn stacked(frame: &Frame) -> DVector<Complex64> {
    DVector::from_column_slice(frame.as_slice())
}

/// `S_to^H S_from`: copies block `from` of a stacked vector into block `to`.
pub fn selection_product(from: usize, to: usize, d: usize, n: usize) -> DMatrix<Complex64> {
    let mut a = DMatrix::zeros(n * d, n * d);
    for k in 0..d {
        a[(to * d + k, from * d + k)] = Complex64::new(1.0, 0.0);
    }
    a
}

/// Column-stacking vectorization.
pub fn vec_of(m: &DMatrix<Complex64>) -> DVector<Complex64> {
    DVector::from_column_slice(m.as_slice())
}

pub fn lambda_max(m: &DMatrix<Complex64>) -> f64 {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Pair coupling of the quadratic form: `B = A (x^H A^H x) + A^H (x^H A x)`
/// so that `x^H B x = 2 |x^H A x|^2` at the anchor.
pub fn coupling(frame: &Frame, i: usize, j: usize) -> DMatrix<Complex64> {
    let x = stacked(frame);
    let a = selection_product(i, j, frame.d(), frame.n());
    let q = (x.adjoint() * &a * &x)[(0, 0)];
    &a * q.conj() + a.adjoint() * q
}

/// Dense linear term `d_ij = B x^t - (|c| + N d) x^t`.
pub fn dense_direction(frame: &Frame, i: usize, j: usize) -> DVector<Complex64> {
    let x = stacked(frame);
    let c = frame.inner(i, j).norm();
    let shift = c + (frame.n() * frame.d()) as f64;
    coupling(frame, i, j) * &x - &x * Complex64::new(shift, 0.0)
}

/// Pair surrogate built term by term from the quadratic-form derivation,
/// evaluated at `x` around `anchor`.
pub fn dense_surrogate(anchor: &Frame, x: &Frame, i: usize, j: usize) -> f64 {
    let (d, n) = (anchor.d() as f64, anchor.n() as f64);
    let xt = stacked(anchor);
    let xv = stacked(x);
    let c = anchor.inner(i, j).norm();
    let b = coupling(anchor, i, j);
    let dim = b.nrows();
    let b_hat = &b - DMatrix::<Complex64>::identity(dim, dim) * Complex64::new(c, 0.0);
    let quad_anchor = (xt.adjoint() * &b_hat * &xt)[(0, 0)].re;
    let cross = (xt.adjoint() * &b_hat * &xv)[(0, 0)].re;
    let overlap = (xv.adjoint() * &xt)[(0, 0)].re;
    -2.0 * c * c + 2.0 * (-quad_anchor + 2.0 * cross) + 2.0 * c * n
        - 2.0 * d * (-n * n + 2.0 * n * overlap)
        + 2.0 * n * n * d
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v).norm())
        .fold(0.0, f64::max)
}
