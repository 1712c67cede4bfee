use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::frame::{Field, Frame};

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

/// Frame with i.i.d. Gaussian columns, normalized.
pub fn random_frame(rng: &mut impl Rng, field: Field, d: usize, n: usize) -> Frame {
    Frame::normalized(field, d, n, random_vector(rng, field, d * n)).unwrap()
}

/// `frame + scale * noise`, renormalized.
pub fn perturb(rng: &mut impl Rng, frame: &Frame, scale: f64) -> Frame {
    let data = frame
        .as_slice()
        .iter()
        .map(|z| z + gaussian(rng, frame.field()) * scale)
        .collect();
    Frame::normalized(frame.field(), frame.d(), frame.n(), data).unwrap()
}

/// Uniform draw from the probability simplex.
pub fn random_simplex(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..len)
        .map(|_| -rng.random::<f64>().max(1e-300).ln())
        .collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|v| v / total).collect()
}
