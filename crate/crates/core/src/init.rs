//! Random starting frames: oversampled random candidates, pruned greedily by
//! repeatedly discarding one member of the most coherent remaining pair.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, TeletError};
use crate::frame::{check_dims, dotc, Field, Frame};
use crate::rng::{stream_rng, Stream};

pub const DEFAULT_OVERSAMPLE: f64 = 4.0;

/// Scale of the complex Gaussian perturbation added to complex starting
/// frames. For d = 2 every unimodular vector is fixed (up to phase) by an
/// antiunitary symmetry that the MM map preserves, so an unperturbed start
/// can never leave the real-equivalent configurations.
pub const COMPLEX_JITTER: f64 = 1e-6;

/// Draw `count` random unit vectors in dimension `d`.
///
/// Complex entries are unimodular `exp(i 2 pi phi)` with `phi ~ U[0,1)`;
/// real entries are standard normal. Columns are normalized afterwards.
pub fn random_candidates<R: Rng>(
    rng: &mut R,
    field: Field,
    d: usize,
    count: usize,
) -> Vec<Complex64> {
    let mut data = Vec::with_capacity(d * count);
    let scale = match field {
        Field::Complex => 1.0 / (d as f64).sqrt(),
        Field::Real => 1.0,
    };
    for _ in 0..count {
        let start = data.len();
        for _ in 0..d {
            let z = match field {
                Field::Complex => {
                    let phi: f64 = rng.random();
                    Complex64::from_polar(scale, std::f64::consts::TAU * phi)
                }
                Field::Real => Complex64::new(rng.sample(StandardNormal), 0.0),
            };
            data.push(z);
        }
        if field == Field::Real {
            let col = &mut data[start..];
            let norm = col.iter().map(|z| z.re * z.re).sum::<f64>().sqrt();
            col.iter_mut().for_each(|z| z.re /= norm);
        }
    }
    data
}

/// Seeded random frame, built from `ceil(oversample * N)` candidates.
/// Complex frames are additionally perturbed by [`COMPLEX_JITTER`].
pub fn init_frame(d: usize, n: usize, field: Field, oversample: f64, seed: u64) -> Result<Frame> {
    check_dims(d, n)?;
    if !(oversample > 1.0) {
        return Err(TeletError::Config(format!(
            "oversample factor must exceed 1, got {oversample}"
        )));
    }
    let count = (oversample * n as f64).ceil() as usize;
    if count < n + 1 {
        return Err(TeletError::Config(format!(
            "oversample factor {oversample} yields {count} candidates, need at least {}",
            n + 1
        )));
    }
    let mut rng = stream_rng(seed, Stream::Init);
    let candidates = random_candidates(&mut rng, field, d, count);
    let keep = greedy_prune(d, count, &candidates, n);
    let mut data = Vec::with_capacity(d * n);
    for k in keep {
        data.extend_from_slice(&candidates[k * d..(k + 1) * d]);
    }
    if field == Field::Complex {
        for z in &mut data {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *z += Complex64::new(re, im) * COMPLEX_JITTER;
        }
    }
    Frame::normalized(field, d, n, data)
}

/// Indices (ascending) of the `target` columns that survive greedy pruning.
///
/// Each round finds the pair with the largest `|<x_a, x_b>|` among survivors
/// and drops the endpoint whose largest inner product with the remaining
/// columns (the partner excluded) is larger; ties drop the lower index.
pub fn greedy_prune(d: usize, count: usize, data: &[Complex64], target: usize) -> Vec<usize> {
    let mut gram = vec![0.0f64; count * count];
    for a in 0..count {
        let xa = &data[a * d..(a + 1) * d];
        for b in (a + 1)..count {
            let v = dotc(xa, &data[b * d..(b + 1) * d]).norm();
            gram[a * count + b] = v;
            gram[b * count + a] = v;
        }
    }
    let mut alive = vec![true; count];
    let mut remaining = count;

    // Per-row maximum over live partners, with the first index attaining it.
    let row_best = |a: usize, alive: &[bool], skip: Option<usize>| -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        for b in 0..count {
            if b != a && alive[b] && Some(b) != skip {
                let v = gram[a * count + b];
                if v > best.0 {
                    best = (v, b);
                }
            }
        }
        best
    };
    let mut rows: Vec<(f64, usize)> = (0..count).map(|a| row_best(a, &alive, None)).collect();

    while remaining > target {
        // Most coherent pair: lowest (a, b) among ties.
        let mut top = (f64::NEG_INFINITY, usize::MAX, usize::MAX);
        for a in 0..count {
            if !alive[a] {
                continue;
            }
            let (v, b) = rows[a];
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            if v > top.0 || (v == top.0 && (lo, hi) < (top.1, top.2)) {
                top = (v, lo, hi);
            }
        }
        let (_, a, b) = top;
        let next_a = row_best(a, &alive, Some(b)).0;
        let next_b = row_best(b, &alive, Some(a)).0;
        let drop = if next_b > next_a { b } else { a };
        alive[drop] = false;
        remaining -= 1;
        for r in 0..count {
            if alive[r] && rows[r].1 == drop {
                rows[r] = row_best(r, &alive, None);
            }
        }
    }
    (0..count).filter(|&k| alive[k]).collect()
}
