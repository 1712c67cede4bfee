//! Per-iteration linear majorizer of the pairwise objective.
//!
//! At an anchor frame `x^t` every pair `p = (i, j)` gets the surrogate
//!
//! ```text
//! g_p(x | x^t) = 4 Re(x^H d_p) + s_p
//! c_p = x_i^H x_j
//! s_p = -6 |c_p|^2 + 4 N |c_p| + 4 N^2 d
//! d_p = e_j (x_i c_p) + e_i (x_j conj(c_p)) - (|c_p| + N d) x^t
//! ```
//!
//! where `e_k(v)` places `v` in block `k` of a stacked vector. `g_p` touches
//! `2 |c_p|^2` at the anchor and dominates it on the product of unit spheres.
//! The matrix `D = [d_1, ..., d_P]` is never formed; products with `D` and
//! `D^H` cost `O(N^2 d)`.

use num_complex::Complex64;

use rayon::prelude::*;

use crate::frame::{dotc, Frame};

/// Pair-count times dimension above which products run in parallel.
const PARALLEL_WORK: usize = 1 << 15;

#[derive(Clone, Debug)]
pub struct SurrogateData {
    anchor: Frame,
    c: Vec<Complex64>,
    abs_c: Vec<f64>,
    s: Vec<f64>,
}

impl SurrogateData {
    pub fn build(frame: &Frame) -> Self {
        let n = frame.n();
        let d = frame.d();
        let p = frame.num_pairs();
        let mut c = Vec::with_capacity(p);
        for i in 0..n {
            let xi = frame.column(i);
            for j in (i + 1)..n {
                c.push(dotc(xi, frame.column(j)));
            }
        }
        let abs_c: Vec<f64> = c.iter().map(|z| z.norm()).collect();
        let (nf, df) = (n as f64, d as f64);
        let base = 4.0 * nf * nf * df;
        let s = abs_c
            .iter()
            .map(|&a| -6.0 * a * a + 4.0 * nf * a + base)
            .collect();
        Self {
            anchor: frame.clone(),
            c,
            abs_c,
            s,
        }
    }

    /// Large problems use the rayon pool; results do not depend on it.
    fn parallel(&self) -> bool {
        self.c.len() * self.anchor.d() >= PARALLEL_WORK
    }

    pub fn anchor(&self) -> &Frame {
        &self.anchor
    }

    /// `c_p = x_i^H x_j` in flat pair order.
    pub fn c(&self) -> &[Complex64] {
        &self.c
    }

    pub fn abs_c(&self) -> &[f64] {
        &self.abs_c
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn num_pairs(&self) -> usize {
        self.c.len()
    }

    pub fn stacked_len(&self) -> usize {
        self.anchor.n() * self.anchor.d()
    }

    /// Pairwise objective terms `2 |c_p|^2` at the anchor.
    pub fn objective_terms(&self) -> Vec<f64> {
        self.abs_c.iter().map(|a| 2.0 * a * a).collect()
    }

    /// `f(x^t) = max_p 2 |c_p|^2`.
    pub fn anchor_objective(&self) -> f64 {
        self.abs_c.iter().fold(0.0f64, |m, &a| m.max(2.0 * a * a))
    }

    /// `a = D q`, written into `out` (length `N d`).
    ///
    /// Each output block sums its partner contributions in ascending partner
    /// order, so the parallel and sequential paths agree bitwise.
    pub fn apply_d_into(&self, q: &[f64], out: &mut [Complex64]) {
        let n = self.anchor.n();
        let d = self.anchor.d();
        assert_eq!(
            q.len(),
            self.c.len(),
            "weight length must equal the pair count"
        );
        assert_eq!(out.len(), n * d, "output must be a stacked vector");
        let x = self.anchor.as_slice();
        let nd = (n * d) as f64;
        let shift: f64 = q.iter().zip(&self.abs_c).map(|(w, a)| w * (a + nd)).sum();
        let block = |(k, ob): (usize, &mut [Complex64])| {
            ob.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            // pairs (i, k), i < k contribute x_i c
            for i in 0..k {
                let flat = row_start(i, n) + (k - i - 1);
                axpy(self.c[flat] * q[flat], &x[i * d..(i + 1) * d], ob);
            }
            // pairs (k, j), j > k contribute x_j conj(c)
            let base = row_start(k, n);
            for j in (k + 1)..n {
                let flat = base + (j - k - 1);
                axpy(self.c[flat].conj() * q[flat], &x[j * d..(j + 1) * d], ob);
            }
            for (o, xv) in ob.iter_mut().zip(&x[k * d..(k + 1) * d]) {
                *o -= xv * shift;
            }
        };
        if self.parallel() {
            out.par_chunks_mut(d).enumerate().for_each(block);
        } else {
            out.chunks_mut(d).enumerate().for_each(block);
        }
    }

    pub fn apply_d(&self, q: &[f64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.stacked_len()];
        self.apply_d_into(q, &mut out);
        out
    }

    /// `4 Re(D^H y)`, one entry per pair.
    pub fn apply_d_adjoint_into(&self, y: &[Complex64], out: &mut [f64]) {
        let n = self.anchor.n();
        let d = self.anchor.d();
        assert_eq!(y.len(), n * d, "input must be a stacked vector");
        assert_eq!(
            out.len(),
            self.c.len(),
            "output length must equal the pair count"
        );
        let x = self.anchor.as_slice();
        let nd = (n * d) as f64;
        let trace = dotc(x, y).re;
        let row = |(i, orow): (usize, &mut [f64])| {
            let xi = &x[i * d..(i + 1) * d];
            let yi = &y[i * d..(i + 1) * d];
            let base = row_start(i, n);
            for (off, o) in orow.iter_mut().enumerate() {
                let j = i + 1 + off;
                let zij = dotc(xi, &y[j * d..(j + 1) * d]);
                let zji = dotc(&x[j * d..(j + 1) * d], yi);
                let cp = self.c[base + off];
                let lin = (cp.conj() * zij + cp * zji).re - (self.abs_c[base + off] + nd) * trace;
                *o = 4.0 * lin;
            }
        };
        let rows = split_rows(out, n);
        if self.parallel() {
            rows.into_par_iter().enumerate().for_each(row);
        } else {
            rows.into_iter().enumerate().for_each(row);
        }
    }

    pub fn apply_d_adjoint(&self, y: &[Complex64]) -> Vec<f64> {
        let mut out = vec![0.0; self.c.len()];
        self.apply_d_adjoint_into(y, &mut out);
        out
    }

    /// All pairwise surrogate values `g_p(x | x^t)` at a stacked vector `x`.
    pub fn surrogate_values(&self, x: &[Complex64]) -> Vec<f64> {
        let mut h = self.apply_d_adjoint(x);
        h.iter_mut().zip(&self.s).for_each(|(v, s)| *v += s);
        h
    }

    /// `g(x | x^t) = max_p g_p(x | x^t)`.
    pub fn surrogate_max(&self, x: &[Complex64]) -> f64 {
        self.surrogate_values(x)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Flat index of pair `(i, i + 1)`.
#[inline]
fn row_start(i: usize, n: usize) -> usize {
    i * (2 * n - i - 1) / 2
}

/// Split a pair-indexed slice into its per-row pieces (row `i` holds the
/// pairs `(i, j)`, `j > i`).
fn split_rows(mut out: &mut [f64], n: usize) -> Vec<&mut [f64]> {
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let (head, tail) = out.split_at_mut(n - i - 1);
        rows.push(head);
        out = tail;
    }
    rows
}

#[inline]
fn axpy(a: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yv, xv) in y.iter_mut().zip(x) {
        yv.re += a.re * xv.re - a.im * xv.im;
        yv.im += a.re * xv.im + a.im * xv.re;
    }
}

/// Minimizer of `Re(a^H y)` over `||y_i|| <= 1` block by block:
/// `y_i = -a_i / ||a_i||`. Blocks with `||a_i|| < min_norm` fall back to
/// the corresponding block of `fallback`; their count is returned.
pub fn block_minimizer(
    a: &[Complex64],
    d: usize,
    fallback: &[Complex64],
    min_norm: f64,
    out: &mut [Complex64],
) -> usize {
    let mut degenerate = 0;
    for ((ab, fb), ob) in a
        .chunks_exact(d)
        .zip(fallback.chunks_exact(d))
        .zip(out.chunks_exact_mut(d))
    {
        let norm = crate::frame::col_norm(ab);
        if norm < min_norm {
            ob.copy_from_slice(fb);
            degenerate += 1;
        } else {
            let inv = -1.0 / norm;
            for (o, v) in ob.iter_mut().zip(ab) {
                *o = v * inv;
            }
        }
    }
    degenerate
}
