//! Unit-norm frames and unordered pair indexing.
//!
//! A [`Frame`] stores its `N` columns contiguously (column-major), so the
//! stacked vector `x = [x_1; x_2; ...; x_N]` used by the solver is simply the
//! backing slice.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TeletError};

/// Columns must have unit norm within this tolerance.
pub const UNIT_NORM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    pub fn as_str(self) -> &'static str {
        match self {
            Field::Real => "real",
            Field::Complex => "complex",
        }
    }
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Field {
    type Err = TeletError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(Field::Real),
            "complex" => Ok(Field::Complex),
            other => Err(TeletError::Config(format!("unknown field `{other}`"))),
        }
    }
}

/// An unordered column pair `(i, j)` with `i < j` (zero-based) and its flat
/// position in the row-major enumeration `(0,1), (0,2), ..., (N-2,N-1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairIndex {
    pub i: usize,
    pub j: usize,
    pub flat: usize,
}

/// Number of unordered pairs among `n` columns.
pub fn num_pairs(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

impl PairIndex {
    pub fn new(i: usize, j: usize, n: usize) -> Result<Self> {
        if !(i < j && j < n) {
            return Err(TeletError::Domain(format!(
                "pair ({i}, {j}) invalid for N={n}"
            )));
        }
        // pairs before row i: sum_{r<i} (n-1-r)
        let flat = i * (2 * n - i - 1) / 2 + (j - i - 1);
        Ok(Self { i, j, flat })
    }

    pub fn from_flat(flat: usize, n: usize) -> Result<Self> {
        if flat >= num_pairs(n) {
            return Err(TeletError::Domain(format!(
                "flat pair index {flat} out of range for N={n}"
            )));
        }
        let mut i = 0;
        let mut start = 0;
        loop {
            let row = n - 1 - i;
            if flat < start + row {
                return Ok(Self {
                    i,
                    j: i + 1 + (flat - start),
                    flat,
                });
            }
            start += row;
            i += 1;
        }
    }
}

/// Iterate over all unordered pairs of `n` columns in flat order.
pub fn pairs(n: usize) -> impl Iterator<Item = PairIndex> {
    (0..n)
        .flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
        .enumerate()
        .map(|(flat, (i, j))| PairIndex { i, j, flat })
}

/// A d x N matrix with unit-norm columns over the reals or the complex numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    field: Field,
    d: usize,
    n: usize,
    data: Vec<Complex64>,
}

pub(crate) fn check_dims(d: usize, n: usize) -> Result<()> {
    if d == 0 || n == 0 {
        return Err(TeletError::InvalidDimensions {
            d,
            n,
            reason: "dimensions must be positive".into(),
        });
    }
    if n < d {
        return Err(TeletError::InvalidDimensions {
            d,
            n,
            reason: "a frame needs N >= d".into(),
        });
    }
    Ok(())
}

impl Frame {
    /// Build a frame from column-major data, validating every invariant.
    pub fn new(field: Field, d: usize, n: usize, data: Vec<Complex64>) -> Result<Self> {
        check_dims(d, n)?;
        if data.len() != d * n {
            return Err(TeletError::Shape(format!(
                "expected {} entries for a {d}x{n} frame, got {}",
                d * n,
                data.len()
            )));
        }
        for (idx, col) in data.chunks_exact(d).enumerate() {
            if col.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(TeletError::NonFinite(idx));
            }
            if field == Field::Real && col.iter().any(|z| z.im != 0.0) {
                return Err(TeletError::ImaginaryInReal(idx));
            }
            let norm = col_norm(col);
            if (norm - 1.0).abs() > UNIT_NORM_TOL {
                return Err(TeletError::NotUnitNorm { index: idx, norm });
            }
        }
        Ok(Self { field, d, n, data })
    }

    /// Like [`Frame::new`] but rescales every column to unit norm first.
    /// Zero columns are rejected. For real frames the imaginary parts are
    /// required to be zero, not discarded.
    pub fn normalized(field: Field, d: usize, n: usize, mut data: Vec<Complex64>) -> Result<Self> {
        check_dims(d, n)?;
        if data.len() != d * n {
            return Err(TeletError::Shape(format!(
                "expected {} entries for a {d}x{n} frame, got {}",
                d * n,
                data.len()
            )));
        }
        for (idx, col) in data.chunks_exact_mut(d).enumerate() {
            let norm = col_norm(col);
            if !norm.is_finite() {
                return Err(TeletError::NonFinite(idx));
            }
            if norm == 0.0 {
                return Err(TeletError::Degenerate(format!("column {idx} is zero")));
            }
            let inv = 1.0 / norm;
            col.iter_mut().for_each(|z| *z *= inv);
        }
        Self::new(field, d, n, data)
    }

    /// Real-valued convenience constructor (column-major), normalizing columns.
    pub fn from_real_columns(d: usize, n: usize, data: &[f64]) -> Result<Self> {
        let data = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self::normalized(Field::Real, d, n, data)
    }

    /// The first `d` standard basis vectors.
    pub fn identity(field: Field, d: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); d * d];
        for k in 0..d {
            data[k * d + k] = Complex64::new(1.0, 0.0);
        }
        Self {
            field,
            d,
            n: d,
            data,
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_pairs(&self) -> usize {
        num_pairs(self.n)
    }

    pub fn column(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn columns(&self) -> std::slice::ChunksExact<'_, Complex64> {
        self.data.chunks_exact(self.d)
    }

    /// The stacked vector `x` of length `N d`.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    /// `x_i^H x_j`.
    pub fn inner(&self, i: usize, j: usize) -> Complex64 {
        dotc(self.column(i), self.column(j))
    }

    /// Max over pairs of `2 |x_i^H x_j|^2`, the squared-and-doubled minimax
    /// objective. Zero when there are no pairs.
    pub fn objective(&self) -> f64 {
        objective_of(self.d, self.n, &self.data)
    }

    /// Wrap data whose columns the caller has just normalized.
    pub(crate) fn from_parts_unchecked(
        field: Field,
        d: usize,
        n: usize,
        data: Vec<Complex64>,
    ) -> Self {
        debug_assert_eq!(data.len(), d * n);
        Self { field, d, n, data }
    }
}

/// `a^H b`.
#[inline]
pub fn dotc(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for (x, y) in a.iter().zip(b) {
        re += x.re * y.re + x.im * y.im;
        im += x.re * y.im - x.im * y.re;
    }
    Complex64::new(re, im)
}

#[inline]
pub fn col_norm(col: &[Complex64]) -> f64 {
    col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn objective_of(d: usize, n: usize, data: &[Complex64]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..n {
        let xi = &data[i * d..(i + 1) * d];
        for j in (i + 1)..n {
            let v = dotc(xi, &data[j * d..(j + 1) * d]).norm_sqr();
            if v > best {
                best = v;
            }
        }
    }
    2.0 * best
}
