//! Mutual coherence and the lower bounds it is measured against.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TeletError};
use crate::frame::{check_dims, dotc, pairs, Field, Frame, PairIndex};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    /// Largest `|x_i^H x_j|` over distinct columns.
    pub mu: f64,
    pub argmax_pair: PairIndex,
    pub welch: f64,
    /// `None` when the composite bound is undefined (complex, d = 1).
    pub composite: Option<f64>,
    pub gram_offdiag_max: f64,
    pub gram_offdiag_min: f64,
    pub gram_offdiag_mean: f64,
}

/// Coherence summary of a frame. Ties for the maximum resolve to the
/// smallest flat pair index.
pub fn mutual_coherence(frame: &Frame) -> Result<CoherenceReport> {
    let n = frame.n();
    if n < 2 {
        return Err(TeletError::Degenerate(
            "mutual coherence needs at least two columns".into(),
        ));
    }
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    let mut sum = 0.0;
    let mut arg = PairIndex {
        i: 0,
        j: 1,
        flat: 0,
    };
    let mut count = 0usize;
    for p in pairs(n) {
        let v = dotc(frame.column(p.i), frame.column(p.j)).norm();
        if v > max {
            max = v;
            arg = p;
        }
        min = min.min(v);
        sum += v;
        count += 1;
    }
    let d = frame.d();
    Ok(CoherenceReport {
        mu: max,
        argmax_pair: arg,
        welch: welch_bound(d, n)?,
        composite: composite_bound(d, n, frame.field()).ok(),
        gram_offdiag_max: max,
        gram_offdiag_min: min,
        gram_offdiag_mean: sum / count as f64,
    })
}

/// Just the coherence value, without the report.
pub fn coherence(frame: &Frame) -> f64 {
    (0.5 * frame.objective()).sqrt()
}

/// `sqrt((N - d) / (d (N - 1)))`. With a single vector there are no pairs and
/// the bound is reported as 0.
pub fn welch_bound(d: usize, n: usize) -> Result<f64> {
    check_dims(d, n)?;
    if n == 1 {
        return Ok(0.0);
    }
    let (d, n) = (d as f64, n as f64);
    Ok(((n - d) / (d * (n - 1.0))).sqrt())
}

/// Piecewise composite lower bound on coherence.
///
/// Complex frames use the Welch bound up to `N = d^2`, then the larger of the
/// orthoplex-type and Levenstein-type terms (plus `sqrt(1/d)` up to
/// `N = 2(d^2 - 1)`). Real frames take the larger of Welch and the real
/// Levenstein term.
pub fn composite_bound(d: usize, n: usize, field: Field) -> Result<f64> {
    check_dims(d, n)?;
    if n < 2 {
        return Err(TeletError::Domain("composite bound needs N >= 2".into()));
    }
    let welch = welch_bound(d, n)?;
    let (df, nf) = (d as f64, n as f64);
    match field {
        Field::Real => {
            let num = 3.0 * nf - df * df - 2.0 * df;
            let lev = if n > d && num > 0.0 {
                (num / ((df + 2.0) * (nf - df))).sqrt()
            } else {
                0.0
            };
            Ok(welch.max(lev))
        }
        Field::Complex => {
            if n <= d * d {
                return Ok(welch);
            }
            if d == 1 {
                return Err(TeletError::Domain(
                    "complex composite bound is undefined for d = 1".into(),
                ));
            }
            let lev = ((2.0 * nf - df * df - df) / ((df + 1.0) * (nf - df))).sqrt();
            let cap = 1.0 - 2.0 * nf.powf(-1.0 / (df - 1.0));
            let mut v = lev.max(cap);
            if n <= 2 * (d * d - 1) {
                v = v.max((1.0 / df).sqrt());
            }
            Ok(v)
        }
    }
}

/// Strict upper bound on the sparsity guaranteed recoverable by l0
/// minimization: `(1 + 1/mu) / 2`. Infinite for `mu = 0`.
pub fn recoverability_bound(mu: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&mu) || mu.is_nan() {
        return Err(TeletError::Domain(format!("coherence {mu} outside [0, 1]")));
    }
    if mu == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(0.5 * (1.0 + 1.0 / mu))
}
