//! Squared extrapolation (SQUAREM) around the MM map.

use num_complex::Complex64;

use crate::error::Result;
use crate::frame::Frame;
use crate::solver::{outer_step, SolverConfig};

/// Below this `||v||` the two MM steps are treated as a fixed point.
pub const MIN_CURVATURE_NORM: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct SquaremReport {
    pub frame: Frame,
    pub objective: f64,
    /// Step length actually used; `-1` means the plain double step.
    pub alpha: f64,
    pub backtracks: usize,
    /// Inner iterations summed over both MM evaluations.
    pub inner_iters: usize,
    pub degenerate_blocks: usize,
    /// MM map applications spent (always 2).
    pub mm_evals: usize,
    pub moved: bool,
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `x - 2 alpha r + alpha^2 v` with `r = x1 - x` and `v = x2 - 2 x1 + x`,
/// before renormalization. At `alpha = -1` this is `x2`.
pub fn extrapolate(
    x: &[Complex64],
    x1: &[Complex64],
    x2: &[Complex64],
    alpha: f64,
) -> Vec<Complex64> {
    let (a, a2) = (-2.0 * alpha, alpha * alpha);
    x.iter()
        .zip(x1)
        .zip(x2)
        .map(|((xv, x1v), x2v)| {
            let r = x1v - xv;
            let v = x2v - x1v - r;
            xv + r * a + v * a2
        })
        .collect()
}

/// One SQUAREM cycle. The extrapolated point is accepted only if its
/// objective does not exceed that of `frame`; otherwise `alpha` is pulled
/// toward `-1` by `alpha <- (alpha - 1) / 2`, and after `max_backtracks`
/// failures the plain double step is returned.
pub fn squarem_step(frame: &Frame, config: &SolverConfig) -> Result<SquaremReport> {
    let s1 = outer_step(frame, config)?;
    let s2 = outer_step(&s1.frame, config)?;
    let inner_iters = s1.inner_iters + s2.inner_iters;
    let degenerate_blocks = s1.degenerate_blocks + s2.degenerate_blocks;
    let plain = |alpha: f64, backtracks: usize| SquaremReport {
        frame: s2.frame.clone(),
        objective: s2.objective,
        alpha,
        backtracks,
        inner_iters,
        degenerate_blocks,
        mm_evals: 2,
        moved: s1.moved || s2.moved,
    };

    let x = frame.as_slice();
    let x1 = s1.frame.as_slice();
    let x2 = s2.frame.as_slice();
    let r: Vec<Complex64> = x1.iter().zip(x).map(|(a, b)| a - b).collect();
    let v: Vec<Complex64> = x2
        .iter()
        .zip(x1)
        .zip(&r)
        .map(|((b, a), r)| b - a - r)
        .collect();
    let v_norm = norm(&v);
    if v_norm < MIN_CURVATURE_NORM {
        return Ok(plain(-1.0, 0));
    }
    let mut alpha = (-norm(&r) / v_norm).min(-1.0);
    if alpha == -1.0 {
        return Ok(plain(alpha, 0));
    }

    let before = frame.objective();
    let (d, n) = (frame.d(), frame.n());
    for backtracks in 0..=config.max_backtracks {
        if let Ok(candidate) = Frame::normalized(frame.field(), d, n, extrapolate(x, x1, x2, alpha))
        {
            let objective = candidate.objective();
            if objective <= before {
                return Ok(SquaremReport {
                    frame: candidate,
                    objective,
                    alpha,
                    backtracks,
                    inner_iters,
                    degenerate_blocks,
                    mm_evals: 2,
                    moved: true,
                });
            }
        }
        alpha = (alpha - 1.0) / 2.0;
    }
    Ok(plain(-1.0, config.max_backtracks))
}
