//! Majorization-minimization frame design.
//!
//! Each outer iteration builds a linear surrogate of `max_p 2|x_i^H x_j|^2`
//! at the current frame ([`surrogate`]), solves the resulting minimax problem
//! through its simplex dual by mirror ascent ([`mda`]) and normalizes the
//! minimizing direction block by block ([`mm`]).

pub mod mda;
pub mod mm;
pub mod surrogate;
pub mod trace;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TeletError};

pub use mda::{
    mda_solve, probe_ascent_sign, AscentSign, MdaOutcome, MdaRun, SimplexWeights, StepRule,
};
pub use mm::{outer_step, solve, SolveResult, StepReport};
pub use surrogate::SurrogateData;
pub use trace::{ConvergenceTrace, TerminalStatus, TraceRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Acceleration {
    None,
    Squarem,
}

impl std::str::FromStr for Acceleration {
    type Err = TeletError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Acceleration::None),
            "squarem" => Ok(Acceleration::Squarem),
            other => Err(TeletError::Config(format!(
                "unknown acceleration `{other}`"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_outer_iters: usize,
    pub inner_iters: usize,
    /// Inner step-size constant, see [`StepRule`].
    pub mda_eta: f64,
    pub step_rule: StepRule,
    /// Inner early exit when `||q^{k+1} - q^k||_1` drops below this.
    pub inner_tol: f64,
    /// Stop once `|mu - composite bound| < stop_tol`.
    pub stop_tol: f64,
    pub rng_seed: u64,
    pub acceleration: Acceleration,
    /// Record every `trace_every`-th iteration (the last one always).
    pub trace_every: usize,
    pub ascent_sign: AscentSign,
    pub max_backtracks: usize,
    /// When the inner solution does not lower the true objective, the inner
    /// solver is resumed with a doubled budget up to this many times.
    pub max_inner_extensions: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_outer_iters: 10_000,
            inner_iters: 100,
            mda_eta: 1.0,
            step_rule: StepRule::Constant,
            inner_tol: 1e-8,
            stop_tol: 1e-5,
            rng_seed: 0,
            acceleration: Acceleration::None,
            trace_every: 1,
            ascent_sign: AscentSign::Ascend,
            max_backtracks: 5,
            max_inner_extensions: 6,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(TeletError::Config(m.into()));
        if self.max_outer_iters == 0 {
            return bad("max_outer_iters must be positive");
        }
        if self.inner_iters == 0 {
            return bad("inner_iters must be positive");
        }
        if !(self.mda_eta > 0.0 && self.mda_eta.is_finite()) {
            return bad("mda_eta must be positive");
        }
        if !(self.stop_tol > 0.0) {
            return bad("stop_tol must be positive");
        }
        if !(self.inner_tol >= 0.0) {
            return bad("inner_tol must be nonnegative");
        }
        if self.trace_every == 0 {
            return bad("trace_every must be positive");
        }
        Ok(())
    }

    /// Outer iteration cap used by the command line: 1e4 up to N = 100 and
    /// 1e3 beyond.
    pub fn default_max_iters(n: usize) -> usize {
        if n <= 100 {
            10_000
        } else {
            1_000
        }
    }
}
