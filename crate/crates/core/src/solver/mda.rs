//! Entropic mirror ascent for the inner simplex problem
//!
//! ```text
//! maximize_q  h(q) = min_{||x_i|| <= 1} 4 Re((D q)^H x) + q^T s
//! ```
//!
//! For a fixed `q` the inner minimizer is `y_i = -a_i / ||a_i||` with
//! `a = D q`, so `h(q) = q^T (4 Re(D^H y) + s)` and that same vector is a
//! supergradient. Each `y` is also a feasible frame whose surrogate value is
//! `max_p (4 Re(D^H y) + s)_p`; the best one seen is kept.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::surrogate::{block_minimizer, SurrogateData};
use super::SolverConfig;
use crate::error::{Result, TeletError};
use crate::frame::Field;
use crate::init::init_frame;

/// Blocks of `a = D q` shorter than this are treated as having no direction.
pub const DEGENERATE_BLOCK_NORM: f64 = 1e-14;

/// Nonnegative weights over the flat pair index, summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexWeights(Vec<f64>);

impl SimplexWeights {
    pub fn uniform(len: usize) -> Self {
        assert!(len > 0, "simplex needs at least one coordinate");
        Self(vec![1.0 / len as f64; len])
    }

    pub fn new(q: Vec<f64>) -> Result<Self> {
        if q.is_empty() {
            return Err(TeletError::Domain("empty simplex".into()));
        }
        if q.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(TeletError::Domain(
                "simplex weights must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = q.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(TeletError::Domain(format!("simplex weights sum to {sum}")));
        }
        Ok(Self(q))
    }

    pub fn indicator(len: usize, at: usize) -> Self {
        let mut q = vec![0.0; len];
        q[at] = 1.0;
        Self(q)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Direction of the multiplicative update `q <- q exp(sign * gamma * h)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AscentSign {
    /// `exp(+gamma h)`: moves mass toward larger supergradient entries.
    Ascend,
    /// `exp(-gamma h)`.
    Descend,
}

impl AscentSign {
    pub fn value(self) -> f64 {
        match self {
            AscentSign::Ascend => 1.0,
            AscentSign::Descend => -1.0,
        }
    }
}

/// Shape of the inner step size. Both are multiplied by `eta * N * d`; the
/// dual's curvature scales like `1 / (N d)`, so this keeps `eta` of order one
/// across frame sizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// `gamma_k = eta N d / sqrt(k)`.
    InverseSqrt,
    /// `gamma_k = eta N d`.
    Constant,
}

impl std::str::FromStr for StepRule {
    type Err = TeletError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inverse_sqrt" => Ok(StepRule::InverseSqrt),
            "constant" => Ok(StepRule::Constant),
            other => Err(TeletError::Config(format!("unknown step rule `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MdaOutcome {
    pub weights: SimplexWeights,
    /// `a = D q` at the returned weights.
    pub direction: Vec<Complex64>,
    /// Number of weight updates performed.
    pub iterations: usize,
    /// `h(q)` at the returned weights.
    pub dual_value: f64,
    /// `h(q^k)` for every evaluated iterate, starting with the uniform one.
    pub dual_history: Vec<f64>,
    /// Inner minimizer with the smallest surrogate value among all iterates.
    pub best_primal: Vec<Complex64>,
    pub best_primal_value: f64,
    pub best_primal_degenerate: usize,
}

/// Resumable mirror-ascent state for one surrogate.
pub struct MdaRun<'a> {
    sur: &'a SurrogateData,
    q: Vec<f64>,
    next: Vec<f64>,
    a: Vec<Complex64>,
    y: Vec<Complex64>,
    h: Vec<f64>,
    iterations: usize,
    dual: f64,
    dual_history: Vec<f64>,
    best_primal: Vec<Complex64>,
    best_value: f64,
    best_degenerate: usize,
    converged: bool,
    damping: f64,
}

impl<'a> MdaRun<'a> {
    /// Start from uniform weights and evaluate them.
    pub fn new(sur: &'a SurrogateData) -> Self {
        let p = sur.num_pairs();
        let q = SimplexWeights::uniform(p).into_vec();
        let mut run = Self {
            sur,
            a: sur.apply_d(&q),
            q,
            next: vec![0.0; p],
            y: vec![Complex64::new(0.0, 0.0); sur.stacked_len()],
            h: vec![0.0; p],
            iterations: 0,
            dual: f64::NEG_INFINITY,
            dual_history: Vec::new(),
            best_primal: Vec::new(),
            best_value: f64::INFINITY,
            best_degenerate: 0,
            converged: p == 1,
            damping: 1.0,
        };
        run.evaluate();
        run
    }

    /// Inner minimizer, supergradient and `h(q)` for the current weights.
    fn evaluate(&mut self) {
        let sur = self.sur;
        let d = sur.anchor().d();
        let degenerate = block_minimizer(
            &self.a,
            d,
            sur.anchor().as_slice(),
            DEGENERATE_BLOCK_NORM,
            &mut self.y,
        );
        sur.apply_d_adjoint_into(&self.y, &mut self.h);
        let mut gmax = f64::NEG_INFINITY;
        let mut dual = 0.0;
        for ((hv, s), w) in self.h.iter_mut().zip(sur.s()).zip(&self.q) {
            *hv += s;
            gmax = gmax.max(*hv);
            dual += w * *hv;
        }
        self.dual = dual;
        self.dual_history.push(dual);
        if gmax < self.best_value {
            self.best_value = gmax;
            self.best_primal.clone_from(&self.y);
            self.best_degenerate = degenerate;
        }
    }

    /// Perform up to `budget` further updates; stops early once the weights
    /// change by less than `inner_tol` in l1. Returns the updates performed.
    pub fn run(&mut self, config: &SolverConfig, budget: usize) -> usize {
        let sign = config.ascent_sign.value();
        let scale = self.damping * config.mda_eta * self.sur.stacked_len() as f64;
        let mut done = 0;
        while done < budget && !self.converged {
            self.iterations += 1;
            done += 1;
            let gamma = sign
                * match config.step_rule {
                    StepRule::InverseSqrt => scale / (self.iterations as f64).sqrt(),
                    StepRule::Constant => scale,
                };
            // Shift so every exponent is <= 0.
            let shift = self
                .h
                .iter()
                .fold(f64::NEG_INFINITY, |m, &v| m.max(gamma * v));
            let mut total = 0.0;
            for ((nv, &qv), &hv) in self.next.iter_mut().zip(&self.q).zip(&self.h) {
                *nv = qv * (gamma * hv - shift).exp();
                total += *nv;
            }
            let mut change = 0.0;
            for (nv, &qv) in self.next.iter_mut().zip(&self.q) {
                *nv /= total;
                change += (*nv - qv).abs();
            }
            std::mem::swap(&mut self.q, &mut self.next);
            self.sur.apply_d_into(&self.q, &mut self.a);
            self.evaluate();
            if change < config.inner_tol {
                self.converged = true;
            }
        }
        done
    }

    /// Halve all further step sizes and clear the convergence flag.
    pub fn damp(&mut self) {
        self.damping *= 0.5;
        self.converged = self.q.len() == 1;
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn weights(&self) -> &[f64] {
        &self.q
    }

    pub fn best_primal(&self) -> &[Complex64] {
        &self.best_primal
    }

    pub fn best_primal_value(&self) -> f64 {
        self.best_value
    }

    pub fn best_primal_degenerate(&self) -> usize {
        self.best_degenerate
    }

    pub fn dual_value(&self) -> f64 {
        self.dual
    }

    /// True once the weights stopped moving (or the simplex is a point).
    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn finish(self) -> MdaOutcome {
        MdaOutcome {
            weights: SimplexWeights(self.q),
            direction: self.a,
            iterations: self.iterations,
            dual_value: self.dual,
            dual_history: self.dual_history,
            best_primal: self.best_primal,
            best_primal_value: self.best_value,
            best_primal_degenerate: self.best_degenerate,
        }
    }
}

/// `inner_iters` mirror-ascent updates from uniform weights.
pub fn mda_solve(sur: &SurrogateData, config: &SolverConfig) -> MdaOutcome {
    let mut run = MdaRun::new(sur);
    run.run(config, config.inner_iters);
    run.finish()
}

/// Runs the inner solver with both update signs on a fixed small problem
/// (complex, d = 3, N = 4) and returns the sign under which `h(q^k)` climbs
/// the most. This is the sign that actually maximizes `h`.
pub fn probe_ascent_sign() -> AscentSign {
    let frame = init_frame(3, 4, Field::Complex, 4.0, 0x5eed).expect("probe frame");
    let sur = SurrogateData::build(&frame);
    let mut best = (f64::NEG_INFINITY, AscentSign::Ascend);
    for sign in [AscentSign::Ascend, AscentSign::Descend] {
        let cfg = SolverConfig {
            inner_iters: 200,
            inner_tol: 0.0,
            ascent_sign: sign,
            ..SolverConfig::default()
        };
        let out = mda_solve(&sur, &cfg);
        let gain = out.dual_history.last().unwrap() - out.dual_history[0];
        if gain > best.0 {
            best = (gain, sign);
        }
    }
    best.1
}
