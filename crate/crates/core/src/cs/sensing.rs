//! Sensing-matrix design against a target equivalent dictionary.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{frame_to_matrix, matrix_coherence, matrix_to_frame};
use crate::error::{Result, TeletError};
use crate::frame::Frame;
use crate::rng::{stream_rng, Stream};
use crate::solver::{solve, SolverConfig, TerminalStatus};

/// Relative singular-value cutoff for rank decisions.
const RANK_TOL: f64 = 1e-12;

/// Ridge added to a singular normal matrix, relative to `trace / N`.
const RIDGE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct SensingSolution {
    /// d x N sensing matrix.
    pub theta: DMatrix<f64>,
    /// Set when the dictionary was rank deficient (least-norm solution) or
    /// the normal matrix needed a ridge.
    pub regularized: bool,
}

/// Sparse-representation error, as samples or as their second moment.
#[derive(Clone, Debug, PartialEq)]
pub enum SreInput {
    /// N x R error samples `E`.
    Samples(DMatrix<f64>),
    /// N x N matrix `E E^T`.
    SecondMoment(DMatrix<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SensingProblem {
    psi: DMatrix<f64>,
    sre_moment: DMatrix<f64>,
    omega: f64,
    d: usize,
}

impl SensingProblem {
    pub fn new(psi: DMatrix<f64>, sre: SreInput, omega: f64, d: usize) -> Result<Self> {
        let n = psi.nrows();
        if !psi.is_square() || n == 0 {
            return Err(TeletError::Shape(format!(
                "dictionary is {}x{}",
                psi.nrows(),
                psi.ncols()
            )));
        }
        if d == 0 || d > n {
            return Err(TeletError::InvalidDimensions {
                d,
                n,
                reason: "measurement dimension must be in 1..=N".into(),
            });
        }
        if !(0.0..=1.0).contains(&omega) {
            return Err(TeletError::Domain(format!(
                "omega must lie in [0, 1], got {omega}"
            )));
        }
        let sre_moment = match sre {
            SreInput::Samples(e) => {
                if e.nrows() != n {
                    return Err(TeletError::Shape(format!(
                        "SRE has {} rows, expected {n}",
                        e.nrows()
                    )));
                }
                &e * e.transpose()
            }
            SreInput::SecondMoment(m) => {
                if m.shape() != (n, n) {
                    return Err(TeletError::Shape(format!(
                        "SRE moment is {:?}, expected {n}x{n}",
                        m.shape()
                    )));
                }
                m
            }
        };
        Ok(Self {
            psi,
            sre_moment,
            omega,
            d,
        })
    }

    pub fn psi(&self) -> &DMatrix<f64> {
        &self.psi
    }

    pub fn sre_moment(&self) -> &DMatrix<f64> {
        &self.sre_moment
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.psi.nrows()
    }

    fn check_theta(&self, theta: &DMatrix<f64>) -> Result<()> {
        if theta.shape() != (self.d, self.n()) {
            return Err(TeletError::Shape(format!(
                "sensing matrix is {:?}, expected {}x{}",
                theta.shape(),
                self.d,
                self.n()
            )));
        }
        Ok(())
    }

    /// `omega ||X - Theta Psi||_F^2 + (1 - omega) ||Theta E||_F^2`.
    pub fn objective(&self, theta: &DMatrix<f64>, target: &DMatrix<f64>) -> Result<f64> {
        self.check_theta(theta)?;
        self.check_theta(target)?;
        let fit = (target - theta * &self.psi).norm_squared();
        let sre = (theta * &self.sre_moment).component_mul(theta).sum();
        Ok(self.omega * fit + (1.0 - self.omega) * sre)
    }

    /// Gradient of [`SensingProblem::objective`] in `Theta`.
    pub fn gradient(&self, theta: &DMatrix<f64>, target: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_theta(theta)?;
        self.check_theta(target)?;
        let fit = (theta * &self.psi - target) * self.psi.transpose() * (2.0 * self.omega);
        let sre = theta * &self.sre_moment * (2.0 * (1.0 - self.omega));
        Ok(fit + sre)
    }
}

/// Least-squares fit `argmin ||X - Theta Psi||_F`, i.e. `X Psi^+`.
/// A rank-deficient `Psi` gives the least-norm solution, flagged.
pub fn ls_sensing_matrix(target: &DMatrix<f64>, psi: &DMatrix<f64>) -> Result<SensingSolution> {
    if target.ncols() != psi.nrows() {
        return Err(TeletError::Shape(format!(
            "target has {} columns, dictionary has {} rows",
            target.ncols(),
            psi.nrows()
        )));
    }
    let svd = psi.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = RANK_TOL * smax.max(f64::MIN_POSITIVE);
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    let pinv = svd
        .pseudo_inverse(cutoff)
        .map_err(|e| TeletError::Numerical(e.to_string()))?;
    Ok(SensingSolution {
        theta: target * pinv,
        regularized: rank < psi.ncols().min(psi.nrows()),
    })
}

/// Exact minimizer of [`SensingProblem::objective`] for a fixed target:
/// `omega X Psi^T (omega Psi Psi^T + (1 - omega) E E^T)^{-1}`.
pub fn sre_aware_sensing_matrix(
    problem: &SensingProblem,
    target: &DMatrix<f64>,
) -> Result<SensingSolution> {
    problem.check_theta(target)?;
    let n = problem.n();
    let w = problem.omega;
    let m = &problem.psi * problem.psi.transpose() * w + &problem.sre_moment * (1.0 - w);
    let rhs = &problem.psi * target.transpose() * w;
    let well_conditioned = |m: &DMatrix<f64>| {
        m.clone().cholesky().filter(|c| {
            let diag = c.l_dirty().diagonal();
            let (lo, hi) = (diag.min(), diag.max());
            lo > 0.0 && (lo / hi).powi(2) > 1e-14
        })
    };
    let (chol, regularized) = match well_conditioned(&m) {
        Some(c) => (c, false),
        None => {
            let ridge = RIDGE * m.trace().abs().max(1.0) / n as f64;
            let shifted = &m + DMatrix::<f64>::identity(n, n) * ridge;
            let c = shifted.cholesky().ok_or_else(|| {
                TeletError::Numerical("normal matrix is not positive semidefinite".into())
            })?;
            (c, true)
        }
    };
    let theta_t = chol.solve(&rhs);
    Ok(SensingSolution {
        theta: theta_t.transpose(),
        regularized,
    })
}

/// Gaussian sensing matrix with i.i.d. `N(0, 1/d)` entries.
pub fn gaussian_sensing<R: Rng>(d: usize, n: usize, rng: &mut R) -> DMatrix<f64> {
    let normal = Normal::new(0.0, (1.0 / d as f64).sqrt()).expect("finite standard deviation");
    DMatrix::from_fn(d, n, |_, _| normal.sample(rng))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlternationRecord {
    pub alternation: usize,
    /// Objective at the previous sensing matrix and the new target.
    pub objective_before_update: f64,
    /// Objective after the closed-form sensing update.
    pub objective: f64,
    /// Coherence of the equivalent dictionary `Theta Psi`.
    pub mu_ed: f64,
    /// Coherence of the target frame produced in this alternation.
    pub target_mu: f64,
    pub target_status: TerminalStatus,
    pub regularized: bool,
}

#[derive(Clone, Debug)]
pub struct SensingOutcome {
    pub theta: DMatrix<f64>,
    /// Target frame of the last alternation.
    pub target: Frame,
    /// `mu(Theta Psi)` of the starting matrix.
    pub initial_mu_ed: f64,
    pub records: Vec<AlternationRecord>,
}

/// Alternating minimization starting from a Gaussian sensing matrix drawn
/// from `seed`. See [`optimize_sensing_from`].
pub fn optimize_sensing(
    problem: &SensingProblem,
    telet_config: &SolverConfig,
    n_alternations: usize,
    seed: u64,
) -> Result<SensingOutcome> {
    let mut rng = stream_rng(seed, Stream::CsSensing);
    let theta0 = gaussian_sensing(problem.d, problem.n(), &mut rng);
    optimize_sensing_from(problem, theta0, telet_config, n_alternations)
}

/// Each alternation (a) designs a low-coherence target by running the frame
/// solver warm-started from the column-normalized `Theta Psi`, then (b)
/// replaces `Theta` by [`sre_aware_sensing_matrix`] for that target.
pub fn optimize_sensing_from(
    problem: &SensingProblem,
    theta0: DMatrix<f64>,
    telet_config: &SolverConfig,
    n_alternations: usize,
) -> Result<SensingOutcome> {
    problem.check_theta(&theta0)?;
    if n_alternations == 0 {
        return Err(TeletError::Config("need at least one alternation".into()));
    }
    let mut theta = theta0;
    let initial_mu_ed = matrix_coherence(&(&theta * &problem.psi))?;
    let mut records = Vec::with_capacity(n_alternations);
    let mut target = None;
    for alternation in 1..=n_alternations {
        let start = matrix_to_frame(&(&theta * &problem.psi))?;
        let result = solve(&start, telet_config)?;
        let x = frame_to_matrix(&result.frame)?;
        let objective_before_update = problem.objective(&theta, &x)?;
        let update = sre_aware_sensing_matrix(problem, &x)?;
        theta = update.theta;
        let objective = problem.objective(&theta, &x)?;
        let mu_ed = matrix_coherence(&(&theta * &problem.psi))?;
        log::debug!("alternation {alternation}: objective {objective:.6e}, mu_ed {mu_ed:.6}");
        records.push(AlternationRecord {
            alternation,
            objective_before_update,
            objective,
            mu_ed,
            target_mu: result.trace.best_mu,
            target_status: result.trace.status,
            regularized: update.regularized,
        });
        target = Some(result.frame);
    }
    Ok(SensingOutcome {
        theta,
        target: target.expect("at least one alternation"),
        initial_mu_ed,
        records,
    })
}
