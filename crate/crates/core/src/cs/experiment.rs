//! Synthetic sparse-recovery experiment.
//!
//! For every seed the harness draws one noise set shared by all `(d, K)`
//! cells and one coefficient set per `K`, so every method sees exactly the
//! same signals.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dictionary::DictionaryKind;
use super::metrics::mse;
use super::omp::omp_recover;
use super::sensing::{
    gaussian_sensing, ls_sensing_matrix, optimize_sensing_from, SensingProblem, SreInput,
};
use super::{frame_to_matrix, matrix_coherence, matrix_to_frame};
use crate::error::{Result, TeletError};
use crate::rng::{substream_rng, Stream};
use crate::solver::{solve, Acceleration, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Alternating minimization with the SRE-aware update.
    Telet,
    /// Least-squares fit to a single low-coherence target, no SRE term.
    LsEtfTarget,
    GaussianRandom,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Telet, Method::LsEtfTarget, Method::GaussianRandom];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Telet => "telet",
            Method::LsEtfTarget => "ls_etf_target",
            Method::GaussianRandom => "gaussian_random",
        }
    }
}

fn default_dictionary() -> DictionaryKind {
    DictionaryKind::Haar
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_telet_iters() -> usize {
    200
}

fn default_alternations() -> usize {
    10
}

/// Experiment grid, read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    #[serde(rename = "N")]
    pub n: usize,
    pub d_list: Vec<usize>,
    #[serde(rename = "K_list")]
    pub k_list: Vec<usize>,
    #[serde(rename = "R")]
    pub r: usize,
    pub sigma2: f64,
    pub omega: f64,
    pub seeds: Vec<u64>,
    #[serde(default = "default_dictionary")]
    pub dictionary: DictionaryKind,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    /// Outer solver iterations per alternation.
    #[serde(default = "default_telet_iters")]
    pub telet_iters: usize,
    #[serde(default = "default_alternations")]
    pub alternations: usize,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(TeletError::Config(m));
        if self.n < 2 {
            return bad(format!("N must be at least 2, got {}", self.n));
        }
        if self.d_list.is_empty()
            || self.k_list.is_empty()
            || self.seeds.is_empty()
            || self.methods.is_empty()
        {
            return bad("d_list, K_list, seeds and methods must be non-empty".into());
        }
        for &d in &self.d_list {
            if d == 0 || d > self.n {
                return bad(format!("d = {d} outside 1..=N"));
            }
            for &k in &self.k_list {
                if k == 0 || k > d {
                    return bad(format!("K = {k} outside 1..=d for d = {d}"));
                }
            }
        }
        if self.r == 0 {
            return bad("R must be positive".into());
        }
        if !(self.sigma2 >= 0.0 && self.sigma2.is_finite()) {
            return bad(format!(
                "sigma2 must be finite and nonnegative, got {}",
                self.sigma2
            ));
        }
        if !(0.0..=1.0).contains(&self.omega) {
            return bad(format!("omega must lie in [0, 1], got {}", self.omega));
        }
        if self.telet_iters == 0 || self.alternations == 0 {
            return bad("telet_iters and alternations must be positive".into());
        }
        if self.dictionary == DictionaryKind::Haar && !self.n.is_power_of_two() {
            return bad(format!(
                "Haar dictionary needs a power-of-two N, got {}",
                self.n
            ));
        }
        Ok(())
    }

    /// Number of result rows the grid produces.
    pub fn row_count(&self) -> usize {
        self.d_list.len() * self.k_list.len() * self.seeds.len() * self.methods.len()
    }

    fn telet_config(&self) -> SolverConfig {
        SolverConfig {
            max_outer_iters: self.telet_iters,
            acceleration: Acceleration::Squarem,
            trace_every: self.telet_iters,
            ..SolverConfig::default()
        }
    }
}

/// `R` signals with exactly `K` nonzero coefficients each.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSignalSet {
    /// N x R coefficients.
    pub s: DMatrix<f64>,
    /// `Psi S`.
    pub u_star: DMatrix<f64>,
    /// N x R additive errors.
    pub noise: DMatrix<f64>,
    pub k: usize,
    pub sigma2: f64,
    pub seed: u64,
}

impl SparseSignalSet {
    /// Supports are uniform without replacement and nonzeros standard normal
    /// (drawn from sub-stream `k`); the errors are `N(0, sigma2)` (sub-stream
    /// 0, shared by every `k` under the same seed).
    pub fn generate(
        psi: &DMatrix<f64>,
        k: usize,
        r: usize,
        sigma2: f64,
        seed: u64,
    ) -> Result<Self> {
        let n = psi.nrows();
        if k == 0 || k > n {
            return Err(TeletError::Config(format!("sparsity {k} outside 1..=N")));
        }
        let noise = noise_set(n, r, sigma2, seed)?;
        let mut rng = substream_rng(seed, Stream::CsTrials, k as u64);
        let mut s = DMatrix::zeros(n, r);
        for t in 0..r {
            for j in sample(&mut rng, n, k) {
                s[(j, t)] = rng.sample(StandardNormal);
            }
        }
        let u_star = psi * &s;
        Ok(Self {
            s,
            u_star,
            noise,
            k,
            sigma2,
            seed,
        })
    }

    /// Observed signals `U* + E`.
    pub fn observed(&self) -> DMatrix<f64> {
        &self.u_star + &self.noise
    }

    pub fn len(&self) -> usize {
        self.s.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.s.ncols() == 0
    }
}

fn noise_set(n: usize, r: usize, sigma2: f64, seed: u64) -> Result<DMatrix<f64>> {
    let normal = Normal::new(0.0, sigma2.sqrt()).map_err(|e| TeletError::Config(e.to_string()))?;
    let mut rng = substream_rng(seed, Stream::CsTrials, 0);
    Ok(DMatrix::from_fn(n, r, |_, _| normal.sample(&mut rng)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub method: Method,
    pub d: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub seed: u64,
    #[serde(rename = "MSE")]
    pub mse: f64,
    /// Coherence of the equivalent dictionary `Theta Psi`.
    pub mu_ed: f64,
    /// Sensing design time (shared across K) plus recovery time.
    pub wall_ms: f64,
}

/// Recover every observed signal through `theta` with OMP and return the
/// reconstructions `Psi s_hat` (N x R). Trials run in parallel and are
/// gathered in order.
pub fn recover_all(
    theta: &DMatrix<f64>,
    psi: &DMatrix<f64>,
    signals: &SparseSignalSet,
) -> Result<DMatrix<f64>> {
    let a = theta * psi;
    let y = theta * signals.observed();
    let cols: Vec<DVector<f64>> = (0..signals.len())
        .into_par_iter()
        .map(|t| omp_recover(&y.column(t).clone_owned(), &a, signals.k).map(|s| psi * s))
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_columns(&cols))
}

struct Design {
    theta: DMatrix<f64>,
    mu_ed: f64,
    ms: f64,
}

fn design(
    method: Method,
    spec: &ExperimentSpec,
    psi: &DMatrix<f64>,
    d: usize,
    seed: u64,
    noise: &DMatrix<f64>,
) -> Result<Design> {
    let start = Instant::now();
    let mut rng = substream_rng(seed, Stream::CsSensing, d as u64);
    let theta0 = gaussian_sensing(d, spec.n, &mut rng);
    let config = spec.telet_config();
    let theta = match method {
        Method::GaussianRandom => theta0,
        Method::LsEtfTarget => {
            let start = matrix_to_frame(&(&theta0 * psi))?;
            let target = frame_to_matrix(&solve(&start, &config)?.frame)?;
            ls_sensing_matrix(&target, psi)?.theta
        }
        Method::Telet => {
            let problem =
                SensingProblem::new(psi.clone(), SreInput::Samples(noise.clone()), spec.omega, d)?;
            optimize_sensing_from(&problem, theta0, &config, spec.alternations)?.theta
        }
    };
    let mu_ed = matrix_coherence(&(&theta * psi))?;
    Ok(Design {
        theta,
        mu_ed,
        ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Run the full grid. Rows are ordered by d, then K, then seed, then method
/// in spec order. Everything except `wall_ms` is a function of the spec.
pub fn run_synthetic_experiment(spec: &ExperimentSpec) -> Result<Vec<ExperimentRow>> {
    spec.validate()?;
    let psi = spec.dictionary.build(spec.n)?;
    let mut rows = Vec::with_capacity(spec.row_count());
    for &d in &spec.d_list {
        // sensing matrices depend on (d, seed, method) only
        let mut designs = Vec::with_capacity(spec.seeds.len());
        for &seed in &spec.seeds {
            let noise = noise_set(spec.n, spec.r, spec.sigma2, seed)?;
            let per_method = spec
                .methods
                .iter()
                .map(|&m| design(m, spec, &psi, d, seed, &noise))
                .collect::<Result<Vec<_>>>()?;
            designs.push(per_method);
        }
        for &k in &spec.k_list {
            for (&seed, per_method) in spec.seeds.iter().zip(&designs) {
                let signals = SparseSignalSet::generate(&psi, k, spec.r, spec.sigma2, seed)?;
                for (&method, des) in spec.methods.iter().zip(per_method) {
                    let start = Instant::now();
                    let u_hat = recover_all(&des.theta, &psi, &signals)?;
                    let err = mse(&u_hat, &signals.u_star, d)?;
                    rows.push(ExperimentRow {
                        method,
                        d,
                        k,
                        seed,
                        mse: err,
                        mu_ed: des.mu_ed,
                        wall_ms: des.ms + start.elapsed().as_secs_f64() * 1e3,
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// `method,d,K,seed,MSE,mu_ED,wall_ms` with one line per row.
pub fn rows_to_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from("method,d,K,seed,MSE,mu_ED,wall_ms\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.17e},{:.17e},{:.3}",
            r.method.as_str(),
            r.d,
            r.k,
            r.seed,
            r.mse,
            r.mu_ed,
            r.wall_ms
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> ExperimentSpec {
        ExperimentSpec::from_json(
            r#"{"N": 16, "d_list": [6, 8], "K_list": [1, 2], "R": 10, "sigma2": 0.0,
                "omega": 0.5, "seeds": [3], "telet_iters": 20, "alternations": 2}"#,
        )
        .unwrap()
    }

    #[test]
    fn spec_defaults_and_validation() {
        let spec = small_spec();
        assert_eq!(spec.methods, Method::ALL.to_vec());
        assert_eq!(spec.dictionary, DictionaryKind::Haar);
        assert_eq!(spec.row_count(), 2 * 2 * 3);
        let bad = [
            r#"{"N": 12, "d_list": [4], "K_list": [1], "R": 5, "sigma2": 0, "omega": 0.5, "seeds": [1]}"#,
            r#"{"N": 16, "d_list": [4], "K_list": [5], "R": 5, "sigma2": 0, "omega": 0.5, "seeds": [1]}"#,
            r#"{"N": 16, "d_list": [4], "K_list": [1], "R": 5, "sigma2": -1, "omega": 0.5, "seeds": [1]}"#,
            r#"{"N": 16, "d_list": [4], "K_list": [1], "R": 5, "sigma2": 0, "omega": 2, "seeds": [1]}"#,
            r#"{"N": 16, "d_list": [], "K_list": [1], "R": 5, "sigma2": 0, "omega": 0.5, "seeds": [1]}"#,
            r#"{"N": 16, "d_list": [4], "K_list": [1], "R": 5, "sigma2": 0, "omega": 0.5}"#,
        ];
        for text in bad {
            assert!(ExperimentSpec::from_json(text).is_err(), "{text}");
        }
    }

    #[test]
    fn signals_have_exact_sparsity() {
        let psi = DictionaryKind::Haar.build(32).unwrap();
        let set = SparseSignalSet::generate(&psi, 4, 50, 0.25, 9).unwrap();
        for col in set.s.column_iter() {
            assert_eq!(col.iter().filter(|v| **v != 0.0).count(), 4);
        }
        assert!((&set.u_star - &psi * &set.s).abs().max() < 1e-12);
        // shared errors across sparsity levels
        let other = SparseSignalSet::generate(&psi, 2, 50, 0.25, 9).unwrap();
        assert_eq!(set.noise, other.noise);
        assert_ne!(set.s, other.s);
    }

    #[test]
    fn noiseless_recovery_is_exact() {
        let rows = run_synthetic_experiment(&small_spec()).unwrap();
        assert_eq!(rows.len(), 12);
        for r in &rows {
            if r.method != Method::GaussianRandom && r.k == 1 {
                assert!(r.mse <= 1e-20, "{r:?}");
            }
        }
    }

    #[test]
    fn deterministic_and_csv_shape() {
        let spec = small_spec();
        let a = run_synthetic_experiment(&spec).unwrap();
        let b = run_synthetic_experiment(&spec).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((x.method, x.d, x.k, x.seed), (y.method, y.d, y.k, y.seed));
            assert_eq!(x.mse.to_bits(), y.mse.to_bits());
            assert_eq!(x.mu_ed.to_bits(), y.mu_ed.to_bits());
        }
        let csv = rows_to_csv(&a);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "method,d,K,seed,MSE,mu_ED,wall_ms");
        assert_eq!(lines.len(), 1 + spec.row_count());
        assert!(lines[1].starts_with("telet,6,1,3,"));
    }
}
