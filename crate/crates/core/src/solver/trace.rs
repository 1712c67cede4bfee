use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Acceleration;
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalStatus {
    BoundReached,
    MaxIters,
    Stalled,
}

impl TerminalStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminalStatus::BoundReached => "bound_reached",
            TerminalStatus::MaxIters => "max_iters",
            TerminalStatus::Stalled => "stalled",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub mu: f64,
    /// `max_p 2 |x_i^H x_j|^2`.
    pub objective: f64,
    /// Inner iterations spent in this outer iteration.
    pub inner_iters: usize,
    /// Milliseconds since the run started.
    pub wall_ms: f64,
    /// Cumulative applications of the plain MM map.
    pub mm_evals: usize,
    pub alpha: Option<f64>,
    pub backtracks: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub acceleration: Acceleration,
    pub records: Vec<TraceRecord>,
    pub status: TerminalStatus,
    /// Bound the stopping rule compares against.
    pub bound: f64,
    pub best_mu: f64,
    pub best_iter: usize,
    pub iterations: usize,
    /// Outer iterations in which at least one block had no usable direction.
    pub degenerate_events: usize,
    /// Extra label column (e.g. the baseline variant); omitted when `None`.
    pub label: Option<String>,
}

impl ConvergenceTrace {
    /// Objective values in record order.
    pub fn objectives(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.objective).collect()
    }

    /// First record whose coherence is within `tol` of the bound, reported as
    /// the cumulative number of MM map applications.
    pub fn mm_evals_to_reach(&self, target: f64) -> Option<usize> {
        self.records
            .iter()
            .find(|r| r.mu <= target)
            .map(|r| r.mm_evals)
    }

    pub fn to_csv(&self) -> String {
        let squarem = self.acceleration == Acceleration::Squarem;
        let mut out = String::from("iter,mu,objective,inner_iters,wall_ms");
        if squarem {
            out.push_str(",alpha,backtracks");
        }
        if self.label.is_some() {
            out.push_str(",variant");
        }
        out.push('\n');
        for r in &self.records {
            let _ = write!(
                out,
                "{},{:.17e},{:.17e},{},{:.3}",
                r.iter, r.mu, r.objective, r.inner_iters, r.wall_ms
            );
            if squarem {
                let alpha = r.alpha.map(|a| format!("{a:.17e}")).unwrap_or_default();
                let bt = r.backtracks.map(|b| b.to_string()).unwrap_or_default();
                let _ = write!(out, ",{alpha},{bt}");
            }
            if let Some(label) = &self.label {
                let _ = write!(out, ",{label}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// JSON sidecar: run configuration, seed, terminal status and best coherence.
    pub fn sidecar<C: Serialize>(&self, config: &C, seed: u64) -> Result<serde_json::Value> {
        Ok(serde_json::json!({
            "config": serde_json::to_value(config)?,
            "seed": seed,
            "status": self.status.as_str(),
            "best_mu": self.best_mu,
            "best_iter": self.best_iter,
            "iterations": self.iterations,
            "bound": self.bound,
            "degenerate_events": self.degenerate_events,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::SolverConfig;

    fn record(iter: usize, mu: f64, mm_evals: usize, alpha: Option<f64>) -> TraceRecord {
        TraceRecord {
            iter,
            mu,
            objective: 2.0 * mu * mu,
            inner_iters: 10,
            wall_ms: 1.5,
            mm_evals,
            alpha,
            backtracks: alpha.map(|_| 0),
        }
    }

    fn trace(acceleration: Acceleration) -> ConvergenceTrace {
        let alpha = (acceleration == Acceleration::Squarem).then_some(-1.5);
        ConvergenceTrace {
            acceleration,
            records: vec![
                record(0, 0.9, 0, None),
                record(1, 0.5, 2, alpha),
                record(2, 0.3, 4, alpha),
            ],
            status: TerminalStatus::Stalled,
            bound: 0.25,
            best_mu: 0.3,
            best_iter: 2,
            iterations: 2,
            degenerate_events: 0,
            label: None,
        }
    }

    #[test]
    fn csv_columns_follow_acceleration() {
        let plain = trace(Acceleration::None).to_csv();
        assert_eq!(
            plain.lines().next().unwrap(),
            "iter,mu,objective,inner_iters,wall_ms"
        );
        assert_eq!(plain.lines().count(), 4);
        let squarem = trace(Acceleration::Squarem).to_csv();
        let lines: Vec<&str> = squarem.lines().collect();
        assert_eq!(
            lines[0],
            "iter,mu,objective,inner_iters,wall_ms,alpha,backtracks"
        );
        assert!(lines[1].ends_with(",,"));
        assert!(lines[2].ends_with(",0"));
        assert_eq!(lines[2].split(',').count(), 7);
    }

    #[test]
    fn evaluations_to_target() {
        let t = trace(Acceleration::Squarem);
        assert_eq!(t.mm_evals_to_reach(0.5), Some(2));
        assert_eq!(t.mm_evals_to_reach(0.31), Some(4));
        assert_eq!(t.mm_evals_to_reach(0.2), None);
        assert_eq!(t.objectives().len(), 3);
    }

    #[test]
    fn sidecar_fields() {
        let json = trace(Acceleration::None)
            .sidecar(&SolverConfig::default(), 42)
            .unwrap();
        assert_eq!(json["seed"], 42);
        assert_eq!(json["status"], "stalled");
        assert_eq!(json["best_mu"], 0.3);
        assert_eq!(json["config"]["inner_iters"], 100);
        assert_eq!(json["config"]["acceleration"], "none");
    }

    #[test]
    fn status_names_match_serde() {
        for status in [
            TerminalStatus::BoundReached,
            TerminalStatus::MaxIters,
            TerminalStatus::Stalled,
        ] {
            assert_eq!(serde_json::to_value(status).unwrap(), status.as_str());
        }
    }
}
