//! Outer MM loop.

use std::time::Instant;

use super::mda::MdaRun;
use super::surrogate::SurrogateData;
use super::trace::{ConvergenceTrace, TerminalStatus, TraceRecord};
use super::{Acceleration, SolverConfig};
use crate::accel::squarem_step;
use crate::coherence::{composite_bound, welch_bound};
use crate::error::Result;
use crate::frame::Frame;

#[derive(Clone, Debug)]
pub struct StepReport {
    pub frame: Frame,
    /// Objective of `frame`.
    pub objective: f64,
    pub inner_iters: usize,
    /// Blocks that kept their previous column for lack of a direction.
    pub degenerate_blocks: usize,
    /// False when the step returned its input unchanged.
    pub moved: bool,
}

/// One MM iteration: surrogate at `frame`, inner mirror ascent, block-wise
/// normalized descent direction.
///
/// The inner iterate with the lowest surrogate value is the candidate. If its
/// true objective is above that of `frame` the inner solver was stopped too
/// early; it is resumed with a doubled budget and half the step size up to `max_inner_extensions`
/// times, and `frame` is returned unchanged if no candidate qualifies.
pub fn outer_step(frame: &Frame, config: &SolverConfig) -> Result<StepReport> {
    let unchanged = |objective, inner_iters, degenerate_blocks| StepReport {
        frame: frame.clone(),
        objective,
        inner_iters,
        degenerate_blocks,
        moved: false,
    };
    if frame.n() < 2 {
        return Ok(unchanged(0.0, 0, 0));
    }
    let sur = SurrogateData::build(frame);
    let before = sur.anchor_objective();
    let mut run = MdaRun::new(&sur);
    let mut budget = config.inner_iters;
    let mut extensions = 0;
    loop {
        run.run(config, budget);
        let candidate = Frame::from_parts_unchecked(
            frame.field(),
            frame.d(),
            frame.n(),
            run.best_primal().to_vec(),
        );
        let after = candidate.objective();
        if after <= before && candidate != *frame {
            return Ok(StepReport {
                frame: candidate,
                objective: after,
                inner_iters: run.iterations(),
                degenerate_blocks: run.best_primal_degenerate(),
                moved: true,
            });
        }
        if extensions == config.max_inner_extensions {
            return Ok(unchanged(
                before,
                run.iterations(),
                run.best_primal_degenerate(),
            ));
        }
        extensions += 1;
        run.damp();
        budget = run.iterations().max(1);
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    /// Lowest-coherence iterate visited.
    pub frame: Frame,
    /// Last iterate.
    pub last: Frame,
    pub trace: ConvergenceTrace,
}

/// Iterate [`outer_step`] (or [`squarem_step`]) until the coherence is within
/// `stop_tol` of the composite bound, the iteration cap is hit, or the
/// iteration stops moving.
pub fn solve(frame0: &Frame, config: &SolverConfig) -> Result<SolveResult> {
    config.validate()?;
    let (d, n) = (frame0.d(), frame0.n());
    let bound = composite_bound(d, n, frame0.field()).or_else(|_| welch_bound(d, n))?;
    let start = Instant::now();
    let elapsed = || start.elapsed().as_secs_f64() * 1e3;

    let mut current = frame0.clone();
    let mut objective = current.objective();
    let mu_of = |obj: f64| (0.5 * obj).sqrt();
    let mut best = (mu_of(objective), 0usize, current.clone());
    let mut records = vec![TraceRecord {
        iter: 0,
        mu: best.0,
        objective,
        inner_iters: 0,
        wall_ms: elapsed(),
        mm_evals: 0,
        alpha: None,
        backtracks: None,
    }];
    let mut mm_evals = 0;
    let mut degenerate_events = 0;
    let mut iterations = 0;
    let mut status = if (best.0 - bound).abs() < config.stop_tol {
        TerminalStatus::BoundReached
    } else {
        TerminalStatus::MaxIters
    };

    if status != TerminalStatus::BoundReached {
        for t in 1..=config.max_outer_iters {
            iterations = t;
            let (next, inner, alpha, backtracks, degenerate, moved, evals) =
                match config.acceleration {
                    Acceleration::None => {
                        let s = outer_step(&current, config)?;
                        (
                            s.frame,
                            s.inner_iters,
                            None,
                            None,
                            s.degenerate_blocks,
                            s.moved,
                            1,
                        )
                    }
                    Acceleration::Squarem => {
                        let s = squarem_step(&current, config)?;
                        (
                            s.frame,
                            s.inner_iters,
                            Some(s.alpha),
                            Some(s.backtracks),
                            s.degenerate_blocks,
                            s.moved,
                            s.mm_evals,
                        )
                    }
                };
            mm_evals += evals;
            if degenerate > 0 {
                degenerate_events += 1;
            }
            current = next;
            objective = current.objective();
            let mu = mu_of(objective);
            if mu < best.0 {
                best = (mu, t, current.clone());
            }

            let reached = (mu - bound).abs() < config.stop_tol;
            if reached {
                status = TerminalStatus::BoundReached;
            } else if !moved {
                status = TerminalStatus::Stalled;
            }
            let last = reached || !moved || t == config.max_outer_iters;
            if t % config.trace_every == 0 || last {
                records.push(TraceRecord {
                    iter: t,
                    mu,
                    objective,
                    inner_iters: inner,
                    wall_ms: elapsed(),
                    mm_evals,
                    alpha,
                    backtracks,
                });
            }
            if t % 500 == 0 {
                log::debug!("iter {t}: mu = {mu:.6}, bound = {bound:.6}");
            }
            if last {
                break;
            }
        }
    }

    let trace = ConvergenceTrace {
        acceleration: config.acceleration,
        records,
        status,
        bound,
        best_mu: best.0,
        best_iter: best.1,
        iterations,
        degenerate_events,
        label: None,
    };
    Ok(SolveResult {
        frame: best.2,
        last: current,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherence::coherence;
    use crate::frame::Field;
    use crate::init::init_frame;
    use crate::testutil::{perturb, random_frame, rng};
    use num_complex::Complex64;

    /// Four rows of the 5-point DFT: an equiangular frame with coherence 1/4.
    pub(crate) fn harmonic_etf() -> Frame {
        let mut data = Vec::new();
        for k in 0..5 {
            for m in 1..5 {
                let phase = std::f64::consts::TAU * (k * m) as f64 / 5.0;
                data.push(Complex64::from_polar(0.5, phase));
            }
        }
        Frame::new(Field::Complex, 4, 5, data).unwrap()
    }

    #[test]
    fn steps_keep_unit_columns_and_never_increase() {
        let mut r = rng(1);
        let config = SolverConfig::default();
        for field in [Field::Real, Field::Complex] {
            let mut frame = random_frame(&mut r, field, 3, 7);
            for _ in 0..30 {
                let step = outer_step(&frame, &config).unwrap();
                assert!(step.objective <= frame.objective() + 1e-10);
                assert_eq!(step.objective, step.frame.objective());
                let valid = Frame::new(field, 3, 7, step.frame.as_slice().to_vec());
                assert!(valid.is_ok());
                frame = step.frame;
            }
        }
    }

    #[test]
    fn equiangular_frame_is_a_fixed_point() {
        let etf = harmonic_etf();
        assert!((coherence(&etf) - 0.25).abs() < 1e-12);
        let step = outer_step(&etf, &SolverConfig::default()).unwrap();
        assert!((coherence(&step.frame) - 0.25).abs() < 1e-6);
        let solved = solve(&etf, &SolverConfig::default()).unwrap();
        assert_eq!(solved.trace.status, TerminalStatus::BoundReached);
        assert_eq!(solved.trace.iterations, 0);
    }

    #[test]
    fn two_columns_are_trivial() {
        let frame = random_frame(&mut rng(2), Field::Complex, 2, 2);
        let step = outer_step(&frame, &SolverConfig::default()).unwrap();
        assert!(step.moved);
        assert!(step.objective < frame.objective());
        let result = solve(&frame, &SolverConfig::default()).unwrap();
        assert_eq!(result.trace.status, TerminalStatus::BoundReached);
        assert!(result.trace.best_mu < 1e-5);
    }

    #[test]
    fn orthonormal_start_is_done() {
        let frame = Frame::identity(Field::Real, 3);
        let step = outer_step(&frame, &SolverConfig::default()).unwrap();
        assert!(!step.moved);
        assert_eq!(step.frame, frame);
        let result = solve(&frame, &SolverConfig::default()).unwrap();
        assert_eq!(result.trace.status, TerminalStatus::BoundReached);
        assert_eq!(result.trace.records.len(), 1);
    }

    #[test]
    fn solve_reaches_welch_on_small_frame() {
        let frame = init_frame(4, 5, Field::Complex, 4.0, 7).unwrap();
        let config = SolverConfig {
            acceleration: Acceleration::Squarem,
            ..SolverConfig::default()
        };
        let result = solve(&frame, &config).unwrap();
        assert_eq!(result.trace.status, TerminalStatus::BoundReached);
        assert!((result.trace.best_mu - 0.25).abs() < 5e-3);
        assert_eq!(coherence(&result.frame), result.trace.best_mu);
    }

    #[test]
    fn returns_best_iterate_and_traces_on_schedule() {
        let frame = perturb(&mut rng(3), &harmonic_etf(), 0.3);
        let config = SolverConfig {
            max_outer_iters: 25,
            trace_every: 10,
            stop_tol: 1e-12,
            ..SolverConfig::default()
        };
        let result = solve(&frame, &config).unwrap();
        let trace = &result.trace;
        let iters: Vec<usize> = trace.records.iter().map(|r| r.iter).collect();
        let last = trace.iterations;
        let mut expected: Vec<usize> = (0..=last).step_by(10).collect();
        if *expected.last().unwrap() != last {
            expected.push(last);
        }
        assert_eq!(iters, expected);
        let best = trace
            .records
            .iter()
            .map(|r| r.mu)
            .fold(f64::INFINITY, f64::min);
        assert!(trace.best_mu <= best);
        assert!((coherence(&result.frame) - trace.best_mu).abs() < 1e-15);
        assert!(coherence(&result.last) >= trace.best_mu);
    }

    #[test]
    fn rejects_bad_config() {
        let frame = Frame::identity(Field::Real, 2);
        for config in [
            SolverConfig {
                max_outer_iters: 0,
                ..SolverConfig::default()
            },
            SolverConfig {
                stop_tol: 0.0,
                ..SolverConfig::default()
            },
            SolverConfig {
                mda_eta: -1.0,
                ..SolverConfig::default()
            },
            SolverConfig {
                trace_every: 0,
                ..SolverConfig::default()
            },
        ] {
            assert!(solve(&frame, &config).is_err());
        }
    }
}
