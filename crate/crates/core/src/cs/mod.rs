//! Compressed-sensing tooling: dictionaries, sensing-matrix design,
//! greedy recovery, metrics and the synthetic evaluation harness.
//!
//! All matrices here are real.

pub mod dictionary;
pub mod experiment;
pub mod metrics;
pub mod omp;
pub mod sensing;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, TeletError};
use crate::frame::{Field, Frame};

pub use dictionary::{dct_dictionary, haar_dictionary, DictionaryKind};
pub use experiment::{
    recover_all, rows_to_csv, run_synthetic_experiment, ExperimentRow, ExperimentSpec, Method,
    SparseSignalSet,
};
pub use metrics::{mse, percent_decrease, psnr};
pub use omp::omp_recover;
pub use sensing::{
    gaussian_sensing, ls_sensing_matrix, optimize_sensing, optimize_sensing_from,
    sre_aware_sensing_matrix, AlternationRecord, SensingOutcome, SensingProblem, SensingSolution,
    SreInput,
};

/// Real frame as a d x N matrix.
pub fn frame_to_matrix(frame: &Frame) -> Result<DMatrix<f64>> {
    if frame.field() != Field::Real {
        return Err(TeletError::Config("expected a real frame".into()));
    }
    Ok(DMatrix::from_iterator(
        frame.d(),
        frame.n(),
        frame.as_slice().iter().map(|z| z.re),
    ))
}

/// Real frame from the columns of `m`, each rescaled to unit norm.
pub fn matrix_to_frame(m: &DMatrix<f64>) -> Result<Frame> {
    let data = m.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Frame::normalized(Field::Real, m.nrows(), m.ncols(), data)
}

/// Coherence of `m` after normalizing its columns.
pub fn matrix_coherence(m: &DMatrix<f64>) -> Result<f64> {
    let n = m.ncols();
    let norms: Vec<f64> = m.column_iter().map(|c| c.norm()).collect();
    if let Some(idx) = norms.iter().position(|&v| v == 0.0) {
        return Err(TeletError::Degenerate(format!("column {idx} is zero")));
    }
    let mut mu: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            mu = mu.max(m.column(i).dot(&m.column(j)).abs() / (norms[i] * norms[j]));
        }
    }
    Ok(mu)
}
