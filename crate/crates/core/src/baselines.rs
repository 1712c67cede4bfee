//! Alternating-projection frame design on the Gram matrix.
//!
//! Each iteration clips the off-diagonal Gram entries to a threshold
//! ([`shrink`]) and replaces the result by the nearest scaled rank-d
//! projector ([`nearest_alpha_tight`]). The variants differ in the threshold
//! and in how the projector scale is chosen.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coherence::{composite_bound, welch_bound};
use crate::error::{Result, TeletError};
use crate::frame::{check_dims, Field, Frame};
use crate::init::{init_frame, DEFAULT_OVERSAMPLE};
use crate::solver::{Acceleration, ConvergenceTrace, TerminalStatus, TraceRecord};

/// Eigenvalues closer than this (relative to the largest magnitude) are
/// ordered by their eigenvectors instead.
const EIGEN_TIE_TOL: f64 = 1e-12;

/// Iteration stops once the coherence is this close to the composite bound.
pub const AP_STOP_TOL: f64 = 1e-5;

/// Hermitian N x N Gram matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    field: Field,
    g: DMatrix<Complex64>,
    unit_diagonal: bool,
}

impl GramMatrix {
    /// `X^H X` of a frame.
    pub fn from_frame(frame: &Frame) -> Self {
        let n = frame.n();
        let mut g = DMatrix::from_element(n, n, Complex64::new(1.0, 0.0));
        for i in 0..n {
            for j in (i + 1)..n {
                let c = frame.inner(i, j);
                g[(i, j)] = c;
                g[(j, i)] = c.conj();
            }
        }
        Self {
            field: frame.field(),
            g,
            unit_diagonal: true,
        }
    }

    /// Wrap a square matrix, checking that it is Hermitian within `1e-12`.
    pub fn new(field: Field, g: DMatrix<Complex64>) -> Result<Self> {
        if !g.is_square() {
            return Err(TeletError::Shape(format!(
                "Gram matrix is {}x{}",
                g.nrows(),
                g.ncols()
            )));
        }
        let n = g.nrows();
        for i in 0..n {
            for j in i..n {
                if (g[(i, j)] - g[(j, i)].conj()).norm() > 1e-12 {
                    return Err(TeletError::Domain(format!(
                        "entry ({i},{j}) breaks Hermitian symmetry"
                    )));
                }
                if field == Field::Real && g[(i, j)].im != 0.0 {
                    return Err(TeletError::ImaginaryInReal(j));
                }
            }
        }
        let unit_diagonal = (0..n).all(|i| (g[(i, i)].re - 1.0).abs() <= 1e-12);
        Ok(Self {
            field,
            g,
            unit_diagonal,
        })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn n(&self) -> usize {
        self.g.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.g
    }

    pub fn unit_diagonal(&self) -> bool {
        self.unit_diagonal
    }

    /// Largest `|G_ij| / sqrt(G_ii G_jj)` over `i != j`.
    pub fn normalized_coherence(&self) -> f64 {
        let n = self.n();
        let mut mu: f64 = 0.0;
        for i in 0..n {
            let gii = self.g[(i, i)].re;
            for j in (i + 1)..n {
                let denom = (gii * self.g[(j, j)].re).sqrt();
                if denom > 0.0 {
                    mu = mu.max(self.g[(i, j)].norm() / denom);
                }
            }
        }
        mu
    }
}

/// Clip every off-diagonal entry to magnitude `eta`, keeping its phase, and
/// set the diagonal to one. Entries with magnitude exactly `eta` are kept.
pub fn shrink(g: &GramMatrix, eta: f64) -> GramMatrix {
    let n = g.n();
    let mut out = g.g.clone();
    for i in 0..n {
        out[(i, i)] = Complex64::new(1.0, 0.0);
        for j in 0..n {
            if i == j {
                continue;
            }
            let z = out[(i, j)];
            let mag = z.norm();
            if mag > eta {
                out[(i, j)] = z * (eta / mag);
            }
        }
    }
    GramMatrix {
        field: g.field,
        g: out,
        unit_diagonal: true,
    }
}

/// Eigenpairs of a Hermitian matrix, eigenvalues descending.
///
/// Each eigenvector is scaled so its largest-magnitude entry (first one on
/// ties) is real and positive. Eigenvalues within a relative `1e-12` of each
/// other are ordered by the real parts of their eigenvectors,
/// lexicographically descending.
pub fn sorted_eigen(g: &GramMatrix) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let n = g.n();
    let (values, vectors): (DVector<f64>, DMatrix<Complex64>) = match g.field {
        Field::Real => {
            let re = g.g.map(|z| z.re);
            let eig = re.symmetric_eigen();
            (
                eig.eigenvalues,
                eig.eigenvectors.map(|v| Complex64::new(v, 0.0)),
            )
        }
        Field::Complex => {
            let eig = g.g.clone().symmetric_eigen();
            (eig.eigenvalues, eig.eigenvectors)
        }
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(TeletError::Numerical(
            "eigendecomposition produced non-finite values".into(),
        ));
    }
    let mut pairs: Vec<(f64, Vec<Complex64>)> = (0..n)
        .map(|k| {
            let mut v: Vec<Complex64> = vectors.column(k).iter().copied().collect();
            let mut lead = 0;
            for (idx, z) in v.iter().enumerate() {
                if z.norm() > v[lead].norm() + 1e-12 {
                    lead = idx;
                }
            }
            let m = v[lead].norm();
            if m > 0.0 {
                let phase = v[lead].conj() / m;
                v.iter_mut().for_each(|z| *z *= phase);
                v[lead] = Complex64::new(v[lead].re, 0.0);
            }
            (values[k], v)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let scale = pairs.iter().fold(1.0f64, |m, p| m.max(p.0.abs()));
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (pairs[end - 1].0 - pairs[end].0).abs() <= EIGEN_TIE_TOL * scale {
            end += 1;
        }
        pairs[start..end].sort_by(|a, b| {
            for (x, y) in a.1.iter().zip(&b.1) {
                let ord = y.re.total_cmp(&x.re);
                if ord != std::cmp::Ordering::Equal {
                    return ord;
                }
            }
            std::cmp::Ordering::Equal
        });
        start = end;
    }
    let values = pairs.iter().map(|p| p.0).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| pairs[c].1[r]);
    Ok((values, vectors))
}

/// `alpha U U^H` with `U` the top-`d` eigenvectors of `g`.
pub fn nearest_alpha_tight(g: &GramMatrix, d: usize, alpha: f64) -> Result<GramMatrix> {
    let n = g.n();
    if d == 0 || d > n {
        return Err(TeletError::InvalidDimensions {
            d,
            n,
            reason: "rank must be between 1 and N".into(),
        });
    }
    let (_, vectors) = sorted_eigen(g)?;
    let u = vectors.columns(0, d);
    let mut out = u * u.adjoint() * Complex64::new(alpha, 0.0);
    if g.field == Field::Real {
        out.iter_mut().for_each(|z| z.im = 0.0);
    }
    // Exact Hermitian symmetry.
    for i in 0..n {
        out[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            out[(j, i)] = out[(i, j)].conj();
        }
    }
    Ok(GramMatrix {
        field: g.field,
        g: out,
        unit_diagonal: false,
    })
}

/// Synthesis frame from the top-`d` eigenpairs, `X = Lambda^{1/2} U^H`, with
/// columns renormalized. Negative eigenvalues are clamped to zero.
pub fn frame_from_gram(g: &GramMatrix, d: usize) -> Result<Frame> {
    let n = g.n();
    check_dims(d, n)?;
    let (values, vectors) = sorted_eigen(g)?;
    let mut data = Vec::with_capacity(d * n);
    for col in 0..n {
        for k in 0..d {
            let s = values[k].max(0.0).sqrt();
            let z = vectors[(col, k)].conj() * s;
            data.push(match g.field {
                Field::Real => Complex64::new(z.re, 0.0),
                Field::Complex => z,
            });
        }
    }
    Frame::normalized(g.field, d, n, data)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantName {
    Tropp,
    Xiong,
    Katsaggelos,
}

impl std::str::FromStr for VariantName {
    type Err = TeletError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tropp" => Ok(VariantName::Tropp),
            "xiong" => Ok(VariantName::Xiong),
            "katsaggelos" => Ok(VariantName::Katsaggelos),
            other => Err(TeletError::Config(format!("unknown variant `{other}`"))),
        }
    }
}

impl std::fmt::Display for VariantName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VariantName::Tropp => "tropp",
            VariantName::Xiong => "xiong",
            VariantName::Katsaggelos => "katsaggelos",
        })
    }
}

/// Scale of the rank-d projector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaRule {
    SqrtNOverD,
    /// The scale that makes a unit-diagonal rank-d projector consistent.
    NOverD,
    /// Mean of the top-d eigenvalues of the shrunk matrix, per iteration.
    MeanTopDEigs,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct APVariant {
    pub name: VariantName,
    pub eta: f64,
    pub alpha_rule: AlphaRule,
}

impl APVariant {
    /// Default threshold and scale rule of a named variant.
    ///
    /// | variant     | threshold       | scale              |
    /// |-------------|-----------------|--------------------|
    /// | tropp       | Welch bound     | `N / d`            |
    /// | xiong       | `sqrt(1 / d)`   | mean top-d eigvals |
    /// | katsaggelos | Welch bound     | `sqrt(N / d)`      |
    pub fn named(name: VariantName, d: usize, n: usize) -> Result<Self> {
        check_dims(d, n)?;
        let (eta, alpha_rule) = match name {
            VariantName::Tropp => (welch_bound(d, n)?, AlphaRule::NOverD),
            VariantName::Xiong => ((1.0 / d as f64).sqrt(), AlphaRule::MeanTopDEigs),
            VariantName::Katsaggelos => (welch_bound(d, n)?, AlphaRule::SqrtNOverD),
        };
        Self::new(name, eta, alpha_rule)
    }

    pub fn new(name: VariantName, eta: f64, alpha_rule: AlphaRule) -> Result<Self> {
        // zero is allowed: it is the Welch threshold of a square frame
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(TeletError::Config(format!(
                "shrinkage threshold must be nonnegative, got {eta}"
            )));
        }
        Ok(Self {
            name,
            eta,
            alpha_rule,
        })
    }

    pub fn with_alpha_rule(self, alpha_rule: AlphaRule) -> Self {
        Self { alpha_rule, ..self }
    }

    fn alpha(&self, shrunk: &GramMatrix, d: usize) -> Result<f64> {
        let n = shrunk.n() as f64;
        Ok(match self.alpha_rule {
            AlphaRule::SqrtNOverD => (n / d as f64).sqrt(),
            AlphaRule::NOverD => n / d as f64,
            AlphaRule::MeanTopDEigs => {
                let (values, _) = sorted_eigen(shrunk)?;
                values[..d].iter().sum::<f64>() / d as f64
            }
        })
    }
}

#[derive(Clone, Debug)]
pub struct APResult {
    /// Frame extracted from the final Gram matrix.
    pub frame: Frame,
    pub trace: ConvergenceTrace,
}

/// Run `max_iters` rounds of shrink and rank-d projection, starting from the
/// Gram matrix of `init_frame(d, n, field, DEFAULT_OVERSAMPLE, seed)`, and
/// extract a frame from the final Gram matrix. Stops early when the
/// coherence of the projected Gram matrix comes within [`AP_STOP_TOL`] of the
/// composite bound.
pub fn alternating_projection(
    d: usize,
    n: usize,
    field: Field,
    variant: &APVariant,
    max_iters: usize,
    seed: u64,
) -> Result<APResult> {
    check_dims(d, n)?;
    if max_iters == 0 {
        return Err(TeletError::Config("max_iters must be positive".into()));
    }
    let start = Instant::now();
    let bound = if n < 2 {
        0.0
    } else {
        composite_bound(d, n, field).or_else(|_| welch_bound(d, n))?
    };
    let frame0 = init_frame(d, n, field, DEFAULT_OVERSAMPLE, seed)?;
    let mut g = GramMatrix::from_frame(&frame0);
    let mu0 = g.normalized_coherence();
    let record = |iter: usize, mu: f64| TraceRecord {
        iter,
        mu,
        objective: 2.0 * mu * mu,
        inner_iters: 0,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        mm_evals: iter,
        alpha: None,
        backtracks: None,
    };
    let mut records = vec![record(0, mu0)];
    let mut best = (mu0, 0);
    let mut status = TerminalStatus::MaxIters;
    let mut iterations = 0;
    if (mu0 - bound).abs() < AP_STOP_TOL {
        status = TerminalStatus::BoundReached;
    } else {
        for t in 1..=max_iters {
            iterations = t;
            let h = shrink(&g, variant.eta);
            let alpha = variant.alpha(&h, d)?;
            g = nearest_alpha_tight(&h, d, alpha)?;
            let mu = g.normalized_coherence();
            if mu < best.0 {
                best = (mu, t);
            }
            records.push(record(t, mu));
            if (mu - bound).abs() < AP_STOP_TOL {
                status = TerminalStatus::BoundReached;
                break;
            }
        }
    }
    let frame = frame_from_gram(&g, d)?;
    let trace = ConvergenceTrace {
        acceleration: Acceleration::None,
        records,
        status,
        bound,
        best_mu: best.0,
        best_iter: best.1,
        iterations,
        degenerate_events: 0,
        label: Some(variant.name.to_string()),
    };
    Ok(APResult { frame, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_frame, rng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fro(m: &DMatrix<Complex64>) -> f64 {
        m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn diag_gram(values: &[f64]) -> GramMatrix {
        let n = values.len();
        let g = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                c(values[i], 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        GramMatrix::new(Field::Real, g).unwrap()
    }

    #[test]
    fn shrink_examples() {
        let id = GramMatrix::new(Field::Complex, DMatrix::identity(3, 3)).unwrap();
        assert_eq!(shrink(&id, 0.5), id);

        let theta: f64 = 0.7;
        let z = Complex64::from_polar(0.9, theta);
        let g = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), z, z.conj(), c(1.0, 0.0)]);
        let out = shrink(&GramMatrix::new(Field::Complex, g).unwrap(), 0.5);
        let clipped = out.matrix()[(0, 1)];
        assert!((clipped - Complex64::from_polar(0.5, theta)).norm() < 1e-15);
        assert_eq!(out.matrix()[(1, 0)], clipped.conj());

        let g =
            DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(1.0, 0.0)]);
        let out = shrink(&GramMatrix::new(Field::Real, g).unwrap(), 0.5);
        assert_eq!(out.matrix()[(0, 1)], c(0.5, 0.0));
    }

    #[test]
    fn shrink_is_idempotent() {
        let mut r = rng(1);
        for field in [Field::Real, Field::Complex] {
            let g = GramMatrix::from_frame(&random_frame(&mut r, field, 3, 8));
            let once = shrink(&g, 0.3);
            let twice = shrink(&once, 0.3);
            assert!(fro(&(once.matrix() - twice.matrix())) < 1e-14);
            assert!(once.unit_diagonal());
        }
    }

    #[test]
    fn hermitian_check() {
        let g =
            DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.3, 0.1), c(0.3, 0.1), c(1.0, 0.0)]);
        assert!(GramMatrix::new(Field::Complex, g).is_err());
        let g =
            DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.3, 0.1), c(0.3, -0.1), c(1.0, 0.0)]);
        assert!(GramMatrix::new(Field::Complex, g.clone()).is_ok());
        assert!(GramMatrix::new(Field::Real, g).is_err());
    }

    #[test]
    fn projection_properties() {
        let mut r = rng(2);
        for field in [Field::Real, Field::Complex] {
            let g = shrink(
                &GramMatrix::from_frame(&random_frame(&mut r, field, 3, 7)),
                0.4,
            );
            let alpha = 7.0 / 3.0;
            let p = nearest_alpha_tight(&g, 3, alpha).unwrap();
            let m = p.matrix();
            assert!(fro(&(m * m - m * c(alpha, 0.0))) <= 1e-8 * alpha * alpha);
            let trace: f64 = (0..7).map(|i| m[(i, i)].re).sum();
            assert!((trace - 3.0 * alpha).abs() < 1e-10);
            let (values, _) = sorted_eigen(&p).unwrap();
            assert!(values[..3].iter().all(|v| (v - alpha).abs() < 1e-10));
            assert!(values[3..].iter().all(|v| v.abs() < 1e-10));
            let again = nearest_alpha_tight(&p, 3, alpha).unwrap();
            assert!(fro(&(again.matrix() - m)) < 1e-10);
        }
    }

    #[test]
    fn eigen_ties_follow_vector_order() {
        let first = nearest_alpha_tight(&diag_gram(&[2.0, 2.0, 1.0]), 1, 1.0).unwrap();
        assert_eq!(first.matrix()[(0, 0)], c(1.0, 0.0));
        assert_eq!(first.matrix()[(1, 1)], c(0.0, 0.0));
        let second = nearest_alpha_tight(&diag_gram(&[1.0, 2.0, 2.0]), 1, 1.0).unwrap();
        assert_eq!(second.matrix()[(1, 1)], c(1.0, 0.0));
        let g = GramMatrix::from_frame(&random_frame(&mut rng(3), Field::Complex, 2, 5));
        assert_eq!(sorted_eigen(&g).unwrap(), sorted_eigen(&g).unwrap());
        let (values, _) = sorted_eigen(&g).unwrap();
        assert!(values.windows(2).all(|w| w[0] >= w[1] - 1e-12 * values[0]));
    }

    #[test]
    fn extraction_recovers_the_gram_matrix() {
        let mut r = rng(4);
        for field in [Field::Real, Field::Complex] {
            let frame = random_frame(&mut r, field, 3, 6);
            let g = GramMatrix::from_frame(&frame);
            let back = frame_from_gram(&g, 3).unwrap();
            assert!(fro(&(GramMatrix::from_frame(&back).matrix() - g.matrix())) < 1e-10);
            assert_eq!(back.field(), field);
        }
    }

    #[test]
    fn square_frames_become_orthonormal() {
        for name in [
            VariantName::Tropp,
            VariantName::Xiong,
            VariantName::Katsaggelos,
        ] {
            for field in [Field::Real, Field::Complex] {
                let variant = APVariant::named(name, 4, 4).unwrap();
                let result = alternating_projection(4, 4, field, &variant, 1000, 5).unwrap();
                assert!(
                    crate::coherence::coherence(&result.frame) <= 1e-6,
                    "{name} {field:?}"
                );
            }
        }
    }

    #[test]
    fn variant_table() {
        let tropp = APVariant::named(VariantName::Tropp, 4, 7).unwrap();
        assert_eq!(tropp.eta, welch_bound(4, 7).unwrap());
        assert_eq!(tropp.alpha_rule, AlphaRule::NOverD);
        let xiong = APVariant::named(VariantName::Xiong, 4, 7).unwrap();
        assert_eq!(xiong.eta, 0.5);
        assert_eq!(xiong.alpha_rule, AlphaRule::MeanTopDEigs);
        let kats = APVariant::named(VariantName::Katsaggelos, 4, 7).unwrap();
        assert_eq!(kats.alpha_rule, AlphaRule::SqrtNOverD);
        assert!(APVariant::new(VariantName::Tropp, -0.1, AlphaRule::NOverD).is_err());
        assert!(APVariant::new(VariantName::Tropp, f64::NAN, AlphaRule::NOverD).is_err());
        for name in ["tropp", "xiong", "katsaggelos"] {
            assert_eq!(name.parse::<VariantName>().unwrap().to_string(), name);
        }
        assert!("welch".parse::<VariantName>().is_err());
    }

    #[test]
    fn trace_carries_variant_label() {
        let variant = APVariant::named(VariantName::Xiong, 3, 5).unwrap();
        let result = alternating_projection(3, 5, Field::Real, &variant, 20, 1).unwrap();
        let csv = result.trace.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "iter,mu,objective,inner_iters,wall_ms,variant"
        );
        assert!(lines.all(|l| l.ends_with(",xiong")));
        assert!(result.trace.records.len() <= 21);
    }
}
