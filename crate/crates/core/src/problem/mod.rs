//! Problem data, standing-assumption checks, instance generation and file I/O.

mod generate;
mod io;

pub use generate::{generate, EpsilonRule, GeneratorConfig, SteeringKind, TransformKind, TRANSFORM_LOADING};
pub use io::{from_json_str, load, save, to_json_string, SolutionFile};

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{cholesky_upper, gram, hermitian_evd, ComplexMatrix, ComplexVector};

const HERMITIAN_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-10;

/// One robust beamforming instance: minimize `wᴴRw` subject to
/// `wᴴa ≥ ε‖Aw‖₂ + 1` and `Im[wᴴa] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RabProblem {
    /// Sample covariance `R`, `n × n` Hermitian PSD.
    pub covariance: ComplexMatrix,
    /// Steering vector `a`, length `n`.
    pub steering: ComplexVector,
    /// Uncertainty transform `A`, `m × n` with `m ≥ n`.
    pub transform: ComplexMatrix,
    /// Uncertainty level `ε`.
    pub epsilon: f64,
}

impl RabProblem {
    pub fn new(
        covariance: ComplexMatrix,
        steering: ComplexVector,
        transform: ComplexMatrix,
        epsilon: f64,
    ) -> Result<Self> {
        let p = RabProblem {
            covariance,
            steering,
            transform,
            epsilon,
        };
        p.check_dimensions()?;
        Ok(p)
    }

    /// Real-valued instance with `A = I`, as used by small worked examples.
    pub fn real_diagonal(r_diag: &[f64], a: &[f64], epsilon: f64) -> Result<Self> {
        let cov: Vec<Complex64> = r_diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(
            ComplexMatrix::from_diag(&cov),
            a.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            ComplexMatrix::identity(a.len()),
            epsilon,
        )
    }

    pub fn n(&self) -> usize {
        self.steering.len()
    }

    pub fn m(&self) -> usize {
        self.transform.rows()
    }

    pub fn check_dimensions(&self) -> Result<()> {
        let n = self.n();
        if n == 0 {
            return Err(Error::DimensionMismatch("empty steering vector".into()));
        }
        if self.covariance.rows() != n || self.covariance.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "covariance is {}x{}, steering vector has length {n}",
                self.covariance.rows(),
                self.covariance.cols()
            )));
        }
        if self.transform.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "transform has {} columns, expected {n}",
                self.transform.cols()
            )));
        }
        if self.transform.rows() < n {
            return Err(Error::DimensionMismatch(format!(
                "transform has {} rows, needs at least {n}",
                self.transform.rows()
            )));
        }
        Ok(())
    }

    pub fn is_real(&self) -> bool {
        self.covariance.as_slice().iter().all(|z| z.im == 0.0)
            && self.steering.iter().all(|z| z.im == 0.0)
            && self.transform.as_slice().iter().all(|z| z.im == 0.0)
    }

    /// `wᴴRw`.
    pub fn objective(&self, w: &[Complex64]) -> Result<f64> {
        crate::linalg::quadratic_form(&self.covariance, w)
    }
}

/// Outcome of checking the standing assumptions on a problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub dimensions: bool,
    pub finite: bool,
    pub hermitian: bool,
    /// `R ⪰ 0` and `R ≠ 0`.
    pub covariance_psd_nonzero: bool,
    pub epsilon_positive: bool,
    pub steering_nonzero: bool,
    /// `A` has full column rank with `m ≥ n`.
    pub transform_full_rank: bool,
    pub messages: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.dimensions
            && self.finite
            && self.hermitian
            && self.covariance_psd_nonzero
            && self.epsilon_positive
            && self.steering_nonzero
            && self.transform_full_rank
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidProblem(self.messages.join("; ")))
        }
    }
}

/// Check every standing assumption. Never fails; problems are reported.
pub fn validate(p: &RabProblem) -> ValidationReport {
    validate_impl(p, true)
}

/// Same as [`validate`] but skips the eigenvalue-based PSD test; the solver
/// detects indefinite covariances from the spectrum of the transformed matrix.
pub(crate) fn validate_structure(p: &RabProblem) -> ValidationReport {
    validate_impl(p, false)
}

fn validate_impl(p: &RabProblem, check_psd: bool) -> ValidationReport {
    let mut report = ValidationReport {
        dimensions: true,
        finite: true,
        hermitian: true,
        covariance_psd_nonzero: true,
        epsilon_positive: true,
        steering_nonzero: true,
        transform_full_rank: true,
        messages: Vec::new(),
    };

    if let Err(e) = p.check_dimensions() {
        report.dimensions = false;
        report.messages.push(e.to_string());
        return report;
    }

    let finite = p.covariance.is_finite()
        && p.transform.is_finite()
        && p.steering.iter().all(|z| z.re.is_finite() && z.im.is_finite())
        && p.epsilon.is_finite();
    if !finite {
        report.finite = false;
        report.messages.push("non-finite entries".into());
        return report;
    }

    let scale = p.covariance.max_abs().max(1.0);
    let defect = p.covariance.hermitian_defect();
    if defect > HERMITIAN_TOL * scale {
        report.hermitian = false;
        report
            .messages
            .push(format!("covariance is not Hermitian (defect {defect:.3e})"));
    }

    if p.covariance.max_abs() == 0.0 {
        report.covariance_psd_nonzero = false;
        report.messages.push("assumption 1: covariance is zero".into());
    } else if check_psd && report.hermitian {
        let mut h = p.covariance.clone();
        h.symmetrize();
        match hermitian_evd(&h) {
            Ok(eig) => {
                let max = eig.values.first().copied().unwrap_or(0.0);
                let min = eig.values.last().copied().unwrap_or(0.0);
                if max <= 0.0 || min < -PSD_TOL * max {
                    report.covariance_psd_nonzero = false;
                    report.messages.push(format!(
                        "assumption 1: covariance is not positive semidefinite (eigenvalue {min:.3e})"
                    ));
                }
            }
            Err(e) => {
                report.covariance_psd_nonzero = false;
                report.messages.push(format!("assumption 1: {e}"));
            }
        }
    }

    if !(p.epsilon > 0.0) {
        report.epsilon_positive = false;
        report
            .messages
            .push(format!("assumption 2: epsilon must be positive, got {}", p.epsilon));
    }

    if p.steering.iter().all(|z| z.norm_sqr() == 0.0) {
        report.steering_nonzero = false;
        report.messages.push("assumption 3: steering vector is zero".into());
    }

    if let Err(e) = gram(&p.transform).and_then(|g| cholesky_upper(&g)) {
        report.transform_full_rank = false;
        report
            .messages
            .push(format!("assumption 4: transform lacks full column rank ({e})"));
    }

    report
}

/// Half-wavelength uniform linear array response for arrival angle `theta`.
pub fn steering_vector(theta: f64, n: usize) -> ComplexVector {
    let step = -PI * theta.sin();
    (0..n)
        .map(|k| Complex64::from_polar(1.0, step * k as f64))
        .collect()
}
