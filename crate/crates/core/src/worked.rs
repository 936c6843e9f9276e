//! Two-element instances with known answers: `R` diagonal, `A = I`,
//! `a = [1, 2]`.

use serde::Serialize;

use crate::dtpak::{solve, DtpakOptions, SolveOutcome, Verdict};
use crate::error::Result;
use crate::problem::RabProblem;

/// Per-component tolerance on the published weights, which are given to four decimals.
pub const WEIGHT_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expectation {
    Weights([f64; 2]),
    /// Zero objective with `w₁ = 0`.
    ZeroObjective,
    VerdictOnly,
}

#[derive(Debug, Clone)]
pub struct WorkedExample {
    pub name: &'static str,
    pub covariance_diag: [f64; 2],
    pub epsilon: f64,
    pub verdict: Verdict,
    pub expectation: Expectation,
}

impl WorkedExample {
    pub fn problem(&self) -> RabProblem {
        RabProblem::real_diagonal(&self.covariance_diag, &[1.0, 2.0], self.epsilon)
            .expect("worked examples are well formed")
    }
}

pub fn examples() -> Vec<WorkedExample> {
    vec![
        WorkedExample {
            name: "full-rank-feasible",
            covariance_diag: [1.0, 3.0],
            epsilon: 1.0,
            verdict: Verdict::Unique,
            expectation: Expectation::Weights([0.5537, 0.6501]),
        },
        WorkedExample {
            name: "full-rank-infeasible",
            covariance_diag: [1.0, 3.0],
            epsilon: 3.0,
            verdict: Verdict::Infeasible,
            expectation: Expectation::VerdictOnly,
        },
        WorkedExample {
            name: "rank-deficient-nonunique",
            covariance_diag: [1.0, 0.0],
            epsilon: 1.0,
            verdict: Verdict::NonUnique,
            expectation: Expectation::ZeroObjective,
        },
        WorkedExample {
            name: "rank-deficient-unique",
            covariance_diag: [1.0, 0.0],
            epsilon: 3.0 / std::f64::consts::SQRT_2,
            verdict: Verdict::Unique,
            expectation: Expectation::Weights([3.4142, 9.6569]),
        },
        WorkedExample {
            name: "rank-deficient-no-finite-solution",
            covariance_diag: [1.0, 0.0],
            epsilon: 2.0,
            verdict: Verdict::NoFiniteSolution,
            expectation: Expectation::VerdictOnly,
        },
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct ExampleReport {
    pub name: &'static str,
    pub expected: Verdict,
    pub verdict: Verdict,
    /// Real parts of the returned weights, when a solution exists.
    pub w: Option<[f64; 2]>,
    pub objective: Option<f64>,
    pub passed: bool,
}

pub fn run_example(ex: &WorkedExample, opts: &DtpakOptions) -> Result<ExampleReport> {
    let out = solve(&ex.problem(), opts)?;
    let verdict = out.verdict();
    let (w, objective) = match &out {
        SolveOutcome::Solved(s) => (Some([s.w[0].re, s.w[1].re]), Some(s.objective)),
        _ => (None, None),
    };
    let imag_ok = out
        .solution()
        .is_none_or(|s| s.w.iter().all(|z| z.im.abs() <= 1e-12));
    let values_ok = match (ex.expectation, w, objective) {
        (Expectation::Weights(want), Some(got), _) => {
            want.iter().zip(&got).all(|(a, b)| (a - b).abs() <= WEIGHT_TOL)
        }
        (Expectation::ZeroObjective, Some(got), Some(obj)) => obj == 0.0 && got[0] == 0.0,
        (Expectation::VerdictOnly, None, _) => true,
        _ => false,
    };
    Ok(ExampleReport {
        name: ex.name,
        expected: ex.verdict,
        verdict,
        w,
        objective,
        passed: verdict == ex.verdict && values_ok && imag_ok,
    })
}

pub fn run_all(opts: &DtpakOptions) -> Result<Vec<ExampleReport>> {
    examples().iter().map(|ex| run_example(ex, opts)).collect()
}
