use std::fmt;

use serde::Serialize;

use super::{DiagonalizedProblem, DtpakOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// `ε² ≥ Σcₙ²`: the constraint set is empty.
    Infeasible,
    /// `ε² = Σ_{I₀}cₙ²`: the infimum is not attained by any finite vector.
    NoFiniteSolution,
    /// Exactly one optimum.
    Unique,
    /// `ε² < Σ_{I₀}cₙ²`: a continuum of optima with objective 0.
    NonUnique,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Infeasible => "Infeasible",
            Verdict::NoFiniteSolution => "NoFiniteSolution",
            Verdict::Unique => "Unique",
            Verdict::NonUnique => "NonUnique",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    /// `Σ_{n∈I₀} cₙ²`.
    pub zero_mass: f64,
    /// `Σₙ cₙ²`.
    pub total_mass: f64,
    pub epsilon_sq: f64,
    /// Set when `ε²` fell inside a tolerance band around a threshold rather
    /// than exactly on it.
    pub near_boundary: bool,
}

/// Existence and uniqueness verdict from the two mass thresholds.
pub fn classify(d: &DiagonalizedProblem, opts: &DtpakOptions) -> Classification {
    let (zero_mass, total_mass) = d.masses();
    let e2 = d.epsilon() * d.epsilon();
    let has_zero_set = d.zero_set_len() > 0;
    let band = opts.boundary_tol;

    let (verdict, near_boundary) = if e2 >= total_mass - band * total_mass {
        (Verdict::Infeasible, e2 < total_mass)
    } else if has_zero_set && (e2 - zero_mass).abs() <= band * e2.max(1.0) {
        (Verdict::NoFiniteSolution, e2 != zero_mass)
    } else if e2 < zero_mass {
        (Verdict::NonUnique, false)
    } else {
        (Verdict::Unique, false)
    };

    Classification {
        verdict,
        zero_mass,
        total_mass,
        epsilon_sq: e2,
        near_boundary,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn verdict(lambda: &[f64], c: &[f64], eps: f64) -> Verdict {
        let d = DiagonalizedProblem::from_spectrum(lambda, c, eps).unwrap();
        classify(&d, &DtpakOptions::default()).verdict
    }

    #[test]
    fn worked_cases() {
        assert_eq!(verdict(&[3.0, 1.0], &[2.0, 1.0], 1.0), Verdict::Unique);
        assert_eq!(verdict(&[3.0, 1.0], &[2.0, 1.0], 3.0), Verdict::Infeasible);
        assert_eq!(verdict(&[1.0, 0.0], &[1.0, 2.0], 1.0), Verdict::NonUnique);
        assert_eq!(verdict(&[1.0, 0.0], &[1.0, 2.0], 2.0), Verdict::NoFiniteSolution);
        assert_eq!(
            verdict(&[1.0, 0.0], &[1.0, 2.0], 3.0 / 2f64.sqrt()),
            Verdict::Unique
        );
        assert_eq!(verdict(&[1.0, 0.0], &[1.0, 2.0], 3.0), Verdict::Infeasible);
    }

    #[test]
    fn feasibility_boundary_is_infeasible() {
        let d = DiagonalizedProblem::from_spectrum(&[3.0, 1.0], &[2.0, 1.0], 5f64.sqrt()).unwrap();
        let cl = classify(&d, &DtpakOptions::default());
        assert_eq!(cl.verdict, Verdict::Infeasible);
        assert_eq!(cl.total_mass, 5.0);
    }

    #[test]
    fn tiny_epsilon_full_rank_is_unique() {
        assert_eq!(verdict(&[3.0, 1.0], &[2.0, 1.0], 1e-8), Verdict::Unique);
    }

    #[test]
    fn near_zero_mass_band() {
        let e = (4.0f64 * (1.0 + 1e-12)).sqrt();
        let d = DiagonalizedProblem::from_spectrum(&[1.0, 0.0], &[1.0, 2.0], e).unwrap();
        let cl = classify(&d, &DtpakOptions::default());
        assert_eq!(cl.verdict, Verdict::NoFiniteSolution);
        assert!(cl.near_boundary);
    }

    #[test]
    fn masses() {
        let d = DiagonalizedProblem::from_spectrum(&[2.0, 0.0, 0.0], &[1.0, 2.0, 3.0], 1.0).unwrap();
        let cl = classify(&d, &DtpakOptions::default());
        assert_eq!((cl.zero_mass, cl.total_mass), (13.0, 14.0));
    }
}
