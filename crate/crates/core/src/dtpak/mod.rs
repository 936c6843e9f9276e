//! Closed-form solver: diagonalize the problem, align phases with the
//! transformed steering vector, then solve the reduced real KKT system.

mod classify;
mod kkt;
mod transform;

pub use classify::{classify, Classification, Verdict};
pub use kkt::{
    kkt_degenerate, kkt_interior, phase_align, secular_f, solve_k, solve_mu, KktPoint,
};
pub use transform::{
    diagonalize, diagonalize_rotated, recover, DiagonalizedProblem, TransformContext,
};

use crate::error::Result;
use crate::linalg::ComplexVector;
use crate::problem::RabProblem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtpakOptions {
    /// Eigenvalues at or below `rank_tol · λmax` form the zero set.
    pub rank_tol: f64,
    /// Relative band around the classification thresholds.
    pub boundary_tol: f64,
    /// Relative bracket width at which bisection for `k` stops.
    pub bisection_tol: f64,
    /// Bisection iteration cap.
    pub max_iter: usize,
}

impl Default for DtpakOptions {
    fn default() -> Self {
        DtpakOptions {
            rank_tol: 1e-12,
            boundary_tol: 1e-10,
            bisection_tol: 1e-14,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub w: ComplexVector,
    /// Magnitudes in the diagonal frame.
    pub u: Vec<f64>,
    pub mu: f64,
    /// `με/‖u‖₂`; zero for the degenerate solution.
    pub k: f64,
    /// `wᴴRw`.
    pub objective: f64,
    pub classification: Classification,
}

#[derive(Debug, Clone)]
pub enum SolveOutcome {
    Solved(Solution),
    Infeasible(Classification),
    NoFiniteSolution(Classification),
}

impl SolveOutcome {
    pub fn classification(&self) -> &Classification {
        match self {
            SolveOutcome::Solved(s) => &s.classification,
            SolveOutcome::Infeasible(c) | SolveOutcome::NoFiniteSolution(c) => c,
        }
    }

    pub fn verdict(&self) -> Verdict {
        self.classification().verdict
    }

    pub fn solution(&self) -> Option<&Solution> {
        match self {
            SolveOutcome::Solved(s) => Some(s),
            _ => None,
        }
    }

    pub fn into_solution(self) -> Option<Solution> {
        match self {
            SolveOutcome::Solved(s) => Some(s),
            _ => None,
        }
    }
}

pub fn solve(p: &RabProblem, opts: &DtpakOptions) -> Result<SolveOutcome> {
    solve_with_transform(p, opts).map(|(_, out)| out)
}

/// Like [`solve`], also returning the diagonalized problem for certification.
pub fn solve_with_transform(
    p: &RabProblem,
    opts: &DtpakOptions,
) -> Result<(DiagonalizedProblem, SolveOutcome)> {
    let d = diagonalize(p, opts)?;
    let out = solve_diagonalized(p, &d, opts)?;
    Ok((d, out))
}

/// Classify and solve an already diagonalized instance of `p`.
pub fn solve_diagonalized(
    p: &RabProblem,
    d: &DiagonalizedProblem,
    opts: &DtpakOptions,
) -> Result<SolveOutcome> {
    let classification = classify(d, opts);
    let (u, mu, k) = match classification.verdict {
        Verdict::Infeasible => return Ok(SolveOutcome::Infeasible(classification)),
        Verdict::NoFiniteSolution => return Ok(SolveOutcome::NoFiniteSolution(classification)),
        Verdict::Unique => {
            let pt = kkt_interior(d, opts)?;
            (pt.u, pt.mu, pt.k)
        }
        Verdict::NonUnique => (kkt_degenerate(d)?, 0.0, 0.0),
    };
    let w = recover(d, &u)?;
    let objective = p.objective(&w)?.max(0.0);
    Ok(SolveOutcome::Solved(Solution {
        w,
        u,
        mu,
        k,
        objective,
        classification,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, norm2};
    use num_complex::Complex64;

    fn solve_real(r: &[f64], a: &[f64], eps: f64) -> SolveOutcome {
        let p = RabProblem::real_diagonal(r, a, eps).unwrap();
        solve(&p, &DtpakOptions::default()).unwrap()
    }

    #[test]
    fn example_one() {
        let out = solve_real(&[1.0, 3.0], &[1.0, 2.0], 1.0);
        let s = out.solution().unwrap();
        assert_eq!(s.classification.verdict, Verdict::Unique);
        assert!((s.w[0].re - 0.553_678_158_616_811_7).abs() < 1e-10);
        assert!((s.w[1].re - 0.650_138_575_433_694_5).abs() < 1e-10);
        assert!(s.w.iter().all(|z| z.im.abs() < 1e-14));
        assert!((s.objective - 1.574_600_005_130_164).abs() < 1e-10);
        assert!((s.objective - s.mu / 2.0).abs() < 1e-10);
    }

    #[test]
    fn example_one_diagonal_frame() {
        let p = RabProblem::real_diagonal(&[1.0, 3.0], &[1.0, 2.0], 1.0).unwrap();
        let d = diagonalize(&p, &DtpakOptions::default()).unwrap();
        assert!((d.lambda()[0] - 3.0).abs() < 1e-14 && (d.lambda()[1] - 1.0).abs() < 1e-14);
        assert!((d.c()[0] - 2.0).abs() < 1e-14 && (d.c()[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn example_two_infeasible() {
        let out = solve_real(&[1.0, 3.0], &[1.0, 2.0], 3.0);
        assert!(matches!(out, SolveOutcome::Infeasible(_)));
    }

    #[test]
    fn example_three_degenerate() {
        let out = solve_real(&[1.0, 0.0], &[1.0, 2.0], 1.0);
        let s = out.solution().unwrap();
        assert_eq!(s.classification.verdict, Verdict::NonUnique);
        assert_eq!(s.objective, 0.0);
        assert_eq!((s.mu, s.k), (0.0, 0.0));
        assert!(s.w[0].norm() < 1e-14 && (s.w[1].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn example_four() {
        let out = solve_real(&[1.0, 0.0], &[1.0, 2.0], 3.0 / 2f64.sqrt());
        let s = out.solution().unwrap();
        assert_eq!(s.classification.verdict, Verdict::Unique);
        assert!((s.w[0].re - 3.414_213_562_373_095).abs() < 1e-9);
        assert!((s.w[1].re - 9.656_854_249_492_38).abs() < 1e-9);
    }

    #[test]
    fn example_five_no_finite_solution() {
        let out = solve_real(&[1.0, 0.0], &[1.0, 2.0], 2.0);
        assert!(matches!(out, SolveOutcome::NoFiniteSolution(_)));
    }

    #[test]
    fn identity_transform_preserves_norm() {
        let n = 5;
        let a: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let p = RabProblem::new(
            crate::linalg::ComplexMatrix::identity(n),
            a.clone(),
            crate::linalg::ComplexMatrix::identity(n),
            1.0,
        )
        .unwrap();
        let d = diagonalize(&p, &DtpakOptions::default()).unwrap();
        assert!(d.lambda().iter().all(|&l| (l - 1.0).abs() < 1e-12));
        assert!((norm2(d.b()) - norm2(&a)).abs() < 1e-12);
    }

    #[test]
    fn zero_magnitudes_recover_zero() {
        let p = RabProblem::real_diagonal(&[1.0, 3.0], &[1.0, 2.0], 1.0).unwrap();
        let d = diagonalize(&p, &DtpakOptions::default()).unwrap();
        assert!(recover(&d, &[0.0, 0.0]).unwrap().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn random_unique_is_tight_and_consistent() {
        use crate::problem::{generate, GeneratorConfig};
        for seed in 0..10 {
            let p = generate(&GeneratorConfig::full_rank(16, seed)).unwrap();
            let (d, out) = solve_with_transform(&p, &DtpakOptions::default()).unwrap();
            let s = out.solution().unwrap();
            let wa = dot(&s.w, &p.steering);
            assert!(wa.im.abs() < 1e-9);
            let aw = p.transform.matvec(&s.w).unwrap();
            let slack = wa.re - p.epsilon * norm2(&aw) - 1.0;
            assert!(slack.abs() < 1e-8, "seed {seed}: slack {slack}");
            let red = d.reduced_objective(&s.u);
            assert!((s.objective - red).abs() <= 1e-9 * red.max(1.0));
            let norm_u = norm2(&s.u);
            assert!((norm_u * s.k - s.mu * p.epsilon).abs() <= 1e-9 * s.mu * p.epsilon);
        }
    }
}
