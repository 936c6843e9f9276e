//! Seeded random instances.
//!
//! Every draw comes from a ChaCha8 stream seeded with `seed` via
//! `SeedableRng::seed_from_u64`, consumed in a fixed order: the covariance
//! factor, its scale, the arrival angle, then the transform. Identical
//! configurations therefore yield bit-identical problems.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{steering_vector, RabProblem};
use crate::dtpak::{diagonalize, DtpakOptions};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Matrix};

/// Diagonal loading used for covariance-like transforms.
pub const TRANSFORM_LOADING: f64 = 0.1;

/// Degrees of freedom of the chi-square scale factor.
const SCALE_DOF: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SteeringKind {
    Steering,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransformKind {
    /// `5n × n`, i.i.d. complex Gaussian.
    Tall5N,
    /// `n × n`, i.i.d. complex Gaussian.
    SquareN,
    Identity,
    /// `τ'F'F'ᵀ + 0.1 I` with a fresh real Gaussian factor.
    CovarianceLike,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EpsilonRule {
    /// `ε² = Σcₙ² / 3`.
    FullRankThird,
    /// `ε²` halfway between the zero-eigenvalue mass and the total mass.
    RankDefLarge,
    /// `ε² = ⅔` of the zero-eigenvalue mass.
    RankDefSmall,
    /// Use this `ε²` directly.
    Explicit(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n: usize,
    pub covariance_rank: usize,
    pub sigma: f64,
    pub steering_kind: SteeringKind,
    /// Arrival angle in radians; drawn uniformly on `[-π, π]` when absent.
    pub theta: Option<f64>,
    pub transform_kind: TransformKind,
    pub epsilon_rule: EpsilonRule,
    pub seed: u64,
}

impl GeneratorConfig {
    /// Full-rank covariance with loading 0.1, square Gaussian transform and
    /// `ε² = Σcₙ²/3`.
    pub fn full_rank(n: usize, seed: u64) -> Self {
        GeneratorConfig {
            n,
            covariance_rank: n,
            sigma: 0.1,
            steering_kind: SteeringKind::Steering,
            theta: None,
            transform_kind: TransformKind::SquareN,
            epsilon_rule: EpsilonRule::FullRankThird,
            seed,
        }
    }

    /// Rank `3n/5` covariance without loading and a positive definite
    /// covariance-like transform.
    pub fn rank_deficient(n: usize, rule: EpsilonRule, seed: u64) -> Self {
        GeneratorConfig {
            n,
            covariance_rank: (3 * n / 5).max(1),
            sigma: 0.0,
            steering_kind: SteeringKind::Steering,
            theta: None,
            transform_kind: TransformKind::CovarianceLike,
            epsilon_rule: rule,
            seed,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if self.covariance_rank == 0 || self.covariance_rank > self.n {
            return Err(Error::InvalidConfig(format!(
                "covariance rank must lie in 1..={}, got {}",
                self.n, self.covariance_rank
            )));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "sigma must be a nonnegative number, got {}",
                self.sigma
            )));
        }
        if self.covariance_rank < self.n && self.sigma != 0.0 {
            return Err(Error::InvalidConfig(
                "a rank-deficient covariance requires sigma = 0".into(),
            ));
        }
        if let EpsilonRule::Explicit(e2) = self.epsilon_rule {
            if !(e2 > 0.0) || !e2.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "explicit epsilon^2 must be positive, got {e2}"
                )));
            }
        }
        Ok(())
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// `τFFᵀ + σI` with `F` real `n × r` standard normal and `τ ~ χ²(1)`.
fn loaded_gram(rng: &mut ChaCha8Rng, n: usize, r: usize, sigma: f64) -> ComplexMatrix {
    let f: Vec<f64> = (0..n * r).map(|_| normal(rng)).collect();
    let tau: f64 = ChiSquared::new(SCALE_DOF)
        .expect("valid degrees of freedom")
        .sample(rng);
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let s: f64 = (0..r).map(|k| f[i * r + k] * f[j * r + k]).sum();
            let mut v = tau * s;
            if i == j {
                v += sigma;
            }
            out[(i, j)] = Complex64::new(v, 0.0);
            out[(j, i)] = Complex64::new(v, 0.0);
        }
    }
    out.symmetrize();
    out
}

fn complex_gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    Matrix::from_fn(rows, cols, |_, _| {
        let re = normal(rng);
        let im = normal(rng);
        Complex64::new(re, im)
    })
}

/// Draw a problem instance from `cfg`.
pub fn generate(cfg: &GeneratorConfig) -> Result<RabProblem> {
    cfg.check()?;
    let n = cfg.n;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let covariance = loaded_gram(&mut rng, n, cfg.covariance_rank, cfg.sigma);
    let theta = match cfg.theta {
        Some(t) => t,
        None => rng.random_range(-PI..=PI),
    };
    let steering = match cfg.steering_kind {
        SteeringKind::Steering => steering_vector(theta, n),
    };
    let transform = match cfg.transform_kind {
        TransformKind::Tall5N => complex_gaussian(&mut rng, 5 * n, n),
        TransformKind::SquareN => complex_gaussian(&mut rng, n, n),
        TransformKind::Identity => ComplexMatrix::identity(n),
        TransformKind::CovarianceLike => loaded_gram(&mut rng, n, n, TRANSFORM_LOADING),
    };

    let mut problem = RabProblem::new(covariance, steering, transform, 1.0)?;
    let eps_sq = match cfg.epsilon_rule {
        EpsilonRule::Explicit(e2) => e2,
        rule => {
            let d = diagonalize(&problem, &DtpakOptions::default())?;
            let (zero, total) = d.masses();
            match rule {
                EpsilonRule::FullRankThird => total / 3.0,
                EpsilonRule::RankDefLarge => (zero + total) / 2.0,
                EpsilonRule::RankDefSmall => 2.0 * zero / 3.0,
                EpsilonRule::Explicit(_) => unreachable!(),
            }
        }
    };
    if !(eps_sq > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "epsilon rule {:?} produced epsilon^2 = {eps_sq}; the covariance has no zero eigenvalues",
            cfg.epsilon_rule
        )));
    }
    problem.epsilon = eps_sq.sqrt();
    Ok(problem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtpak::{classify, Verdict};
    use crate::linalg::{gram, hermitian_evd};

    #[test]
    fn deterministic_given_seed() {
        let mut cfg = GeneratorConfig::full_rank(2, 7);
        cfg.covariance_rank = 2;
        let p1 = generate(&cfg).unwrap();
        let p2 = generate(&cfg).unwrap();
        assert_eq!(p1, p2);
        cfg.seed = 8;
        assert_ne!(generate(&cfg).unwrap(), p1);
    }

    #[test]
    fn rank_deficient_covariance_has_null_space() {
        let mut cfg = GeneratorConfig::full_rank(10, 3);
        cfg.covariance_rank = 6;
        cfg.sigma = 0.0;
        let p = generate(&cfg).unwrap();
        let eig = hermitian_evd(&p.covariance).unwrap();
        let tol = 1e-12 * eig.values[0];
        let small = eig.values.iter().filter(|&&l| l.abs() <= tol).count();
        assert_eq!(small, 4);
    }

    #[test]
    fn full_rank_third_is_unique() {
        for seed in 0..5 {
            let p = generate(&GeneratorConfig::full_rank(12, seed)).unwrap();
            let d = diagonalize(&p, &DtpakOptions::default()).unwrap();
            assert_eq!(classify(&d, &DtpakOptions::default()).verdict, Verdict::Unique);
        }
    }

    #[test]
    fn transform_kinds() {
        let mut cfg = GeneratorConfig::full_rank(4, 1);
        cfg.transform_kind = TransformKind::Tall5N;
        assert_eq!(generate(&cfg).unwrap().transform.rows(), 20);
        cfg.transform_kind = TransformKind::Identity;
        let p = generate(&cfg).unwrap();
        assert_eq!(gram(&p.transform).unwrap(), ComplexMatrix::identity(4));
        cfg.transform_kind = TransformKind::CovarianceLike;
        let p = generate(&cfg).unwrap();
        assert_eq!(p.transform.hermitian_defect(), 0.0);
    }

    #[test]
    fn covariance_exactly_hermitian() {
        let p = generate(&GeneratorConfig::full_rank(9, 4)).unwrap();
        assert_eq!(p.covariance.hermitian_defect(), 0.0);
    }

    #[test]
    fn config_errors() {
        let mut cfg = GeneratorConfig::full_rank(0, 1);
        assert!(generate(&cfg).is_err());
        cfg.n = 5;
        cfg.covariance_rank = 3;
        assert!(matches!(generate(&cfg), Err(Error::InvalidConfig(_))));
        cfg.covariance_rank = 6;
        cfg.sigma = 0.0;
        assert!(generate(&cfg).is_err());
        cfg.covariance_rank = 5;
        cfg.sigma = -1.0;
        assert!(generate(&cfg).is_err());
    }

    #[test]
    fn explicit_epsilon() {
        let mut cfg = GeneratorConfig::full_rank(3, 2);
        cfg.epsilon_rule = EpsilonRule::Explicit(0.25);
        assert_eq!(generate(&cfg).unwrap().epsilon, 0.5);
    }
}
