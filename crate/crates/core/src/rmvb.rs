//! Lagrange-multiplier baseline working on the real embedding of the
//! problem. Requires a positive definite covariance.
//!
//! With `Ř = CᵀC` and `C⁻ᵀQ̌C⁻¹ = V̌ Diag(γ) V̌ᵀ`, the stationary point for a
//! multiplier `ζ` is `w̌ = −ζ C⁻¹V̌ [b̌ / (1 + ζγ)]`, `b̌ = V̌ᵀC⁻ᵀǎ`, and the
//! constraint is active where
//!
//! ```text
//! S(ζ) = ζ² Σ b̌ₙ²γₙ/(1 + ζγₙ)² − 2ζ Σ b̌ₙ²/(1 + ζγₙ) − 1 = 0.
//! ```

use num_complex::Complex64;

use crate::certify::constraint_satisfaction;
use crate::error::{Error, Result};
use crate::linalg::{
    cholesky_upper, congruence_inverse, gram, hermitian_evd, solve_upper, solve_upper_adjoint,
    ComplexMatrix, ComplexVector, RealMatrix,
};
use crate::problem::RabProblem;

/// `|1 + ζγ|` at or below this (relative) counts as a pole.
const POLE_TOL: f64 = 1e-14;
/// Initial offset above the pole, relative to `max(1, pole)`.
const SCAN_START: f64 = 1e-12;
const MAX_SCAN_STEPS: usize = 2000;
const MAX_BISECTION: usize = 400;
/// Candidate roots must meet the constraint to this relative accuracy.
const ACCEPT_TOL: f64 = 1e-6;

/// Real-field representation of the problem data.
#[derive(Debug, Clone)]
pub struct RealEmbedding {
    /// `Ř = [[Re R, −Im R], [Im R, Re R]]`.
    pub r_check: RealMatrix,
    /// `Ǎ`, built the same way from `A`.
    pub a_mat_check: RealMatrix,
    /// `ǎ = [Re a; Im a]`.
    pub a_check: Vec<f64>,
    /// `Q̌ = ε²ǍᵀǍ − ǎǎᵀ`.
    pub q_check: RealMatrix,
}

pub fn embed_matrix(x: &ComplexMatrix) -> RealMatrix {
    let (m, n) = (x.rows(), x.cols());
    RealMatrix::from_fn(2 * m, 2 * n, |i, j| {
        let z = x[(i % m, j % n)];
        match (i < m, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

pub fn embed_vector(x: &[Complex64]) -> Vec<f64> {
    x.iter().map(|z| z.re).chain(x.iter().map(|z| z.im)).collect()
}

/// Inverse of [`embed_vector`].
pub fn unembed_vector(x: &[f64]) -> ComplexVector {
    let n = x.len() / 2;
    (0..n).map(|i| Complex64::new(x[i], x[n + i])).collect()
}

pub fn embed(p: &RabProblem) -> Result<RealEmbedding> {
    p.check_dimensions()?;
    let r_check = embed_matrix(&p.covariance);
    cholesky_upper(&r_check)?;
    let a_mat_check = embed_matrix(&p.transform);
    let a_check = embed_vector(&p.steering);
    let q_check = quadratic_constraint(p, &a_check)?;
    Ok(RealEmbedding {
        r_check,
        a_mat_check,
        a_check,
        q_check,
    })
}

/// `ε² ǍᵀǍ − ǎǎᵀ`, using `ǍᵀǍ = (AᴴA)ˇ`.
fn quadratic_constraint(p: &RabProblem, a_check: &[f64]) -> Result<RealMatrix> {
    let e2 = p.epsilon * p.epsilon;
    let g = embed_matrix(&gram(&p.transform)?);
    let n2 = a_check.len();
    let mut q = RealMatrix::from_fn(n2, n2, |i, j| e2 * g[(i, j)] - a_check[i] * a_check[j]);
    q.symmetrize();
    Ok(q)
}

/// `S(ζ)`; fails with [`Error::PoleHit`] when some `1 + ζγₙ` vanishes.
pub fn secular_s(zeta: f64, gamma: &[f64], b_check: &[f64]) -> Result<f64> {
    if gamma.len() != b_check.len() {
        return Err(Error::DimensionMismatch("gamma and b_check lengths".into()));
    }
    let mut quad = 0.0;
    let mut lin = 0.0;
    for (&g, &b) in gamma.iter().zip(b_check) {
        let q = 1.0 + zeta * g;
        if q.abs() <= POLE_TOL * (zeta * g).abs().max(1.0) {
            return Err(Error::PoleHit(zeta));
        }
        let b2 = b * b;
        quad += b2 * g / (q * q);
        lin += b2 / q;
    }
    Ok(zeta * zeta * quad - 2.0 * zeta * lin - 1.0)
}

/// Multiplier of the real formulation corresponding to the closed-form
/// auxiliary variable `k`: `ζ = k / (2ε²)`.
pub fn multiplier_from_k(k: f64, epsilon: f64) -> f64 {
    k / (2.0 * epsilon * epsilon)
}

/// Whitened spectral data shared by every evaluation of `S` and `w̌`.
#[derive(Debug, Clone)]
pub struct SecularSystem {
    /// Upper Cholesky factor of `Ř`.
    pub factor: RealMatrix,
    pub vectors: RealMatrix,
    /// Eigenvalues of `C⁻ᵀQ̌C⁻¹`, nonincreasing.
    pub gamma: Vec<f64>,
    pub b_check: Vec<f64>,
}

impl SecularSystem {
    pub fn new(e: &RealEmbedding) -> Result<Self> {
        let factor = cholesky_upper(&e.r_check)?;
        let m = congruence_inverse(&factor, &e.q_check)?;
        let eig = hermitian_evd(&m)?;
        let b_check = eig.vectors.adjoint_matvec(&solve_upper_adjoint(&factor, &e.a_check)?)?;
        Ok(SecularSystem {
            factor,
            vectors: eig.vectors,
            gamma: eig.values,
            b_check,
        })
    }

    pub fn s(&self, zeta: f64) -> Result<f64> {
        secular_s(zeta, &self.gamma, &self.b_check)
    }

    /// `w̌ = −ζ C⁻¹V̌ [b̌ / (1 + ζγ)]`.
    pub fn weights(&self, zeta: f64) -> Result<Vec<f64>> {
        let z: Vec<f64> = self
            .gamma
            .iter()
            .zip(&self.b_check)
            .map(|(&g, &b)| -zeta * b / (1.0 + zeta * g))
            .collect();
        solve_upper(&self.factor, &self.vectors.matvec(&z)?)
    }

    /// Largest pole `−1/γₙ` over negative `γₙ`, or 0 if there is none.
    pub fn leading_pole(&self) -> f64 {
        self.gamma
            .iter()
            .filter(|&&g| g < 0.0)
            .map(|&g| -1.0 / g)
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct RmvbSolution {
    pub w: ComplexVector,
    pub zeta: f64,
    pub objective: f64,
    /// `S` at the accepted root.
    pub secular_value: f64,
}

/// Bisect a sign change of `S` on `[lo, hi]`, down to adjacent floats.
fn bisect(sys: &SecularSystem, mut lo: f64, mut hi: f64, s_lo: f64) -> Result<f64> {
    let lo_negative = s_lo < 0.0;
    for _ in 0..MAX_BISECTION {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let sm = match sys.s(mid) {
            Ok(v) => v,
            Err(Error::PoleHit(_)) => return Err(Error::RootNotFound),
            Err(e) => return Err(e),
        };
        if sm == 0.0 {
            return Ok(mid);
        }
        if (sm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (s_lo, s_hi) = (sys.s(lo)?, sys.s(hi)?);
    Ok(if s_lo.abs() <= s_hi.abs() { lo } else { hi })
}

/// Scan upward from just above the leading pole, doubling the offset, and
/// accept the first root of `S` whose weight vector satisfies the original
/// constraint.
pub fn rmvb_solve(p: &RabProblem) -> Result<RmvbSolution> {
    let emb = embed(p)?;
    let sys = SecularSystem::new(&emb)?;
    let pole = sys.leading_pole();
    let mut offset = SCAN_START * pole.max(1.0);
    let mut prev: Option<(f64, f64)> = None;

    for _ in 0..MAX_SCAN_STEPS {
        let zeta = pole + offset;
        offset *= 2.0;
        if !zeta.is_finite() {
            break;
        }
        let s = match sys.s(zeta) {
            Ok(v) => v,
            Err(Error::PoleHit(_)) => {
                prev = None;
                continue;
            }
            Err(e) => return Err(e),
        };
        if let Some((z0, s0)) = prev {
            if (s0 < 0.0) != (s < 0.0) {
                let root = bisect(&sys, z0, zeta, s0)?;
                if let Some(sol) = accept(p, &sys, root)? {
                    return Ok(sol);
                }
            }
        }
        prev = Some((zeta, s));
    }
    Err(Error::RootNotFound)
}

fn accept(p: &RabProblem, sys: &SecularSystem, zeta: f64) -> Result<Option<RmvbSolution>> {
    let mut w = unembed_vector(&sys.weights(zeta)?);
    let wa: Complex64 = w.iter().zip(&p.steering).map(|(x, y)| x.conj() * y).sum();
    if wa.norm() == 0.0 {
        return Ok(None);
    }
    // Rotate so that wᴴa is real and positive; objective and ‖Aw‖ are unchanged.
    let phase = wa / wa.norm();
    for x in w.iter_mut() {
        *x *= phase;
    }
    let scale = 1.0 + wa.norm();
    if constraint_satisfaction(p, &w)? > ACCEPT_TOL * scale {
        return Ok(None);
    }
    let objective = p.objective(&w)?.max(0.0);
    Ok(Some(RmvbSolution {
        w,
        zeta,
        objective,
        secular_value: sys.s(zeta)?,
    }))
}
