//! KKT solution of the reduced real problem
//!
//! ```text
//! minimize Σ λₙuₙ²  subject to  Σ cₙuₙ ≥ ε‖u‖₂ + 1
//! ```
//!
//! With `k = με/‖u‖₂` stationarity gives `uₙ = μcₙ/(2λₙ + k)`. Substituting
//! back, `k` is the root of the nondecreasing function
//! `f(k) = Σ (cₙk/(2λₙ + k))² = ε²`, and complementary slackness fixes
//! `μ = [Σ 2λₙcₙ²/(2λₙ + k)²]⁻¹`. When the zero-eigenvalue mass exceeds `ε²`
//! the multiplier vanishes instead and any feasible vector supported on the
//! zero set is optimal.

use num_complex::Complex64;

use super::{DiagonalizedProblem, DtpakOptions};
use crate::error::{Error, Result};
use crate::linalg::Scalar;

/// Maximum bracket doublings (and halvings) before giving up.
const MAX_BRACKET_STEPS: usize = 200;

/// Stationary point with positive multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct KktPoint {
    pub u: Vec<f64>,
    pub mu: f64,
    pub k: f64,
}

/// `f(k) = Σ (cₙk/(2λₙ + k))²`; zero-set terms contribute `cₙ²`.
pub fn secular_f(k: f64, d: &DiagonalizedProblem) -> f64 {
    d.lambda()
        .iter()
        .zip(d.c())
        .map(|(&l, &c)| {
            let t = c * (k / (2.0 * l + k));
            t * t
        })
        .sum()
}

/// Root of `f(k) = ε²` by bracketing from `[1, 1]` and bisection.
///
/// Requires `Σ_{I₀}cₙ² < ε² < Σcₙ²`, which is what makes `f` straddle `ε²`.
pub fn solve_k(d: &DiagonalizedProblem, opts: &DtpakOptions) -> Result<f64> {
    let target = d.epsilon() * d.epsilon();
    let f = |k: f64| secular_f(k, d);

    let (mut lo, mut hi) = (1.0f64, 1.0f64);
    let mut steps = 0;
    while f(hi) < target {
        hi *= 2.0;
        steps += 1;
        if steps > MAX_BRACKET_STEPS || !hi.is_finite() {
            return Err(Error::BracketFailure);
        }
    }
    steps = 0;
    while f(lo) > target {
        lo *= 0.5;
        steps += 1;
        if steps > MAX_BRACKET_STEPS || lo == 0.0 {
            return Err(Error::BracketFailure);
        }
    }

    for _ in 0..opts.max_iter {
        if hi - lo <= opts.bisection_tol * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == target {
            return Ok(mid);
        }
        if fm < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `μ = [Σ 2λₙcₙ²/(2λₙ + k)²]⁻¹`.
pub fn solve_mu(d: &DiagonalizedProblem, k: f64) -> Result<f64> {
    let denom: f64 = d
        .lambda()
        .iter()
        .zip(d.c())
        .map(|(&l, &c)| {
            let q = 2.0 * l + k;
            2.0 * l * c * c / (q * q)
        })
        .sum();
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(Error::DegenerateDenominator);
    }
    Ok(1.0 / denom)
}

/// Interior KKT point for a problem classified Unique.
pub fn kkt_interior(d: &DiagonalizedProblem, opts: &DtpakOptions) -> Result<KktPoint> {
    let (zero, total) = d.masses();
    let e2 = d.epsilon() * d.epsilon();
    if !(zero < e2 && e2 < total) {
        return Err(Error::Precondition(format!(
            "interior solution needs {zero} < epsilon^2 = {e2} < {total}"
        )));
    }
    let k = solve_k(d, opts)?;
    let mu = solve_mu(d, k)?;
    let u = d
        .lambda()
        .iter()
        .zip(d.c())
        .map(|(&l, &c)| mu * c / (2.0 * l + k))
        .collect();
    Ok(KktPoint { u, mu, k })
}

/// Canonical optimum when `ε² < Σ_{I₀}cₙ²`: supported on the zero set,
/// `uₙ = cₙ / (S − ε√S)` with `S = Σ_{I₀}cₙ²`, constraint active, `μ = k = 0`.
pub fn kkt_degenerate(d: &DiagonalizedProblem) -> Result<Vec<f64>> {
    let (s, _) = d.masses();
    let eps = d.epsilon();
    if !(eps * eps < s) {
        return Err(Error::Precondition(format!(
            "degenerate solution needs epsilon^2 = {} < {s}",
            eps * eps
        )));
    }
    let denom = s - eps * s.sqrt();
    Ok((0..d.n())
        .map(|n| if d.in_zero_set(n) { d.c()[n] / denom } else { 0.0 })
        .collect())
}

/// Phase-alignment step: given a feasible `v` whose phases differ from
/// those of `b`, returns `α|v| ⊙ exp(j·arg b)` with
/// `α = Re[vᴴb] / (|v|ᵀ|b|)`, together with `α`. The result keeps
/// `vᴴb` unchanged, shrinks `‖v‖₂` by `α`, and so stays feasible while
/// scaling the objective by `α² < 1`.
pub fn phase_align(v: &[Complex64], b: &[Complex64]) -> Result<(Vec<Complex64>, f64)> {
    if v.len() != b.len() {
        return Err(Error::DimensionMismatch("phase_align length".into()));
    }
    let inner: Complex64 = v.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let mag: f64 = v.iter().zip(b).map(|(x, y)| x.norm() * y.norm()).sum();
    if !(mag > 0.0) {
        return Err(Error::ZeroVector);
    }
    let alpha = inner.re / mag;
    let aligned = v
        .iter()
        .zip(b)
        .map(|(x, y)| y.signum().scale(alpha * x.norm()))
        .collect();
    Ok((aligned, alpha))
}
