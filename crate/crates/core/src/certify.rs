//! Optimality checks: the feasibility metric on the original problem, KKT
//! residuals in the reduced real problem, and a grid oracle for two-element
//! real instances.

use num_complex::Complex64;
use serde::Serialize;

use crate::dtpak::{
    classify, diagonalize, recover, DiagonalizedProblem, DtpakOptions, Solution, Verdict,
};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, Scalar};
use crate::problem::RabProblem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    /// `|min(C₁, 0)| + |C₂|` with `C₁ = Re[wᴴa] − ε‖Aw‖₂ − 1`, `C₂ = Im[wᴴa]`.
    pub constraint_satisfaction: f64,
    /// `maxₙ |2λₙuₙ − μ(cₙ − εuₙ/‖u‖₂)|`.
    pub stationarity_residual: f64,
    /// `|μ(cᵀu − ε‖u‖₂ − 1)|`.
    pub comp_slackness_residual: f64,
    pub dual_feasibility: bool,
    pub mu: f64,
    /// `wᴴRw`.
    pub objective: f64,
    /// `|wᴴRw − Σλₙuₙ²|`.
    pub transform_consistency: f64,
}

impl Certificate {
    /// Default acceptance thresholds for a solver-produced point.
    pub fn passes(&self) -> bool {
        self.constraint_satisfaction <= 1e-8
            && self.stationarity_residual <= 1e-6
            && self.comp_slackness_residual <= 1e-8
            && self.dual_feasibility
            && self.transform_consistency <= 1e-9 * self.objective.max(1.0)
    }
}

/// `(C₁, C₂)` of the original constraint.
pub fn constraint_values(p: &RabProblem, w: &[Complex64]) -> Result<(f64, f64)> {
    if w.len() != p.n() {
        return Err(Error::DimensionMismatch(format!(
            "weight vector has length {}, expected {}",
            w.len(),
            p.n()
        )));
    }
    let wa = dot(w, &p.steering);
    let aw = norm2(&p.transform.matvec(w)?);
    Ok((wa.re - p.epsilon * aw - 1.0, wa.im))
}

pub fn constraint_satisfaction(p: &RabProblem, w: &[Complex64]) -> Result<f64> {
    let (c1, c2) = constraint_values(p, w)?;
    Ok(c1.min(0.0).abs() + c2.abs())
}

/// Certificate for magnitudes `u` and multiplier `mu` of the reduced problem.
pub fn kkt_certificate(
    p: &RabProblem,
    d: &DiagonalizedProblem,
    u: &[f64],
    mu: f64,
) -> Result<Certificate> {
    let w = recover(d, u)?;
    certificate_parts(p, d, u, mu, &w)
}

/// Certificate for a solver-produced solution.
pub fn certify_solution(
    p: &RabProblem,
    d: &DiagonalizedProblem,
    s: &Solution,
) -> Result<Certificate> {
    certificate_parts(p, d, &s.u, s.mu, &s.w)
}

fn certificate_parts(
    p: &RabProblem,
    d: &DiagonalizedProblem,
    u: &[f64],
    mu: f64,
    w: &[Complex64],
) -> Result<Certificate> {
    if u.len() != d.n() {
        return Err(Error::DimensionMismatch("magnitude vector length".into()));
    }
    let norm_u = norm2(u);
    if norm_u == 0.0 {
        return Err(Error::ZeroVector);
    }
    let eps = d.epsilon();
    let stationarity_residual = d
        .lambda()
        .iter()
        .zip(d.c())
        .zip(u)
        .map(|((&l, &c), &x)| (2.0 * l * x - mu * (c - eps * x / norm_u)).abs())
        .fold(0.0, f64::max);
    let cu: f64 = d.c().iter().zip(u).map(|(c, x)| c * x).sum();
    let comp_slackness_residual = (mu * (cu - eps * norm_u - 1.0)).abs();
    let objective = p.objective(w)?.max(0.0);
    Ok(Certificate {
        constraint_satisfaction: constraint_satisfaction(p, w)?,
        stationarity_residual,
        comp_slackness_residual,
        dual_feasibility: mu >= 0.0,
        mu,
        objective,
        transform_consistency: (objective - d.reduced_objective(u)).abs(),
    })
}

/// Least-squares multiplier for the stationarity condition at `u`:
/// `μ = gᵀ(2λ⊙u) / gᵀg` with `g = c − εu/‖u‖₂`.
pub fn estimate_multiplier(d: &DiagonalizedProblem, u: &[f64]) -> Result<f64> {
    let norm_u = norm2(u);
    if norm_u == 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&l, &c), &x) in d.lambda().iter().zip(d.c()).zip(u) {
        let g = c - d.epsilon() * x / norm_u;
        num += g * 2.0 * l * x;
        den += g * g;
    }
    Ok(if den > 0.0 { num / den } else { 0.0 })
}

/// Certify an arbitrary weight vector. Magnitudes come from
/// `u = |Uᴴ B w|`; `mu` is estimated when not given.
pub fn certify_weights(
    p: &RabProblem,
    w: &[Complex64],
    mu: Option<f64>,
    opts: &DtpakOptions,
) -> Result<Certificate> {
    let d = diagonalize(p, opts)?;
    if w.len() != d.n() {
        return Err(Error::DimensionMismatch(format!(
            "weight vector has length {}, expected {}",
            w.len(),
            d.n()
        )));
    }
    let ctx = d.context();
    let v = ctx.basis.adjoint_matvec(&ctx.factor.matvec(w)?)?;
    let u: Vec<f64> = v.iter().map(|z| z.abs()).collect();
    let mu = match mu {
        Some(m) => m,
        None => estimate_multiplier(&d, &u)?,
    };
    certificate_parts(p, &d, &u, mu, w)
}

/// `|wᴴRw − reference|`.
pub fn optimality_gap(p: &RabProblem, w: &[Complex64], reference: f64) -> Result<f64> {
    Ok((p.objective(w)? - reference).abs())
}

const GRID_POINTS: usize = 401;
const REFINEMENTS: usize = 8;
/// Search half-width used when the masses give no scale for the feasible set.
const UNBOUNDED_HALF_WIDTH: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleResult {
    Found {
        objective: f64,
        w: [f64; 2],
        /// Larger axis pitch of the final pass.
        pitch: f64,
    },
    /// No feasible grid point and the classifier reports an empty constraint set.
    Infeasible,
    /// No feasible grid point although the classifier does not rule one out.
    Unresolved { pitch: f64 },
}

/// Brute-force minimum over a feasible grid for real two-element instances.
pub fn oracle_2d(p: &RabProblem) -> Result<OracleResult> {
    if p.n() != 2 || !p.is_real() {
        return Err(Error::Precondition(
            "grid oracle needs a real problem with n = 2".into(),
        ));
    }
    let opts = DtpakOptions::default();
    let d = diagonalize(p, &opts)?;
    let cl = classify(&d, &opts);
    let gap = cl.total_mass.sqrt() - p.epsilon;
    let half = if gap > 0.0 { 10.0 * (1.0 + 1.0 / gap) } else { UNBOUNDED_HALF_WIDTH };

    let r = |i, j| p.covariance[(i, j)].re;
    let (r00, r01, r11) = (r(0, 0), r(0, 1), r(1, 1));
    let a = [p.steering[0].re, p.steering[1].re];
    let t: Vec<[f64; 2]> = (0..p.m())
        .map(|i| [p.transform[(i, 0)].re, p.transform[(i, 1)].re])
        .collect();
    let eps = p.epsilon;
    // The lattice lives in whitened coordinates `v = Bw`, where the feasible
    // set is a cone whose apex lies at distance 1/gap from the origin.
    let b = &d.context().factor;
    let (b00, b01, b11) = (b[(0, 0)].re, b[(0, 1)].re, b[(1, 1)].re);
    let to_w = |v: [f64; 2]| {
        let y = v[1] / b11;
        [(v[0] - b01 * y) / b00, y]
    };
    let objective = |[x, y]: [f64; 2]| r00 * x * x + 2.0 * r01 * x * y + r11 * y * y;
    let feasible = |[x, y]: [f64; 2]| {
        let aw: f64 = t
            .iter()
            .map(|row| {
                let s = row[0] * x + row[1] * y;
                s * s
            })
            .sum::<f64>()
            .sqrt();
        a[0] * x + a[1] * y - eps * aw - 1.0 >= 0.0
    };

    // Each pass samples a GRID_POINTS² lattice on the box
    // `center + s·axes[0] + t·axes[1]`, |s| ≤ half[0], |t| ≤ half[1].
    let mut center = [0.0, 0.0];
    let mut axes = [[1.0, 0.0], [0.0, 1.0]];
    let mut half = [half, half];
    let mut best: Option<(f64, [f64; 2])> = None;
    let mut pitch = 0.0;
    for pass in 0..=REFINEMENTS {
        let step = [
            2.0 * half[0] / (GRID_POINTS - 1) as f64,
            2.0 * half[1] / (GRID_POINTS - 1) as f64,
        ];
        pitch = step[0].max(step[1]);
        let point = |s: f64, t: f64| {
            [
                center[0] + s * axes[0][0] + t * axes[1][0],
                center[1] + s * axes[0][1] + t * axes[1][1],
            ]
        };
        let lattice = || {
            (0..GRID_POINTS).flat_map(move |i| {
                (0..GRID_POINTS).map(move |j| {
                    (-half[0] + i as f64 * step[0], -half[1] + j as f64 * step[1])
                })
            })
        };
        let mut pass_best: Option<(f64, [f64; 2], [f64; 2])> = None;
        for (si, ti) in lattice() {
            let w = to_w(point(si, ti));
            if feasible(w) {
                let f = objective(w);
                if pass_best.is_none_or(|(b, _, _)| f < b) {
                    pass_best = Some((f, w, [si, ti]));
                }
            }
        }
        let Some((fb, wb, [sb, tb])) = pass_best else { break };
        if best.is_none_or(|(b, _)| fb < b) {
            best = Some((fb, wb));
        }
        if pass == REFINEMENTS {
            break;
        }
        // Near-optimal set: feasible lattice points within twice the largest
        // objective change to a neighbouring lattice point.
        let mut slack = 0.0f64;
        for di in [-1.0, 0.0, 1.0] {
            for dj in [-1.0, 0.0, 1.0] {
                let w = to_w(point(sb + di * step[0], tb + dj * step[1]));
                slack = slack.max((objective(w) - fb).abs());
            }
        }
        let near: Vec<[f64; 2]> = lattice()
            .map(|(si, ti)| point(si, ti))
            .filter(|&v| feasible(to_w(v)) && objective(to_w(v)) <= fb + 2.0 * slack)
            .collect();
        // Next box: principal axes of the near-optimal points, padded by two
        // old lattice steps.
        let count = near.len() as f64;
        let mean = near
            .iter()
            .fold([0.0, 0.0], |m, p| [m[0] + p[0] / count, m[1] + p[1] / count]);
        let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
        for p in &near {
            let (dx, dy) = (p[0] - mean[0], p[1] - mean[1]);
            sxx += dx * dx;
            sxy += dx * dy;
            syy += dy * dy;
        }
        let angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
        let (sin, cos) = angle.sin_cos();
        axes = [[cos, sin], [-sin, cos]];
        center = mean;
        let mut extent = [0.0f64, 0.0f64];
        for p in &near {
            let (dx, dy) = (p[0] - mean[0], p[1] - mean[1]);
            extent[0] = extent[0].max((dx * axes[0][0] + dy * axes[0][1]).abs());
            extent[1] = extent[1].max((dx * axes[1][0] + dy * axes[1][1]).abs());
        }
        half = [extent[0] + 2.0 * pitch, extent[1] + 2.0 * pitch];
    }
    Ok(match best {
        Some((objective, w)) => OracleResult::Found {
            objective,
            w,
            pitch,
        },
        None if cl.verdict == Verdict::Infeasible => OracleResult::Infeasible,
        None => OracleResult::Unresolved { pitch },
    })
}
