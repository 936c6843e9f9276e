use num_complex::Complex64;

use super::DtpakOptions;
use crate::error::{Error, Result};
use crate::linalg::{
    cholesky_upper, congruence_inverse, gram, hermitian_evd, solve_upper, solve_upper_adjoint,
    ComplexMatrix, ComplexVector, Scalar,
};
use crate::problem::{validate_structure, RabProblem};

/// Eigenvalues below this fraction of the largest are a sign of an indefinite covariance.
const NEGATIVE_EIGEN_TOL: f64 = 1e-10;

/// Maps diagonal-frame vectors back to beamformer weights: `w = B⁻¹ · basis · v`.
#[derive(Debug, Clone)]
pub struct TransformContext {
    /// Upper-triangular `B` with `BᴴB = AᴴA`.
    pub factor: ComplexMatrix,
    /// Unitary basis; the eigenvectors `U` of `B⁻ᴴRB⁻¹` unless the factor was rotated.
    pub basis: ComplexMatrix,
}

impl TransformContext {
    pub fn identity(n: usize) -> Self {
        TransformContext {
            factor: ComplexMatrix::identity(n),
            basis: ComplexMatrix::identity(n),
        }
    }
}

/// The problem in the frame where the objective is `Σ λₙ|vₙ|²`.
#[derive(Debug, Clone)]
pub struct DiagonalizedProblem {
    lambda: Vec<f64>,
    b: ComplexVector,
    c: Vec<f64>,
    epsilon: f64,
    zero_set: Vec<bool>,
    context: TransformContext,
}

impl DiagonalizedProblem {
    /// Build from a spectrum and transformed steering vector. `lambda` must be
    /// nonincreasing; entries at or below `rank_tol · max(lambda)` are set to
    /// exactly zero and form the zero set.
    pub fn from_parts(
        lambda: Vec<f64>,
        b: ComplexVector,
        epsilon: f64,
        rank_tol: f64,
        context: TransformContext,
    ) -> Result<Self> {
        let n = lambda.len();
        if b.len() != n || n == 0 {
            return Err(Error::DimensionMismatch(format!(
                "{n} eigenvalues with a vector of length {}",
                b.len()
            )));
        }
        if context.factor.rows() != n || context.basis.rows() != n {
            return Err(Error::DimensionMismatch("transform context size".into()));
        }
        if lambda.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Precondition("eigenvalues must be nonincreasing".into()));
        }
        let max = lambda[0];
        if !(max > 0.0) {
            return Err(Error::InvalidProblem(
                "transformed covariance has no positive eigenvalue".into(),
            ));
        }
        let min = lambda[n - 1];
        if min < -NEGATIVE_EIGEN_TOL * max {
            return Err(Error::InvalidProblem(format!(
                "covariance is not positive semidefinite (eigenvalue {min:.3e} against {max:.3e})"
            )));
        }
        let zero_set: Vec<bool> = lambda.iter().map(|&l| l <= rank_tol * max).collect();
        let lambda = lambda
            .iter()
            .zip(&zero_set)
            .map(|(&l, &z)| if z { 0.0 } else { l })
            .collect();
        let c: Vec<f64> = b.iter().map(|z| z.norm()).collect();
        if c.iter().all(|&x| x == 0.0) {
            return Err(Error::InvalidProblem("transformed steering vector is zero".into()));
        }
        Ok(DiagonalizedProblem {
            lambda,
            b,
            c,
            epsilon,
            zero_set,
            context,
        })
    }

    /// Diagonal instance with `B = U = I`, given `λ` and `c = |b|`.
    pub fn from_spectrum(lambda: &[f64], c: &[f64], epsilon: f64) -> Result<Self> {
        let b = c.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_parts(
            lambda.to_vec(),
            b,
            epsilon,
            DtpakOptions::default().rank_tol,
            TransformContext::identity(lambda.len()),
        )
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    /// Eigenvalues, nonincreasing, with the zero set stored as exact zeros.
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn b(&self) -> &[Complex64] {
        &self.b
    }

    /// `c = |b|`.
    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn in_zero_set(&self, n: usize) -> bool {
        self.zero_set[n]
    }

    pub fn zero_set_len(&self) -> usize {
        self.zero_set.iter().filter(|&&z| z).count()
    }

    pub fn context(&self) -> &TransformContext {
        &self.context
    }

    /// `(Σ_{I₀} cₙ², Σ cₙ²)`.
    pub fn masses(&self) -> (f64, f64) {
        let mut zero = 0.0;
        let mut total = 0.0;
        for (&c, &z) in self.c.iter().zip(&self.zero_set) {
            let c2 = c * c;
            total += c2;
            if z {
                zero += c2;
            }
        }
        (zero, total)
    }

    /// `Σ λₙuₙ²`.
    pub fn reduced_objective(&self, u: &[f64]) -> f64 {
        self.lambda.iter().zip(u).map(|(&l, &x)| l * x * x).sum()
    }
}

/// Whiten the constraint with the Cholesky factor of `AᴴA` and diagonalize
/// the transformed covariance.
pub fn diagonalize(p: &RabProblem, opts: &DtpakOptions) -> Result<DiagonalizedProblem> {
    let (factor, rt, at) = whiten(p)?;
    let eig = hermitian_evd(&rt)?;
    let b = eig.vectors.adjoint_matvec(&at)?;
    DiagonalizedProblem::from_parts(
        eig.values,
        b,
        p.epsilon,
        opts.rank_tol,
        TransformContext {
            factor,
            basis: eig.vectors,
        },
    )
}

/// Diagonalize with the factor `V·B` in place of `B`, for a unitary `V`.
/// Any such factor also satisfies `(VB)ᴴ(VB) = AᴴA`; the recovered weights
/// do not depend on the choice.
pub fn diagonalize_rotated(
    p: &RabProblem,
    rotation: &ComplexMatrix,
    opts: &DtpakOptions,
) -> Result<DiagonalizedProblem> {
    let n = p.n();
    if rotation.rows() != n || rotation.cols() != n {
        return Err(Error::DimensionMismatch("rotation must be n x n".into()));
    }
    let (factor, rt, at) = whiten(p)?;
    let mut rotated = rotation.matmul(&rt)?.matmul(&rotation.adjoint())?;
    rotated.symmetrize();
    let eig = hermitian_evd(&rotated)?;
    let at_rot = rotation.matvec(&at)?;
    let b = eig.vectors.adjoint_matvec(&at_rot)?;
    let basis = rotation.adjoint().matmul(&eig.vectors)?;
    DiagonalizedProblem::from_parts(
        eig.values,
        b,
        p.epsilon,
        opts.rank_tol,
        TransformContext { factor, basis },
    )
}

/// `(B, B⁻ᴴRB⁻¹, B⁻ᴴa)`.
fn whiten(p: &RabProblem) -> Result<(ComplexMatrix, ComplexMatrix, ComplexVector)> {
    validate_structure(p).into_result()?;
    let factor = cholesky_upper(&gram(&p.transform)?)?;
    let mut cov = p.covariance.clone();
    cov.symmetrize();
    let rt = congruence_inverse(&factor, &cov)?;
    let at = solve_upper_adjoint(&factor, &p.steering)?;
    Ok((factor, rt, at))
}

/// `w = B⁻¹ · basis · (u ⊙ exp(j·arg b))`, with the phase of a zero `bₙ` taken as 0.
pub fn recover(d: &DiagonalizedProblem, u: &[f64]) -> Result<ComplexVector> {
    if u.len() != d.n() {
        return Err(Error::DimensionMismatch(format!(
            "magnitude vector has length {}, expected {}",
            u.len(),
            d.n()
        )));
    }
    if u.iter().any(|&x| x < 0.0) {
        return Err(Error::Precondition("magnitudes must be nonnegative".into()));
    }
    let v: ComplexVector = u
        .iter()
        .zip(&d.b)
        .map(|(&m, &bn)| bn.signum().scale(m))
        .collect();
    let y = d.context.basis.matvec(&v)?;
    solve_upper(&d.context.factor, &y)
}
