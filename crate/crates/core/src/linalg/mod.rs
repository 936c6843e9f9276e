//! Dense linear-algebra kernels.

mod evd;
mod factor;
mod matrix;

pub use evd::{hermitian_evd, Eigen};
pub use factor::{
    cholesky_upper, congruence_inverse, gram, solve_upper, solve_upper_adjoint,
    solve_upper_adjoint_multi, CHOLESKY_PIVOT_TOL,
};
pub use matrix::{dot, norm2, quadratic_form, ComplexMatrix, ComplexVector, Matrix, RealMatrix, Scalar};
