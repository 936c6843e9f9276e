//! Closed-form solver for the robust adaptive beamforming problem
//!
//! ```text
//! minimize    wᴴRw
//! subject to  wᴴa ≥ ε‖Aw‖₂ + 1,   Im[wᴴa] = 0
//! ```
//!
//! The solver whitens the constraint with a Cholesky factor of `AᴴA`,
//! diagonalizes the transformed covariance, aligns phases with the
//! transformed steering vector and solves the remaining real KKT system
//! through a monotone scalar equation. Alongside it live an existence and
//! uniqueness classifier, a real-embedding Lagrange-multiplier baseline,
//! optimality certificates, a random instance generator and a benchmark
//! harness.

// Negated float comparisons are used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod certify;
pub mod dtpak;
mod error;
pub mod linalg;
pub mod problem;
pub mod rmvb;
pub mod worked;

pub use error::{Error, Result};
pub use num_complex::Complex64;
