//! Gram products, Cholesky factorization and triangular solves.

use super::matrix::{Matrix, Scalar};
use crate::error::{Error, Result};

/// Pivots at or below this fraction of the largest diagonal entry are rejected.
pub const CHOLESKY_PIVOT_TOL: f64 = 1e-12;

const TRIANGULAR_TOL: f64 = 1e-14;

/// `AᴴA`, forced exactly Hermitian.
pub fn gram<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::DimensionMismatch(format!(
            "gram needs at least as many rows as columns, got {m}x{n}"
        )));
    }
    let mut out = Matrix::<T>::zeros(n, n);
    for r in 0..m {
        let row = a.row(r);
        for i in 0..n {
            let x = row[i].conj();
            if x == T::zero() {
                continue;
            }
            let out_row = &mut out.row_mut(i)[i..];
            for (o, &y) in out_row.iter_mut().zip(&row[i..]) {
                *o += x * y;
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            out[(i, j)] = out[(j, i)].conj();
        }
    }
    out.symmetrize();
    Ok(out)
}

/// Upper-triangular `B` with `BᴴB = H` and a real positive diagonal.
pub fn cholesky_upper<T: Scalar>(h: &Matrix<T>) -> Result<Matrix<T>> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "cholesky needs a square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let n = h.rows();
    let max_diag = h.diagonal().iter().map(|d| d.re()).fold(0.0, f64::max);
    let tol = CHOLESKY_PIVOT_TOL * max_diag;

    // Right-looking: the working copy's upper triangle holds the Schur complement.
    let mut work = h.clone();
    let mut b = Matrix::zeros(n, n);
    for k in 0..n {
        let pivot = work[(k, k)].re();
        if !(pivot > tol) || pivot <= 0.0 {
            return Err(Error::NotPositiveDefinite { index: k, pivot });
        }
        let d = pivot.sqrt();
        b[(k, k)] = T::from_real(d);
        let inv = 1.0 / d;
        for j in k + 1..n {
            b[(k, j)] = work[(k, j)].scale(inv);
        }
        let brow: Vec<T> = b.row(k)[k + 1..].to_vec();
        for (off, &bi) in brow.iter().enumerate() {
            let i = k + 1 + off;
            let ci = bi.conj();
            let wrow = &mut work.row_mut(i)[i..];
            for (w, &bj) in wrow.iter_mut().zip(&brow[off..]) {
                *w -= ci * bj;
            }
        }
    }
    Ok(b)
}

fn check_triangular<T: Scalar>(b: &Matrix<T>, len: usize) -> Result<()> {
    if !b.is_square() || b.rows() != len {
        return Err(Error::DimensionMismatch(format!(
            "triangular system {}x{} with right-hand side of length {len}",
            b.rows(),
            b.cols()
        )));
    }
    let scale = b.diagonal().iter().map(|d| d.abs()).fold(0.0, f64::max);
    for (i, d) in b.diagonal().iter().enumerate() {
        if d.abs() <= TRIANGULAR_TOL * scale || d.abs() == 0.0 {
            return Err(Error::SingularTriangular(i));
        }
    }
    Ok(())
}

/// Solve `Bx = y` by back substitution.
pub fn solve_upper<T: Scalar>(b: &Matrix<T>, y: &[T]) -> Result<Vec<T>> {
    check_triangular(b, y.len())?;
    let n = y.len();
    let mut x = y.to_vec();
    for i in (0..n).rev() {
        let row = b.row(i);
        let mut s = x[i];
        for j in i + 1..n {
            s -= row[j] * x[j];
        }
        x[i] = s / row[i];
    }
    Ok(x)
}

/// Solve `Bᴴx = y` by forward substitution.
pub fn solve_upper_adjoint<T: Scalar>(b: &Matrix<T>, y: &[T]) -> Result<Vec<T>> {
    check_triangular(b, y.len())?;
    let n = y.len();
    let mut x = y.to_vec();
    for i in 0..n {
        let row = b.row(i);
        x[i] = x[i] / row[i].conj();
        let xi = x[i];
        for j in i + 1..n {
            x[j] -= row[j].conj() * xi;
        }
    }
    Ok(x)
}

/// Solve `BᴴX = Y` for every column of `Y`.
pub fn solve_upper_adjoint_multi<T: Scalar>(b: &Matrix<T>, y: &Matrix<T>) -> Result<Matrix<T>> {
    check_triangular(b, y.rows())?;
    let n = y.rows();
    let mut x = y.clone();
    let cols = x.cols();
    for i in 0..n {
        let inv = T::one() / b[(i, i)].conj();
        for v in x.row_mut(i) {
            *v = *v * inv;
        }
        let (head, tail) = x.as_mut_slice().split_at_mut((i + 1) * cols);
        let xi = &head[i * cols..];
        let brow = b.row(i);
        for j in i + 1..n {
            let f = brow[j].conj();
            if f == T::zero() {
                continue;
            }
            let xj = &mut tail[(j - i - 1) * cols..(j - i) * cols];
            for (t, &s) in xj.iter_mut().zip(xi) {
                *t -= f * s;
            }
        }
    }
    Ok(x)
}

/// `B⁻ᴴ H B⁻¹` for Hermitian `H`, returned exactly Hermitian.
pub fn congruence_inverse<T: Scalar>(b: &Matrix<T>, h: &Matrix<T>) -> Result<Matrix<T>> {
    let y = solve_upper_adjoint_multi(b, h)?;
    let mut out = solve_upper_adjoint_multi(b, &y.adjoint())?;
    out.symmetrize();
    Ok(out)
}
