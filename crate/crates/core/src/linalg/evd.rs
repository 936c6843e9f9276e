//! Hermitian eigendecomposition.
//!
//! Householder reduction to a Hermitian tridiagonal matrix, a diagonal phase
//! change that makes the off-diagonal real and nonnegative, and implicit QL
//! iterations with Wilkinson-style shifts on the resulting real symmetric
//! tridiagonal matrix. Works for both real symmetric and complex Hermitian
//! input through [`Scalar`].

use super::matrix::{Matrix, Scalar};
use crate::error::{Error, Result};

/// QL sweeps allowed per eigenvalue before giving up.
const MAX_QL_SWEEPS: usize = 60;

/// Eigenvalues sorted in decreasing order and the matching unitary `U`,
/// so that `H = U Diag(values) Uᴴ`.
#[derive(Debug, Clone)]
pub struct Eigen<T> {
    pub values: Vec<f64>,
    pub vectors: Matrix<T>,
}

/// Eigendecomposition of a Hermitian (or real symmetric) matrix.
///
/// Eigenvalues come back nonincreasing. Each eigenvector is scaled so its
/// largest-magnitude entry is real and positive.
pub fn hermitian_evd<T: Scalar>(h: &Matrix<T>) -> Result<Eigen<T>> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let n = h.rows();
    if n == 0 {
        return Ok(Eigen {
            values: vec![],
            vectors: Matrix::zeros(0, 0),
        });
    }

    let (mut diag, mut off, q) = tridiagonalize(h);
    let mut zt = Matrix::<f64>::identity(n);
    tridiagonal_ql(&mut diag, &mut off, &mut zt)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));

    // U = Q Z, with the columns of Z stored as rows of `zt`.
    let mut vectors = Matrix::<T>::zeros(n, n);
    for r in 0..n {
        let qrow = q.row(r);
        let urow = vectors.row_mut(r);
        for (slot, &src) in order.iter().enumerate() {
            let z = zt.row(src);
            let mut acc = T::zero();
            for (&qv, &zv) in qrow.iter().zip(z) {
                acc += qv.scale(zv);
            }
            urow[slot] = acc;
        }
    }

    for j in 0..n {
        let mut best = 0usize;
        let mut best_abs = -1.0;
        for i in 0..n {
            let a = vectors[(i, j)].abs();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        let phase = vectors[(best, j)].signum().conj();
        for i in 0..n {
            vectors[(i, j)] = vectors[(i, j)] * phase;
        }
        vectors[(best, j)] = T::from_real(vectors[(best, j)].re());
    }

    let values = order.iter().map(|&i| diag[i]).collect();
    Ok(Eigen { values, vectors })
}

/// Returns the real diagonal, the real nonnegative off-diagonal (`off[i]`
/// couples `i` and `i+1`, `off[n-1] = 0`) and the unitary `Q` with
/// `H = Q T Qᴴ`.
fn tridiagonalize<T: Scalar>(h: &Matrix<T>) -> (Vec<f64>, Vec<f64>, Matrix<T>) {
    let n = h.rows();
    let mut a = h.clone();
    a.symmetrize();
    let mut reflectors: Vec<(usize, Vec<T>, f64)> = Vec::new();

    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let x: Vec<T> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let tail: f64 = x[1..].iter().map(|v| v.norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let xnorm = (x[0].norm_sqr() + tail).sqrt();
        let alpha = -(x[0].signum().scale(xnorm));
        let mut v = x;
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|t| t.norm_sqr()).sum();
        let beta = 2.0 / vnorm2;

        // p = beta S v over the trailing block
        let mut p = vec![T::zero(); m];
        for (i, pi) in p.iter_mut().enumerate() {
            let row = &a.row(k + 1 + i)[k + 1..];
            let mut acc = T::zero();
            for (&s, &vj) in row.iter().zip(&v) {
                acc += s * vj;
            }
            *pi = acc.scale(beta);
        }
        let vp: f64 = v
            .iter()
            .zip(&p)
            .fold(T::zero(), |acc, (&vi, &pi)| acc + vi.conj() * pi)
            .re();
        let kappa = 0.5 * beta * vp;
        let q: Vec<T> = p
            .iter()
            .zip(&v)
            .map(|(&pi, &vi)| pi - vi.scale(kappa))
            .collect();

        for i in 0..m {
            let (vi, qi) = (v[i], q[i]);
            let row = &mut a.row_mut(k + 1 + i)[k + 1..];
            for j in 0..m {
                row[j] -= vi * q[j].conj() + qi * v[j].conj();
            }
        }
        a[(k + 1, k)] = alpha;
        a[(k, k + 1)] = alpha.conj();
        for i in k + 2..n {
            a[(i, k)] = T::zero();
            a[(k, i)] = T::zero();
        }
        reflectors.push((k, v, beta));
    }

    // Q = H_0 H_1 ... accumulated from the right end.
    let mut q = Matrix::<T>::identity(n);
    for (k, v, beta) in reflectors.iter().rev() {
        let start = k + 1;
        let mut w = vec![T::zero(); n - start];
        for (i, &vi) in v.iter().enumerate() {
            let vc = vi.conj();
            for (wj, &qv) in w.iter_mut().zip(&q.row(start + i)[start..]) {
                *wj += vc * qv;
            }
        }
        for (i, &vi) in v.iter().enumerate() {
            let f = vi.scale(*beta);
            for (qv, &wj) in q.row_mut(start + i)[start..].iter_mut().zip(&w) {
                *qv -= f * wj;
            }
        }
    }

    // Rotate each basis vector so the subdiagonal becomes real and nonnegative.
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re()).collect();
    let mut off = vec![0.0; n];
    let mut phase = T::one();
    for i in 0..n {
        if i > 0 {
            let s = a[(i, i - 1)];
            off[i - 1] = s.abs();
            phase = phase * s.signum();
            for r in 0..n {
                q[(r, i)] = q[(r, i)] * phase;
            }
        }
    }
    (diag, off, q)
}

/// Implicit QL on a real symmetric tridiagonal matrix. On return `d` holds
/// the eigenvalues and row `i` of `zt` the eigenvector for `d[i]`.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], zt: &mut Matrix<f64>) -> Result<()> {
    let n = d.len();
    // Off-diagonals below this are already at the backward-error level of
    // the reduction; deflating them keeps clusters of tiny eigenvalues from
    // stalling the iteration.
    let floor = f64::EPSILON
        * (0..n)
            .map(|i| d[i].abs() + e.get(i).map_or(0.0, |x| x.abs()))
            .fold(0.0, f64::max);
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() + dd == dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_QL_SWEEPS {
                return Err(Error::NoConvergence(MAX_QL_SWEEPS));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                rotate_rows(zt, i, s, c);
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[inline]
fn rotate_rows(zt: &mut Matrix<f64>, i: usize, s: f64, c: f64) {
    let cols = zt.cols();
    let (head, tail) = zt.as_mut_slice().split_at_mut((i + 1) * cols);
    let zi = &mut head[i * cols..];
    let zi1 = &mut tail[..cols];
    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
        let f = *b;
        *b = s * *a + c * f;
        *a = c * *a - s * f;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ComplexMatrix, RealMatrix};
    use num_complex::Complex64 as C;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        let mut h = Matrix::from_fn(n, n, |_, _| {
            C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        h.symmetrize();
        h
    }

    fn check_decomposition<T: Scalar>(h: &Matrix<T>, eig: &Eigen<T>) {
        let n = h.rows();
        let u = &eig.vectors;
        let utu = u.adjoint().matmul(u).unwrap();
        let orth = utu.sub(&Matrix::identity(n)).unwrap().norm_inf();
        assert!(orth <= 1e-10, "orthogonality defect {orth}");
        let lam: Vec<T> = eig.values.iter().map(|&l| T::from_real(l)).collect();
        let back = u
            .matmul(&Matrix::from_diag(&lam))
            .unwrap()
            .matmul(&u.adjoint())
            .unwrap();
        let resid = back.sub(h).unwrap().norm_inf();
        assert!(
            resid <= 1e-9 * h.norm_inf().max(1.0),
            "reconstruction residual {resid}"
        );
        for w in eig.values.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn diagonal_input_sorted() {
        let h = ComplexMatrix::from_diag(&[C::new(1.0, 0.0), C::new(3.0, 0.0)]);
        let eig = hermitian_evd(&h).unwrap();
        assert_eq!(eig.values, vec![3.0, 1.0]);
        assert_eq!(eig.vectors[(1, 0)], C::new(1.0, 0.0));
        assert_eq!(eig.vectors[(0, 1)], C::new(1.0, 0.0));
        assert_eq!(eig.vectors[(0, 0)], C::new(0.0, 0.0));
    }

    #[test]
    fn zero_matrix() {
        let eig = hermitian_evd(&ComplexMatrix::zeros(4, 4)).unwrap();
        assert_eq!(eig.values, vec![0.0; 4]);
        assert_eq!(eig.vectors, ComplexMatrix::identity(4));
    }

    #[test]
    fn random_hermitian_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in [1, 2, 3, 8, 31, 64] {
            let h = random_hermitian(&mut rng, n);
            let eig = hermitian_evd(&h).unwrap();
            check_decomposition(&h, &eig);
        }
    }

    #[test]
    fn real_symmetric_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut h: RealMatrix = Matrix::from_fn(20, 20, |_, _| rng.random_range(-1.0..1.0));
        h.symmetrize();
        let eig = hermitian_evd(&h).unwrap();
        check_decomposition(&h, &eig);
    }

    #[test]
    fn repeated_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let g = random_hermitian(&mut rng, 6);
        let basis = hermitian_evd(&g).unwrap().vectors;
        let lam: Vec<C> = [2.0, 2.0, 2.0, -1.0, 0.0, 0.0]
            .iter()
            .map(|&x| C::new(x, 0.0))
            .collect();
        let mut h = basis
            .matmul(&Matrix::from_diag(&lam))
            .unwrap()
            .matmul(&basis.adjoint())
            .unwrap();
        h.symmetrize();
        let eig = hermitian_evd(&h).unwrap();
        check_decomposition(&h, &eig);
        let want = [2.0, 2.0, 2.0, 0.0, 0.0, -1.0];
        for (got, want) in eig.values.iter().zip(want) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn phase_convention() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_hermitian(&mut rng, 5);
        let eig = hermitian_evd(&h).unwrap();
        for j in 0..5 {
            let col = eig.vectors.column(j);
            let big = col
                .iter()
                .copied()
                .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                .unwrap();
            assert!(big.im == 0.0 && big.re > 0.0);
        }
    }
}
