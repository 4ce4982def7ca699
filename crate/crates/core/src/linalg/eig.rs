//! Hermitian eigendecomposition via cyclic complex Jacobi rotations.
//!
//! Dimensions here stay small (coin space, at most a few dozen), where Jacobi
//! is simple and accurate to near machine precision. The input is symmetrized
//! as `(m + m†)/2` before iterating, so mildly non-Hermitian rounding noise is
//! tolerated.

use num_complex::Complex64;

use super::{ComplexMatrix, LinalgError};

const MAX_SWEEPS: usize = 64;

/// Off-diagonal Frobenius norm squared.
fn off_diagonal_sqr(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a.get(i, j).norm_sqr();
            }
        }
    }
    sum
}

/// Applies the plane rotation J(p,q) on the right: `m <- m * J`.
///
/// J is the identity except J[p][p] = c, J[p][q] = s, J[q][p] = -s*w,
/// J[q][q] = c*w with real c, s and unimodular w.
fn rotate_right(m: &mut ComplexMatrix, p: usize, q: usize, c: f64, s: f64, w: Complex64) {
    for i in 0..m.rows() {
        let mip = m.get(i, p);
        let miq = m.get(i, q);
        m.set(i, p, mip * c - miq * (w * s));
        m.set(i, q, mip * s + miq * (w * c));
    }
}

/// Applies the adjoint rotation on the left: `m <- J† * m`.
fn rotate_left(m: &mut ComplexMatrix, p: usize, q: usize, c: f64, s: f64, w: Complex64) {
    let wc = w.conj();
    for j in 0..m.cols() {
        let mpj = m.get(p, j);
        let mqj = m.get(q, j);
        m.set(p, j, mpj * c - mqj * (wc * s));
        m.set(q, j, mpj * s + mqj * (wc * c));
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns the real eigenvalues sorted in descending order together with a
/// unitary matrix whose columns are the matching eigenvectors, so that
/// `m = V * diag(eigenvalues) * V†`.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix), LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    if n == 0 {
        return Err(LinalgError::ZeroDimension);
    }

    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let target = (1e-15 * scale).powi(2);

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_sqr(&a) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let g = a.get(p, q);
                let abs_g = g.norm();
                if abs_g <= 1e-300 {
                    continue;
                }
                // Phase-rotate the pivot to a real value, then apply the
                // classical symmetric Jacobi rotation to the 2x2 block.
                let w = (g / abs_g).conj();
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let tau = (aqq - app) / (2.0 * abs_g);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                rotate_right(&mut a, p, q, c, s, w);
                rotate_left(&mut a, p, q, c, s, w);
                rotate_right(&mut v, p, q, c, s, w);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).expect("eigenvalue is NaN"));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v.get(i, order[j]));
    Ok((eigenvalues, vectors))
}
