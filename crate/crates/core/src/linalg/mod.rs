//! Dense complex matrix arithmetic for small dimensions.
//!
//! Everything in the walk lives in coin space (order `n`, the number of graph
//! vertices) or in the composite coin-position space (order `n^2` for the
//! superoperator oracle), so a plain row-major dense layout is sufficient.
//! Arithmetic kernels panic on dimension mismatch; fallible numerical
//! operations (eigendecomposition, PSD square root, Weyl construction) return
//! [`LinalgError`].

mod eig;

use std::f64::consts::TAU;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use thiserror::Error;

pub use eig::hermitian_eig;

/// Absolute tolerance used by default wherever a caller does not pass one.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

static TOLERANCE_BITS: AtomicU64 = AtomicU64::new(0);

/// Global numeric tolerance, initially [`DEFAULT_TOLERANCE`].
pub fn numeric_tolerance() -> f64 {
    let bits = TOLERANCE_BITS.load(Ordering::Relaxed);
    if bits == 0 {
        DEFAULT_TOLERANCE
    } else {
        f64::from_bits(bits)
    }
}

/// Overrides the global numeric tolerance (must be positive and finite).
pub fn set_numeric_tolerance(tol: f64) {
    assert!(tol.is_finite() && tol > 0.0, "tolerance must be positive");
    TOLERANCE_BITS.store(tol.to_bits(), Ordering::Relaxed);
}

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("matrix is not positive semidefinite (eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },
}

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::ONE);
        }
        m
    }

    /// Builds a matrix entry by entry from `f(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Real diagonal matrix from the given entries.
    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, Complex64::new(d, 0.0));
        }
        m
    }

    /// Rank-one matrix `|row⟩⟨col|` of order `n`.
    pub fn basis_outer(n: usize, row: usize, col: usize) -> Self {
        assert!(row < n && col < n, "basis index out of range");
        let mut m = Self::zeros(n, n);
        m.set(row, col, Complex64::ONE);
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.entries[row * self.cols + col] = value;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Matrix product; panics unless `self.cols == other.rows`.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matmul dimension mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Complex64::ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    /// Entrywise sum; panics on shape mismatch.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "add dimension mismatch"
        );
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    /// In-place entrywise sum; panics on shape mismatch.
    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "add dimension mismatch"
        );
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += b;
        }
    }

    /// Entrywise difference; panics on shape mismatch.
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "sub dimension mismatch"
        );
        let mut out = self.clone();
        for (a, b) in out.entries.iter_mut().zip(&other.entries) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for e in &mut out.entries {
            *e *= factor;
        }
        out
    }

    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    /// Sum of diagonal entries; panics if not square.
    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace of non-square matrix");
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    /// Kronecker product; the result is `(a.rows*b.rows) x (a.cols*b.cols)`.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == Complex64::ZERO {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.set(i * other.rows + k, j * other.cols + l, a * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    /// Largest entry magnitude (entrywise max-abs norm).
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `(m + m†)/2`; panics if not square.
    pub fn hermitian_part(&self) -> Self {
        assert!(self.is_square(), "hermitian_part of non-square matrix");
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self.get(i, j) + self.get(j, i).conj()) * 0.5
        })
    }

    /// `max_ij |m_ij - conj(m_ji)|`.
    pub fn hermiticity_residual(&self) -> f64 {
        assert!(self.is_square(), "hermiticity of non-square matrix");
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_residual() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let id = Self::identity(self.rows);
        self.adjoint().mul(self).sub(&id).max_abs() <= tol
            && self.mul(&self.adjoint()).sub(&id).max_abs() <= tol
    }

    /// Hermitian within `tol` and smallest eigenvalue at least `-tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol) {
            return false;
        }
        match hermitian_eig(self) {
            Ok((eigenvalues, _)) => eigenvalues.last().is_none_or(|&min| min >= -tol),
            Err(_) => false,
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| {
                    let e = self.get(i, j);
                    format!("{:+.4}{:+.4}i", e.re, e.im)
                })
                .collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// Weyl operator `U_(u,v)` of order `n`: the sum over `k` of
/// `exp(2*pi*i*k*u/n) |k⟩⟨(k+v) mod n|`. Indices are reduced mod `n`, which
/// makes the construction total in `u` and `v`; the result is always unitary.
pub fn weyl(n: usize, u: usize, v: usize) -> Result<ComplexMatrix, LinalgError> {
    if n == 0 {
        return Err(LinalgError::ZeroDimension);
    }
    let u = u % n;
    let v = v % n;
    let mut m = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        // Reducing k*u mod n first keeps the phase of equivalent indices
        // bit-identical and makes U_(0,0) exactly the identity.
        let phase = ((k * u) % n) as f64 / n as f64;
        m.set(k, (k + v) % n, Complex64::from_polar(1.0, TAU * phase));
    }
    Ok(m)
}

/// Hermitian PSD square root: returns `S` with `S*S = m`.
///
/// Eigenvalues in `[-1e-8, 0)` are treated as rounding noise and clamped to
/// zero; anything below `-1e-8` is rejected as genuinely non-PSD. Positive
/// eigenvalues far below the top of the spectrum are zeroed as well: the
/// square root turns eigen-solver noise of order 1e-16 into 1e-8 entries,
/// which would spoil roots of rank-deficient inputs, while zeroing them
/// perturbs `S*S` by under 1e-13 of scale.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    const CLAMP_FLOOR: f64 = -1e-8;
    const RELATIVE_RANK_CUTOFF: f64 = 1e-13;
    let (eigenvalues, vectors) = hermitian_eig(m)?;
    if let Some(&min) = eigenvalues.last() {
        if min < CLAMP_FLOOR {
            return Err(LinalgError::NotPositiveSemidefinite {
                min_eigenvalue: min,
            });
        }
    }
    let top = eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    let floor = top * RELATIVE_RANK_CUTOFF;
    let roots: Vec<f64> = eigenvalues
        .iter()
        .map(|&l| if l > floor { l.sqrt() } else { 0.0 })
        .collect();
    let scaled = vectors.mul(&ComplexMatrix::diagonal(&roots));
    Ok(scaled.mul(&vectors.adjoint()).hermitian_part())
}
