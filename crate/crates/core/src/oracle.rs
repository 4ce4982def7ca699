//! Brute-force superoperator reference for the blockwise evolution.
//!
//! Each arc `(u, v)` contributes the transition operator
//! `B_(u,v) = C_(u,v) ⊗ S_(u,v)` with shift `S_(u,v) = |v⟩⟨u|`, an explicit
//! matrix of order `n^2`. Applying the full Kraus sum to the embedded
//! composite state must reproduce the blockwise step exactly, and the
//! operators must satisfy global completeness; both facts are cheap to check
//! at small `n` and back the `--verify` mode of the CLI.
//!
//! Flattening is coin-major: the composite index of coin `i` at position `u`
//! is `i * n + u`, matching the `C ⊗ S` ordering.

use thiserror::Error;

use crate::channels::CoinSet;
use crate::graph::DirectedWalkGraph;
use crate::linalg::ComplexMatrix;
use crate::walk::WalkerState;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not block diagonal: inter-block entry of magnitude {magnitude:.3e}")]
    InterBlockLeakage { magnitude: f64 },
}

/// The full set of transition operators of one step, one per arc.
#[derive(Debug, Clone)]
pub struct SuperOp {
    n: usize,
    kraus: Vec<ComplexMatrix>,
}

impl SuperOp {
    /// Coin-space dimension `n`; the operators act on `n^2` dimensions.
    pub fn coin_dimension(&self) -> usize {
        self.n
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// Largest entry of `sum B†B - I` over the composite space.
    pub fn completeness_residual(&self) -> f64 {
        let dim = self.n * self.n;
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for b in &self.kraus {
            sum.add_assign(&b.adjoint().mul(b));
        }
        sum.sub(&ComplexMatrix::identity(dim)).max_abs()
    }

    /// Full Kraus sum `rho -> sum B rho B†` on the composite state.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix, OracleError> {
        let dim = self.n * self.n;
        if rho.rows() != dim || rho.cols() != dim {
            return Err(OracleError::DimensionMismatch {
                expected: dim,
                got: rho.rows(),
            });
        }
        let mut out = ComplexMatrix::zeros(dim, dim);
        for b in &self.kraus {
            out.add_assign(&b.mul(rho).mul(&b.adjoint()));
        }
        Ok(out)
    }
}

/// Builds every transition operator `B_(u,v) = kron(C_(u,v), |v⟩⟨u|)`.
pub fn build_superop(g: &DirectedWalkGraph, coins: &CoinSet) -> Result<SuperOp, OracleError> {
    let n = g.vertex_count();
    if coins.dimension() != n {
        return Err(OracleError::DimensionMismatch {
            expected: n,
            got: coins.dimension(),
        });
    }
    let kraus = coins
        .arcs()
        .map(|(u, v, coin)| coin.kron(&ComplexMatrix::basis_outer(n, v, u)))
        .collect();
    Ok(SuperOp { n, kraus })
}

/// Embeds a block-diagonal state into the composite space,
/// `rho = sum_u rho_u ⊗ |u⟩⟨u|`.
pub fn embed(state: &WalkerState) -> ComplexMatrix {
    let n = state.dimension();
    let mut full = ComplexMatrix::zeros(n * n, n * n);
    for (u, block) in state.blocks().iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                full.set(i * n + u, j * n + u, block.get(i, j));
            }
        }
    }
    full
}

/// Inverse of [`embed`]; rejects matrices whose inter-block entries are not
/// negligible, since the blockwise recurrence is only defined on block
/// diagonals.
pub fn extract(full: &ComplexMatrix) -> Result<WalkerState, OracleError> {
    let dim = full.rows();
    let n = (dim as f64).sqrt().round() as usize;
    if n * n != dim || full.cols() != dim {
        return Err(OracleError::DimensionMismatch {
            expected: n * n,
            got: dim,
        });
    }
    let mut worst = 0.0f64;
    for row in 0..dim {
        for col in 0..dim {
            if row % n != col % n {
                worst = worst.max(full.get(row, col).norm());
            }
        }
    }
    if worst > 1e-12 {
        return Err(OracleError::InterBlockLeakage { magnitude: worst });
    }
    let blocks = (0..n)
        .map(|u| ComplexMatrix::from_fn(n, n, |i, j| full.get(i * n + u, j * n + u)))
        .collect();
    Ok(WalkerState::from_blocks(blocks))
}
