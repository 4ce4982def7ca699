//! Per-snapshot observables: vertex probabilities, l1 coherence, fidelity.
//!
//! All three are defined on the composite coin-position state. Because that
//! state is block diagonal, each reduces to a sum over blocks: probabilities
//! are block traces, coherence is the off-diagonal magnitude summed per block
//! (inter-block entries vanish identically), and fidelity factors through the
//! blocks of the reference state.

use thiserror::Error;

use crate::linalg::{hermitian_eig, psd_sqrt, LinalgError};
use crate::walk::WalkerState;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("states have different dimensions: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("cannot compute metrics for an empty snapshot list")]
    EmptySnapshots,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Eigenvalues this far (relatively) below the top of the spectrum are
/// treated as exact zeros when square roots are taken. Square roots amplify
/// eigen-solver noise of order 1e-16 to 1e-8, which would otherwise dominate
/// the fidelity of low-rank states.
const SPECTRAL_CUTOFF: f64 = 1e-13;

/// Time series of the three observables over a run.
#[derive(Debug, Clone)]
pub struct MetricSeries {
    pub steps: usize,
    /// `steps + 1` rows of `n` per-vertex probabilities.
    pub probabilities: Vec<Vec<f64>>,
    pub coherence: Vec<f64>,
    /// Fidelity of each snapshot against snapshot 0.
    pub fidelity: Vec<f64>,
}

/// Per-vertex occupation probabilities, `p_u = Re tr(rho_u)`.
pub fn probabilities(state: &WalkerState) -> Vec<f64> {
    state
        .blocks()
        .iter()
        .map(|b| {
            let t = b.trace();
            assert!(
                t.im.abs() < 1e-12,
                "block trace has imaginary part {}",
                t.im
            );
            t.re
        })
        .collect()
}

/// l1 coherence of the composite state: the summed magnitude of every
/// off-diagonal entry. Block off-diagonals are the only contributors.
pub fn coherence_l1(state: &WalkerState) -> f64 {
    let mut total = 0.0;
    for block in state.blocks() {
        let n = block.rows();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    total += block.get(i, j).norm();
                }
            }
        }
    }
    total
}

/// Fidelity `(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2` between two
/// block-diagonal states, evaluated block by block through the PSD square
/// root.
pub fn fidelity_via_sqrt(
    reference: &WalkerState,
    state: &WalkerState,
) -> Result<f64, MetricsError> {
    check_dims(reference, state)?;
    let mut root_sum = 0.0;
    for (a, b) in reference.blocks().iter().zip(state.blocks()) {
        if a.max_abs() == 0.0 {
            continue;
        }
        let r = psd_sqrt(a)?;
        let inner = r.mul(b).mul(&r);
        let (eigenvalues, _) = hermitian_eig(&inner)?;
        let top = eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
        let floor = top * SPECTRAL_CUTOFF;
        root_sum += eigenvalues
            .iter()
            .filter(|&&l| l > floor)
            .map(|&l| l.sqrt())
            .sum::<f64>();
    }
    Ok(root_sum * root_sum)
}

/// Rank-one shortcut: when every nonzero block of `reference` is a weighted
/// projector `w |psi><psi|`, the fidelity is `(sum_u sqrt(w <psi|sigma_u|psi>))^2`.
/// Returns `None` when some block has higher rank.
fn fidelity_rank_one(
    reference: &WalkerState,
    state: &WalkerState,
) -> Result<Option<f64>, MetricsError> {
    check_dims(reference, state)?;
    let mut root_sum = 0.0;
    for (a, b) in reference.blocks().iter().zip(state.blocks()) {
        if a.max_abs() == 0.0 {
            continue;
        }
        let (eigenvalues, vectors) = hermitian_eig(a)?;
        let weight = eigenvalues[0].max(0.0);
        if eigenvalues[1..].iter().any(|&l| l.abs() > 1e-10) {
            return Ok(None);
        }
        let n = a.rows();
        // <psi| b |psi> for the top eigenvector.
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += (vectors.get(i, 0).conj() * b.get(i, j) * vectors.get(j, 0)).re;
            }
        }
        root_sum += (weight * quad.max(0.0)).sqrt();
    }
    Ok(Some(root_sum * root_sum))
}

/// Fidelity of `state` against the run's initial state.
///
/// The canonical initial state has a single rank-one block, so the shortcut
/// route applies; the general square-root route is evaluated alongside it and
/// the two must agree to 1e-9, which guards both numerical paths at once.
pub fn fidelity_to_initial(
    reference: &WalkerState,
    state: &WalkerState,
) -> Result<f64, MetricsError> {
    match fidelity_rank_one(reference, state)? {
        Some(fast) => {
            let full = fidelity_via_sqrt(reference, state)?;
            assert!(
                (fast - full).abs() <= 1e-9,
                "fidelity routes disagree: rank-one {fast} vs square-root {full}"
            );
            Ok(fast)
        }
        None => fidelity_via_sqrt(reference, state),
    }
}

/// Applies all three metrics to every snapshot; fidelity is always measured
/// against the first snapshot. Probability entries within rounding of zero
/// are clamped for reporting.
pub fn compute_series(snapshots: &[WalkerState]) -> Result<MetricSeries, MetricsError> {
    let first = snapshots.first().ok_or(MetricsError::EmptySnapshots)?;
    let mut series = MetricSeries {
        steps: snapshots.len() - 1,
        probabilities: Vec::with_capacity(snapshots.len()),
        coherence: Vec::with_capacity(snapshots.len()),
        fidelity: Vec::with_capacity(snapshots.len()),
    };
    for snapshot in snapshots {
        let row = probabilities(snapshot)
            .into_iter()
            .map(|p| if (-1e-10..0.0).contains(&p) { 0.0 } else { p })
            .collect();
        series.probabilities.push(row);
        series.coherence.push(coherence_l1(snapshot));
        series.fidelity.push(fidelity_to_initial(first, snapshot)?);
    }
    Ok(series)
}

fn check_dims(a: &WalkerState, b: &WalkerState) -> Result<(), MetricsError> {
    if a.dimension() != b.dimension() {
        return Err(MetricsError::DimensionMismatch {
            left: a.dimension(),
            right: b.dimension(),
        });
    }
    Ok(())
}
