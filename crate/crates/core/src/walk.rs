//! Block-diagonal walker state and its Kraus-recurrence evolution.
//!
//! The composite state never needs to be materialized: one step sends
//! `C_(u,u) rho_u C_(u,u)†` back to `u` and `C_(u,v) rho_u C_(u,v)†` to each
//! neighbour `v`, which is the blockwise form of the full Kraus sum (the
//! `oracle` module checks that equivalence explicitly).

use num_complex::Complex64;
use thiserror::Error;

use crate::channels::{ChannelError, ChannelSpec, CoinSet};
use crate::graph::{DirectedWalkGraph, Graph};
use crate::linalg::{hermitian_eig, ComplexMatrix};

#[derive(Debug, Error, PartialEq)]
pub enum WalkError {
    #[error("start vertex {start} out of range for {n} vertices")]
    StartOutOfRange { start: usize, n: usize },
    #[error("dimension mismatch: state has {state} blocks, coins/graph have {expected}")]
    DimensionMismatch { state: usize, expected: usize },
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Walker state: one `n x n` Hermitian PSD block per vertex, traces summing
/// to one. The block at vertex `u` is the coin-space density matrix
/// conditioned on the walker sitting at `u`, weighted by the probability of
/// being there.
#[derive(Debug, Clone)]
pub struct WalkerState {
    blocks: Vec<ComplexMatrix>,
}

impl WalkerState {
    /// Wraps raw blocks; callers are responsible for the physical invariants.
    pub fn from_blocks(blocks: Vec<ComplexMatrix>) -> Self {
        let n = blocks.len();
        for b in &blocks {
            assert!(
                b.rows() == n && b.cols() == n,
                "each block must be n x n for n = {n}"
            );
        }
        Self { blocks }
    }

    pub fn dimension(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, u: usize) -> &ComplexMatrix {
        &self.blocks[u]
    }

    pub fn blocks(&self) -> &[ComplexMatrix] {
        &self.blocks
    }

    /// Sum of block traces; 1 for a physical state.
    pub fn total_trace(&self) -> Complex64 {
        self.blocks.iter().map(ComplexMatrix::trace).sum()
    }

    /// Worst Hermiticity residual across blocks.
    pub fn hermiticity_residual(&self) -> f64 {
        self.blocks
            .iter()
            .map(ComplexMatrix::hermiticity_residual)
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue across all blocks.
    pub fn min_block_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .filter_map(|b| {
                hermitian_eig(b)
                    .ok()
                    .and_then(|(eigenvalues, _)| eigenvalues.last().copied())
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks the physical-state invariants at tolerance `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        let trace = self.total_trace();
        (trace.re - 1.0).abs() <= tol
            && trace.im.abs() <= tol
            && self.hermiticity_residual() <= tol
            && self.min_block_eigenvalue() >= -10.0 * tol
    }
}

/// Initial state: the block at `start` is the all-ones matrix `J_n/n` (the
/// projector onto the uniform coin superposition), every other block is zero.
pub fn initial_state(n: usize, start: usize) -> Result<WalkerState, WalkError> {
    if start >= n {
        return Err(WalkError::StartOutOfRange { start, n });
    }
    let fill = Complex64::new(1.0 / n as f64, 0.0);
    let blocks = (0..n)
        .map(|u| {
            if u == start {
                ComplexMatrix::from_fn(n, n, |_, _| fill)
            } else {
                ComplexMatrix::zeros(n, n)
            }
        })
        .collect();
    Ok(WalkerState { blocks })
}

/// One walk step: the new block at `u` collects the loop term plus one Kraus
/// term per incoming arc,
/// `rho_u' = C_(u,u) rho_u C_(u,u)† + sum over arcs (v,u) of C_(v,u) rho_v C_(v,u)†`.
pub fn step(
    state: &WalkerState,
    coins: &CoinSet,
    graph: &DirectedWalkGraph,
) -> Result<WalkerState, WalkError> {
    let n = state.dimension();
    if coins.dimension() != n || graph.vertex_count() != n {
        return Err(WalkError::DimensionMismatch {
            state: n,
            expected: coins.dimension(),
        });
    }
    let mut next: Vec<ComplexMatrix> = (0..n).map(|_| ComplexMatrix::zeros(n, n)).collect();
    for (u, v, coin) in coins.arcs() {
        let source = &state.blocks[u];
        if source.max_abs() == 0.0 {
            continue;
        }
        next[v].add_assign(&coin.mul(source).mul(&coin.adjoint()));
    }
    Ok(WalkerState { blocks: next })
}

/// Full run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub graph: Graph,
    pub channel: ChannelSpec,
    pub steps: usize,
    /// Physical time per step; only the amplitude-damping channel consults it.
    pub dt: f64,
    pub start_vertex: usize,
}

impl RunConfig {
    pub fn new(graph: Graph, channel: ChannelSpec) -> Self {
        Self {
            graph,
            channel,
            steps: 30,
            dt: 1.0,
            start_vertex: 0,
        }
    }
}

/// Runs the walk and returns all `steps + 1` snapshots, the initial state
/// included. Time-dependent coins are rebuilt per step: the transition into
/// step `k+1` uses the parameters at `t = (k+1) * dt`, so the walk moves from
/// the very first step.
pub fn run(cfg: &RunConfig) -> Result<Vec<WalkerState>, WalkError> {
    cfg.channel.validate()?;
    let n = cfg.graph.vertex_count();
    let wg = cfg.graph.to_walk_graph();
    let mut snapshots = Vec::with_capacity(cfg.steps + 1);
    snapshots.push(initial_state(n, cfg.start_vertex)?);

    let static_coins = if cfg.channel.is_time_dependent() {
        None
    } else {
        Some(cfg.channel.build_coins(&wg, 0.0)?)
    };

    for k in 0..cfg.steps {
        let rebuilt;
        let coins = match &static_coins {
            Some(cs) => cs,
            None => {
                rebuilt = cfg.channel.build_coins(&wg, (k + 1) as f64 * cfg.dt)?;
                &rebuilt
            }
        };
        let next = step(snapshots.last().expect("nonempty"), coins, &wg)?;
        snapshots.push(next);
    }
    Ok(snapshots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{build_coins_adc, lambda_adc};

    fn adc_spec() -> ChannelSpec {
        ChannelSpec::AmplitudeDamping {
            gamma: 500.0,
            g: 0.01,
        }
    }

    #[test]
    fn initial_state_structure() {
        let s = initial_state(5, 0).unwrap();
        let b0 = s.block(0);
        for i in 0..5 {
            for j in 0..5 {
                assert!((b0.get(i, j).re - 0.2).abs() < 1e-15);
                assert_eq!(b0.get(i, j).im, 0.0);
            }
        }
        for u in 1..5 {
            assert_eq!(s.block(u).max_abs(), 0.0);
        }
        assert!((s.total_trace().re - 1.0).abs() < 1e-15);
        // J/n is idempotent, i.e. a rank-one projector.
        assert!(b0.mul(b0).sub(b0).max_abs() < 1e-15);
    }

    #[test]
    fn initial_state_single_vertex() {
        let s = initial_state(1, 0).unwrap();
        assert_eq!(s.block(0).get(0, 0), Complex64::ONE);
    }

    #[test]
    fn initial_state_rejects_bad_start() {
        assert_eq!(
            initial_state(3, 3).unwrap_err(),
            WalkError::StartOutOfRange { start: 3, n: 3 }
        );
    }

    #[test]
    fn one_adc_step_on_path_matches_hand_computation() {
        // One step from J_5/5 at vertex 0: the edge coin sends lambda/5 of
        // mass to vertex 1 concentrated on |0><0|, the loop keeps the rest.
        let g = Graph::path(5).unwrap();
        let wg = g.to_walk_graph();
        let lambda = lambda_adc(1.0, 500.0, 0.01).unwrap();
        let coins = build_coins_adc(&wg, lambda).unwrap();
        let s1 = step(&initial_state(5, 0).unwrap(), &coins, &wg).unwrap();

        let p0 = s1.block(0).trace().re;
        let p1 = s1.block(1).trace().re;
        assert!((p0 - (1.0 - lambda / 5.0)).abs() < 1e-12);
        assert!((p1 - lambda / 5.0).abs() < 1e-12);
        for u in 2..5 {
            assert!(s1.block(u).max_abs() <= 1e-15);
        }
        let b1 = s1.block(1);
        assert!((b1.get(0, 0).re - lambda / 5.0).abs() < 1e-12);
        assert_eq!(
            b1.entries().iter().filter(|e| e.norm() > 1e-15).count(),
            1,
            "vertex-1 block is lambda/5 |0><0|"
        );
    }

    #[test]
    fn zero_parameter_channels_leave_state_unchanged() {
        let g = Graph::cycle(3).unwrap();
        let wg = g.to_walk_graph();
        let s0 = initial_state(3, 0).unwrap();
        for coins in [
            build_coins_adc(&wg, 0.0).unwrap(),
            crate::channels::build_coins_nmd(&wg, 0.0).unwrap(),
            crate::channels::build_coins_depol(&wg, 0.0, 1.0).unwrap(),
        ] {
            let s1 = step(&s0, &coins, &wg).unwrap();
            for u in 0..3 {
                assert!(s1.block(u).sub(s0.block(u)).max_abs() < 1e-15);
            }
        }
    }

    #[test]
    fn single_vertex_graph_is_stationary() {
        let g = Graph::from_edge_list(1, &[]).unwrap();
        for channel in [
            adc_spec(),
            ChannelSpec::Dephasing {
                p: 0.4,
                eta: 0.5,
                omega: 50.0,
            },
            ChannelSpec::Depolarizing { p: 0.5, alpha: 1.0 },
        ] {
            let cfg = RunConfig {
                steps: 5,
                ..RunConfig::new(g.clone(), channel)
            };
            let snaps = run(&cfg).unwrap();
            for s in &snaps {
                assert!((s.block(0).get(0, 0) - Complex64::ONE).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn run_zero_steps_returns_initial_only() {
        let cfg = RunConfig {
            steps: 0,
            ..RunConfig::new(Graph::path(5).unwrap(), adc_spec())
        };
        let snaps = run(&cfg).unwrap();
        assert_eq!(snaps.len(), 1);
        assert!((snaps[0].total_trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn adc_on_cycle_reaches_every_vertex() {
        let cfg = RunConfig {
            steps: 30,
            ..RunConfig::new(Graph::cycle(3).unwrap(), adc_spec())
        };
        let snaps = run(&cfg).unwrap();
        for s in &snaps[2..] {
            for u in 0..3 {
                assert!(s.block(u).trace().re > 1e-12, "vertex {u} unreachable");
            }
        }
    }

    #[test]
    fn adc_on_path_confines_the_walker() {
        let cfg = RunConfig {
            steps: 30,
            ..RunConfig::new(Graph::path(5).unwrap(), adc_spec())
        };
        let snaps = run(&cfg).unwrap();
        for (k, s) in snaps.iter().enumerate() {
            for u in 2..5 {
                assert!(
                    s.block(u).trace().re.abs() <= 1e-12,
                    "step {k}: probability leaked to vertex {u}"
                );
            }
        }
    }

    #[test]
    fn runs_preserve_physical_invariants() {
        let graphs = [
            Graph::path(5).unwrap(),
            Graph::cycle(3).unwrap(),
            Graph::star(5).unwrap(),
            Graph::complete_bipartite(2, 3).unwrap(),
        ];
        let channels = [
            adc_spec(),
            ChannelSpec::Dephasing {
                p: 0.5,
                eta: 0.5,
                omega: 50.0,
            },
            ChannelSpec::Depolarizing { p: 0.5, alpha: 1.0 },
        ];
        for g in &graphs {
            for ch in &channels {
                let cfg = RunConfig {
                    steps: 20,
                    ..RunConfig::new(g.clone(), ch.clone())
                };
                for (k, s) in run(&cfg).unwrap().iter().enumerate() {
                    assert!(
                        (s.total_trace().re - 1.0).abs() <= 1e-10,
                        "trace drift at step {k} on {g:?} under {ch:?}"
                    );
                    assert!(s.total_trace().im.abs() <= 1e-12);
                    assert!(s.hermiticity_residual() <= 1e-10);
                    assert!(s.min_block_eigenvalue() >= -1e-9);
                }
            }
        }
    }

    #[test]
    fn step_rejects_dimension_mismatch() {
        let g5 = Graph::path(5).unwrap().to_walk_graph();
        let coins = build_coins_adc(&g5, 0.5).unwrap();
        let s3 = initial_state(3, 0).unwrap();
        assert!(matches!(
            step(&s3, &coins, &g5),
            Err(WalkError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn alternative_start_vertex_is_honored() {
        let cfg = RunConfig {
            steps: 1,
            start_vertex: 2,
            ..RunConfig::new(Graph::path(5).unwrap(), adc_spec())
        };
        let snaps = run(&cfg).unwrap();
        assert!((snaps[0].block(2).trace().re - 1.0).abs() < 1e-15);
        assert!(snaps[1].block(1).trace().re > 0.0);
        assert!(snaps[1].block(3).trace().re > 0.0);
    }
}
