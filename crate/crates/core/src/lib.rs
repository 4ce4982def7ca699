//! Discrete-time open quantum walks (DTOQW) on arbitrary finite simple graphs.
//!
//! The walker carries an `n`-dimensional coin space (one basis vector per
//! vertex) and a position. Each directed edge and each vertex loop carries a
//! coin operator which is itself a Kraus operator of a noise channel, so one
//! walk step is a completely positive trace-preserving map. The state stays
//! block diagonal, one `n x n` density block per vertex, and the per-vertex
//! trace is the probability of finding the walker there.
//!
//! Modules:
//! - [`graph`]: simple graphs (named families and edge lists) and the derived
//!   directed graph with loops the walk runs on
//! - [`linalg`]: dense complex matrices, Weyl operators, Hermitian
//!   eigendecomposition and the PSD matrix square root
//! - [`channels`]: amplitude-damping, dephasing and depolarizing coin sets
//!   built from non-Markovian parameter functions, plus completeness checks
//! - [`walk`]: the block-diagonal state and the blockwise Kraus recurrence
//! - [`metrics`]: per-vertex probabilities, l1 coherence and fidelity
//! - [`oracle`]: brute-force superoperator reference used for verification
//! - [`cli`]: command-line front end (runs, sweeps, CSV/JSON output)

pub mod channels;
pub mod cli;
pub mod graph;
pub mod linalg;
pub mod metrics;
pub mod oracle;
pub mod walk;

pub use channels::{ChannelSpec, CoinSet};
pub use graph::{DirectedWalkGraph, Graph};
pub use linalg::ComplexMatrix;
pub use metrics::MetricSeries;
pub use walk::{RunConfig, WalkerState};
