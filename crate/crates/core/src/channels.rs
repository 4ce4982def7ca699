//! Coin-operator sets for the three noise channels.
//!
//! Every directed edge and every vertex loop of the walk graph carries one
//! coin operator; the coins leaving a vertex form a Kraus set, i.e. they sum
//! to the identity under `C†C`. Amplitude damping uses projector-shaped
//! coins driven by the memory-kernel function `lambda(t)`; dephasing and
//! depolarizing scale Weyl operators, with the edge's (source, target) vertex
//! labels used directly as the Weyl indices.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::graph::DirectedWalkGraph;
use crate::linalg::{weyl, ComplexMatrix};

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("parameter {name} = {value} out of range: {requirement}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("dephasing denominator 1 + eta*(1-2p) vanishes (eta = {eta}, p = {p})")]
    VanishingDenominator { eta: f64, p: f64 },
    #[error("kappa(p) = {kappa} escapes [0,1]; channel is unphysical for these parameters")]
    KappaOutOfRange { kappa: f64 },
    #[error(
        "negative radicand {radicand:.6e} in depolarizing loop coin at degree {degree}; \
         reduce alpha or p"
    )]
    NegativeRadicand { radicand: f64, degree: usize },
}

/// Channel selection plus its parameters.
///
/// `AmplitudeDamping` coins depend on time through `lambda(t)` and are rebuilt
/// every step; the other two are fixed per run.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "channel", rename_all = "lowercase")]
pub enum ChannelSpec {
    #[serde(rename = "adc")]
    AmplitudeDamping {
        /// Spontaneous emission rate (1/time).
        gamma: f64,
        /// Spectral width of the system-environment coupling (1/time).
        g: f64,
    },
    #[serde(rename = "nmd")]
    Dephasing { p: f64, eta: f64, omega: f64 },
    #[serde(rename = "depol")]
    Depolarizing { p: f64, alpha: f64 },
}

impl ChannelSpec {
    pub fn validate(&self) -> Result<(), ChannelError> {
        match *self {
            ChannelSpec::AmplitudeDamping { gamma, g } => {
                if gamma.is_nan() || gamma < 0.0 {
                    return Err(ChannelError::ParameterOutOfRange {
                        name: "gamma",
                        value: gamma,
                        requirement: "gamma >= 0",
                    });
                }
                if g.is_nan() || g <= 0.0 {
                    return Err(ChannelError::ParameterOutOfRange {
                        name: "g",
                        value: g,
                        requirement: "g > 0",
                    });
                }
            }
            ChannelSpec::Dephasing { p, eta, omega: _ } => {
                if !(0.0..=0.5).contains(&p) {
                    return Err(ChannelError::ParameterOutOfRange {
                        name: "p",
                        value: p,
                        requirement: "0 <= p <= 1/2",
                    });
                }
                if (1.0 + eta * (1.0 - 2.0 * p)).abs() < 1e-12 {
                    return Err(ChannelError::VanishingDenominator { eta, p });
                }
            }
            ChannelSpec::Depolarizing { p, alpha } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(ChannelError::ParameterOutOfRange {
                        name: "p",
                        value: p,
                        requirement: "0 <= p <= 1",
                    });
                }
                if alpha.is_nan() || alpha < 0.0 {
                    return Err(ChannelError::ParameterOutOfRange {
                        name: "alpha",
                        value: alpha,
                        requirement: "alpha >= 0",
                    });
                }
            }
        }
        Ok(())
    }

    /// True when the coin set changes from step to step.
    pub fn is_time_dependent(&self) -> bool {
        matches!(self, ChannelSpec::AmplitudeDamping { .. })
    }

    /// Builds the coin set for one step; `t` is only consulted by the
    /// amplitude-damping channel.
    pub fn build_coins(&self, g: &DirectedWalkGraph, t: f64) -> Result<CoinSet, ChannelError> {
        self.validate()?;
        match *self {
            ChannelSpec::AmplitudeDamping { gamma, g: width } => {
                build_coins_adc(g, lambda_adc(t, gamma, width)?)
            }
            ChannelSpec::Dephasing { p, eta, omega } => {
                build_coins_nmd(g, kappa_nmd(p, eta, omega)?)
            }
            ChannelSpec::Depolarizing { p, alpha } => build_coins_depol(g, p, alpha),
        }
    }
}

/// Coins leaving one vertex: the loop coin plus one coin per outgoing edge.
#[derive(Debug, Clone)]
pub struct VertexCoins {
    pub loop_coin: ComplexMatrix,
    /// `(target vertex, coin)` pairs, sorted by target.
    pub edge_coins: Vec<(usize, ComplexMatrix)>,
}

/// Full coin assignment on a walk graph, grouped by source vertex.
#[derive(Debug, Clone)]
pub struct CoinSet {
    n: usize,
    vertices: Vec<VertexCoins>,
}

impl CoinSet {
    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn vertex(&self, u: usize) -> &VertexCoins {
        &self.vertices[u]
    }

    /// Coin for the arc `(u, v)`; `u == v` addresses the loop.
    pub fn coin(&self, u: usize, v: usize) -> Option<&ComplexMatrix> {
        let vc = self.vertices.get(u)?;
        if u == v {
            return Some(&vc.loop_coin);
        }
        vc.edge_coins
            .iter()
            .find(|(target, _)| *target == v)
            .map(|(_, c)| c)
    }

    /// All arcs with their coins, loops first per vertex.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize, &ComplexMatrix)> {
        self.vertices.iter().enumerate().flat_map(|(u, vc)| {
            std::iter::once((u, u, &vc.loop_coin)).chain(
                vc.edge_coins
                    .iter()
                    .map(move |(v, c)| (u, *v, c)),
            )
        })
    }

    pub fn arc_count(&self) -> usize {
        self.vertices
            .iter()
            .map(|vc| 1 + vc.edge_coins.len())
            .sum()
    }
}

/// Memory-kernel function of the amplitude damping channel:
/// `lambda(t) = 1 - exp(-g t) * [(g/l) sinh(l t/2) + cosh(l t/2)]^2` with
/// `l = sqrt(g^2 - 2 gamma g)`.
///
/// For `2 gamma > g` the root `l` is imaginary, so the bracket is evaluated in
/// complex arithmetic throughout (where it reduces to the oscillatory
/// `(g/|l|) sin(|l| t/2) + cos(|l| t/2)`) and the vanishing imaginary residue
/// is checked before taking the real part. Rounding overshoot beyond `[0, 1]`
/// is clamped after being bounded.
pub fn lambda_adc(t: f64, gamma: f64, g: f64) -> Result<f64, ChannelError> {
    if g.is_nan() || g <= 0.0 {
        return Err(ChannelError::ParameterOutOfRange {
            name: "g",
            value: g,
            requirement: "g > 0",
        });
    }
    if gamma.is_nan() || gamma < 0.0 {
        return Err(ChannelError::ParameterOutOfRange {
            name: "gamma",
            value: gamma,
            requirement: "gamma >= 0",
        });
    }
    if t.is_nan() || t < 0.0 {
        return Err(ChannelError::ParameterOutOfRange {
            name: "t",
            value: t,
            requirement: "t >= 0",
        });
    }

    let l = Complex64::new(g * g - 2.0 * gamma * g, 0.0).sqrt();
    let x = l * (t / 2.0);
    // sinh(x)/x has a removable singularity at l = 0 (gamma = g/2); switch to
    // its series when x is too small for the direct quotient.
    let bracket = if x.norm() < 1e-6 {
        let x2 = x * x;
        let sinhc = Complex64::ONE + x2 / 6.0 + x2 * x2 / 120.0;
        sinhc * (g * t / 2.0) + x.cosh()
    } else {
        x.sinh() * (g / l) + x.cosh()
    };
    let lambda = Complex64::ONE - bracket * bracket * (-g * t).exp();
    assert!(
        lambda.im.abs() < 1e-12,
        "lambda(t) imaginary residue {} exceeds 1e-12",
        lambda.im
    );
    let value = lambda.re;
    assert!(
        (-1e-9..=1.0 + 1e-9).contains(&value),
        "lambda(t) = {value} strays outside [0, 1] beyond rounding"
    );
    Ok(value.clamp(0.0, 1.0))
}

/// Dephasing strength `kappa(p) = p (1 + eta (1-2p) sin(omega p)) / (1 + eta (1-2p))`.
pub fn kappa_nmd(p: f64, eta: f64, omega: f64) -> Result<f64, ChannelError> {
    if !(0.0..=0.5).contains(&p) {
        return Err(ChannelError::ParameterOutOfRange {
            name: "p",
            value: p,
            requirement: "0 <= p <= 1/2",
        });
    }
    let denominator = 1.0 + eta * (1.0 - 2.0 * p);
    if denominator.abs() < 1e-12 {
        return Err(ChannelError::VanishingDenominator { eta, p });
    }
    let kappa = p * (1.0 + eta * (1.0 - 2.0 * p) * (omega * p).sin()) / denominator;
    if !(-1e-12..=1.0 + 1e-12).contains(&kappa) {
        return Err(ChannelError::KappaOutOfRange { kappa });
    }
    Ok(kappa.clamp(0.0, 1.0))
}

/// Depolarizing coefficients `(Lambda1, Lambda2) = (-alpha p, alpha (1-p))`,
/// constrained by `(1-p) Lambda1 + p Lambda2 = 0`.
pub fn depol_coefficients(p: f64, alpha: f64) -> (f64, f64) {
    (-alpha * p, alpha * (1.0 - p))
}

/// Amplitude-damping coin set at damping weight `lambda`.
///
/// The loop coin at `u` is diagonal: 1 at position `u`, `sqrt(1-lambda)` at
/// every neighbour position, 1 at every non-neighbour position. The coin on
/// the arc `(u, v)` is `sqrt(lambda) |u⟩⟨v|`.
pub fn build_coins_adc(g: &DirectedWalkGraph, lambda: f64) -> Result<CoinSet, ChannelError> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(ChannelError::ParameterOutOfRange {
            name: "lambda",
            value: lambda,
            requirement: "0 <= lambda <= 1",
        });
    }
    let n = g.vertex_count();
    let keep = (1.0 - lambda).sqrt();
    let hop = lambda.sqrt();
    let vertices = (0..n)
        .map(|u| {
            let mut diag = vec![1.0; n];
            for &v in g.out_neighbors(u) {
                diag[v] = keep;
            }
            diag[u] = 1.0;
            let edge_coins = g
                .out_neighbors(u)
                .iter()
                .map(|&v| {
                    (
                        v,
                        ComplexMatrix::basis_outer(n, u, v).scale_re(hop),
                    )
                })
                .collect();
            VertexCoins {
                loop_coin: ComplexMatrix::diagonal(&diag),
                edge_coins,
            }
        })
        .collect();
    Ok(CoinSet { n, vertices })
}

/// Dephasing coin set at strength `kappa`.
///
/// Loop coin `sqrt(1-kappa) I` (plain `I` for isolated vertices, which must
/// be isometric on their own), edge coin `sqrt(kappa/d_u) U_(u,v)`.
pub fn build_coins_nmd(g: &DirectedWalkGraph, kappa: f64) -> Result<CoinSet, ChannelError> {
    if !(0.0..=1.0).contains(&kappa) {
        return Err(ChannelError::ParameterOutOfRange {
            name: "kappa",
            value: kappa,
            requirement: "0 <= kappa <= 1",
        });
    }
    let n = g.vertex_count();
    let vertices = (0..n)
        .map(|u| {
            let degree = g.degree(u);
            let loop_scale = if degree == 0 {
                1.0
            } else {
                (1.0 - kappa).sqrt()
            };
            let edge_scale = if degree == 0 {
                0.0
            } else {
                (kappa / degree as f64).sqrt()
            };
            let edge_coins = g
                .out_neighbors(u)
                .iter()
                .map(|&v| (v, weyl(n, u, v).expect("n >= 1").scale_re(edge_scale)))
                .collect();
            VertexCoins {
                loop_coin: ComplexMatrix::identity(n).scale_re(loop_scale),
                edge_coins,
            }
        })
        .collect();
    Ok(CoinSet { n, vertices })
}

/// Depolarizing coin set for mixing parameter `p` and scale `alpha`.
///
/// Loop coin `sqrt(1 + d_u (1-p) Lambda1 / (d_u+1)) I`, edge coin
/// `sqrt(p Lambda2 / (d_u+1)) U_(u,v)`; completeness follows from the
/// coefficient constraint. The loop radicand stays non-negative whenever
/// `alpha <= 4`, and is checked per vertex.
pub fn build_coins_depol(
    g: &DirectedWalkGraph,
    p: f64,
    alpha: f64,
) -> Result<CoinSet, ChannelError> {
    ChannelSpec::Depolarizing { p, alpha }.validate()?;
    let (lambda1, lambda2) = depol_coefficients(p, alpha);
    let n = g.vertex_count();
    let mut vertices = Vec::with_capacity(n);
    for u in 0..n {
        let degree = g.degree(u);
        let d = degree as f64;
        let radicand = 1.0 + d * (1.0 - p) * lambda1 / (d + 1.0);
        if radicand < 0.0 {
            return Err(ChannelError::NegativeRadicand { radicand, degree });
        }
        let edge_scale = (p * lambda2 / (d + 1.0)).sqrt();
        let edge_coins = g
            .out_neighbors(u)
            .iter()
            .map(|&v| (v, weyl(n, u, v).expect("n >= 1").scale_re(edge_scale)))
            .collect();
        vertices.push(VertexCoins {
            loop_coin: ComplexMatrix::identity(n).scale_re(radicand.sqrt()),
            edge_coins,
        });
    }
    Ok(CoinSet { n, vertices })
}

/// Worst per-vertex completeness residual: the largest entry of
/// `sum_over_arcs_out_of_u C†C - I` across all vertices. A valid Kraus
/// assignment stays at rounding level.
pub fn verify_completeness(cs: &CoinSet) -> f64 {
    let id = ComplexMatrix::identity(cs.n);
    let mut worst = 0.0f64;
    for vc in &cs.vertices {
        let mut sum = vc.loop_coin.adjoint().mul(&vc.loop_coin);
        for (_, coin) in &vc.edge_coins {
            sum.add_assign(&coin.adjoint().mul(coin));
        }
        worst = worst.max(sum.sub(&id).max_abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn t6() -> Graph {
        Graph::from_edge_list(
            6,
            &[
                (0, 1),
                (0, 2),
                (0, 3),
                (0, 4),
                (2, 4),
                (2, 5),
                (3, 4),
                (4, 5),
            ],
        )
        .unwrap()
    }

    /// Independent transcription of the oscillatory branch of lambda(t),
    /// written with real trigonometry instead of complex hyperbolics.
    fn lambda_trig_oracle(t: f64, gamma: f64, g: f64) -> f64 {
        assert!(g * g < 2.0 * gamma * g);
        let abs_l = (2.0 * gamma * g - g * g).sqrt();
        let bracket = (g / abs_l) * (abs_l * t / 2.0).sin() + (abs_l * t / 2.0).cos();
        (1.0 - (-g * t).exp() * bracket * bracket).clamp(0.0, 1.0)
    }

    #[test]
    fn lambda_at_zero_time_is_zero() {
        assert_eq!(lambda_adc(0.0, 500.0, 0.01).unwrap(), 0.0);
        assert_eq!(lambda_adc(0.0, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn lambda_vanishes_without_emission() {
        for t in [0.5, 1.0, 7.0, 30.0] {
            assert!(lambda_adc(t, 0.0, 0.01).unwrap().abs() < 1e-12);
            assert!(lambda_adc(t, 0.0, 2.0).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn lambda_matches_trig_oracle_in_oscillatory_regime() {
        for t in 1..=30 {
            let t = t as f64;
            let got = lambda_adc(t, 500.0, 0.01).unwrap();
            let expected = lambda_trig_oracle(t, 500.0, 0.01);
            assert!(
                (got - expected).abs() < 1e-12,
                "t={t}: {got} vs oracle {expected}"
            );
        }
        // Frozen reference point from the oracle.
        assert!((lambda_adc(1.0, 500.0, 0.01).unwrap() - 0.9999490701240729).abs() < 1e-12);
    }

    #[test]
    fn lambda_is_non_monotonic_in_oscillatory_regime() {
        let values: Vec<f64> = (1..=30)
            .map(|t| lambda_adc(t as f64, 500.0, 0.01).unwrap())
            .collect();
        let rises = values.windows(2).any(|w| w[1] > w[0]);
        let falls = values.windows(2).any(|w| w[1] < w[0]);
        assert!(rises && falls, "lambda should oscillate: {values:?}");
    }

    #[test]
    fn lambda_handles_vanishing_root() {
        // gamma = g/2 makes l = 0 exactly; the series branch must take over.
        let v = lambda_adc(2.0, 0.005, 0.01).unwrap();
        assert!(v > 0.0 && v < 1e-3, "near-Markovian limit stays tiny: {v}");
    }

    #[test]
    fn lambda_rejects_bad_parameters() {
        assert!(lambda_adc(1.0, 500.0, 0.0).is_err());
        assert!(lambda_adc(1.0, -1.0, 0.01).is_err());
        assert!(lambda_adc(-1.0, 500.0, 0.01).is_err());
    }

    #[test]
    fn kappa_reference_points() {
        assert_eq!(kappa_nmd(0.0, 0.5, 50.0).unwrap(), 0.0);
        assert!((kappa_nmd(0.3, 0.0, 50.0).unwrap() - 0.3).abs() < 1e-15);
        assert!((kappa_nmd(0.5, 0.5, 50.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn kappa_rejects_bad_domain() {
        assert!(kappa_nmd(0.6, 0.5, 50.0).is_err());
        assert!(matches!(
            kappa_nmd(0.25, -2.0, 50.0),
            Err(ChannelError::VanishingDenominator { .. })
        ));
        // Near-vanishing denominator amplifies kappa beyond 1.
        assert!(matches!(
            kappa_nmd(0.25, -1.99, 1.0),
            Err(ChannelError::KappaOutOfRange { .. })
        ));
    }

    #[test]
    fn depol_coefficients_constraint() {
        assert_eq!(depol_coefficients(0.5, 1.0), (-0.5, 0.5));
        assert_eq!(depol_coefficients(0.0, 2.0), (0.0, 2.0));
        assert_eq!(depol_coefficients(1.0, 2.0), (-2.0, 0.0));
        for p in [0.0, 0.1, 0.37, 0.5, 0.93, 1.0] {
            for alpha in [0.0, 0.5, 1.0, 4.0] {
                let (l1, l2) = depol_coefficients(p, alpha);
                assert!(((1.0 - p) * l1 + p * l2).abs() <= 1e-15 * alpha.max(1.0));
            }
        }
    }

    #[test]
    fn adc_loop_coin_shapes() {
        let wg = Graph::path(5).unwrap().to_walk_graph();
        let lambda = 0.36;
        let cs = build_coins_adc(&wg, lambda).unwrap();
        let keep = (1.0 - lambda).sqrt();
        // Endpoint: only vertex 1 is a neighbour.
        let c00 = cs.coin(0, 0).unwrap();
        for (i, expected) in [1.0, keep, 1.0, 1.0, 1.0].iter().enumerate() {
            assert!((c00.get(i, i).re - expected).abs() < 1e-15);
        }
        // Edge coin has the single entry sqrt(lambda) at (u, v).
        let c01 = cs.coin(0, 1).unwrap();
        assert!((c01.get(0, 1).re - lambda.sqrt()).abs() < 1e-15);
        assert_eq!(
            c01.entries().iter().filter(|e| e.norm() > 0.0).count(),
            1
        );
    }

    #[test]
    fn adc_zero_damping_is_identity_channel() {
        let wg = Graph::cycle(4).unwrap().to_walk_graph();
        let cs = build_coins_adc(&wg, 0.0).unwrap();
        for u in 0..4 {
            assert!(cs
                .coin(u, u)
                .unwrap()
                .sub(&ComplexMatrix::identity(4))
                .max_abs()
                .abs()
                < 1e-15);
            for (_, coin) in &cs.vertex(u).edge_coins {
                assert_eq!(coin.max_abs(), 0.0);
            }
        }
    }

    #[test]
    fn adc_t6_vertex_two_loop_diagonal() {
        let wg = t6().to_walk_graph();
        let lambda = 0.3_f64;
        let keep = (1.0 - lambda).sqrt();
        let cs = build_coins_adc(&wg, lambda).unwrap();
        let c22 = cs.coin(2, 2).unwrap();
        let expected = [keep, 1.0, 1.0, 1.0, keep, keep];
        for (i, e) in expected.iter().enumerate() {
            assert!(
                (c22.get(i, i).re - e).abs() < 1e-15,
                "diagonal position {i}"
            );
        }
    }

    #[test]
    fn nmd_coin_scales() {
        let wg = Graph::path(5).unwrap().to_walk_graph();
        let kappa = 0.4;
        let cs = build_coins_nmd(&wg, kappa).unwrap();
        // Endpoint degree 1: sqrt(kappa); interior degree 2: sqrt(kappa/2).
        let c01 = cs.coin(0, 1).unwrap();
        let u01 = weyl(5, 0, 1).unwrap().scale_re(kappa.sqrt());
        assert!(c01.sub(&u01).max_abs() < 1e-15);
        for v in [0usize, 2] {
            let c1v = cs.coin(1, v).unwrap();
            let expected = weyl(5, 1, v).unwrap().scale_re((kappa / 2.0).sqrt());
            assert!(c1v.sub(&expected).max_abs() < 1e-15);
        }
    }

    #[test]
    fn nmd_star_center_and_periphery() {
        let wg = Graph::star(5).unwrap().to_walk_graph();
        let kappa = 0.4;
        let cs = build_coins_nmd(&wg, kappa).unwrap();
        for v in 1..5 {
            let center = cs.coin(0, v).unwrap();
            let expected = weyl(5, 0, v).unwrap().scale_re((kappa / 4.0).sqrt());
            assert!(center.sub(&expected).max_abs() < 1e-15);
            let back = cs.coin(v, 0).unwrap();
            let expected = weyl(5, v, 0).unwrap().scale_re(kappa.sqrt());
            assert!(back.sub(&expected).max_abs() < 1e-15);
        }
    }

    #[test]
    fn nmd_zero_strength_is_identity_channel() {
        let wg = Graph::cycle(3).unwrap().to_walk_graph();
        let cs = build_coins_nmd(&wg, 0.0).unwrap();
        for u in 0..3 {
            assert!(
                cs.coin(u, u)
                    .unwrap()
                    .sub(&ComplexMatrix::identity(3))
                    .max_abs()
                    < 1e-15
            );
        }
    }

    #[test]
    fn nmd_isolated_vertex_keeps_identity_loop() {
        let g = Graph::from_edge_list(3, &[(0, 1)]).unwrap();
        let cs = build_coins_nmd(&g.to_walk_graph(), 0.7).unwrap();
        assert!(
            cs.coin(2, 2)
                .unwrap()
                .sub(&ComplexMatrix::identity(3))
                .max_abs()
                == 0.0
        );
        assert!(verify_completeness(&cs) < 1e-12);
    }

    #[test]
    fn depol_complete_graph_coins() {
        let wg = Graph::complete(5).unwrap().to_walk_graph();
        let (p, alpha) = (0.5, 1.0);
        let (l1, l2) = depol_coefficients(p, alpha);
        let cs = build_coins_depol(&wg, p, alpha).unwrap();
        let loop_scale = (1.0 + 4.0 * (1.0 - p) * l1 / 5.0).sqrt();
        let expected_loop = ComplexMatrix::identity(5).scale_re(loop_scale);
        assert!(cs.coin(0, 0).unwrap().sub(&expected_loop).max_abs() < 1e-15);
        let edge_scale = (p * l2 / 5.0).sqrt();
        let expected_edge = weyl(5, 0, 1).unwrap().scale_re(edge_scale);
        assert!(cs.coin(0, 1).unwrap().sub(&expected_edge).max_abs() < 1e-15);
    }

    #[test]
    fn depol_path_loop_coefficients() {
        let wg = Graph::path(5).unwrap().to_walk_graph();
        let (p, alpha) = (0.3, 1.0);
        let (l1, _) = depol_coefficients(p, alpha);
        let cs = build_coins_depol(&wg, p, alpha).unwrap();
        let endpoint = (1.0 + (1.0 - p) * l1 / 2.0).sqrt();
        let interior = (1.0 + 2.0 * (1.0 - p) * l1 / 3.0).sqrt();
        assert!((cs.coin(0, 0).unwrap().get(0, 0).re - endpoint).abs() < 1e-15);
        assert!((cs.coin(4, 4).unwrap().get(0, 0).re - endpoint).abs() < 1e-15);
        assert!((cs.coin(2, 2).unwrap().get(0, 0).re - interior).abs() < 1e-15);
    }

    #[test]
    fn depol_zero_mixing_is_identity_channel() {
        let wg = Graph::star(4).unwrap().to_walk_graph();
        let cs = build_coins_depol(&wg, 0.0, 1.0).unwrap();
        for u in 0..4 {
            assert!(
                cs.coin(u, u)
                    .unwrap()
                    .sub(&ComplexMatrix::identity(4))
                    .max_abs()
                    < 1e-15
            );
            for (_, coin) in &cs.vertex(u).edge_coins {
                assert_eq!(coin.max_abs(), 0.0);
            }
        }
    }

    #[test]
    fn depol_rejects_negative_radicand() {
        // Large alpha pushes the loop radicand negative at high degree.
        let wg = Graph::complete(6).unwrap().to_walk_graph();
        assert!(matches!(
            build_coins_depol(&wg, 0.5, 5.5),
            Err(ChannelError::NegativeRadicand { .. })
        ));
    }

    #[test]
    fn completeness_across_graphs_and_channels() {
        let graphs = [
            Graph::path(5).unwrap(),
            Graph::cycle(3).unwrap(),
            Graph::star(5).unwrap(),
            Graph::complete(5).unwrap(),
            Graph::complete_bipartite(2, 3).unwrap(),
            t6(),
        ];
        for g in &graphs {
            let wg = g.to_walk_graph();
            for lambda in [0.0, 0.3, 1.0] {
                let cs = build_coins_adc(&wg, lambda).unwrap();
                assert!(verify_completeness(&cs) <= 1e-12);
                assert_eq!(cs.arc_count(), wg.arc_count());
            }
            for kappa in [0.0, 0.7] {
                assert!(verify_completeness(&build_coins_nmd(&wg, kappa).unwrap()) <= 1e-12);
            }
            for (p, alpha) in [(0.1, 0.5), (0.5, 1.0), (0.9, 1.0)] {
                assert!(
                    verify_completeness(&build_coins_depol(&wg, p, alpha).unwrap()) <= 1e-12
                );
            }
        }
    }

    #[test]
    fn completeness_detects_corruption() {
        let wg = Graph::path(3).unwrap().to_walk_graph();
        let mut cs = build_coins_adc(&wg, 0.5).unwrap();
        let coin = &mut cs.vertices[1].loop_coin;
        let bumped = coin.get(0, 0) + Complex64::new(1e-3, 0.0);
        coin.set(0, 0, bumped);
        assert!(verify_completeness(&cs) >= 1e-4);
    }

    #[test]
    fn loop_coins_have_the_documented_shape() {
        let wg = t6().to_walk_graph();
        let nmd = build_coins_nmd(&wg, 0.4).unwrap();
        let depol = build_coins_depol(&wg, 0.5, 1.0).unwrap();
        for u in 0..6 {
            for cs in [&nmd, &depol] {
                let loop_coin = cs.coin(u, u).unwrap();
                let scale = loop_coin.get(0, 0).re;
                assert!(
                    loop_coin
                        .sub(&ComplexMatrix::identity(6).scale_re(scale))
                        .max_abs()
                        < 1e-15,
                    "loop coin must be a real multiple of the identity"
                );
            }
            let adc = build_coins_adc(&wg, 0.3).unwrap();
            let loop_coin = adc.coin(u, u).unwrap();
            for i in 0..6 {
                for j in 0..6 {
                    if i != j {
                        assert_eq!(loop_coin.get(i, j), Complex64::ZERO);
                    }
                }
                let d = loop_coin.get(i, i).re;
                assert!(
                    (d - 1.0).abs() < 1e-15 || (d - (0.7f64).sqrt()).abs() < 1e-15,
                    "ADC loop diagonal entries come from {{1, sqrt(1-lambda)}}"
                );
            }
        }
    }

    #[test]
    fn channel_spec_validation() {
        assert!(ChannelSpec::AmplitudeDamping {
            gamma: 500.0,
            g: 0.01
        }
        .validate()
        .is_ok());
        assert!(ChannelSpec::AmplitudeDamping { gamma: 500.0, g: 0.0 }
            .validate()
            .is_err());
        assert!(ChannelSpec::Dephasing {
            p: 0.7,
            eta: 0.5,
            omega: 50.0
        }
        .validate()
        .is_err());
        assert!(ChannelSpec::Depolarizing { p: 0.5, alpha: -1.0 }
            .validate()
            .is_err());
    }
}
