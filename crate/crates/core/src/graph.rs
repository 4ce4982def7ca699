//! Simple graphs and the derived directed walk graph.
//!
//! Vertices are labelled by contiguous integers `0..n`, which double as the
//! coin-space basis labels. A walk runs on the [`DirectedWalkGraph`] obtained
//! by orienting every undirected edge both ways and adding one loop per
//! vertex.

use std::collections::BTreeSet;

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("graph must have at least {min} vertices for {family}, got {got}")]
    TooFewVertices {
        family: &'static str,
        min: usize,
        got: usize,
    },
    #[error("vertex index {index} out of range for {n} vertices")]
    VertexOutOfRange { index: usize, n: usize },
    #[error("self-loop ({0},{0}) is not allowed in a simple graph")]
    SelfLoop(usize),
    #[error("malformed graph file: {0}")]
    Parse(String),
}

/// Undirected simple graph on vertices `0..n`.
///
/// Edges are kept as a sorted set of pairs `(u, v)` with `u < v`, so two
/// graphs compare equal exactly when they have the same structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    /// Builds a graph from an explicit edge list; pairs are normalized and
    /// deduplicated.
    pub fn from_edge_list(n: usize, pairs: &[(usize, usize)]) -> Result<Self, GraphError> {
        if n < 1 {
            return Err(GraphError::TooFewVertices {
                family: "a graph",
                min: 1,
                got: n,
            });
        }
        let mut edges = BTreeSet::new();
        for &(u, v) in pairs {
            if u >= n {
                return Err(GraphError::VertexOutOfRange { index: u, n });
            }
            if v >= n {
                return Err(GraphError::VertexOutOfRange { index: v, n });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            edges.insert((u.min(v), u.max(v)));
        }
        Ok(Self { n, edges })
    }

    /// Path on `n >= 1` vertices: edges `{0,1}, {1,2}, ...`; a single vertex
    /// yields an edgeless graph.
    pub fn path(n: usize) -> Result<Self, GraphError> {
        if n < 1 {
            return Err(GraphError::TooFewVertices {
                family: "path",
                min: 1,
                got: n,
            });
        }
        let pairs: Vec<_> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        Self::from_edge_list(n, &pairs)
    }

    /// Cycle on `n >= 3` vertices.
    pub fn cycle(n: usize) -> Result<Self, GraphError> {
        if n < 3 {
            return Err(GraphError::TooFewVertices {
                family: "cycle",
                min: 3,
                got: n,
            });
        }
        let pairs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::from_edge_list(n, &pairs)
    }

    /// Star on `n >= 2` vertices with center 0.
    pub fn star(n: usize) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooFewVertices {
                family: "star",
                min: 2,
                got: n,
            });
        }
        let pairs: Vec<_> = (1..n).map(|k| (0, k)).collect();
        Self::from_edge_list(n, &pairs)
    }

    /// Complete graph on `n >= 1` vertices.
    pub fn complete(n: usize) -> Result<Self, GraphError> {
        if n < 1 {
            return Err(GraphError::TooFewVertices {
                family: "complete graph",
                min: 1,
                got: n,
            });
        }
        let mut pairs = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                pairs.push((u, v));
            }
        }
        Self::from_edge_list(n, &pairs)
    }

    /// Complete bipartite graph: partition `V1 = 0..a` precedes `V2 = a..a+b`.
    pub fn complete_bipartite(a: usize, b: usize) -> Result<Self, GraphError> {
        if a < 1 || b < 1 {
            return Err(GraphError::TooFewVertices {
                family: "complete bipartite graph",
                min: 1,
                got: a.min(b),
            });
        }
        let mut pairs = Vec::new();
        for u in 0..a {
            for v in a..(a + b) {
                pairs.push((u, v));
            }
        }
        Self::from_edge_list(a + b, &pairs)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn degree(&self, u: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == u || b == u)
            .count()
    }

    /// Sorted neighbours of `u`.
    pub fn neighbors(&self, u: usize) -> Vec<usize> {
        let mut nbrs: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == u {
                    Some(b)
                } else if b == u {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        nbrs.sort_unstable();
        nbrs
    }

    /// Derives the directed graph with loops on which the walk runs.
    pub fn to_walk_graph(&self) -> DirectedWalkGraph {
        let mut out_neighbors = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            out_neighbors[u].push(v);
            out_neighbors[v].push(u);
        }
        for nbrs in &mut out_neighbors {
            nbrs.sort_unstable();
        }
        DirectedWalkGraph {
            n: self.n,
            edge_count: self.edges.len(),
            out_neighbors,
        }
    }

    /// Parses the plain-text graph format: first non-comment line is the
    /// vertex count, each following line one `u v` edge, `#` starts a comment.
    pub fn from_text(input: &str) -> Result<Self, GraphError> {
        let mut lines = input.lines().filter_map(|line| {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                None
            } else {
                Some(line)
            }
        });
        let n: usize = lines
            .next()
            .ok_or_else(|| GraphError::Parse("empty graph file".into()))?
            .parse()
            .map_err(|_| GraphError::Parse("first line must be the vertex count".into()))?;
        let mut pairs = Vec::new();
        for line in lines {
            let mut parts = line.split_whitespace();
            let (u, v) = match (parts.next(), parts.next(), parts.next()) {
                (Some(u), Some(v), None) => (u, v),
                _ => {
                    return Err(GraphError::Parse(format!(
                        "expected `u v` on edge line, got {line:?}"
                    )))
                }
            };
            let u: usize = u
                .parse()
                .map_err(|_| GraphError::Parse(format!("bad vertex index {u:?}")))?;
            let v: usize = v
                .parse()
                .map_err(|_| GraphError::Parse(format!("bad vertex index {v:?}")))?;
            pairs.push((u, v));
        }
        Self::from_edge_list(n, &pairs)
    }

    /// Parses the JSON graph format `{"n": int, "edges": [[u,v], ...]}`.
    pub fn from_json(input: &str) -> Result<Self, GraphError> {
        #[derive(Deserialize)]
        struct JsonGraph {
            n: usize,
            edges: Vec<(usize, usize)>,
        }
        let parsed: JsonGraph =
            serde_json::from_str(input).map_err(|e| GraphError::Parse(e.to_string()))?;
        Self::from_edge_list(parsed.n, &parsed.edges)
    }

    /// Parses either accepted file format, sniffing JSON by the leading `{`.
    pub fn from_file_contents(input: &str) -> Result<Self, GraphError> {
        if input.trim_start().starts_with('{') {
            Self::from_json(input)
        } else {
            Self::from_text(input)
        }
    }
}

/// Directed graph with loops derived from a [`Graph`]: both orientations of
/// every edge plus one loop per vertex, so the arc count is `2m + n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedWalkGraph {
    n: usize,
    edge_count: usize,
    out_neighbors: Vec<Vec<usize>>,
}

impl DirectedWalkGraph {
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    /// Number of arcs including loops, `2m + n`.
    pub fn arc_count(&self) -> usize {
        2 * self.edge_count + self.n
    }

    /// Non-loop out-neighbours of `u` (equals the undirected neighbourhood).
    pub fn out_neighbors(&self, u: usize) -> &[usize] {
        &self.out_neighbors[u]
    }

    /// Undirected degree of `u` (loop not counted).
    pub fn degree(&self, u: usize) -> usize {
        self.out_neighbors[u].len()
    }

    /// Out-degree including the loop.
    pub fn out_degree_with_loop(&self, u: usize) -> usize {
        self.degree(u) + 1
    }

    /// All arcs, loops first per vertex, in vertex order.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            std::iter::once((u, u)).chain(self.out_neighbors[u].iter().map(move |&v| (u, v)))
        })
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        u < self.n && (u == v || self.out_neighbors[u].binary_search(&v).is_ok())
    }
}
