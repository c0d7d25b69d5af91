//! Sparse undirected graphs.
//!
//! A [`SparseGraph`] stores sorted neighbor lists in compressed-row form. Every
//! undirected edge `{u, v}` appears once in the row of `u` and once in the row
//! of `v`; optional edge weights are stored alongside the neighbor indices and
//! are therefore symmetric by construction. Graphs are immutable once built.

pub mod io;

use std::collections::HashMap;

use crate::error::{Error, Result};

pub use io::{load_graph, parse_edge_list, parse_matrix_market, save_graph, GraphFormat};

/// Simple undirected graph (no self-loops, no multi-edges) in compressed-row form.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseGraph {
    n: usize,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    weights: Option<Vec<f64>>,
}

/// An edge as read from some source, with the position it came from (used for
/// error reporting).
pub(crate) struct RawEdge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
    pub line: usize,
}

impl SparseGraph {
    /// Graph on `n` vertices with no edges.
    pub fn empty(n: usize) -> Self {
        SparseGraph {
            n,
            offsets: vec![0; n + 1],
            neighbors: Vec::new(),
            weights: None,
        }
    }

    /// Builds an unweighted graph from undirected edges.
    ///
    /// Self-loops, duplicate edges (in either orientation) and out-of-range
    /// endpoints are rejected; the reported "line" is the 1-based position in
    /// `edges`.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let raw = edges
            .iter()
            .enumerate()
            .map(|(i, &(u, v))| RawEdge { u, v, w: 1.0, line: i + 1 })
            .collect();
        Self::from_raw(n, raw, false)
    }

    /// Builds a weighted graph; weights are stored symmetrically.
    pub fn from_weighted_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let raw = edges
            .iter()
            .enumerate()
            .map(|(i, &(u, v, w))| RawEdge { u, v, w, line: i + 1 })
            .collect();
        Self::from_raw(n, raw, true)
    }

    pub(crate) fn from_raw(n: usize, mut edges: Vec<RawEdge>, weighted: bool) -> Result<Self> {
        for e in &edges {
            for vertex in [e.u, e.v] {
                if vertex >= n {
                    return Err(Error::VertexOutOfRange { vertex, n });
                }
            }
            if e.u == e.v {
                return Err(Error::SelfLoopRejected { line: e.line, vertex: e.u });
            }
            if weighted && !e.w.is_finite() {
                return Err(Error::parse(e.line, format!("non-finite weight {}", e.w)));
            }
        }
        for e in edges.iter_mut() {
            if e.u > e.v {
                std::mem::swap(&mut e.u, &mut e.v);
            }
        }
        edges.sort_by_key(|e| (e.u, e.v, e.line));
        for pair in edges.windows(2) {
            if pair[0].u == pair[1].u && pair[0].v == pair[1].v {
                return Err(Error::DuplicateEdgeRejected {
                    line: pair[1].line.max(pair[0].line),
                    u: pair[1].u,
                    v: pair[1].v,
                });
            }
        }

        let mut counts = vec![0usize; n + 1];
        for e in &edges {
            counts[e.u + 1] += 1;
            counts[e.v + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let offsets = counts;
        let mut cursor = offsets.clone();
        let total = offsets[n];
        let mut neighbors = vec![0usize; total];
        let mut weights = if weighted { Some(vec![0.0; total]) } else { None };
        // Edges are sorted by (u, v) with u < v, so every row receives its
        // neighbors in increasing order.
        let mut place = |a: usize, b: usize, w: f64| {
            let slot = cursor[a];
            neighbors[slot] = b;
            if let Some(ws) = weights.as_mut() {
                ws[slot] = w;
            }
            cursor[a] += 1;
        };
        for e in &edges {
            place(e.v, e.u, e.w);
        }
        for e in &edges {
            place(e.u, e.v, e.w);
        }
        Ok(SparseGraph { n, offsets, neighbors, weights })
    }

    /// Vertex count.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of undirected edges `m`.
    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.degree(i)).collect()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|i| self.degree(i)).max().unwrap_or(0)
    }

    /// Sorted neighbors of `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Weights aligned with [`Self::neighbors`], if the graph is weighted.
    pub fn neighbor_weights(&self, i: usize) -> Option<&[f64]> {
        self.weights
            .as_ref()
            .map(|w| &w[self.offsets[i]..self.offsets[i + 1]])
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    /// Weight of edge `{u, v}`; `None` if the edge is absent. Unweighted edges weigh 1.
    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        let row = self.neighbors(u);
        let k = row.binary_search(&v).ok()?;
        Some(self.neighbor_weights(u).map_or(1.0, |w| w[k]))
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Undirected edges `(u, v, w)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |u| {
            let ws = self.neighbor_weights(u);
            self.neighbors(u)
                .iter()
                .enumerate()
                .filter(move |&(_, &v)| v > u)
                .map(move |(k, &v)| (u, v, ws.map_or(1.0, |w| w[k])))
        })
    }

    /// Sample mean degree `(d_1 + … + d_n) / n = 2m / n`; zero for `n = 0`.
    pub fn mean_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.neighbors.len() as f64 / self.n as f64
        }
    }

    /// Both orientations of every edge, ordered by `(min, max)` and then
    /// direction (`(min, max)` before `(max, min)`).
    pub fn oriented_edges(&self) -> OrientedEdgeSet {
        let mut edges = Vec::with_capacity(self.neighbors.len());
        for (u, v, _) in self.edges() {
            edges.push((u, v));
            edges.push((v, u));
        }
        let index = edges.iter().enumerate().map(|(k, &e)| (e, k)).collect();
        OrientedEdgeSet { edges, index }
    }
}

/// The `2m` oriented edges of a graph together with their positions.
#[derive(Clone, Debug)]
pub struct OrientedEdgeSet {
    edges: Vec<(usize, usize)>,
    index: HashMap<(usize, usize), usize>,
}

impl OrientedEdgeSet {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn position(&self, u: usize, v: usize) -> Option<usize> {
        self.index.get(&(u, v)).copied()
    }
}
