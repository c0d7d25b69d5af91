#![allow(dead_code)]

use bethe::graph::SparseGraph;
use bethe::model::{sample_graph, LabeledGraph, ModelParams};
use nalgebra::{Complex, DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random connected graph: a random spanning tree plus `extra` random edges.
pub fn connected_graph(n: usize, extra: usize, seed: u64) -> SparseGraph {
    let mut rng = rng(seed);
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.random_range(0..v), v));
    }
    let mut attempts = 0;
    while edges.len() < n - 1 + extra && attempts < 1000 {
        attempts += 1;
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        let (u, v) = (a.min(b), a.max(b));
        if u != v && !edges.contains(&(u, v)) {
            edges.push((u, v));
        }
    }
    SparseGraph::from_edges(n, &edges).unwrap()
}

/// Erdős–Rényi style graph with expected degree `d`; may be disconnected.
pub fn random_graph(n: usize, d: f64, seed: u64) -> SparseGraph {
    let mut rng = rng(seed);
    let p = (d / n as f64).min(1.0);
    let mut edges = Vec::new();
    for v in 0..n {
        for u in 0..v {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    SparseGraph::from_edges(n, &edges).unwrap()
}

pub fn sbm(p11: f64, p12: f64, n: usize, seed: u64) -> LabeledGraph {
    let p = DMatrix::from_row_slice(2, 2, &[p11, p12, p12, p11]);
    sample_graph(&ModelParams::new(p, vec![0.5, 0.5], n).unwrap(), seed)
}

pub fn adjacency(g: &SparseGraph) -> DMatrix<f64> {
    DMatrix::from_fn(g.n(), g.n(), |i, j| if g.has_edge(i, j) { 1.0 } else { 0.0 })
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn dense_spectrum(m: DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn dense_count_below(m: DMatrix<f64>, threshold: f64) -> usize {
    dense_spectrum(m).into_iter().filter(|&v| v < threshold).count()
}

/// Eigenvalues of a general real matrix.
pub fn general_spectrum(m: DMatrix<f64>) -> Vec<Complex<f64>> {
    bethe::eig::general_eigenvalues(&m).unwrap()
}

/// Random symmetric matrix with entries uniform in `[-1, 1]`.
pub fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    (&m + m.transpose()) * 0.5
}
