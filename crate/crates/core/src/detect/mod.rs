//! Community detection with the Bethe-Hessian and theory-vs-measurement
//! reports.
//!
//! [`cluster`] runs the full pipeline: the mean degree `d̂` gives the two
//! operators `H(±√d̂)`; their eigenvalues below `−ε` are counted exactly; the
//! matching eigenvectors form the embedding, whose rows are grouped by
//! k-means with as many clusters as eigenvalues were found.

pub mod kmeans;
pub mod labels;
pub mod overlap;
pub mod theory;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::eig::{count_below, smallest_eigs, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use crate::model::Sign;
use crate::operators::bethe_hessian;

pub use kmeans::{kmeans, KMeansResult, DEFAULT_RESTARTS};
pub use labels::{format_labels, load_labels, parse_labels, save_labels};
pub use overlap::overlap;
pub use theory::{theory_report, TheoryConfig, TheoryReport};

/// `1 / ln n`, the default counting margin.
pub fn default_epsilon(n: usize) -> f64 {
    1.0 / (n as f64).ln()
}

/// Estimated numbers of positive and negative communities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountEstimate {
    pub d_hat: f64,
    pub epsilon: f64,
    pub r_plus: usize,
    pub r_minus: usize,
}

impl CountEstimate {
    pub fn r(&self) -> usize {
        self.r_plus + self.r_minus
    }

    pub fn count(&self, sign: Sign) -> usize {
        match sign {
            Sign::Plus => self.r_plus,
            Sign::Minus => self.r_minus,
        }
    }
}

fn check_degree(graph: &SparseGraph) -> Result<f64> {
    if graph.n() < 2 {
        return Err(Error::InvalidArgument(format!("graph has {} vertices", graph.n())));
    }
    let d_hat = graph.mean_degree();
    if d_hat <= 1.0 {
        return Err(Error::SubcriticalDegree { degree: d_hat });
    }
    Ok(d_hat)
}

fn resolve_epsilon(graph: &SparseGraph, epsilon: Option<f64>) -> Result<f64> {
    let eps = epsilon.unwrap_or_else(|| default_epsilon(graph.n()));
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::InvalidArgument(format!("epsilon {eps}")));
    }
    Ok(eps)
}

/// Counts eigenvalues of `H(±√d̂)` strictly below `−ε` (default `ε = 1/ln n`).
pub fn estimate_counts(graph: &SparseGraph, epsilon: Option<f64>) -> Result<CountEstimate> {
    let d_hat = check_degree(graph)?;
    let epsilon = resolve_epsilon(graph, epsilon)?;
    let t = d_hat.sqrt();
    Ok(CountEstimate {
        d_hat,
        epsilon,
        r_plus: count_below(&bethe_hessian(graph, t), epsilon)?,
        r_minus: count_below(&bethe_hessian(graph, -t), epsilon)?,
    })
}

/// Spectral embedding from the two Bethe-Hessians.
#[derive(Clone, Debug)]
pub struct Embedding {
    /// Unit eigenvectors of `H(√d̂)`, eigenvalues ascending.
    pub v_plus: DMatrix<f64>,
    pub values_plus: Vec<f64>,
    /// Unit eigenvectors of `H(−√d̂)`, eigenvalues ascending.
    pub v_minus: DMatrix<f64>,
    pub values_minus: Vec<f64>,
}

impl Embedding {
    /// `[V₊, V₋]`.
    pub fn concatenated(&self) -> DMatrix<f64> {
        let n = self.v_plus.nrows();
        let (a, b) = (self.v_plus.ncols(), self.v_minus.ncols());
        let mut v = DMatrix::zeros(n, a + b);
        v.view_mut((0, 0), (n, a)).copy_from(&self.v_plus);
        v.view_mut((0, a), (n, b)).copy_from(&self.v_minus);
        v
    }
}

/// The `r±` smallest eigenpairs of `H(±√d̂)`.
pub fn embed(graph: &SparseGraph, counts: &CountEstimate, tol: f64, seed: u64) -> Result<Embedding> {
    let t = counts.d_hat.sqrt();
    let plus = smallest_eigs(&bethe_hessian(graph, t), counts.r_plus, tol, seed)?;
    let minus = smallest_eigs(&bethe_hessian(graph, -t), counts.r_minus, tol, seed.wrapping_add(1))?;
    Ok(Embedding {
        v_plus: plus.vectors,
        values_plus: plus.values,
        v_minus: minus.vectors,
        values_minus: minus.values,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterConfig {
    /// Counting margin; `None` means `1/ln n`.
    pub epsilon: Option<f64>,
    pub tol: f64,
    pub seed: u64,
    pub restarts: usize,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig { epsilon: None, tol: DEFAULT_TOL, seed: 0, restarts: DEFAULT_RESTARTS }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DetectionFlag {
    /// No eigenvalue fell below `−ε`; every vertex got label 0.
    NoInformativeEigenvalues,
}

#[derive(Clone, Debug, Serialize)]
pub struct DetectionResult {
    pub d_hat: f64,
    pub epsilon: f64,
    pub r_hat_plus: usize,
    pub r_hat_minus: usize,
    pub r_hat: usize,
    pub eigenvalues_plus: Vec<f64>,
    pub eigenvalues_minus: Vec<f64>,
    #[serde(skip)]
    pub v_plus: DMatrix<f64>,
    #[serde(skip)]
    pub v_minus: DMatrix<f64>,
    /// 0-based labels in `0..max(r̂, 1)`.
    pub sigma_hat: Vec<usize>,
    pub kmeans_cost: f64,
    pub kmeans_restarts: usize,
    pub empty_cluster_repairs: usize,
    pub seed: u64,
    pub flags: Vec<DetectionFlag>,
}

impl DetectionResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Counts, embeds and clusters; the number of clusters is the estimated `r̂`.
pub fn cluster(graph: &SparseGraph, config: &ClusterConfig) -> Result<DetectionResult> {
    let counts = estimate_counts(graph, config.epsilon)?;
    let n = graph.n();
    let embedding = embed(graph, &counts, config.tol, config.seed)?;
    let mut result = DetectionResult {
        d_hat: counts.d_hat,
        epsilon: counts.epsilon,
        r_hat_plus: counts.r_plus,
        r_hat_minus: counts.r_minus,
        r_hat: counts.r(),
        eigenvalues_plus: embedding.values_plus.clone(),
        eigenvalues_minus: embedding.values_minus.clone(),
        v_plus: embedding.v_plus.clone(),
        v_minus: embedding.v_minus.clone(),
        sigma_hat: vec![0; n],
        kmeans_cost: 0.0,
        kmeans_restarts: 0,
        empty_cluster_repairs: 0,
        seed: config.seed,
        flags: Vec::new(),
    };
    if counts.r() == 0 {
        result.flags.push(DetectionFlag::NoInformativeEigenvalues);
        return Ok(result);
    }
    let km = kmeans(&embedding.concatenated(), counts.r(), config.restarts, config.seed)?;
    result.sigma_hat = km.assignments;
    result.kmeans_cost = km.cost;
    result.kmeans_restarts = km.restarts;
    result.empty_cluster_repairs = km.empty_cluster_repairs;
    Ok(result)
}
