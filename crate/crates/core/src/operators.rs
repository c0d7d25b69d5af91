//! Bethe-Hessian and non-backtracking operators, assembled explicitly.

use std::io::Write;

use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use crate::sparse::{CsrMatrix, LinearOperator};

/// Largest graph accepted by the dense determinant checks.
pub const DENSE_MAX_VERTICES: usize = 12;
pub const DENSE_MAX_EDGES: usize = 20;

/// Where a symmetric operator came from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum SymmetricOrigin {
    BetheHessian { t: f64 },
    WeightedBetheHessian { t: f64 },
    Explicit,
}

/// Sparse real symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymmetricOperator {
    matrix: CsrMatrix,
    origin: SymmetricOrigin,
}

impl SymmetricOperator {
    /// Wraps a matrix, rejecting it unless it is exactly symmetric.
    pub fn from_csr(matrix: CsrMatrix) -> Result<Self> {
        if matrix.asymmetry() != 0.0 {
            return Err(Error::InvalidArgument("matrix is not symmetric".into()));
        }
        Ok(SymmetricOperator { matrix, origin: SymmetricOrigin::Explicit })
    }

    /// Symmetric part `(M + Mᵀ)/2` of a dense matrix.
    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let sym = (m + m.transpose()) * 0.5;
        SymmetricOperator {
            matrix: CsrMatrix::from_dense(&sym),
            origin: SymmetricOrigin::Explicit,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn origin(&self) -> SymmetricOrigin {
        self.origin
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.matrix.to_dense()
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        if n == 0 {
            return (0.0, 0.0);
        }
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            let (cols, vals) = self.matrix.row(i);
            let mut center = 0.0;
            let mut radius = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                if j == i {
                    center = v;
                } else {
                    radius += v.abs();
                }
            }
            lo = lo.min(center - radius);
            hi = hi.max(center + radius);
        }
        (lo, hi)
    }

    pub fn write_matrix_market<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        self.matrix.write_matrix_market(out, true)
    }
}

impl LinearOperator for SymmetricOperator {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matrix.mul_vec_into(x, y)
    }
}

/// Block structure of a non-symmetric operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum GeneralStructure {
    /// `[[0, D − I], [−I, A]]` of size `2n`.
    ReducedNonBacktracking { n: usize },
    /// Oriented-edge operator of size `2m`.
    NonBacktracking { m: usize },
    Explicit,
}

/// Sparse real square matrix without symmetry.
#[derive(Clone, Debug)]
pub struct GeneralOperator {
    matrix: CsrMatrix,
    structure: GeneralStructure,
}

impl GeneralOperator {
    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        GeneralOperator {
            matrix: CsrMatrix::from_dense(m),
            structure: GeneralStructure::Explicit,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn structure(&self) -> GeneralStructure {
        self.structure
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.matrix.to_dense()
    }

    pub fn write_matrix_market<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        self.matrix.write_matrix_market(out, false)
    }
}

impl LinearOperator for GeneralOperator {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matrix.mul_vec_into(x, y)
    }
}

/// `H(t) = t²I − tA + (D − I)`.
pub fn bethe_hessian(graph: &SparseGraph, t: f64) -> SymmetricOperator {
    let n = graph.n();
    let mut triplets = Vec::with_capacity(n + 2 * graph.num_edges());
    for i in 0..n {
        triplets.push((i, i, t * t + graph.degree(i) as f64 - 1.0));
        if t != 0.0 {
            triplets.extend(graph.neighbors(i).iter().map(|&j| (i, j, -t)));
        }
    }
    SymmetricOperator {
        matrix: CsrMatrix::from_triplets(n, n, triplets),
        origin: SymmetricOrigin::BetheHessian { t },
    }
}

fn is_pole(t2: f64, w2: f64) -> bool {
    (t2 - w2).abs() <= 4.0 * f64::EPSILON * t2.max(w2)
}

/// Weighted Bethe-Hessian:
/// `H_ij = δ_ij (1 + Σ_{k∼i} w_ik²/(t² − w_ik²)) − t w_ij A_ij/(t² − w_ij²)`.
/// Unweighted graphs use unit weights.
pub fn weighted_bethe_hessian(graph: &SparseGraph, t: f64) -> Result<SymmetricOperator> {
    let n = graph.n();
    let t2 = t * t;
    let mut triplets = Vec::with_capacity(n + 2 * graph.num_edges());
    for i in 0..n {
        let weights = graph.neighbor_weights(i);
        let mut diag = 1.0;
        for (k, &j) in graph.neighbors(i).iter().enumerate() {
            let w = weights.map_or(1.0, |ws| ws[k]);
            let w2 = w * w;
            if is_pole(t2, w2) {
                return Err(Error::PoleAtWeight { u: i.min(j), v: i.max(j), weight_sq: w2 });
            }
            let denom = t2 - w2;
            diag += w2 / denom;
            triplets.push((i, j, -t * w / denom));
        }
        triplets.push((i, i, diag));
    }
    Ok(SymmetricOperator {
        matrix: CsrMatrix::from_triplets(n, n, triplets),
        origin: SymmetricOrigin::WeightedBetheHessian { t },
    })
}

/// `B̃ = [[0, D − I], [−I, A]]`, of size `2n`.
pub fn reduced_nb(graph: &SparseGraph) -> GeneralOperator {
    let n = graph.n();
    let mut triplets = Vec::with_capacity(3 * n + 2 * graph.num_edges());
    for i in 0..n {
        let deg = graph.degree(i) as f64;
        if deg != 1.0 {
            triplets.push((i, n + i, deg - 1.0));
        }
        triplets.push((n + i, i, -1.0));
        triplets.extend(graph.neighbors(i).iter().map(|&j| (n + i, n + j, 1.0)));
    }
    GeneralOperator {
        matrix: CsrMatrix::from_triplets(2 * n, 2 * n, triplets),
        structure: GeneralStructure::ReducedNonBacktracking { n },
    }
}

/// Non-backtracking matrix on oriented edges (ordered as in
/// [`SparseGraph::oriented_edges`]): `B_{(u,v),(x,y)} = 1` iff `v = x` and `u ≠ y`.
pub fn full_nb(graph: &SparseGraph) -> GeneralOperator {
    let oriented = graph.oriented_edges();
    let size = oriented.len();
    let mut triplets = Vec::new();
    for (row, &(u, v)) in oriented.edges().iter().enumerate() {
        for &y in graph.neighbors(v) {
            if y != u {
                let col = oriented.position(v, y).expect("oriented edge exists");
                triplets.push((row, col, 1.0));
            }
        }
    }
    GeneralOperator {
        matrix: CsrMatrix::from_triplets(size, size, triplets),
        structure: GeneralStructure::NonBacktracking { m: graph.num_edges() },
    }
}

type C64 = Complex<f64>;

fn complex_dense(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|v| C64::new(v, 0.0))
}

fn shifted_det(m: &DMatrix<f64>, z: C64) -> C64 {
    let mut c = complex_dense(m);
    for i in 0..c.nrows() {
        c[(i, i)] -= z;
    }
    c.determinant()
}

fn relative_gap(a: C64, b: C64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

/// Checks `det(B − zI) = (z² − 1)^{m−n} det(z²I − zA + D − I)` and
/// `det(B − zI) = (z² − 1)^{m−n} det(B̃ − zI)` at every sample; returns the
/// largest relative residual of the two identities.
pub fn ihara_bass_residual(graph: &SparseGraph, z_samples: &[C64]) -> Result<f64> {
    let (n, m) = (graph.n(), graph.num_edges());
    if n > DENSE_MAX_VERTICES || m > DENSE_MAX_EDGES {
        return Err(Error::TooLargeForDense { n, m });
    }
    let b = full_nb(graph).to_dense();
    let b_red = reduced_nb(graph).to_dense();
    let adj = DMatrix::from_fn(n, n, |i, j| if graph.has_edge(i, j) { 1.0 } else { 0.0 });
    let mut worst: f64 = 0.0;
    for &z in z_samples {
        let z2m1 = z * z - 1.0;
        if z2m1.norm() <= 1e-12 {
            return Err(Error::TrivialSample(format!("{z}")));
        }
        let lhs = shifted_det(&b, z);
        let factor = z2m1.powi(m as i32 - n as i32);
        let mut h = complex_dense(&adj).map(|a| -a * z);
        for i in 0..n {
            h[(i, i)] += z * z + (graph.degree(i) as f64 - 1.0);
        }
        let ihara = factor * h.determinant();
        let reduced = factor * shifted_det(&b_red, z);
        worst = worst.max(relative_gap(lhs, ihara)).max(relative_gap(lhs, reduced));
    }
    Ok(worst)
}

/// Largest entrywise residual of
/// `H(t)/t − H(t')/t' = (t − t')(I − (D − I)/(tt'))`, relative to the size of
/// the two sides.
pub fn deformed_difference_check(graph: &SparseGraph, t: f64, t_prime: f64) -> Result<f64> {
    if t == 0.0 || t_prime == 0.0 {
        return Err(Error::ZeroParameter);
    }
    let h1 = bethe_hessian(graph, t);
    let h2 = bethe_hessian(graph, t_prime);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for i in 0..graph.n() {
        let (cols1, vals1) = h1.matrix().row(i);
        let (cols2, vals2) = h2.matrix().row(i);
        let deg_m1 = graph.degree(i) as f64 - 1.0;
        // Same sparsity pattern in both rows (diagonal plus neighbors).
        debug_assert_eq!(cols1, cols2);
        for ((&j, &a), &b) in cols1.iter().zip(vals1).zip(vals2) {
            let lhs = a / t - b / t_prime;
            let rhs = if j == i {
                (t - t_prime) * (1.0 - deg_m1 / (t * t_prime))
            } else {
                0.0
            };
            scale = scale.max(lhs.abs()).max(rhs.abs());
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Ok(worst / scale)
}
