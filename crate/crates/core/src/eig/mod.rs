//! Eigensolvers and spectral certificates.
//!
//! - [`smallest_eigs`]: extremal eigenpairs of a symmetric operator.
//! - [`count_below`]: exact count of eigenvalues below a threshold.
//! - [`leading_eigs_nonsym`]: real-extremal eigenpairs of the reduced
//!   non-backtracking matrix.
//! - [`subspace_distance`], [`local_weyl_certificate`],
//!   [`local_davis_kahan_certificate`]: alignment and perturbation checks.

pub mod arnoldi;
pub mod certificates;
pub mod inertia;
pub mod io;
pub mod lanczos;
pub mod procrustes;

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::LinearOperator;

pub use arnoldi::{leading_eigs_nonsym, NbEigenbundle, Side};
pub use certificates::{
    local_davis_kahan_certificate, local_weyl_certificate, DavisKahanCertificate, WeylCertificate,
};
pub use inertia::{count_below, count_below_detailed, InertiaCount};
pub use lanczos::smallest_eigs;
pub use procrustes::{subspace_distance, SubspaceDistance};

/// Default residual tolerance of the iterative solvers.
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverMeta {
    /// Restart cycles.
    pub iterations: usize,
    pub matvecs: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub threads: usize,
    pub converged: bool,
}

impl SolverMeta {
    pub(crate) fn new(tolerance: f64, seed: u64) -> Self {
        SolverMeta { iterations: 0, matvecs: 0, tolerance, seed, threads: 1, converged: false }
    }
}

/// Real eigenpairs of a symmetric operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigPairs {
    pub values: Vec<f64>,
    /// Unit columns, one per value.
    #[serde(skip, default = "empty_matrix")]
    pub vectors: DMatrix<f64>,
    /// `‖Mv − λv‖` per pair.
    pub residuals: Vec<f64>,
    pub meta: SolverMeta,
}

fn empty_matrix() -> DMatrix<f64> {
    DMatrix::zeros(0, 0)
}

impl EigPairs {
    pub(crate) fn empty(n: usize, meta: SolverMeta) -> Self {
        EigPairs { values: Vec::new(), vectors: DMatrix::zeros(n, 0), residuals: Vec::new(), meta }
    }

    /// Normalizes the columns, fixes their sign (first entry of largest
    /// magnitude positive) and measures residuals against `op`.
    pub(crate) fn from_columns<A: LinearOperator + ?Sized>(
        op: &A,
        values: Vec<f64>,
        mut columns: Vec<Vec<f64>>,
        meta: SolverMeta,
    ) -> Self {
        let n = op.dim();
        let mut residuals = Vec::with_capacity(values.len());
        let mut mv = vec![0.0; n];
        for (col, &lambda) in columns.iter_mut().zip(&values) {
            let nrm = norm(col);
            let sign = if col[argmax_abs(col)] < 0.0 { -1.0 } else { 1.0 };
            col.iter_mut().for_each(|x| *x *= sign / nrm);
            op.apply(col, &mut mv);
            residuals.push(
                mv.iter().zip(col.iter()).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt(),
            );
        }
        let vectors = DMatrix::from_fn(n, columns.len(), |i, j| columns[j][i]);
        EigPairs { values, vectors, residuals, meta }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `max |VᵀV − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let k = self.vectors.ncols();
        let gram = self.vectors.transpose() * &self.vectors;
        (gram - DMatrix::identity(k, k)).amax()
    }
}

/// All eigenvalues of a small dense non-symmetric matrix, unordered.
///
/// Goes through faer's Hessenberg QR, which converges on the highly
/// defective matrices (forests, isolated vertices) where nalgebra's real
/// Schur iteration can stall indefinitely.
pub fn general_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("{}×{} matrix", m.nrows(), m.ncols())));
    }
    let f = faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let values = f
        .eigenvalues()
        .map_err(|_| Error::NoConvergence { iterations: 0, best_residual: f64::INFINITY })?;
    Ok(values.into_iter().map(|z| Complex::new(z.re, z.im)).collect())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn argmax_abs(a: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in a.iter().enumerate() {
        if v.abs() > a[best].abs() {
            best = i;
        }
    }
    best
}

pub(crate) fn random_unit<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let nrm = norm(&v);
        if nrm > 0.0 {
            return v.into_iter().map(|x| x / nrm).collect();
        }
    }
}

/// Classical Gram-Schmidt applied twice; returns the projection coefficients.
pub(crate) fn orthogonalize(basis: &[Vec<f64>], w: &mut [f64]) -> Vec<f64> {
    let mut h = vec![0.0; basis.len()];
    for _ in 0..2 {
        let c: Vec<f64> = basis.iter().map(|v| dot(v, w)).collect();
        for (v, &ci) in basis.iter().zip(&c) {
            for (x, &y) in w.iter_mut().zip(v) {
                *x -= ci * y;
            }
        }
        h.iter_mut().zip(&c).for_each(|(a, b)| *a += b);
    }
    h
}

/// A random unit vector orthogonal to `basis` (which must not span everything).
pub(crate) fn fresh_direction<R: Rng>(basis: &[Vec<f64>], rng: &mut R) -> Vec<f64> {
    let n = basis.first().map_or(0, |v| v.len());
    loop {
        let mut v = random_unit(n, rng);
        orthogonalize(basis, &mut v);
        let nrm = norm(&v);
        if nrm > 1e-8 {
            return v.into_iter().map(|x| x / nrm).collect();
        }
    }
}

/// `Σ_l coeffs[l] · basis[l]`.
pub(crate) fn combine(basis: &[Vec<f64>], coeffs: &[f64]) -> Vec<f64> {
    let n = basis.first().map_or(0, |v| v.len());
    let mut out = vec![0.0; n];
    for (v, &c) in basis.iter().zip(coeffs) {
        if c != 0.0 {
            for (o, &x) in out.iter_mut().zip(v) {
                *o += c * x;
            }
        }
    }
    out
}
