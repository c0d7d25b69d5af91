//! Residual-based perturbation certificates for symmetric matrices.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::inertia::DENSE_FALLBACK_MAX;
use crate::error::{Error, Result};
use crate::operators::SymmetricOperator;
use crate::sparse::LinearOperator;

#[derive(Clone, Debug, Serialize)]
pub struct WeylCertificate {
    /// `max_i ‖Mv_i − λ_i v_i‖`.
    pub epsilon: f64,
    /// `2√k·ε`.
    pub bound: f64,
    /// Distinct true eigenvalues matched to the `λ_i` within the bound, when
    /// the dense spectrum was affordable.
    pub matched: Option<Vec<f64>>,
    /// Whether the dense check succeeded (`None` if skipped).
    pub holds: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DavisKahanCertificate {
    /// `‖Mv − λv‖`.
    pub epsilon: f64,
    /// `dist(λ, Sp(M restricted to E⊥))`.
    pub gap: f64,
    /// `ε / gap`.
    pub bound: f64,
    /// Measured `dist(v, E) = ‖v − EEᵀv‖`.
    pub distance: f64,
    pub holds: bool,
}

fn residual(op: &SymmetricOperator, lambda: f64, v: &[f64]) -> f64 {
    let mut mv = vec![0.0; v.len()];
    op.apply(v, &mut mv);
    mv.iter().zip(v).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt()
}

fn check_orthonormal(vectors: &DMatrix<f64>) -> Result<()> {
    let k = vectors.ncols();
    let err = (vectors.transpose() * vectors - DMatrix::identity(k, k)).amax();
    if err > 1e-8 {
        return Err(Error::InvalidArgument(format!("vectors are not orthonormal (error {err:e})")));
    }
    Ok(())
}

/// For orthonormal `v_i` with `‖Mv_i − λ_i v_i‖ ≤ ε`, `M` has `k` eigenvalues
/// `ν_i` with `|λ_i − ν_i| ≤ 2√k·ε`. The matching is checked against the full
/// spectrum when `n` is at most 1500.
pub fn local_weyl_certificate(
    op: &SymmetricOperator,
    values: &[f64],
    vectors: &DMatrix<f64>,
) -> Result<WeylCertificate> {
    let (n, k) = (op.dim(), values.len());
    if vectors.nrows() != n || vectors.ncols() != k {
        return Err(Error::DimensionMismatch(format!(
            "{k} values, vectors {}×{}, operator dimension {n}",
            vectors.nrows(),
            vectors.ncols()
        )));
    }
    check_orthonormal(vectors)?;
    let epsilon = values
        .iter()
        .enumerate()
        .map(|(i, &l)| residual(op, l, vectors.column(i).as_slice()))
        .fold(0.0, f64::max);
    let bound = 2.0 * (k as f64).sqrt() * epsilon;
    if n > DENSE_FALLBACK_MAX {
        return Ok(WeylCertificate { epsilon, bound, matched: None, holds: None });
    }
    let mut spectrum: Vec<f64> = SymmetricEigen::new(op.to_dense()).eigenvalues.iter().copied().collect();
    spectrum.sort_by(f64::total_cmp);
    let slack = 1e-12 * (1.0 + spectrum.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    let matched = match_within(values, &spectrum, bound + slack);
    let holds = matched.is_some();
    Ok(WeylCertificate { epsilon, bound, matched, holds: Some(holds) })
}

/// Assigns distinct sorted `spectrum` entries to `targets` with
/// `|target − ν| ≤ radius`. All windows have equal width, so taking targets in
/// increasing order and always the smallest admissible free eigenvalue is
/// optimal.
fn match_within(targets: &[f64], spectrum: &[f64], radius: f64) -> Option<Vec<f64>> {
    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.sort_by(|&a, &b| targets[a].total_cmp(&targets[b]));
    let mut out = vec![0.0; targets.len()];
    let mut next = 0;
    for i in order {
        let t = targets[i];
        while next < spectrum.len() && spectrum[next] < t - radius {
            next += 1;
        }
        if next == spectrum.len() || spectrum[next] > t + radius {
            return None;
        }
        out[i] = spectrum[next];
        next += 1;
    }
    Some(out)
}

/// For an `M`-stable subspace `E` (orthonormal columns) and a unit `v` with
/// `‖Mv − λv‖ = ε`, `dist(v, E) ≤ ε / dist(λ, Sp(M|E⊥))`. The complementary
/// spectrum is computed densely, so `n` is limited to 1500.
pub fn local_davis_kahan_certificate(
    op: &SymmetricOperator,
    v: &[f64],
    lambda: f64,
    e: &DMatrix<f64>,
) -> Result<DavisKahanCertificate> {
    let n = op.dim();
    if v.len() != n || e.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "operator dimension {n}, vector {}, subspace rows {}",
            v.len(),
            e.nrows()
        )));
    }
    if n > DENSE_FALLBACK_MAX {
        return Err(Error::TooLargeForDense { n, m: 0 });
    }
    check_orthonormal(e)?;
    let q = e.ncols();
    let m = op.to_dense();
    let scale = m.amax().max(1.0);
    let me = &m * e;
    let leak = (&me - e * (e.transpose() * &me)).amax();
    if leak > 1e-8 * scale {
        return Err(Error::InvalidArgument(format!("subspace is not invariant (leak {leak:e})")));
    }

    let mut stacked = DMatrix::zeros(n, q + n);
    stacked.view_mut((0, 0), (n, q)).copy_from(e);
    stacked.view_mut((0, q), (n, n)).fill_with_identity();
    let full_q = stacked.qr().q();
    let complement = full_q.columns(q, n - q).into_owned();
    let restricted = complement.transpose() * &m * &complement;
    let gap = SymmetricEigen::new(restricted)
        .eigenvalues
        .iter()
        .map(|&mu| (mu - lambda).abs())
        .fold(f64::INFINITY, f64::min);
    if gap <= 1e-12 * scale {
        return Err(Error::GapZero { lambda });
    }

    let epsilon = residual(op, lambda, v);
    let bound = epsilon / gap;
    let vv = nalgebra::DVector::from_column_slice(v);
    let distance = (&vv - e * (e.transpose() * &vv)).norm();
    let holds = distance <= bound * (1.0 + 1e-9) + 1e-12;
    Ok(DavisKahanCertificate { epsilon, gap, bound, distance, holds })
}
