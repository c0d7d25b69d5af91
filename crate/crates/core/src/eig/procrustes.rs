//! Orthogonal Procrustes alignment of two column spaces.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// Singular values of `YᵀV` below this flag a rank-deficient overlap.
pub const RANK_DEFICIENT: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct SubspaceDistance {
    /// `min_O ‖V − YO‖_F` over orthogonal `O`.
    pub distance: f64,
    #[serde(skip)]
    pub rotation: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    /// Smallest singular value of `YᵀV` fell below [`RANK_DEFICIENT`].
    pub rank_deficient: bool,
}

/// `min_O ‖V − YO‖_F` over orthogonal `k×k` matrices `O`, with the minimizer.
///
/// With `YᵀV = UΣWᵀ` the optimum is `O = UWᵀ`.
pub fn subspace_distance(v: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<SubspaceDistance> {
    if v.ncols() != y.ncols() || v.nrows() != y.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "V is {}×{}, Y is {}×{}",
            v.nrows(),
            v.ncols(),
            y.nrows(),
            y.ncols()
        )));
    }
    let k = v.ncols();
    if k == 0 {
        return Ok(SubspaceDistance {
            distance: 0.0,
            rotation: DMatrix::zeros(0, 0),
            singular_values: Vec::new(),
            rank_deficient: false,
        });
    }
    let overlap = y.transpose() * v;
    let svd = overlap.svd(true, true);
    let u = svd.u.expect("requested U");
    let wt = svd.v_t.expect("requested Vᵀ");
    let rotation = u * wt;
    let distance = (v - y * &rotation).norm();
    let mut singular_values: Vec<f64> = svd.singular_values.iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let rank_deficient = singular_values.last().is_some_and(|&s| s < RANK_DEFICIENT);
    Ok(SubspaceDistance { distance, rotation, singular_values, rank_deficient })
}
