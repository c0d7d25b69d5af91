//! Exact eigenvalue counting through the inertia of a symmetric
//! indefinite factorization.
//!
//! The matrix `M + shift·I` is reduced by symmetric Gaussian elimination.
//! Cheap vertices are eliminated first with 1×1 pivots in minimum-degree
//! order, directly on the sparse rows; once every remaining row is dense
//! enough, the Schur complement is gathered into a dense lower triangle and
//! finished with Bunch-Kaufman pivoting. By Sylvester's law of inertia the
//! number of negative pivots (counting each indefinite 2×2 block once) is the
//! number of eigenvalues of `M` below `−shift`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use nalgebra::SymmetricEigen;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::SymmetricOperator;

/// Threshold-pivoting ratio for sparse 1×1 pivots.
const SPARSE_PIVOT_RATIO: f64 = 0.1;
/// Relative size below which a pivot is treated as zero.
const ZERO_PIVOT: f64 = 1e-13;
/// Shift perturbation applied when the threshold is (numerically) an eigenvalue.
pub const SHIFT_PERTURBATION: f64 = 1e-10;
/// Largest dimension for which a failed factorization falls back to a dense
/// eigendecomposition.
pub const DENSE_FALLBACK_MAX: usize = 1500;

/// Outcome of one counting call.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InertiaCount {
    /// Number of eigenvalues strictly below `−threshold`.
    pub count: usize,
    /// Shift actually used (differs from the request after a perturbation).
    pub shift: f64,
    /// Size of the dense Schur complement, or `n` if the dense fallback ran.
    pub dense_size: usize,
    pub perturbed: bool,
    pub dense_fallback: bool,
}

/// Number of eigenvalues of `op` strictly below `−threshold`.
pub fn count_below(op: &SymmetricOperator, threshold: f64) -> Result<usize> {
    count_below_detailed(op, threshold).map(|c| c.count)
}

/// [`count_below`] with diagnostics.
pub fn count_below_detailed(op: &SymmetricOperator, threshold: f64) -> Result<InertiaCount> {
    if !threshold.is_finite() {
        return Err(Error::InvalidArgument(format!("threshold {threshold}")));
    }
    let mut shift = threshold;
    for attempt in 0..2 {
        if let Some((count, dense_size)) = negative_inertia(op, shift) {
            return Ok(InertiaCount {
                count,
                shift,
                dense_size,
                perturbed: attempt > 0,
                dense_fallback: false,
            });
        }
        shift = threshold + SHIFT_PERTURBATION;
    }
    let n = op.dim();
    if n > DENSE_FALLBACK_MAX {
        return Err(Error::FactorizationBreakdown { shift: threshold });
    }
    let eig = SymmetricEigen::new(op.to_dense());
    let count = eig.eigenvalues.iter().filter(|&&v| v < -shift).count();
    Ok(InertiaCount { count, shift, dense_size: n, perturbed: true, dense_fallback: true })
}

/// Negative inertia of `op + shift·I` and the dense size used; `None` if a
/// pivot was numerically zero.
fn negative_inertia(op: &SymmetricOperator, shift: f64) -> Option<(usize, usize)> {
    let n = op.dim();
    if n == 0 {
        return Some((0, 0));
    }
    let scale = op.matrix().max_abs() + shift.abs();
    let zero = ZERO_PIVOT * scale.max(f64::MIN_POSITIVE);

    let mut elim = SparseElimination::new(op, shift);
    let mut negatives = elim.run(zero);
    let (mut dense, size) = elim.schur_complement();
    negatives += dense_negative_inertia(&mut dense, size, zero)?;
    Some((negatives, size))
}

/// Symmetric Schur complement kept as sorted off-diagonal rows.
struct SparseElimination {
    diag: Vec<f64>,
    cols: Vec<Vec<usize>>,
    vals: Vec<Vec<f64>>,
    /// 0 active, 1 eliminated, 2 reserved for the dense phase.
    state: Vec<u8>,
    active: usize,
}

impl SparseElimination {
    fn new(op: &SymmetricOperator, shift: f64) -> Self {
        let n = op.dim();
        let m = op.matrix();
        let mut diag = vec![shift; n];
        let mut cols = Vec::with_capacity(n);
        let mut vals = Vec::with_capacity(n);
        for (i, d) in diag.iter_mut().enumerate() {
            let (c, v) = m.row(i);
            let mut rc = Vec::with_capacity(c.len());
            let mut rv = Vec::with_capacity(c.len());
            for (&j, &x) in c.iter().zip(v) {
                if j == i {
                    *d += x;
                } else if x != 0.0 {
                    rc.push(j);
                    rv.push(x);
                }
            }
            cols.push(rc);
            vals.push(rv);
        }
        SparseElimination { diag, cols, vals, state: vec![0; n], active: n }
    }

    /// Stop the sparse phase once the cheapest pivot has this many neighbors.
    fn degree_limit(remaining: usize) -> usize {
        if remaining <= 48 {
            0
        } else {
            remaining / 6
        }
    }

    /// Eliminates vertices in minimum-degree order while it pays off;
    /// returns the number of negative pivots taken.
    fn run(&mut self, zero: f64) -> usize {
        let n = self.diag.len();
        let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
            (0..n).map(|i| Reverse((self.cols[i].len(), i))).collect();
        let mut negatives = 0;
        let mut merged_c: Vec<usize> = Vec::new();
        let mut merged_v: Vec<f64> = Vec::new();
        while let Some(Reverse((deg, p))) = heap.pop() {
            if self.state[p] != 0 || deg != self.cols[p].len() {
                continue;
            }
            if deg > Self::degree_limit(self.active) {
                break;
            }
            let d = self.diag[p];
            let row_max = self.vals[p].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if d.abs() <= zero || d.abs() < SPARSE_PIVOT_RATIO * row_max {
                self.state[p] = 2;
                continue;
            }
            if d < 0.0 {
                negatives += 1;
            }
            self.state[p] = 1;
            self.active -= 1;
            let pc = std::mem::take(&mut self.cols[p]);
            let pv = std::mem::take(&mut self.vals[p]);
            for (a, &i) in pc.iter().enumerate() {
                let l = pv[a] / d;
                self.diag[i] -= l * pv[a];
                // Row i loses column p and gains row p (without column i) scaled by −l.
                merged_c.clear();
                merged_v.clear();
                {
                    let (ic, iv) = (&self.cols[i], &self.vals[i]);
                    let (mut x, mut y) = (0, 0);
                    while x < ic.len() || y < pc.len() {
                        let cx = ic.get(x).copied().unwrap_or(usize::MAX);
                        let cy = pc.get(y).copied().unwrap_or(usize::MAX);
                        if cx < cy {
                            if cx != p {
                                merged_c.push(cx);
                                merged_v.push(iv[x]);
                            }
                            x += 1;
                        } else if cy < cx {
                            if cy != i {
                                merged_c.push(cy);
                                merged_v.push(-l * pv[y]);
                            }
                            y += 1;
                        } else {
                            merged_c.push(cx);
                            merged_v.push(iv[x] - l * pv[y]);
                            x += 1;
                            y += 1;
                        }
                    }
                }
                std::mem::swap(&mut self.cols[i], &mut merged_c);
                std::mem::swap(&mut self.vals[i], &mut merged_v);
                if self.state[i] == 0 {
                    heap.push(Reverse((self.cols[i].len(), i)));
                }
            }
        }
        negatives
    }

    /// Remaining Schur complement as a dense row-major lower triangle.
    fn schur_complement(self) -> (Vec<f64>, usize) {
        let n = self.diag.len();
        let mut map = vec![usize::MAX; n];
        let mut size = 0;
        for i in 0..n {
            if self.state[i] != 1 {
                map[i] = size;
                size += 1;
            }
        }
        let mut dense = vec![0.0; size * size];
        for i in 0..n {
            let r = map[i];
            if r == usize::MAX {
                continue;
            }
            dense[r * size + r] = self.diag[i];
            for (&j, &v) in self.cols[i].iter().zip(&self.vals[i]) {
                let c = map[j];
                debug_assert!(c != usize::MAX);
                if c < r {
                    dense[r * size + c] = v;
                }
            }
        }
        (dense, size)
    }
}

/// Swaps rows/columns `p < q` of the trailing symmetric block starting at `k`
/// (lower triangle, row-major, leading dimension `n`).
fn symmetric_swap(a: &mut [f64], n: usize, k: usize, p: usize, q: usize) {
    debug_assert!(k <= p && p < q && q < n);
    a.swap(p * n + p, q * n + q);
    for j in k..p {
        a.swap(p * n + j, q * n + j);
    }
    for j in p + 1..q {
        a.swap(j * n + p, q * n + j);
    }
    for j in q + 1..n {
        a.swap(j * n + p, j * n + q);
    }
}

/// Negative inertia of a dense symmetric matrix (lower triangle, row-major)
/// by Bunch-Kaufman factorization; destroys `a`. `None` on a zero pivot.
pub(crate) fn dense_negative_inertia(a: &mut [f64], n: usize, zero: f64) -> Option<usize> {
    let alpha = (1.0 + 17f64.sqrt()) / 8.0;
    let mut negatives = 0;
    let mut c1 = vec![0.0; n];
    let mut c2 = vec![0.0; n];
    let mut k = 0;
    while k < n {
        let akk = a[k * n + k].abs();
        let (mut r, mut colmax) = (k, 0.0f64);
        for i in k + 1..n {
            let v = a[i * n + k].abs();
            if v > colmax {
                colmax = v;
                r = i;
            }
        }
        if akk.max(colmax) <= zero {
            return None;
        }
        let mut two_by_two = false;
        if akk < alpha * colmax {
            let mut rowmax = 0.0f64;
            for j in k..r {
                rowmax = rowmax.max(a[r * n + j].abs());
            }
            for i in r + 1..n {
                rowmax = rowmax.max(a[i * n + r].abs());
            }
            if akk * rowmax >= alpha * colmax * colmax {
                // 1×1 pivot at k.
            } else if a[r * n + r].abs() >= alpha * rowmax {
                symmetric_swap(a, n, k, k, r);
            } else {
                if r != k + 1 {
                    symmetric_swap(a, n, k, k + 1, r);
                }
                two_by_two = true;
            }
        }

        if !two_by_two {
            let d = a[k * n + k];
            if d.abs() <= zero {
                return None;
            }
            if d < 0.0 {
                negatives += 1;
            }
            for i in k + 1..n {
                c1[i] = a[i * n + k];
            }
            for i in k + 1..n {
                let l = c1[i] / d;
                if l == 0.0 {
                    continue;
                }
                let row = &mut a[i * n + k + 1..=i * n + i];
                for (x, &c) in row.iter_mut().zip(&c1[k + 1..=i]) {
                    *x -= l * c;
                }
            }
            k += 1;
        } else {
            let d11 = a[k * n + k];
            let d21 = a[(k + 1) * n + k];
            let d22 = a[(k + 1) * n + k + 1];
            let det = d11 * d22 - d21 * d21;
            let mid = 0.5 * (d11 + d22);
            let rad = (0.25 * (d11 - d22) * (d11 - d22) + d21 * d21).sqrt();
            let large = mid + mid.signum() * rad;
            if large == 0.0 || (det / large).abs() <= zero {
                return None;
            }
            negatives += match (det < 0.0, d11 < 0.0) {
                (true, _) => 1,
                (false, true) => 2,
                (false, false) => 0,
            };
            for i in k + 2..n {
                c1[i] = a[i * n + k];
                c2[i] = a[i * n + k + 1];
            }
            for i in k + 2..n {
                let l1 = (c1[i] * d22 - c2[i] * d21) / det;
                let l2 = (c2[i] * d11 - c1[i] * d21) / det;
                if l1 == 0.0 && l2 == 0.0 {
                    continue;
                }
                let row = &mut a[i * n + k + 2..=i * n + i];
                for ((x, &u), &v) in row.iter_mut().zip(&c1[k + 2..=i]).zip(&c2[k + 2..=i]) {
                    *x -= l1 * u + l2 * v;
                }
            }
            k += 2;
        }
    }
    Some(negatives)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SparseGraph;
    use crate::operators::bethe_hessian;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_count(m: &DMatrix<f64>, thr: f64) -> usize {
        SymmetricEigen::new(m.clone()).eigenvalues.iter().filter(|&&v| v < -thr).count()
    }

    fn lower(m: &DMatrix<f64>) -> Vec<f64> {
        let n = m.nrows();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                a[i * n + j] = m[(i, j)];
            }
        }
        a
    }

    #[test]
    fn spec_examples() {
        let edge = SparseGraph::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(count_below(&bethe_hessian(&edge, 2.0), 0.0).unwrap(), 0);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -1.0, 3.0]));
        assert_eq!(count_below(&SymmetricOperator::from_dense(&d), 0.0).unwrap(), 2);
    }

    #[test]
    fn exact_eigenvalue_at_threshold_is_not_counted() {
        // H(0) = D − I has exact zeros at the leaves.
        let g = SparseGraph::from_edges(5, &[(0, 1), (1, 2), (1, 3)]).unwrap();
        let c = count_below_detailed(&bethe_hessian(&g, 0.0), 0.0).unwrap();
        assert_eq!(c.count, 1);
        assert!(c.perturbed);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-2.0, 0.5, 3.0]));
        assert_eq!(count_below(&SymmetricOperator::from_dense(&d), 2.0).unwrap(), 0);
        assert_eq!(count_below(&SymmetricOperator::from_dense(&d), 1.5).unwrap(), 1);
    }

    #[test]
    fn bunch_kaufman_matches_dense_on_random_indefinite() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..40 {
            let n = 1 + trial % 23;
            let mut m = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
            m = &m + m.transpose();
            if trial % 3 == 0 {
                // Zero diagonal forces 2×2 pivots.
                m.fill_diagonal(0.0);
            }
            let shift = rng.random::<f64>() - 0.5;
            let mut shifted = m.clone();
            for i in 0..n {
                shifted[(i, i)] += shift;
            }
            let mut a = lower(&shifted);
            let got = dense_negative_inertia(&mut a, n, 1e-14).unwrap();
            assert_eq!(got, dense_count(&m, shift), "trial {trial}");
        }
    }

    #[test]
    fn zero_pivot_is_detected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(dense_negative_inertia(&mut lower(&m), 2, 1e-13).is_none());
    }

    #[test]
    fn sparse_phase_matches_dense_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..20 {
            let n = 60 + 20 * trial;
            let p = 4.0 / n as f64;
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.random::<f64>() < p {
                        edges.push((u, v));
                    }
                }
            }
            let g = SparseGraph::from_edges(n, &edges).unwrap();
            for &t in &[2.0, -2.0, g.mean_degree().sqrt(), 0.5] {
                let h = bethe_hessian(&g, t);
                let thr = 0.1 * trial as f64 / 20.0;
                assert_eq!(
                    count_below(&h, thr).unwrap(),
                    dense_count(&h.to_dense(), thr),
                    "trial {trial} t {t}"
                );
            }
        }
    }
}
