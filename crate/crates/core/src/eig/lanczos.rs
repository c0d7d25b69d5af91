//! Thick-restart Lanczos (symmetric Krylov-Schur) for the algebraically
//! smallest eigenpairs.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{combine, fresh_direction, norm, orthogonalize, random_unit, EigPairs, SolverMeta};
use crate::error::{Error, Result};
use crate::sparse::LinearOperator;

/// Relative size of the new Krylov direction below which the space is
/// treated as invariant.
const BREAKDOWN: f64 = 1e-12;

/// Basis size used for `k` wanted pairs on a dimension-`n` problem.
pub fn basis_size(n: usize, k: usize) -> usize {
    n.min((4 * k + 40).max(100))
}

/// The `k` algebraically smallest eigenpairs of a symmetric operator, values
/// ascending, each with `‖Mv − λv‖ ≤ tol`. The start vector is drawn from a
/// ChaCha stream seeded with `seed`; at most `5n` products are spent.
pub fn smallest_eigs<A: LinearOperator + ?Sized>(
    op: &A,
    k: usize,
    tol: f64,
    seed: u64,
) -> Result<EigPairs> {
    let n = op.dim();
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds dimension {n}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol}")));
    }
    let mut meta = SolverMeta::new(tol, seed);
    if k == 0 {
        meta.converged = true;
        return Ok(EigPairs::empty(n, meta));
    }
    let m = basis_size(n, k);
    let max_matvecs = 5 * n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    basis.push(random_unit(n, &mut rng));
    let mut g = DMatrix::<f64>::zeros(m, m);
    let mut kept = 0;
    let mut w = vec![0.0; n];
    let mut best_residual = f64::INFINITY;

    loop {
        meta.iterations += 1;
        let mut beta = 0.0;
        let mut tail: Option<Vec<f64>> = None;
        for j in kept..m {
            op.apply(&basis[j], &mut w);
            meta.matvecs += 1;
            let before = norm(&w);
            let h = orthogonalize(&basis[..=j], &mut w);
            for (i, &hi) in h.iter().enumerate() {
                g[(i, j)] = hi;
                g[(j, i)] = hi;
            }
            let b = norm(&w);
            let broke = b <= BREAKDOWN * before || b == 0.0;
            if j + 1 < m {
                if broke {
                    basis.push(fresh_direction(&basis, &mut rng));
                } else {
                    basis.push(w.iter().map(|x| x / b).collect());
                }
            } else if !broke && basis.len() < n {
                beta = b;
                tail = Some(w.iter().map(|x| x / b).collect());
            }
        }

        let eig = SymmetricEigen::new(g.clone());
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let estimate = |i: usize| (beta * eig.eigenvectors[(m - 1, i)]).abs();
        let worst = order[..k].iter().map(|&i| estimate(i)).fold(0.0, f64::max);
        best_residual = best_residual.min(worst);

        let exhausted = meta.matvecs + (m - kept.min(m)) > max_matvecs;
        if worst <= 0.5 * tol || exhausted {
            let columns: Vec<Vec<f64>> = order[..k]
                .iter()
                .map(|&i| combine(&basis[..m], eig.eigenvectors.column(i).as_slice()))
                .collect();
            let values: Vec<f64> = order[..k].iter().map(|&i| eig.eigenvalues[i]).collect();
            let pairs = EigPairs::from_columns(op, values, columns, meta.clone());
            let true_worst = pairs.residuals.iter().copied().fold(0.0, f64::max);
            if true_worst <= tol {
                let mut pairs = pairs;
                pairs.meta.converged = true;
                return Ok(pairs);
            }
            best_residual = best_residual.min(true_worst);
            if exhausted {
                return Err(Error::NoConvergence { iterations: meta.iterations, best_residual });
            }
        }

        // Thick restart on the smallest Ritz vectors.
        let Some(f) = tail else {
            // The whole space is invariant; nothing left to expand.
            return Err(Error::NoConvergence { iterations: meta.iterations, best_residual });
        };
        kept = (k + (m - k) / 2).min(m - 1).max(k);
        let mut next: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        let mut h = DMatrix::<f64>::zeros(m, m);
        for (slot, &i) in order[..kept].iter().enumerate() {
            next.push(combine(&basis[..m], eig.eigenvectors.column(i).as_slice()));
            h[(slot, slot)] = eig.eigenvalues[i];
            let coupling = beta * eig.eigenvectors[(m - 1, i)];
            h[(kept, slot)] = coupling;
            h[(slot, kept)] = coupling;
        }
        next.push(f);
        basis = next;
        g = h;
    }
}
