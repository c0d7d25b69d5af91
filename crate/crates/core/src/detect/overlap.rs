//! Overlap between labelings, maximized over label permutations.

use crate::error::{Error, Result};

/// Fraction of vertices on which `sigma_hat` agrees with `sigma` after the
/// best relabeling of `sigma`. Alphabets of different size are padded with
/// unused labels; the optimum is found by the Hungarian method on the
/// confusion matrix.
pub fn overlap(sigma: &[usize], sigma_hat: &[usize]) -> Result<f64> {
    if sigma.len() != sigma_hat.len() {
        return Err(Error::LengthMismatch { left: sigma.len(), right: sigma_hat.len() });
    }
    if sigma.is_empty() {
        return Err(Error::InvalidArgument("empty labelings".into()));
    }
    let confusion = confusion_matrix(sigma, sigma_hat);
    let r = confusion.len();
    let max = confusion.iter().flatten().copied().max().unwrap_or(0) as i64;
    let cost: Vec<Vec<i64>> = confusion
        .iter()
        .map(|row| row.iter().map(|&c| max - c as i64).collect())
        .collect();
    let assignment = hungarian(&cost);
    let agree: usize = (0..r).map(|i| confusion[i][assignment[i]]).sum();
    Ok(agree as f64 / sigma.len() as f64)
}

/// Square `r × r` counts `C[a][b] = #{x : σ(x) = a, σ̂(x) = b}`.
pub fn confusion_matrix(sigma: &[usize], sigma_hat: &[usize]) -> Vec<Vec<usize>> {
    let r = sigma.iter().chain(sigma_hat).copied().max().map_or(0, |m| m + 1);
    let mut c = vec![vec![0usize; r]; r];
    for (&a, &b) in sigma.iter().zip(sigma_hat) {
        c[a][b] += 1;
    }
    c
}

/// Minimum-cost perfect matching on a square matrix; returns the column
/// assigned to every row. O(r³) shortest augmenting paths with potentials.
pub fn hungarian(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    const INF: i64 = i64::MAX / 4;
    // 1-based arrays; index 0 is a sentinel.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}
