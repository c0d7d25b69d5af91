//! Eigenvalue histograms of symmetric operators.
//!
//! Windowed inertia: the number of eigenvalues below `x` is one inertia
//! count, so every bin holds `N(right) − N(left)` exactly, without computing
//! the spectrum.

use bethe::eig::{count_below, smallest_eigs, DEFAULT_TOL};
use bethe::operators::SymmetricOperator;
use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::output::{num, Table};

/// Default number of bins.
pub const DEFAULT_BINS: usize = 72;
/// Largest number of negative eigenvalues resolved individually.
pub const MAX_RESOLVED_NEGATIVES: usize = 64;
/// Largest dimension accepted by the dense method.
pub const DENSE_MAX: usize = 4000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HistogramMethod {
    WindowedInertia,
    Dense,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumHistogram {
    pub n: usize,
    pub method: HistogramMethod,
    pub window: [f64; 2],
    /// `bins + 1` increasing edges. Bins are `[e_b, e_{b+1})`, the last one closed.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub below_window: usize,
    pub above_window: usize,
    /// Number of eigenvalues below 0.
    pub negative_count: usize,
    /// The smallest eigenvalues below 0, ascending, at most [`MAX_RESOLVED_NEGATIVES`].
    pub negative_eigenvalues: Vec<f64>,
}

impl SpectrumHistogram {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["bin_lo", "bin_hi", "count"]);
        for (b, &c) in self.counts.iter().enumerate() {
            t.push(vec![num(self.edges[b]), num(self.edges[b + 1]), c.to_string()]);
        }
        t
    }
}

/// Gershgorin interval of `op`, widened slightly so that no eigenvalue sits
/// on its boundary.
pub fn auto_window(op: &SymmetricOperator) -> [f64; 2] {
    let (lo, hi) = op.gershgorin();
    let pad = 1e-9 * lo.abs().max(hi.abs()).max(1.0);
    [lo - pad, hi + pad]
}

fn edges(window: [f64; 2], bins: usize) -> Vec<f64> {
    let [lo, hi] = window;
    (0..=bins)
        .map(|b| if b == bins { hi } else { lo + (hi - lo) * b as f64 / bins as f64 })
        .collect()
}

fn check(window: [f64; 2], bins: usize) -> CliResult<()> {
    if bins == 0 {
        return Err(CliError::Validation("bins must be at least 1".into()));
    }
    let [lo, hi] = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(CliError::Validation(format!("invalid window [{lo}, {hi}]")));
    }
    Ok(())
}

/// Number of eigenvalues strictly below `x`.
fn below(op: &SymmetricOperator, x: f64) -> CliResult<usize> {
    Ok(count_below(op, -x)?)
}

/// Number of eigenvalues at most `x`, up to a relative 1e-9: an eigenvalue
/// exactly at a counting threshold is not counted, so the threshold is moved
/// clear of it.
fn at_most(op: &SymmetricOperator, x: f64) -> CliResult<usize> {
    below(op, x + 1e-9 * x.abs().max(1.0))
}

/// Histogram from `bins + 1` inertia counts, evaluated in parallel on the
/// current rayon pool.
pub fn windowed_inertia(op: &SymmetricOperator, window: [f64; 2], bins: usize, seed: u64) -> CliResult<SpectrumHistogram> {
    check(window, bins)?;
    let n = op.dim();
    let edges = edges(window, bins);
    let cumulative: Vec<usize> = (0..=bins)
        .into_par_iter()
        .map(|b| if b == bins { at_most(op, edges[b]) } else { below(op, edges[b]) })
        .collect::<CliResult<_>>()?;
    let counts: Vec<usize> = cumulative.windows(2).map(|w| w[1].saturating_sub(w[0])).collect();
    let negative_count = below(op, 0.0)?;
    Ok(SpectrumHistogram {
        n,
        method: HistogramMethod::WindowedInertia,
        window,
        counts,
        below_window: cumulative[0],
        above_window: n - cumulative[bins],
        negative_count,
        negative_eigenvalues: resolve_negatives(op, negative_count, seed)?,
        edges,
    })
}

fn resolve_negatives(op: &SymmetricOperator, count: usize, seed: u64) -> CliResult<Vec<f64>> {
    let k = count.min(MAX_RESOLVED_NEGATIVES);
    if k == 0 {
        return Ok(Vec::new());
    }
    Ok(smallest_eigs(op, k, DEFAULT_TOL, seed)?.values)
}

/// Histogram from the full dense spectrum.
pub fn dense(op: &SymmetricOperator, window: [f64; 2], bins: usize) -> CliResult<SpectrumHistogram> {
    check(window, bins)?;
    let n = op.dim();
    if n > DENSE_MAX {
        return Err(CliError::Validation(format!("dense histogram limited to n ≤ {DENSE_MAX}, got {n}")));
    }
    let mut spectrum: Vec<f64> = SymmetricEigen::new(op.to_dense()).eigenvalues.iter().copied().collect();
    spectrum.sort_by(f64::total_cmp);
    let edges = edges(window, bins);
    let [lo, hi] = window;
    let mut counts = vec![0usize; bins];
    let (mut below_window, mut above_window) = (0, 0);
    for &v in &spectrum {
        if v < lo {
            below_window += 1;
        } else if v > hi {
            above_window += 1;
        } else {
            // First edge strictly above v, minus one; v = hi falls in the last bin.
            let b = edges.partition_point(|&e| e <= v).saturating_sub(1).min(bins - 1);
            counts[b] += 1;
        }
    }
    let negatives: Vec<f64> = spectrum.iter().copied().filter(|&v| v < 0.0).collect();
    Ok(SpectrumHistogram {
        n,
        method: HistogramMethod::Dense,
        window,
        edges,
        counts,
        below_window,
        above_window,
        negative_count: negatives.len(),
        negative_eigenvalues: negatives.into_iter().take(MAX_RESOLVED_NEGATIVES).collect(),
    })
}
