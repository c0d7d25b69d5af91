//! k-means with k-means++ seeding, Lloyd iterations and seeded restarts.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Default number of independent starts.
pub const DEFAULT_RESTARTS: usize = 20;
const MAX_LLOYD_ITERATIONS: usize = 300;

#[derive(Clone, Debug, Serialize)]
pub struct KMeansResult {
    /// Cluster of every row, in `0..k`.
    pub assignments: Vec<usize>,
    /// `k × dim` centers.
    #[serde(skip)]
    pub centers: DMatrix<f64>,
    /// `Σ_x ‖V_x − center(x)‖²`.
    pub cost: f64,
    /// Start that produced the result.
    pub best_restart: usize,
    pub restarts: usize,
    /// Empty clusters re-seeded from the farthest point, over all starts.
    pub empty_cluster_repairs: usize,
}

impl KMeansResult {
    /// Membership matrix with a single 1 per row.
    pub fn membership(&self) -> DMatrix<f64> {
        let k = self.centers.nrows();
        let mut m = DMatrix::zeros(self.assignments.len(), k);
        for (x, &c) in self.assignments.iter().enumerate() {
            m[(x, c)] = 1.0;
        }
        m
    }
}

/// Seed of restart `index`, derived from `seed` by a SplitMix64 step so that
/// restarts are independent of each other and of their execution order.
pub fn restart_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn sq_dist(points: &DMatrix<f64>, x: usize, centers: &DMatrix<f64>, c: usize) -> f64 {
    (0..points.ncols()).map(|j| (points[(x, j)] - centers[(c, j)]).powi(2)).sum()
}

/// Clusters the rows of `points` into `k` groups; best of `restarts` starts.
pub fn kmeans(points: &DMatrix<f64>, k: usize, restarts: usize, seed: u64) -> Result<KMeansResult> {
    let n = points.nrows();
    if k == 0 || restarts == 0 {
        return Err(Error::InvalidArgument("k and restarts must be positive".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("no points to cluster".into()));
    }
    let mut best: Option<KMeansResult> = None;
    let mut repairs = 0;
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(seed, r as u64));
        let (assignments, centers, cost, fixed) = lloyd(points, k, &mut rng);
        repairs += fixed;
        if best.as_ref().is_none_or(|b| cost < b.cost) {
            best = Some(KMeansResult {
                assignments,
                centers,
                cost,
                best_restart: r,
                restarts,
                empty_cluster_repairs: 0,
            });
        }
    }
    let mut best = best.expect("at least one restart");
    best.empty_cluster_repairs = repairs;
    Ok(best)
}

/// k-means++ initial centers.
fn seed_centers<R: Rng>(points: &DMatrix<f64>, k: usize, rng: &mut R) -> DMatrix<f64> {
    let (n, dim) = points.shape();
    let mut centers = DMatrix::zeros(k, dim);
    let first = rng.random_range(0..n);
    centers.row_mut(0).copy_from(&points.row(first));
    let mut closest: Vec<f64> = (0..n).map(|x| sq_dist(points, x, &centers, 0)).collect();
    for c in 1..k {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (x, &w) in closest.iter().enumerate() {
                if target < w {
                    chosen = x;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centers.row_mut(c).copy_from(&points.row(pick));
        for (x, d) in closest.iter_mut().enumerate() {
            *d = d.min(sq_dist(points, x, &centers, c));
        }
    }
    centers
}

fn lloyd<R: Rng>(points: &DMatrix<f64>, k: usize, rng: &mut R) -> (Vec<usize>, DMatrix<f64>, f64, usize) {
    let (n, dim) = points.shape();
    let mut centers = seed_centers(points, k, rng);
    let mut assignments = vec![usize::MAX; n];
    let mut repairs = 0;
    for _ in 0..MAX_LLOYD_ITERATIONS {
        let mut changed = false;
        for (x, slot) in assignments.iter_mut().enumerate() {
            let mut best = (f64::INFINITY, 0);
            for c in 0..k {
                let d = sq_dist(points, x, &centers, c);
                if d < best.0 {
                    best = (d, c);
                }
            }
            if *slot != best.1 {
                *slot = best.1;
                changed = true;
            }
        }
        let mut sizes = vec![0usize; k];
        for &c in &assignments {
            sizes[c] += 1;
        }
        // Re-seed empty clusters from the point farthest from its center.
        for c in 0..k {
            if sizes[c] > 0 {
                continue;
            }
            let far = (0..n)
                .filter(|&x| sizes[assignments[x]] > 1)
                .max_by(|&a, &b| {
                    sq_dist(points, a, &centers, assignments[a])
                        .total_cmp(&sq_dist(points, b, &centers, assignments[b]))
                });
            if let Some(x) = far {
                sizes[assignments[x]] -= 1;
                assignments[x] = c;
                sizes[c] = 1;
                repairs += 1;
                changed = true;
            }
        }
        let mut sums = DMatrix::<f64>::zeros(k, dim);
        for (x, &c) in assignments.iter().enumerate() {
            for j in 0..dim {
                sums[(c, j)] += points[(x, j)];
            }
        }
        for c in 0..k {
            if sizes[c] > 0 {
                for j in 0..dim {
                    centers[(c, j)] = sums[(c, j)] / sizes[c] as f64;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let cost = (0..n).map(|x| sq_dist(points, x, &centers, assignments[x])).sum();
    (assignments, centers, cost, repairs)
}
