//! Stochastic block model parameters, their signal spectrum, closed-form
//! predictions, and graph sampling.

use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SparseGraph;

const SYMMETRY_TOL: f64 = 1e-12;
const SIMPLEX_TOL: f64 = 1e-9;
const ROW_SUM_TOL: f64 = 1e-9;

/// On-disk model description: `{"P": [[...]], "pi": [...], "n": N}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    pub pi: Vec<f64>,
    pub n: usize,
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    /// Full validation, including the `d > 1` requirement.
    pub fn validate(&self) -> Result<ModelParams> {
        ModelParams::new(to_matrix(&self.p)?, self.pi.clone(), self.n)
    }

    /// Validation without the `d > 1` requirement; enough for sampling.
    pub fn for_sampling(&self) -> Result<ModelParams> {
        ModelParams::for_sampling(to_matrix(&self.p)?, self.pi.clone(), self.n)
    }
}

fn to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let r = rows.len();
    if r == 0 {
        return Err(Error::DimensionMismatch("P has no rows".into()));
    }
    if let Some(bad) = rows.iter().find(|row| row.len() != r) {
        return Err(Error::DimensionMismatch(format!(
            "P row has {} entries, expected {r}",
            bad.len()
        )));
    }
    Ok(DMatrix::from_fn(r, r, |i, j| rows[i][j]))
}

/// Validated SBM parameters: intensity matrix `P`, block fractions `π`, size `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    p: DMatrix<f64>,
    pi: Vec<f64>,
    n: usize,
    d: f64,
}

impl ModelParams {
    /// Validates `(P, π, n)` and computes the common row sum `d` of `PΠ`.
    pub fn new(p: DMatrix<f64>, pi: Vec<f64>, n: usize) -> Result<Self> {
        let params = Self::for_sampling(p, pi, n)?;
        if params.d <= 1.0 {
            return Err(Error::SubcriticalDegree { degree: params.d });
        }
        Ok(params)
    }

    /// Same checks as [`ModelParams::new`] except that `d ≤ 1` is allowed.
    pub fn for_sampling(p: DMatrix<f64>, pi: Vec<f64>, n: usize) -> Result<Self> {
        let r = pi.len();
        if r == 0 || p.nrows() != r || p.ncols() != r {
            return Err(Error::DimensionMismatch(format!(
                "P is {}x{} but pi has {r} entries",
                p.nrows(),
                p.ncols()
            )));
        }
        if n == 0 {
            return Err(Error::DimensionMismatch("n must be positive".into()));
        }
        for i in 0..r {
            for j in 0..r {
                let v = p[(i, j)];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::NegativeEntry { row: i, col: j, value: v });
                }
            }
        }
        for i in 0..r {
            for j in (i + 1)..r {
                let (a, b) = (p[(i, j)], p[(j, i)]);
                if (a - b).abs() > SYMMETRY_TOL * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::AsymmetricP { row: i, col: j });
                }
            }
        }
        let sum: f64 = pi.iter().sum();
        if pi.iter().any(|&x| !(x > 0.0) || !x.is_finite()) || (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::PiNotSimplex { sum });
        }
        for i in 0..r {
            for j in 0..r {
                let prob = p[(i, j)] / n as f64;
                if prob > 1.0 {
                    return Err(Error::ProbabilityOverflow { row: i, col: j, prob });
                }
            }
        }
        let row_sums: Vec<f64> = (0..r)
            .map(|i| (0..r).map(|j| p[(i, j)] * pi[j]).sum())
            .collect();
        let d = row_sums[0];
        for (i, &s) in row_sums.iter().enumerate().skip(1) {
            if (s - d).abs() > ROW_SUM_TOL * d.abs().max(s.abs()).max(f64::MIN_POSITIVE) {
                return Err(Error::DegreeRowMismatch { row: i, value: s, expected: d });
            }
        }
        Ok(ModelParams { p, pi, n, d })
    }

    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of blocks.
    pub fn r(&self) -> usize {
        self.pi.len()
    }

    /// Average expected degree (common row sum of `PΠ`).
    pub fn d(&self) -> f64 {
        self.d
    }

    /// Same block structure at a different vertex count.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::for_sampling(self.p.clone(), self.pi.clone(), n)
    }

    /// The signal matrix `Q = PΠ`.
    pub fn q(&self) -> DMatrix<f64> {
        let r = self.r();
        DMatrix::from_fn(r, r, |i, j| self.p[(i, j)] * self.pi[j])
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            p: self.p.row_iter().map(|row| row.iter().copied().collect()).collect(),
            pi: self.pi.clone(),
            n: self.n,
        }
    }

    /// Symmetric two-block model with balanced blocks, average degree `d` and
    /// second eigenvalue `mu2` (`P₁₁ = P₂₂ = d + μ₂`, `P₁₂ = d − μ₂`).
    pub fn two_block(d: f64, mu2: f64, n: usize) -> Result<Self> {
        let (a, b) = (d + mu2, d - mu2);
        Self::new(DMatrix::from_row_slice(2, 2, &[a, b, b, a]), vec![0.5, 0.5], n)
    }
}

/// Non-fatal conditions met while ordering the signal spectrum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum SpectrumWarning {
    /// `|μᵢ| = |μⱼ|` with opposite signs; the positive one was placed first.
    DegenerateTie { positive: f64, negative: f64 },
}

/// Which side of the real axis an operator parameter or eigenvalue lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Eigen-structure of `Q = PΠ`.
#[derive(Clone, Debug)]
pub struct SignalSpectrum {
    pub d: f64,
    /// Eigenvalues ordered by decreasing modulus, `μ₁ = d`.
    pub mu: Vec<f64>,
    /// Columns are the right eigenvectors `φᵢ = Π^{-1/2} ψᵢ`, π-orthonormal.
    pub phi: DMatrix<f64>,
    /// Columns are orthonormal eigenvectors of `Π^{1/2} P Π^{1/2}`.
    pub psi: DMatrix<f64>,
    /// `τᵢ = d / μᵢ²` for the informative eigenvalues.
    pub tau: Vec<f64>,
    pub r0: usize,
    pub r_plus: usize,
    pub r_minus: usize,
    /// Positive informative eigenvalues, decreasing.
    pub mu_plus: Vec<f64>,
    /// Negative informative eigenvalues, increasing.
    pub mu_minus: Vec<f64>,
    /// Positions in `mu` of `mu_plus` and `mu_minus`.
    pub plus_index: Vec<usize>,
    pub minus_index: Vec<usize>,
    pub pi: Vec<f64>,
    pub warnings: Vec<SpectrumWarning>,
}

fn sign_normalize(v: &mut DVector<f64>) {
    if let Some(&first) = v.iter().find(|x| x.abs() > 1e-12) {
        if first < 0.0 {
            v.neg_mut();
        }
    }
}

/// Eigendecomposes `Π^{1/2} P Π^{1/2}` and classifies informative eigenvalues.
pub fn signal_spectrum(params: &ModelParams) -> SignalSpectrum {
    let r = params.r();
    let sqrt_pi: Vec<f64> = params.pi.iter().map(|x| x.sqrt()).collect();
    let sym = DMatrix::from_fn(r, r, |i, j| sqrt_pi[i] * params.p[(i, j)] * sqrt_pi[j]);
    // Symmetrize exactly so the eigen routine sees bitwise-symmetric input.
    let sym = (&sym + sym.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);

    let mut pairs: Vec<(f64, DVector<f64>)> = (0..r)
        .map(|k| {
            let mut v = eig.eigenvectors.column(k).into_owned();
            sign_normalize(&mut v);
            (eig.eigenvalues[k], v)
        })
        .collect();
    let scale = pairs.iter().map(|p| p.0.abs()).fold(1.0, f64::max);
    let same = |a: f64, b: f64| (a - b).abs() <= 1e-12 * scale;
    pairs.sort_by(|(a, va), (b, vb)| {
        if !same(a.abs(), b.abs()) {
            return b.abs().total_cmp(&a.abs());
        }
        if !same(*a, *b) {
            return b.total_cmp(a);
        }
        // Lexicographically larger eigenvector first.
        for (x, y) in va.iter().zip(vb.iter()) {
            if !same(*x, *y) {
                return y.total_cmp(x);
            }
        }
        std::cmp::Ordering::Equal
    });

    let mut warnings = Vec::new();
    for w in pairs.windows(2) {
        let (a, b) = (w[0].0, w[1].0);
        if same(a.abs(), b.abs()) && !same(a, b) {
            warnings.push(SpectrumWarning::DegenerateTie { positive: a, negative: b });
        }
    }

    let d = params.d;
    let mu: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let psi = DMatrix::from_fn(r, r, |i, k| pairs[k].1[i]);
    let phi = DMatrix::from_fn(r, r, |i, k| psi[(i, k)] / sqrt_pi[i]);

    let r0 = mu.iter().take_while(|m| m.powi(2) > d).count();
    let tau = mu[..r0].iter().map(|m| d / (m * m)).collect();
    let plus_index: Vec<usize> = (0..r0).filter(|&k| mu[k] > 0.0).collect();
    let minus_index: Vec<usize> = (0..r0).filter(|&k| mu[k] < 0.0).collect();
    SignalSpectrum {
        d,
        mu_plus: plus_index.iter().map(|&k| mu[k]).collect(),
        mu_minus: minus_index.iter().map(|&k| mu[k]).collect(),
        r0,
        r_plus: plus_index.len(),
        r_minus: minus_index.len(),
        plus_index,
        minus_index,
        mu,
        phi,
        psi,
        tau,
        pi: params.pi.clone(),
        warnings,
    }
}

impl SignalSpectrum {
    /// `Σᵢ μᵢ φᵢ φᵢᵀ Π`, which equals `Q` when the `φᵢ` are π-orthonormal.
    pub fn reconstruct_q(&self) -> DMatrix<f64> {
        let r = self.mu.len();
        let mut q = DMatrix::zeros(r, r);
        for k in 0..r {
            let phi = self.phi.column(k);
            for i in 0..r {
                for j in 0..r {
                    q[(i, j)] += self.mu[k] * phi[i] * phi[j] * self.pi[j];
                }
            }
        }
        q
    }

    /// π-weighted inner product `Σₖ πₖ φᵢ(k) φⱼ(k)`.
    pub fn pi_inner(&self, i: usize, j: usize) -> f64 {
        (0..self.pi.len())
            .map(|k| self.pi[k] * self.phi[(k, i)] * self.phi[(k, j)])
            .sum()
    }

    /// Informative eigenvalues of one sign, in the order of `mu_plus` / `mu_minus`.
    pub fn informative(&self, sign: Sign) -> &[f64] {
        match sign {
            Sign::Plus => &self.mu_plus,
            Sign::Minus => &self.mu_minus,
        }
    }

    /// Positions in `mu` of the informative eigenvalues of one sign.
    pub fn informative_index(&self, sign: Sign) -> &[usize] {
        match sign {
            Sign::Plus => &self.plus_index,
            Sign::Minus => &self.minus_index,
        }
    }

    /// `τ` of each informative eigenvalue of one sign.
    pub fn tau_of(&self, sign: Sign) -> Vec<f64> {
        self.informative(sign).iter().map(|m| self.d / (m * m)).collect()
    }
}

/// Predicted negative outliers of `H(±√d)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutlierPrediction {
    /// `(s√d − μ)(s√d − d/μ)` with `s = ±1`, one value per informative eigenvalue of that sign.
    pub locations: Vec<f64>,
    /// The same values divided by `d`: `(1 − 1/√τ)(1 − √τ)`.
    pub normalized: Vec<f64>,
}

/// `(t − μ)(t − d/μ)` at `t = ±√d` for every informative `μ` of the given sign.
/// An empty list means that sign has no informative eigenvalue.
pub fn predicted_outlier_locations(spectrum: &SignalSpectrum, sign: Sign) -> OutlierPrediction {
    let d = spectrum.d;
    let t = sign.factor() * d.sqrt();
    let mus = spectrum.informative(sign);
    OutlierPrediction {
        locations: mus.iter().map(|&mu| outlier_location(d, t, mu)).collect(),
        normalized: mus
            .iter()
            .map(|&mu| {
                let tau = d / (mu * mu);
                (1.0 - 1.0 / tau.sqrt()) * (1.0 - tau.sqrt())
            })
            .collect(),
    }
}

/// `(t − μ)(t − d/μ)`.
pub fn outlier_location(d: f64, t: f64, mu: f64) -> f64 {
    (t - mu) * (t - d / mu)
}

/// Asymptotic inner products of the halves `(x, y)` of a `B̃` eigenvector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrossMoments {
    /// `⟨xᵢ, yᵢ⟩ = (d + 1 − τᵢ)/μᵢ`.
    pub xy: f64,
    /// `⟨xᵢ, xᵢ⟩ = (d² + d + (2d + 1)(1 − τᵢ))/μᵢ²`.
    pub xx: f64,
    /// `⟨yᵢ, yᵢ⟩ = 1`.
    pub yy: f64,
    /// `‖xᵢ − ⟨xᵢ, yᵢ⟩yᵢ‖ = √((d + τᵢ(1 − τᵢ))/μᵢ²)`.
    pub resid: f64,
}

/// Predicted inner products for the informative eigenvalue at position `i`
/// (0-based, in the decreasing-modulus order of `mu`).
pub fn predicted_cross_moments(spectrum: &SignalSpectrum, i: usize) -> Result<CrossMoments> {
    if i >= spectrum.r0 {
        return Err(Error::IndexOutOfInformativeRange { index: i, count: spectrum.r0 });
    }
    let d = spectrum.d;
    let mu = spectrum.mu[i];
    let tau = spectrum.tau[i];
    let mu2 = mu * mu;
    Ok(CrossMoments {
        xy: (d + 1.0 - tau) / mu,
        xx: (d * d + d + (2.0 * d + 1.0) * (1.0 - tau)) / mu2,
        yy: 1.0,
        resid: ((d + tau * (1.0 - tau)) / mu2).sqrt(),
    })
}

/// The non-trivial root `(d + 1 − d/μ²)/μ` of the quadratic form `yᵀH(t)y`.
pub fn quadratic_form_root(d: f64, mu: f64) -> f64 {
    (d + 1.0 - d / (mu * mu)) / mu
}

/// `ν(μ) = (t − (d + 1 − d/μ²)/μ)(t − μ)`, the limiting value of `yᵀH(t)y`.
pub fn nu(t: f64, d: f64, mu: f64) -> f64 {
    (t - quadratic_form_root(d, mu)) * (t - mu)
}

/// Labeled SBM sample.
#[derive(Clone, Debug)]
pub struct LabeledGraph {
    pub graph: SparseGraph,
    /// 0-based block label of every vertex.
    pub sigma: Vec<usize>,
    pub params: ModelParams,
    pub seed: u64,
}

/// Block sizes `round(n πₖ)`, with the rounding remainder given to the largest block.
pub fn block_sizes(params: &ModelParams) -> Vec<usize> {
    let n = params.n as i64;
    let mut sizes: Vec<i64> = params
        .pi
        .iter()
        .map(|&p| (p * n as f64).round() as i64)
        .collect();
    let largest = params
        .pi
        .iter()
        .enumerate()
        .fold(0, |best, (k, &p)| if p > params.pi[best] { k } else { best });
    let diff = n - sizes.iter().sum::<i64>();
    sizes[largest] += diff;
    // Remainder larger than the largest block cannot occur for a valid simplex,
    // but clamp anyway and spread what is left.
    let mut excess = 0;
    for s in sizes.iter_mut() {
        if *s < 0 {
            excess += -*s;
            *s = 0;
        }
    }
    for s in sizes.iter_mut() {
        let take = excess.min(*s);
        *s -= take;
        excess -= take;
    }
    sizes.into_iter().map(|s| s as usize).collect()
}

/// Calls `emit` with every index in `0..total` kept independently with
/// probability `p`, using geometric skips.
fn bernoulli_indices(total: u64, p: f64, rng: &mut ChaCha8Rng, mut emit: impl FnMut(u64)) {
    if total == 0 || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        (0..total).for_each(emit);
        return;
    }
    let log_q = (-p).ln_1p();
    let mut next: u64 = 0;
    loop {
        let u: f64 = 1.0 - rng.random::<f64>();
        let gap = (u.ln() / log_q).floor();
        if !(gap < (total - next) as f64) {
            return;
        }
        next += gap as u64;
        emit(next);
        next += 1;
        if next >= total {
            return;
        }
    }
}

/// Position of the `idx`-th pair `(i, j)`, `i < j`, in the order
/// `(0,1), (0,2), (1,2), (0,3), …`.
fn triangular_pair(idx: u64) -> (u64, u64) {
    let mut j = ((1.0 + (1.0 + 8.0 * idx as f64).sqrt()) / 2.0).floor() as u64;
    while j * (j - 1) / 2 > idx {
        j -= 1;
    }
    while (j + 1) * j / 2 <= idx {
        j += 1;
    }
    (idx - j * (j - 1) / 2, j)
}

/// Samples a graph: deterministic contiguous blocks of sizes [`block_sizes`],
/// each pair `{i, j}` joined independently with probability `P_{σ(i)σ(j)}/n`.
pub fn sample_graph(params: &ModelParams, seed: u64) -> LabeledGraph {
    let sizes = block_sizes(params);
    let r = sizes.len();
    let mut starts = vec![0usize; r + 1];
    for k in 0..r {
        starts[k + 1] = starts[k] + sizes[k];
    }
    let sigma: Vec<usize> = (0..r).flat_map(|k| std::iter::repeat_n(k, sizes[k])).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = params.n as f64;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for a in 0..r {
        for b in a..r {
            let p = params.p[(a, b)] / n;
            let (sa, sb) = (sizes[a] as u64, sizes[b] as u64);
            if a == b {
                let base = starts[a];
                bernoulli_indices(sa * sa.saturating_sub(1) / 2, p, &mut rng, |idx| {
                    let (i, j) = triangular_pair(idx);
                    edges.push((base + i as usize, base + j as usize));
                });
            } else {
                let (ba, bb) = (starts[a], starts[b]);
                bernoulli_indices(sa * sb, p, &mut rng, |idx| {
                    edges.push((ba + (idx / sb) as usize, bb + (idx % sb) as usize));
                });
            }
        }
    }
    let graph = SparseGraph::from_edges(params.n, &edges).expect("sampled edges are simple");
    LabeledGraph { graph, sigma, params: params.clone(), seed }
}
