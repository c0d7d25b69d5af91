//! Measured spectra of a labeled sample against the closed-form predictions
//! of its model.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::eig::{leading_eigs_nonsym, smallest_eigs, subspace_distance, Side};
use crate::error::{Error, Result};
use crate::model::{predicted_cross_moments, predicted_outlier_locations, LabeledGraph, Sign, SignalSpectrum};
use crate::operators::{bethe_hessian, reduced_nb};
use crate::sparse::LinearOperator;

/// Pass/fail thresholds of a [`TheoryReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryTolerances {
    /// `|Im λ| ≤ imag_rel·|λ|`.
    pub imag_rel: f64,
    /// `|λᵢ(B̃) − μᵢ|`.
    pub nb_location: f64,
    /// `|⟨yᵢ, yⱼ⟩|`, `i ≠ j`.
    pub yy_offdiag: f64,
    /// `|⟨xᵢ, yᵢ⟩ − prediction|`.
    pub xy: f64,
    /// `|⟨xᵢ, xᵢ⟩ − prediction|`.
    pub xx: f64,
    /// `‖H(λ)y‖ ≤ kernel_rel·(1 + |λ|²)`.
    pub kernel_rel: f64,
    /// Multiplier of `√(r±/d)` in the subspace bounds.
    pub subspace_constant: f64,
}

impl Default for TheoryTolerances {
    fn default() -> Self {
        TheoryTolerances {
            imag_rel: 1e-6,
            nb_location: 0.5,
            yy_offdiag: 0.05,
            xy: 0.1,
            xx: 0.15,
            kernel_rel: 1e-6,
            subspace_constant: 3.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TheoryConfig {
    pub tol: f64,
    pub seed: u64,
    pub tolerances: TheoryTolerances,
}

impl Default for TheoryConfig {
    fn default() -> Self {
        TheoryConfig { tol: 1e-10, seed: 0, tolerances: TheoryTolerances::default() }
    }
}

/// Measurements for one sign of the informative spectrum.
#[derive(Clone, Debug, Serialize)]
pub struct SignReport {
    pub sign: Sign,
    /// Informative `μ` of this sign (`μ⁺` decreasing, `μ⁻` increasing).
    pub mu: Vec<f64>,
    pub nb_lambda: Vec<f64>,
    pub nb_imag: Vec<f64>,
    /// `|Re λᵢ(B̃) − μᵢ|`.
    pub nb_gap: Vec<f64>,
    /// `‖H(λᵢ)yᵢ‖`.
    pub kernel_residual: Vec<f64>,
    /// `⟨xᵢ, yᵢ⟩ < |λᵢ|`.
    pub xy_below_lambda: Vec<bool>,
    /// Smallest eigenvalues of `H(±√d̂)`, ascending.
    pub outlier_measured: Vec<f64>,
    pub outlier_predicted: Vec<f64>,
    pub outlier_gap: Vec<f64>,
    /// `√(r± d)`.
    pub outlier_budget: f64,
    /// `min_O ‖V± − Y±O‖_F`.
    pub dist_v_y: f64,
    pub bound_v_y: f64,
    /// `min_O ‖V± − Φ̌±O‖_F` with `Φ̌` columns scaled to unit norm.
    pub dist_v_phi: f64,
    pub bound_v_phi: f64,
}

/// Inner products between the halves of the informative `B̃` eigenvectors,
/// indexed in the decreasing-modulus order of `μ`.
#[derive(Clone, Debug, Serialize)]
pub struct InnerProducts {
    pub index: Vec<usize>,
    pub xy: Vec<Vec<f64>>,
    pub xx: Vec<Vec<f64>>,
    pub yy: Vec<Vec<f64>>,
    pub predicted_xy: Vec<f64>,
    pub predicted_xx: Vec<f64>,
    pub max_xy_gap: f64,
    pub max_xx_gap: f64,
    /// Largest `|⟨yᵢ, yⱼ⟩|` with `i ≠ j`.
    pub max_yy_offdiag: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoryChecks {
    pub nb_real: bool,
    pub nb_location: bool,
    pub kernel: bool,
    pub xy_below_lambda: bool,
    pub yy_offdiag: bool,
    pub xy: bool,
    pub xx: bool,
    pub outlier_location: bool,
    pub subspace_y: bool,
    pub subspace_phi: bool,
}

impl TheoryChecks {
    pub fn all(&self) -> bool {
        self.nb_real
            && self.nb_location
            && self.kernel
            && self.xy_below_lambda
            && self.yy_offdiag
            && self.xy
            && self.xx
            && self.outlier_location
            && self.subspace_y
            && self.subspace_phi
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoryReport {
    pub n: usize,
    pub d: f64,
    pub d_hat: f64,
    pub seed: u64,
    pub signs: Vec<SignReport>,
    pub inner_products: InnerProducts,
    pub max_imag: f64,
    pub tolerances: TheoryTolerances,
    pub checks: TheoryChecks,
    pub passed: bool,
}

impl TheoryReport {
    pub fn sign(&self, sign: Sign) -> Option<&SignReport> {
        self.signs.iter().find(|s| s.sign == sign)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Compares a sample with its model: real outliers of `B̃` near `μᵢ`,
/// eigenvector inner products, outlier locations of `H(±√d̂)` and alignment
/// of the Bethe-Hessian eigenvectors with `Y±` and `Φ̌±`.
pub fn theory_report(sample: &LabeledGraph, spectrum: &SignalSpectrum, config: &TheoryConfig) -> Result<TheoryReport> {
    if spectrum.r0 == 0 {
        return Err(Error::BelowThreshold);
    }
    let graph = &sample.graph;
    let n = graph.n();
    let d = spectrum.d;
    let d_hat = graph.mean_degree();
    let tols = &config.tolerances;
    let b = reduced_nb(graph);

    let mut signs = Vec::new();
    let mut all_index = Vec::new();
    let mut all_x: Vec<Vec<f64>> = Vec::new();
    let mut all_y: Vec<Vec<f64>> = Vec::new();
    for (sign, side, offset) in [(Sign::Plus, Side::LargestReal, 0u64), (Sign::Minus, Side::SmallestReal, 1u64)] {
        let mus = spectrum.informative(sign).to_vec();
        let r = mus.len();
        if r == 0 {
            continue;
        }
        let bundle = leading_eigs_nonsym(&b, r, side, config.tol, config.seed.wrapping_add(offset))?;
        let mut report = SignReport {
            sign,
            mu: mus.clone(),
            nb_lambda: Vec::with_capacity(r),
            nb_imag: bundle.imag_norms.clone(),
            nb_gap: Vec::with_capacity(r),
            kernel_residual: Vec::with_capacity(r),
            xy_below_lambda: Vec::with_capacity(r),
            outlier_measured: Vec::new(),
            outlier_predicted: predicted_outlier_locations(spectrum, sign).locations,
            outlier_gap: Vec::new(),
            outlier_budget: (r as f64 * d).sqrt(),
            dist_v_y: 0.0,
            bound_v_y: tols.subspace_constant * (r as f64 / d).sqrt(),
            dist_v_phi: 0.0,
            bound_v_phi: 0.0,
        };
        let mut hy = vec![0.0; n];
        for (i, &mu) in mus.iter().enumerate() {
            let lambda = bundle.lambdas[i].re;
            let (x, y) = (&bundle.x_parts[i], &bundle.y_parts[i]);
            report.nb_lambda.push(lambda);
            report.nb_gap.push((lambda - mu).abs());
            bethe_hessian(graph, lambda).apply(y, &mut hy);
            report.kernel_residual.push(dot(&hy, &hy).sqrt());
            report.xy_below_lambda.push(dot(x, y).abs() < lambda.abs());
            all_x.push(x.clone());
            all_y.push(y.clone());
        }
        all_index.extend_from_slice(spectrum.informative_index(sign));

        let t = sign.factor() * d_hat.sqrt();
        let pairs = smallest_eigs(&bethe_hessian(graph, t), r, config.tol, config.seed.wrapping_add(2 + offset))?;
        report.outlier_gap = pairs
            .values
            .iter()
            .zip(&report.outlier_predicted)
            .map(|(m, p)| (m - p).abs())
            .collect();
        report.outlier_measured = pairs.values.clone();

        let y_mat = DMatrix::from_fn(n, r, |row, col| bundle.y_parts[col][row]);
        report.dist_v_y = subspace_distance(&pairs.vectors, &y_mat)?.distance;
        let scale = 1.0 / (n as f64).sqrt();
        let idx = spectrum.informative_index(sign);
        let phi_check = DMatrix::from_fn(n, r, |row, col| spectrum.phi[(sample.sigma[row], idx[col])] * scale);
        report.dist_v_phi = subspace_distance(&pairs.vectors, &phi_check)?.distance;
        let tau_sum: f64 = spectrum.tau_of(sign).iter().sum();
        report.bound_v_phi = 2.0 * tau_sum + report.bound_v_y;
        signs.push(report);
    }

    // Inner products over all informative eigenvectors, in μ order.
    let mut order: Vec<usize> = (0..all_index.len()).collect();
    order.sort_by_key(|&k| all_index[k]);
    let r0 = order.len();
    let gram = |a: &[Vec<f64>], b: &[Vec<f64>]| -> Vec<Vec<f64>> {
        order.iter().map(|&i| order.iter().map(|&j| dot(&a[i], &b[j])).collect()).collect()
    };
    let xy = gram(&all_x, &all_y);
    let xx = gram(&all_x, &all_x);
    let yy = gram(&all_y, &all_y);
    let index: Vec<usize> = order.iter().map(|&k| all_index[k]).collect();
    let moments = index
        .iter()
        .map(|&i| predicted_cross_moments(spectrum, i))
        .collect::<Result<Vec<_>>>()?;
    let mut inner = InnerProducts {
        predicted_xy: moments.iter().map(|m| m.xy).collect(),
        predicted_xx: moments.iter().map(|m| m.xx).collect(),
        index,
        max_xy_gap: 0.0,
        max_xx_gap: 0.0,
        max_yy_offdiag: 0.0,
        xy,
        xx,
        yy,
    };
    for i in 0..r0 {
        inner.max_xy_gap = inner.max_xy_gap.max((inner.xy[i][i] - inner.predicted_xy[i]).abs());
        inner.max_xx_gap = inner.max_xx_gap.max((inner.xx[i][i] - inner.predicted_xx[i]).abs());
        for j in 0..r0 {
            if i != j {
                inner.max_yy_offdiag = inner.max_yy_offdiag.max(inner.yy[i][j].abs());
            }
        }
    }

    let max_imag = signs.iter().flat_map(|s| s.nb_imag.iter().copied()).fold(0.0, f64::max);
    let every = |f: &dyn Fn(&SignReport) -> bool| signs.iter().all(f);
    let checks = TheoryChecks {
        nb_real: every(&|s| {
            s.nb_imag.iter().zip(&s.nb_lambda).all(|(im, l)| *im <= tols.imag_rel * l.abs())
        }),
        nb_location: every(&|s| s.nb_gap.iter().all(|&g| g <= tols.nb_location)),
        kernel: every(&|s| {
            s.kernel_residual
                .iter()
                .zip(&s.nb_lambda)
                .all(|(k, l)| *k <= tols.kernel_rel * (1.0 + l * l))
        }),
        xy_below_lambda: every(&|s| s.xy_below_lambda.iter().all(|&b| b)),
        yy_offdiag: inner.max_yy_offdiag <= tols.yy_offdiag,
        xy: inner.max_xy_gap <= tols.xy,
        xx: inner.max_xx_gap <= tols.xx,
        outlier_location: every(&|s| s.outlier_gap.iter().all(|&g| g <= s.outlier_budget)),
        subspace_y: every(&|s| s.dist_v_y <= s.bound_v_y),
        subspace_phi: every(&|s| s.dist_v_phi <= s.bound_v_phi),
    };
    let passed = checks.all();
    Ok(TheoryReport {
        n,
        d,
        d_hat,
        seed: sample.seed,
        signs,
        inner_products: inner,
        max_imag,
        tolerances: tols.clone(),
        checks,
        passed,
    })
}
