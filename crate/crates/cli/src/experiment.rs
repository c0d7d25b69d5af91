//! Multi-seed experiments with per-trial CSV tables and a summary JSON.
//!
//! Trial `i` uses the seed `base ⊕ i` for graph sampling and every solver
//! inside the trial. Failed trials are kept in the table with their error,
//! left out of the aggregates, and the run fails if more than 10% of the
//! trials errored.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use bethe::detect::{cluster, estimate_counts, overlap, theory_report, ClusterConfig, TheoryConfig, DEFAULT_RESTARTS};
use bethe::eig::DEFAULT_TOL;
use bethe::model::{sample_graph, signal_spectrum, ModelFile, ModelParams, Sign, SignalSpectrum};
use bethe::operators::bethe_hessian;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{is_solver_error, CliError, CliResult};
use crate::histogram::{self, SpectrumHistogram, DEFAULT_BINS};
use crate::output::{num, write_json, Table};

/// Largest tolerated fraction of failed trials.
pub const MAX_ERROR_RATE: f64 = 0.1;
/// Count accuracy required by the count experiments.
pub const COUNT_ACCURACY_FLOOR: f64 = 0.9;
/// Median overlap required by the recovery experiment.
pub const OVERLAP_FLOOR: f64 = 0.75;
/// Sweep points with `μ₂ ≥ 1.3√d` must detect the second community this often.
pub const SWEEP_HIGH: (f64, f64) = (1.3, 0.9);
/// Sweep points with `μ₂ ≤ 0.7√d` must detect it at most this often.
pub const SWEEP_LOW: (f64, f64) = (0.7, 0.2);
/// Allowed dip between consecutive sweep points before the trend counts as
/// non-monotone.
pub const SWEEP_MONOTONE_SLACK: f64 = 0.15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Counts on the reference model ([`reference_model`]) or a given one,
    /// plus a spectrum histogram of the first sample.
    Figure1,
    /// Counts `(r̂₊, r̂₋)` against the model's informative counts.
    Counts,
    /// Full clustering and overlap with the planted labels.
    Recovery,
    /// Theory-versus-measurement reports.
    Theory,
    /// Two-block model with fixed degree, second eigenvalue swept across `√d`.
    Sweep,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSettings {
    pub degree: f64,
    /// Values of `μ₂/√d`.
    pub ratios: Vec<f64>,
    pub n: usize,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings { degree: 6.0, ratios: vec![0.5, 0.7, 0.9, 1.1, 1.3, 1.5], n: 4000 }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Required for `counts`, `recovery` and `theory`; `figure1` falls back to
    /// the built-in model and `sweep` builds its own.
    pub model: Option<ModelParams>,
    /// Where the model came from, recorded in the summary.
    pub model_path: Option<PathBuf>,
    pub base_seed: u64,
    pub trials: usize,
    /// Explicit seeds; overrides `base_seed` and `trials`.
    pub seed_list: Option<Vec<u64>>,
    pub epsilon: Option<f64>,
    /// Solver tolerance; `None` uses each solver's default.
    pub tol: Option<f64>,
    pub restarts: usize,
    pub threads: usize,
    pub out: Option<PathBuf>,
    pub bins: usize,
    pub sweep: SweepSettings,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            model: None,
            model_path: None,
            base_seed: 0,
            trials: 20,
            seed_list: None,
            epsilon: None,
            tol: None,
            restarts: DEFAULT_RESTARTS,
            threads: 1,
            out: None,
            bins: DEFAULT_BINS,
            sweep: SweepSettings::default(),
        }
    }

    pub fn with_model(mut self, model: ModelParams) -> Self {
        self.model = Some(model);
        self
    }

    pub fn seeds(&self) -> Vec<u64> {
        if let Some(list) = &self.seed_list {
            return list.clone();
        }
        (0..self.trials).map(|i| trial_seed(self.base_seed, i)).collect()
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.seeds().is_empty() {
            return Err(CliError::Validation("at least one trial is required".into()));
        }
        if self.threads == 0 {
            return Err(CliError::Validation("threads must be positive".into()));
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0) {
                return Err(CliError::Validation(format!("tolerance {tol} must be positive")));
            }
        }
        if let Some(e) = self.epsilon {
            if !(e.is_finite() && e >= 0.0) {
                return Err(CliError::Validation(format!("epsilon {e} must be finite and non-negative")));
            }
        }
        match self.kind {
            ExperimentKind::Counts | ExperimentKind::Recovery | ExperimentKind::Theory if self.model.is_none() => {
                Err(CliError::Validation(format!("experiment kind {:?} needs a model", self.kind)))
            }
            ExperimentKind::Sweep if self.sweep.ratios.is_empty() => {
                Err(CliError::Validation("sweep needs at least one ratio".into()))
            }
            ExperimentKind::Sweep if !(self.sweep.degree > 1.0) => {
                Err(CliError::Validation(format!("sweep degree {} must exceed 1", self.sweep.degree)))
            }
            _ => Ok(()),
        }
    }

    fn resolved_model(&self) -> ModelParams {
        match (&self.model, self.kind) {
            (Some(m), _) => m.clone(),
            (None, _) => reference_model(4000),
        }
    }
}

/// Seed of trial `index`.
pub fn trial_seed(base: u64, index: usize) -> u64 {
    base ^ index as u64
}

/// `P = [[10, 2], [2, 10]]`, `π = (½, ½)`: `d = 6`, `μ₂ = 4`.
pub fn reference_model(n: usize) -> ModelParams {
    ModelParams::new(DMatrix::from_row_slice(2, 2, &[10.0, 2.0, 2.0, 10.0]), vec![0.5, 0.5], n)
        .expect("reference model is valid")
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialError {
    pub trial: usize,
    pub seed: u64,
    /// `solver` or `validation`.
    pub tag: &'static str,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub kind: ExperimentKind,
    pub trials: usize,
    pub completed: usize,
    pub errors: usize,
    pub error_rate: f64,
    pub base_seed: u64,
    pub seeds: Vec<u64>,
    pub model: Option<ModelFile>,
    pub model_path: Option<PathBuf>,
    pub epsilon: Option<f64>,
    pub tol: Option<f64>,
    pub threads: usize,
    pub metrics: Value,
    pub thresholds: Value,
    pub failures: Vec<String>,
    pub trial_errors: Vec<TrialError>,
    pub elapsed_seconds: f64,
    pub passed: bool,
}

impl Summary {
    pub fn error_rate_exceeded(&self) -> bool {
        self.error_rate > MAX_ERROR_RATE
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub summary: Summary,
    pub table: Table,
    pub histogram: Option<SpectrumHistogram>,
}

impl ExperimentReport {
    /// Maps the outcome to a command result: too many failed trials is a
    /// solver failure, missed thresholds an acceptance failure.
    pub fn verdict(&self) -> CliResult<()> {
        if self.summary.error_rate_exceeded() {
            return Err(CliError::Solver(format!(
                "{} of {} trials failed",
                self.summary.errors, self.summary.trials
            )));
        }
        if !self.summary.passed {
            return Err(CliError::Acceptance(self.summary.failures.join("; ")));
        }
        Ok(())
    }

    /// Writes `trials.csv`, `summary.json` and, for `figure1`,
    /// `histogram.csv` and `histogram.json`.
    pub fn write(&self, dir: &Path) -> CliResult<()> {
        self.table.write(&dir.join("trials.csv"))?;
        if let Some(h) = &self.histogram {
            h.table().write(&dir.join("histogram.csv"))?;
            write_json(&dir.join("histogram.json"), h)?;
        }
        write_json(&dir.join("summary.json"), &self.summary)
    }
}

type Outcome<T> = Result<T, TrialError>;

fn trial_error(trial: usize, seed: u64, e: bethe::Error) -> TrialError {
    TrialError {
        trial,
        seed,
        tag: if is_solver_error(&e) { "solver" } else { "validation" },
        message: e.to_string(),
    }
}

fn run_trials<T: Send>(
    config: &ExperimentConfig,
    seeds: &[u64],
    f: impl Fn(usize, u64) -> bethe::Result<T> + Sync,
) -> CliResult<Vec<Outcome<T>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        seeds
            .par_iter()
            .enumerate()
            .map(|(i, &seed)| f(i, seed).map_err(|e| trial_error(i, seed, e)))
            .collect()
    }))
}

/// Runs the experiment and writes its artifacts when `config.out` is set.
pub fn run_experiment(config: &ExperimentConfig) -> CliResult<ExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let mut report = match config.kind {
        ExperimentKind::Figure1 | ExperimentKind::Counts => counts_experiment(config)?,
        ExperimentKind::Recovery => recovery_experiment(config)?,
        ExperimentKind::Theory => theory_experiment(config)?,
        ExperimentKind::Sweep => sweep_experiment(config)?,
    };
    report.summary.elapsed_seconds = start.elapsed().as_secs_f64();
    if let Some(dir) = &config.out {
        report.write(dir)?;
    }
    Ok(report)
}

fn summary(
    config: &ExperimentConfig,
    model: Option<&ModelParams>,
    seeds: Vec<u64>,
    errors: Vec<TrialError>,
    metrics: Value,
    thresholds: Value,
    mut failures: Vec<String>,
) -> Summary {
    let trials = seeds.len();
    let error_rate = errors.len() as f64 / trials as f64;
    if error_rate > MAX_ERROR_RATE {
        failures.push(format!("error rate {error_rate:.3} exceeds {MAX_ERROR_RATE}"));
    }
    Summary {
        kind: config.kind,
        trials,
        completed: trials - errors.len(),
        errors: errors.len(),
        error_rate,
        base_seed: config.base_seed,
        seeds,
        model: model.map(ModelParams::to_file),
        model_path: config.model_path.clone(),
        epsilon: config.epsilon,
        tol: config.tol,
        threads: config.threads,
        metrics,
        thresholds,
        passed: failures.is_empty(),
        failures,
        trial_errors: errors,
        elapsed_seconds: 0.0,
    }
}

fn split<T>(outcomes: Vec<Outcome<T>>) -> (Vec<(usize, T)>, Vec<TrialError>) {
    let mut ok = Vec::new();
    let mut err = Vec::new();
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(v) => ok.push((i, v)),
            Err(e) => err.push(e),
        }
    }
    (ok, err)
}

/// Empty cells after the status columns of a failed trial.
fn error_row(prefix: Vec<String>, e: &TrialError, width: usize) -> Vec<String> {
    let mut row = prefix;
    row.push(e.tag.to_string());
    row.push(e.message.clone());
    row.resize(width, String::new());
    row
}

/// Mean, quantiles and extremes of a sample (empty sample gives nulls).
pub fn distribution(values: &[f64]) -> Value {
    if values.is_empty() {
        return json!({"count": 0});
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    json!({
        "count": v.len(),
        "mean": mean,
        "min": v[0],
        "q10": quantile(&v, 0.1),
        "q25": quantile(&v, 0.25),
        "median": quantile(&v, 0.5),
        "q75": quantile(&v, 0.75),
        "q90": quantile(&v, 0.9),
        "max": v[v.len() - 1],
    })
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

// ---------------------------------------------------------------- counts

#[derive(Clone, Debug, Serialize)]
pub struct CountsTrial {
    pub n: usize,
    pub d_hat: f64,
    pub epsilon: f64,
    pub r_hat_plus: usize,
    pub r_hat_minus: usize,
}

pub const COUNTS_HEADER: &[&str] = &[
    "trial", "seed", "status", "error", "n", "d_hat", "epsilon", "r_hat_plus", "r_hat_minus",
    "expected_plus", "expected_minus", "correct",
];

/// Samples a graph and estimates `(r̂₊, r̂₋)`.
pub fn counts_trial(model: &ModelParams, seed: u64, epsilon: Option<f64>) -> bethe::Result<CountsTrial> {
    let sample = sample_graph(model, seed);
    let c = estimate_counts(&sample.graph, epsilon)?;
    Ok(CountsTrial { n: model.n(), d_hat: c.d_hat, epsilon: c.epsilon, r_hat_plus: c.r_plus, r_hat_minus: c.r_minus })
}

fn counts_experiment(config: &ExperimentConfig) -> CliResult<ExperimentReport> {
    let model = config.resolved_model();
    let spectrum = signal_spectrum(&model);
    let expected = (spectrum.r_plus, spectrum.r_minus);
    let seeds = config.seeds();
    let outcomes = run_trials(config, &seeds, |_, seed| counts_trial(&model, seed, config.epsilon))?;

    let mut table = Table::new(COUNTS_HEADER);
    for (i, o) in outcomes.iter().enumerate() {
        let prefix = vec![i.to_string(), seeds[i].to_string()];
        match o {
            Ok(t) => {
                let correct = (t.r_hat_plus, t.r_hat_minus) == expected;
                table.push(
                    prefix
                        .into_iter()
                        .chain([
                            "ok".into(),
                            String::new(),
                            t.n.to_string(),
                            num(t.d_hat),
                            num(t.epsilon),
                            t.r_hat_plus.to_string(),
                            t.r_hat_minus.to_string(),
                            expected.0.to_string(),
                            expected.1.to_string(),
                            u8::from(correct).to_string(),
                        ])
                        .collect(),
                );
            }
            Err(e) => table.push(error_row(prefix, e, COUNTS_HEADER.len())),
        }
    }

    let (ok, errors) = split(outcomes);
    let correct = ok.iter().filter(|(_, t)| (t.r_hat_plus, t.r_hat_minus) == expected).count();
    let accuracy = if ok.is_empty() { 0.0 } else { correct as f64 / ok.len() as f64 };
    let mut observed: BTreeMap<String, usize> = BTreeMap::new();
    for (_, t) in &ok {
        *observed.entry(format!("({},{})", t.r_hat_plus, t.r_hat_minus)).or_default() += 1;
    }
    let d_hats: Vec<f64> = ok.iter().map(|(_, t)| t.d_hat).collect();
    let mut failures = Vec::new();
    if accuracy < COUNT_ACCURACY_FLOOR {
        failures.push(format!("count accuracy {accuracy:.3} below {COUNT_ACCURACY_FLOOR}"));
    }
    let metrics = json!({
        "expected": {"r_plus": expected.0, "r_minus": expected.1},
        "correct": correct,
        "count_accuracy": accuracy,
        "observed_counts": observed,
        "d_hat": distribution(&d_hats),
    });
    let thresholds = json!({"count_accuracy": COUNT_ACCURACY_FLOOR, "max_error_rate": MAX_ERROR_RATE});

    let histogram = if config.kind == ExperimentKind::Figure1 {
        let sample = sample_graph(&model, seeds[0]);
        let op = bethe_hessian(&sample.graph, sample.graph.mean_degree().sqrt());
        Some(histogram::windowed_inertia(&op, histogram::auto_window(&op), config.bins, seeds[0])?)
    } else {
        None
    };
    Ok(ExperimentReport {
        summary: summary(config, Some(&model), seeds, errors, metrics, thresholds, failures),
        table,
        histogram,
    })
}

// -------------------------------------------------------------- recovery

#[derive(Clone, Debug, Serialize)]
pub struct RecoveryTrial {
    pub d_hat: f64,
    pub r_hat_plus: usize,
    pub r_hat_minus: usize,
    pub overlap: f64,
    pub kmeans_cost: f64,
}

pub const RECOVERY_HEADER: &[&str] = &[
    "trial", "seed", "status", "error", "d_hat", "r_hat_plus", "r_hat_minus", "r_hat", "overlap",
    "kmeans_cost", "counts_correct",
];

/// Samples a graph, clusters it and scores the labels.
pub fn recovery_trial(model: &ModelParams, seed: u64, config: &ClusterConfig) -> bethe::Result<RecoveryTrial> {
    let sample = sample_graph(model, seed);
    let res = cluster(&sample.graph, &ClusterConfig { seed, ..config.clone() })?;
    Ok(RecoveryTrial {
        d_hat: res.d_hat,
        r_hat_plus: res.r_hat_plus,
        r_hat_minus: res.r_hat_minus,
        overlap: overlap(&sample.sigma, &res.sigma_hat)?,
        kmeans_cost: res.kmeans_cost,
    })
}

fn recovery_experiment(config: &ExperimentConfig) -> CliResult<ExperimentReport> {
    let model = config.resolved_model();
    let spectrum = signal_spectrum(&model);
    let expected = (spectrum.r_plus, spectrum.r_minus);
    let seeds = config.seeds();
    let cluster_config = ClusterConfig { epsilon: config.epsilon, tol: config.tol.unwrap_or(DEFAULT_TOL), seed: 0, restarts: config.restarts };
    let outcomes = run_trials(config, &seeds, |_, seed| recovery_trial(&model, seed, &cluster_config))?;

    let mut table = Table::new(RECOVERY_HEADER);
    for (i, o) in outcomes.iter().enumerate() {
        let prefix = vec![i.to_string(), seeds[i].to_string()];
        match o {
            Ok(t) => {
                let correct = (t.r_hat_plus, t.r_hat_minus) == expected;
                table.push(
                    prefix
                        .into_iter()
                        .chain([
                            "ok".into(),
                            String::new(),
                            num(t.d_hat),
                            t.r_hat_plus.to_string(),
                            t.r_hat_minus.to_string(),
                            (t.r_hat_plus + t.r_hat_minus).to_string(),
                            num(t.overlap),
                            num(t.kmeans_cost),
                            u8::from(correct).to_string(),
                        ])
                        .collect(),
                );
            }
            Err(e) => table.push(error_row(prefix, e, RECOVERY_HEADER.len())),
        }
    }

    let (ok, errors) = split(outcomes);
    let overlaps: Vec<f64> = ok.iter().map(|(_, t)| t.overlap).collect();
    let med = if overlaps.is_empty() { 0.0 } else { median(&overlaps) };
    let correct = ok.iter().filter(|(_, t)| (t.r_hat_plus, t.r_hat_minus) == expected).count();
    let baseline = model.pi().iter().copied().fold(0.0, f64::max);
    let mut failures = Vec::new();
    if med < OVERLAP_FLOOR {
        failures.push(format!("median overlap {med:.3} below {OVERLAP_FLOOR}"));
    }
    let metrics = json!({
        "overlap": distribution(&overlaps),
        "median_overlap": med,
        "largest_block_baseline": baseline,
        "expected": {"r_plus": expected.0, "r_minus": expected.1},
        "count_accuracy": if ok.is_empty() { 0.0 } else { correct as f64 / ok.len() as f64 },
    });
    let thresholds = json!({"median_overlap": OVERLAP_FLOOR, "max_error_rate": MAX_ERROR_RATE});
    Ok(ExperimentReport {
        summary: summary(config, Some(&model), seeds, errors, metrics, thresholds, failures),
        table,
        histogram: None,
    })
}

// ---------------------------------------------------------------- theory

pub const THEORY_HEADER: &[&str] = &[
    "trial", "seed", "status", "error", "d_hat", "sign", "mu_index", "mu", "nb_lambda", "nb_imag",
    "nb_gap", "kernel_residual", "outlier_measured", "outlier_predicted", "outlier_gap",
    "outlier_budget", "xy", "xy_predicted", "xx", "xx_predicted", "dist_v_y", "bound_v_y",
    "dist_v_phi", "bound_v_phi", "trial_passed",
];

/// Samples a graph and builds its theory report.
pub fn theory_trial(
    model: &ModelParams,
    spectrum: &SignalSpectrum,
    seed: u64,
    tol: f64,
) -> bethe::Result<bethe::detect::TheoryReport> {
    let sample = sample_graph(model, seed);
    theory_report(&sample, spectrum, &TheoryConfig { tol, seed, ..TheoryConfig::default() })
}

pub fn theory_rows(
    table: &mut Table,
    prefix: &[String],
    report: &bethe::detect::TheoryReport,
    spectrum: &SignalSpectrum,
) {
    let ip = &report.inner_products;
    for s in &report.signs {
        let positions = spectrum.informative_index(s.sign);
        for (i, &mu_index) in positions.iter().enumerate() {
            let k = ip.index.iter().position(|&x| x == mu_index).expect("index is reported");
            let mut row = prefix.to_vec();
            row.extend([
                "ok".to_string(),
                String::new(),
                num(report.d_hat),
                sign_name(s.sign).to_string(),
                mu_index.to_string(),
                num(s.mu[i]),
                num(s.nb_lambda[i]),
                num(s.nb_imag[i]),
                num(s.nb_gap[i]),
                num(s.kernel_residual[i]),
                num(s.outlier_measured[i]),
                num(s.outlier_predicted[i]),
                num(s.outlier_gap[i]),
                num(s.outlier_budget),
                num(ip.xy[k][k]),
                num(ip.predicted_xy[k]),
                num(ip.xx[k][k]),
                num(ip.predicted_xx[k]),
                num(s.dist_v_y),
                num(s.bound_v_y),
                num(s.dist_v_phi),
                num(s.bound_v_phi),
                u8::from(report.passed).to_string(),
            ]);
            table.push(row);
        }
    }
}

pub fn sign_name(sign: Sign) -> &'static str {
    match sign {
        Sign::Plus => "plus",
        Sign::Minus => "minus",
    }
}

fn theory_experiment(config: &ExperimentConfig) -> CliResult<ExperimentReport> {
    let model = config.resolved_model();
    let spectrum = signal_spectrum(&model);
    if spectrum.r0 == 0 {
        return Err(bethe::Error::BelowThreshold.into());
    }
    let seeds = config.seeds();
    let outcomes = run_trials(config, &seeds, |_, seed| theory_trial(&model, &spectrum, seed, config.tol.unwrap_or(TheoryConfig::default().tol)))?;

    let mut table = Table::new(THEORY_HEADER);
    for (i, o) in outcomes.iter().enumerate() {
        let prefix = vec![i.to_string(), seeds[i].to_string()];
        match o {
            Ok(r) => theory_rows(&mut table, &prefix, r, &spectrum),
            Err(e) => table.push(error_row(prefix, e, THEORY_HEADER.len())),
        }
    }

    let (ok, errors) = split(outcomes);
    let reports: Vec<&bethe::detect::TheoryReport> = ok.iter().map(|(_, r)| r).collect();
    let passed = reports.iter().filter(|r| r.passed).count();
    let check_rates = check_pass_rates(&reports);

    let mut per_sign = serde_json::Map::new();
    for sign in [Sign::Plus, Sign::Minus] {
        let with_sign: Vec<_> = reports.iter().filter_map(|r| r.sign(sign)).collect();
        if with_sign.is_empty() {
            continue;
        }
        let r = with_sign[0].mu.len();
        let mut entries = Vec::new();
        for i in 0..r {
            let measured: Vec<f64> = with_sign.iter().map(|s| s.outlier_measured[i]).collect();
            let predicted = with_sign[0].outlier_predicted[i];
            let mean = measured.iter().sum::<f64>() / measured.len() as f64;
            entries.push(json!({
                "mu": with_sign[0].mu[i],
                "outlier_predicted": predicted,
                "outlier_measured": distribution(&measured),
                "outlier_gap": distribution(&with_sign.iter().map(|s| s.outlier_gap[i]).collect::<Vec<_>>()),
                "mean_gap": (mean - predicted).abs(),
                "nb_gap": distribution(&with_sign.iter().map(|s| s.nb_gap[i]).collect::<Vec<_>>()),
                "kernel_residual": distribution(&with_sign.iter().map(|s| s.kernel_residual[i]).collect::<Vec<_>>()),
            }));
        }
        per_sign.insert(
            sign_name(sign).into(),
            json!({
                "eigenvalues": entries,
                "outlier_budget": with_sign[0].outlier_budget,
                "dist_v_y": distribution(&with_sign.iter().map(|s| s.dist_v_y).collect::<Vec<_>>()),
                "bound_v_y": with_sign[0].bound_v_y,
                "dist_v_phi": distribution(&with_sign.iter().map(|s| s.dist_v_phi).collect::<Vec<_>>()),
                "bound_v_phi": with_sign[0].bound_v_phi,
            }),
        );
    }
    let gaps = |f: fn(&bethe::detect::TheoryReport) -> f64| distribution(&reports.iter().map(|r| f(r)).collect::<Vec<_>>());
    let metrics = json!({
        "passed_trials": passed,
        "passed_fraction": if reports.is_empty() { 0.0 } else { passed as f64 / reports.len() as f64 },
        "check_pass_rates": check_rates,
        "signs": per_sign,
        "max_imag": gaps(|r| r.max_imag),
        "max_xy_gap": gaps(|r| r.inner_products.max_xy_gap),
        "max_xx_gap": gaps(|r| r.inner_products.max_xx_gap),
        "max_yy_offdiag": gaps(|r| r.inner_products.max_yy_offdiag),
    });
    let mut failures = Vec::new();
    if passed < reports.len() {
        failures.push(format!("{} of {} theory reports failed", reports.len() - passed, reports.len()));
    }
    let thresholds = json!({
        "tolerances": bethe::detect::theory::TheoryTolerances::default(),
        "required_pass_fraction": 1.0,
        "max_error_rate": MAX_ERROR_RATE,
    });
    Ok(ExperimentReport {
        summary: summary(config, Some(&model), seeds, errors, metrics, thresholds, failures),
        table,
        histogram: None,
    })
}

fn check_pass_rates(reports: &[&bethe::detect::TheoryReport]) -> Value {
    let total = reports.len().max(1) as f64;
    let rate = |f: fn(&bethe::detect::theory::TheoryChecks) -> bool| {
        reports.iter().filter(|r| f(&r.checks)).count() as f64 / total
    };
    json!({
        "nb_real": rate(|c| c.nb_real),
        "nb_location": rate(|c| c.nb_location),
        "kernel": rate(|c| c.kernel),
        "xy_below_lambda": rate(|c| c.xy_below_lambda),
        "yy_offdiag": rate(|c| c.yy_offdiag),
        "xy": rate(|c| c.xy),
        "xx": rate(|c| c.xx),
        "outlier_location": rate(|c| c.outlier_location),
        "subspace_y": rate(|c| c.subspace_y),
        "subspace_phi": rate(|c| c.subspace_phi),
    })
}

// ----------------------------------------------------------------- sweep

pub const SWEEP_HEADER: &[&str] = &[
    "ratio", "mu2", "trial", "seed", "status", "error", "d_hat", "r_hat_plus", "r_hat_minus",
    "detected",
];

#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub ratio: f64,
    pub mu2: f64,
    pub completed: usize,
    pub errors: usize,
    /// Fraction of completed trials with `r̂₊ ≥ 2`.
    pub detection_rate: f64,
}

/// Second-community detection rate is expected to rise with `μ₂/√d`.
pub fn is_monotone(points: &[SweepPoint], slack: f64) -> bool {
    let mut sorted: Vec<&SweepPoint> = points.iter().collect();
    sorted.sort_by(|a, b| a.ratio.total_cmp(&b.ratio));
    sorted.windows(2).all(|w| w[1].detection_rate + slack >= w[0].detection_rate)
}

fn sweep_experiment(config: &ExperimentConfig) -> CliResult<ExperimentReport> {
    let s = &config.sweep;
    let root_d = s.degree.sqrt();
    let seeds = config.seeds();
    let mut table = Table::new(SWEEP_HEADER);
    let mut points = Vec::new();
    let mut all_errors = Vec::new();
    for &ratio in &s.ratios {
        let mu2 = ratio * root_d;
        let model = ModelParams::two_block(s.degree, mu2, s.n)?;
        let outcomes = run_trials(config, &seeds, |_, seed| counts_trial(&model, seed, config.epsilon))?;
        for (i, o) in outcomes.iter().enumerate() {
            let prefix = vec![num(ratio), num(mu2), i.to_string(), seeds[i].to_string()];
            match o {
                Ok(t) => table.push(
                    prefix
                        .into_iter()
                        .chain([
                            "ok".into(),
                            String::new(),
                            num(t.d_hat),
                            t.r_hat_plus.to_string(),
                            t.r_hat_minus.to_string(),
                            u8::from(t.r_hat_plus >= 2).to_string(),
                        ])
                        .collect(),
                ),
                Err(e) => table.push(error_row(prefix, e, SWEEP_HEADER.len())),
            }
        }
        let (ok, errors) = split(outcomes);
        let detected = ok.iter().filter(|(_, t)| t.r_hat_plus >= 2).count();
        points.push(SweepPoint {
            ratio,
            mu2,
            completed: ok.len(),
            errors: errors.len(),
            detection_rate: if ok.is_empty() { 0.0 } else { detected as f64 / ok.len() as f64 },
        });
        all_errors.extend(errors);
    }

    let mut failures = Vec::new();
    for p in &points {
        if p.ratio >= SWEEP_HIGH.0 && p.detection_rate < SWEEP_HIGH.1 {
            failures.push(format!("ratio {}: detection rate {:.3} below {}", p.ratio, p.detection_rate, SWEEP_HIGH.1));
        }
        if p.ratio <= SWEEP_LOW.0 && p.detection_rate > SWEEP_LOW.1 {
            failures.push(format!("ratio {}: detection rate {:.3} above {}", p.ratio, p.detection_rate, SWEEP_LOW.1));
        }
    }
    let monotone = is_monotone(&points, SWEEP_MONOTONE_SLACK);
    if !monotone {
        failures.push("detection rate is not increasing in μ₂/√d".into());
    }
    let metrics = json!({"degree": s.degree, "n": s.n, "points": points, "monotone": monotone});
    let thresholds = json!({
        "high": {"min_ratio": SWEEP_HIGH.0, "min_rate": SWEEP_HIGH.1},
        "low": {"max_ratio": SWEEP_LOW.0, "max_rate": SWEEP_LOW.1},
        "monotone_slack": SWEEP_MONOTONE_SLACK,
        "max_error_rate": MAX_ERROR_RATE,
    });
    // Error rate is measured over every trial of every sweep point.
    let total = seeds.len() * s.ratios.len();
    let mut sum = summary(config, None, seeds, all_errors, metrics, thresholds, failures);
    sum.trials = total;
    sum.completed = total - sum.errors;
    sum.error_rate = sum.errors as f64 / total as f64;
    if sum.error_rate > MAX_ERROR_RATE && !sum.failures.iter().any(|f| f.starts_with("error rate")) {
        sum.failures.push(format!("error rate {:.3} exceeds {MAX_ERROR_RATE}", sum.error_rate));
    }
    sum.passed = sum.failures.is_empty();
    Ok(ExperimentReport { summary: sum, table, histogram: None })
}
