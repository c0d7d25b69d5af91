//! Subcommands and their argument parsing.

use std::path::{Path, PathBuf};

use bethe::detect::{cluster, estimate_counts, format_labels, load_labels, overlap, theory_report, ClusterConfig, TheoryConfig, DEFAULT_RESTARTS};
use bethe::eig::io::encode_eigv;
use bethe::eig::DEFAULT_TOL;
use bethe::graph::io::{write_edge_list, write_matrix_market};
use bethe::graph::{load_graph, GraphFormat};
use bethe::model::{sample_graph, signal_spectrum, LabeledGraph, ModelFile, ModelParams, Sign};
use bethe::operators::bethe_hessian;
use bethe::SparseGraph;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::experiment::{run_experiment, ExperimentConfig, ExperimentKind, SweepSettings};
use crate::histogram::{self, DEFAULT_BINS};
use crate::output::{to_json, write_atomic, write_json, Table};

#[derive(Debug, Parser)]
#[command(name = "bethe", version, about = "Community detection with the Bethe-Hessian")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a graph from a model and write it with its labels.
    Generate(GenerateArgs),
    /// Eigenvalue histogram of H(t).
    Spectrum(SpectrumArgs),
    /// Estimate the numbers of positive and negative communities.
    Count(CountArgs),
    /// Cluster the vertices of a graph.
    Cluster(ClusterArgs),
    /// Compare a sample with the predictions of its model.
    Verify(VerifyArgs),
    /// Run a multi-seed experiment.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GraphFormatArg {
    EdgeList,
    MatrixMarket,
}

impl From<GraphFormatArg> for GraphFormat {
    fn from(f: GraphFormatArg) -> Self {
        match f {
            GraphFormatArg::EdgeList => GraphFormat::EdgeList,
            GraphFormatArg::MatrixMarket => GraphFormat::MatrixMarket,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    Plus,
    Minus,
}

impl From<SignArg> for Sign {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::Plus => Sign::Plus,
            SignArg::Minus => Sign::Minus,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    WindowedInertia,
    Dense,
}

#[derive(Clone, Debug, Args)]
pub struct CommonArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Counting margin; defaults to 1/ln n.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

/// A graph read from disk or sampled from a model.
#[derive(Clone, Debug, Args)]
pub struct GraphSource {
    /// Model JSON; the graph is sampled with `--seed` unless `--graph` is given.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Graph file.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = GraphFormatArg::EdgeList)]
    pub graph_format: GraphFormatArg,
    /// Ground-truth labels of `--graph`.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Overrides the model's `n`.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Clone, Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum, default_value_t = GraphFormatArg::EdgeList)]
    pub graph_format: GraphFormatArg,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Clone, Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub source: GraphSource,
    /// Operator parameter; defaults to `±√d̂` by `--sign`.
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    #[arg(long, value_enum, default_value_t = SignArg::Plus)]
    pub sign: SignArg,
    /// Window bounds; default to the Gershgorin interval.
    #[arg(long, allow_hyphen_values = true)]
    pub lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub hi: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::WindowedInertia)]
    pub method: MethodArg,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Clone, Debug, Args)]
pub struct CountArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Clone, Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    pub restarts: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Clone, Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Clone, Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long, value_enum)]
    pub kind: ExperimentKind,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Explicit comma-separated seeds; overrides `--seed` and `--trials`.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    pub restarts: usize,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
    /// Sweep: values of `μ₂/√d`.
    #[arg(long, value_delimiter = ',')]
    pub ratios: Option<Vec<f64>>,
    /// Sweep: mean degree.
    #[arg(long)]
    pub degree: Option<f64>,
    /// Overrides the number of vertices.
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// What a command prints on stdout.
pub struct Output {
    pub json: Value,
    pub table: Option<Table>,
}

impl Output {
    pub fn render(&self, format: OutputFormat) -> CliResult<String> {
        match (format, &self.table) {
            (OutputFormat::Csv, Some(t)) => t.to_csv(),
            (OutputFormat::Csv, None) => Err(CliError::Validation("this command has no CSV output".into())),
            (OutputFormat::Json, _) => to_json(&self.json),
        }
    }
}

/// Parses nothing; runs an already parsed command and returns its stdout.
pub fn run(cli: Cli) -> CliResult<String> {
    let (output, format) = match cli.command {
        Command::Generate(a) => (cmd_generate(&a)?, a.common.format),
        Command::Spectrum(a) => (cmd_spectrum(&a)?, a.common.format),
        Command::Count(a) => (cmd_count(&a)?, a.common.format),
        Command::Cluster(a) => (cmd_cluster(&a)?, a.common.format),
        Command::Verify(a) => (cmd_verify(&a)?, a.common.format),
        Command::Experiment(a) => return cmd_experiment(&a),
    };
    output.render(format)
}

pub fn load_model(path: &Path, n: Option<usize>, sampling_only: bool) -> CliResult<ModelParams> {
    let file = ModelFile::load(path)?;
    let params = if sampling_only { file.for_sampling()? } else { file.validate()? };
    Ok(match n {
        Some(n) => params.with_n(n)?,
        None => params,
    })
}

fn check_threads(threads: usize) -> CliResult<()> {
    if threads == 0 {
        return Err(CliError::Validation("threads must be positive".into()));
    }
    Ok(())
}

fn check_epsilon(epsilon: Option<f64>) -> CliResult<()> {
    match epsilon {
        Some(e) if !(e.is_finite() && e >= 0.0) => {
            Err(CliError::Validation(format!("epsilon {e} must be finite and non-negative")))
        }
        _ => Ok(()),
    }
}

fn encode_graph(graph: &SparseGraph, format: GraphFormat) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        GraphFormat::EdgeList => write_edge_list(graph, &mut buf)?,
        GraphFormat::MatrixMarket => write_matrix_market(graph, &mut buf)?,
    }
    Ok(buf)
}

fn graph_file_name(format: GraphFormat) -> &'static str {
    match format {
        GraphFormat::EdgeList => "graph.edges",
        GraphFormat::MatrixMarket => "graph.mtx",
    }
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| crate::output::io_error(dir, e))
}

/// A graph with optional planted labels and model.
struct Loaded {
    graph: SparseGraph,
    labels: Option<Vec<usize>>,
    model: Option<ModelParams>,
    seed: u64,
}

impl GraphSource {
    fn load(&self, seed: u64, model_required: bool) -> CliResult<Loaded> {
        let model = match &self.model {
            Some(p) => Some(load_model(p, self.n, !model_required)?),
            None if model_required => return Err(CliError::Validation("--model is required".into())),
            None => None,
        };
        if let Some(path) = &self.graph {
            let graph = load_graph(path, self.graph_format.into())?;
            let labels = self.labels.as_ref().map(load_labels).transpose()?;
            if let Some(l) = &labels {
                if l.len() != graph.n() {
                    return Err(CliError::Validation(format!(
                        "{} labels for a graph with {} vertices",
                        l.len(),
                        graph.n()
                    )));
                }
            }
            if let Some(m) = &model {
                if m.n() != graph.n() {
                    return Err(CliError::Validation(format!(
                        "model has n = {} but the graph has {} vertices",
                        m.n(),
                        graph.n()
                    )));
                }
            }
            return Ok(Loaded { graph, labels, model, seed });
        }
        match model {
            Some(m) => {
                let sample = sample_graph(&m, seed);
                Ok(Loaded { graph: sample.graph, labels: Some(sample.sigma), model: Some(m), seed })
            }
            None => Err(CliError::Validation("either --graph or --model is required".into())),
        }
    }
}

pub fn cmd_generate(args: &GenerateArgs) -> CliResult<Output> {
    let model = load_model(&args.model, args.n, true)?;
    let sample = sample_graph(&model, args.common.seed);
    let format: GraphFormat = args.graph_format.into();
    let d_hat = sample.graph.mean_degree();
    let provenance = json!({
        "model": model.to_file(),
        "model_path": args.model,
        "seed": args.common.seed,
        "n": sample.graph.n(),
        "num_edges": sample.graph.num_edges(),
        "d": model.d(),
        "d_hat": d_hat,
        "graph_format": format.to_string(),
        "graph_file": graph_file_name(format),
        "labels_file": "labels.txt",
    });
    let dir = args.common.out.clone().unwrap_or_else(|| PathBuf::from("."));
    create_dir(&dir)?;
    write_atomic(&dir.join(graph_file_name(format)), &encode_graph(&sample.graph, format)?)?;
    write_atomic(&dir.join("labels.txt"), format_labels(&sample.sigma).as_bytes())?;
    write_json(&dir.join("provenance.json"), &provenance)?;
    Ok(Output { json: provenance, table: None })
}

pub fn cmd_spectrum(args: &SpectrumArgs) -> CliResult<Output> {
    check_threads(args.common.threads)?;
    if args.bins == 0 {
        return Err(CliError::Validation("bins must be at least 1".into()));
    }
    let loaded = args.source.load(args.common.seed, false)?;
    let d_hat = loaded.graph.mean_degree();
    let t = match args.t {
        Some(t) if t.is_finite() => t,
        Some(t) => return Err(CliError::Validation(format!("t = {t}"))),
        None => Sign::from(args.sign).factor() * d_hat.sqrt(),
    };
    let op = bethe_hessian(&loaded.graph, t);
    let auto = histogram::auto_window(&op);
    let window = [args.lo.unwrap_or(auto[0]), args.hi.unwrap_or(auto[1])];
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.common.threads)
        .build()
        .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    let hist = pool.install(|| match args.method {
        MethodArg::WindowedInertia => histogram::windowed_inertia(&op, window, args.bins, loaded.seed),
        MethodArg::Dense => histogram::dense(&op, window, args.bins),
    })?;
    if let Some(dir) = &args.common.out {
        create_dir(dir)?;
        hist.table().write(&dir.join("histogram.csv"))?;
        write_json(&dir.join("histogram.json"), &hist)?;
    }
    let mut json = serde_json::to_value(&hist)?;
    json["t"] = json!(t);
    json["d_hat"] = json!(d_hat);
    Ok(Output { json, table: Some(hist.table()) })
}

pub fn cmd_count(args: &CountArgs) -> CliResult<Output> {
    check_epsilon(args.common.epsilon)?;
    let loaded = args.source.load(args.common.seed, false)?;
    let c = estimate_counts(&loaded.graph, args.common.epsilon)?;
    let mut json = json!({
        "n": loaded.graph.n(),
        "d_hat": c.d_hat,
        "epsilon": c.epsilon,
        "r_hat_plus": c.r_plus,
        "r_hat_minus": c.r_minus,
    });
    let mut table = Table::new(&["n", "d_hat", "epsilon", "r_hat_plus", "r_hat_minus"]);
    table.push(vec![
        loaded.graph.n().to_string(),
        crate::output::num(c.d_hat),
        crate::output::num(c.epsilon),
        c.r_plus.to_string(),
        c.r_minus.to_string(),
    ]);
    if let Some(m) = &loaded.model {
        if m.d() > 1.0 {
            let s = signal_spectrum(m);
            json["expected_plus"] = json!(s.r_plus);
            json["expected_minus"] = json!(s.r_minus);
            json["correct"] = json!((s.r_plus, s.r_minus) == (c.r_plus, c.r_minus));
        }
    }
    if let Some(dir) = &args.common.out {
        create_dir(dir)?;
        write_json(&dir.join("counts.json"), &json)?;
    }
    Ok(Output { json, table: Some(table) })
}

pub fn cmd_cluster(args: &ClusterArgs) -> CliResult<Output> {
    check_epsilon(args.common.epsilon)?;
    if args.restarts == 0 {
        return Err(CliError::Validation("restarts must be positive".into()));
    }
    let loaded = args.source.load(args.common.seed, false)?;
    let config = ClusterConfig {
        epsilon: args.common.epsilon,
        tol: args.tol,
        seed: args.common.seed,
        restarts: args.restarts,
    };
    let res = cluster(&loaded.graph, &config)?;
    let mut json = serde_json::to_value(&res)?;
    if let Some(labels) = &loaded.labels {
        json["overlap"] = json!(overlap(labels, &res.sigma_hat)?);
    }
    let mut table = Table::new(&["vertex", "label"]);
    for (x, l) in res.sigma_hat.iter().enumerate() {
        table.push(vec![x.to_string(), l.to_string()]);
    }
    if let Some(dir) = &args.common.out {
        create_dir(dir)?;
        write_atomic(&dir.join("labels.txt"), format_labels(&res.sigma_hat).as_bytes())?;
        let embedding = bethe::detect::Embedding {
            v_plus: res.v_plus.clone(),
            values_plus: res.eigenvalues_plus.clone(),
            v_minus: res.v_minus.clone(),
            values_minus: res.eigenvalues_minus.clone(),
        };
        write_atomic(&dir.join("embedding.eigv"), &encode_eigv(&embedding.concatenated())?)?;
        write_json(&dir.join("cluster.json"), &json)?;
    }
    Ok(Output { json, table: Some(table) })
}

pub fn cmd_verify(args: &VerifyArgs) -> CliResult<Output> {
    let loaded = args.source.load(args.common.seed, true)?;
    let model = loaded.model.expect("model is required");
    let sigma = loaded
        .labels
        .ok_or_else(|| CliError::Validation("--labels is required with --graph".into()))?;
    let spectrum = signal_spectrum(&model);
    let sample = LabeledGraph { graph: loaded.graph, sigma, params: model, seed: loaded.seed };
    let config = TheoryConfig {
        tol: args.tol.unwrap_or(TheoryConfig::default().tol),
        seed: loaded.seed,
        ..TheoryConfig::default()
    };
    let report = theory_report(&sample, &spectrum, &config)?;
    let mut table = Table::new(crate::experiment::THEORY_HEADER);
    crate::experiment::theory_rows(&mut table, &[String::from("0"), loaded.seed.to_string()], &report, &spectrum);
    if let Some(dir) = &args.common.out {
        create_dir(dir)?;
        write_json(&dir.join("theory.json"), &report)?;
        table.write(&dir.join("theory.csv"))?;
    }
    Ok(Output { json: serde_json::to_value(&report)?, table: Some(table) })
}

/// Builds the experiment configuration from the command line.
pub fn experiment_config(args: &ExperimentArgs) -> CliResult<ExperimentConfig> {
    let mut config = ExperimentConfig::new(args.kind);
    if let Some(path) = &args.model {
        config.model = Some(load_model(path, args.n, true)?);
        config.model_path = Some(path.clone());
    } else if args.kind == ExperimentKind::Figure1 {
        config.model = Some(crate::experiment::reference_model(args.n.unwrap_or(4000)));
    }
    config.base_seed = args.common.seed;
    config.trials = args.trials;
    config.seed_list = args.seeds.clone();
    config.epsilon = args.common.epsilon;
    config.tol = args.tol;
    config.restarts = args.restarts;
    config.threads = args.common.threads;
    config.out = args.common.out.clone();
    config.bins = args.bins;
    let defaults = SweepSettings::default();
    config.sweep = SweepSettings {
        degree: args.degree.unwrap_or(defaults.degree),
        ratios: args.ratios.clone().unwrap_or(defaults.ratios),
        n: args.n.unwrap_or(defaults.n),
    };
    Ok(config)
}

/// Prints the summary (or trial table) and maps the verdict to the exit code.
pub fn cmd_experiment(args: &ExperimentArgs) -> CliResult<String> {
    let config = experiment_config(args)?;
    if let Some(dir) = &config.out {
        create_dir(dir)?;
    }
    let report = run_experiment(&config)?;
    let text = match args.common.format {
        OutputFormat::Json => to_json(&report.summary)?,
        OutputFormat::Csv => report.table.to_csv()?,
    };
    match report.verdict() {
        Ok(()) => Ok(text),
        Err(e) => {
            print!("{text}");
            Err(e)
        }
    }
}
