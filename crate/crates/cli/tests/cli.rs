//! The `bethe` binary: files written, exit codes, output schemas.

use std::path::Path;
use std::process::{Command, Output};

use bethe::detect::load_labels;
use bethe::eig::io::load_eigv;
use bethe::graph::{load_graph, GraphFormat};
use bethe_cli::experiment::{COUNTS_HEADER, RECOVERY_HEADER};
use serde_json::Value;

fn bethe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bethe")).args(args).output().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write_model(dir: &Path, name: &str, p: &str, n: usize) -> String {
    let path = dir.join(name);
    std::fs::write(&path, format!(r#"{{"P": {p}, "pi": [0.5, 0.5], "n": {n}}}"#)).unwrap();
    path.to_str().unwrap().to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_writes_graph_labels_and_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "m.json", "[[10, 2], [2, 10]]", 4000);
    let out = dir.path().join("a");
    let prov = stdout_json(&bethe(&["generate", "--model", &model, "--seed", "7", "--out", s(&out)]));
    let d_hat = prov["d_hat"].as_f64().unwrap();
    assert!((5.5..=6.5).contains(&d_hat), "d̂ = {d_hat}");
    let g = load_graph(out.join("graph.edges"), GraphFormat::EdgeList).unwrap();
    assert_eq!(g.n(), 4000);
    assert_eq!(g.num_edges() as u64, prov["num_edges"].as_u64().unwrap());
    assert_eq!(load_labels(out.join("labels.txt")).unwrap().len(), 4000);
    let on_disk: Value = serde_json::from_str(&std::fs::read_to_string(out.join("provenance.json")).unwrap()).unwrap();
    assert_eq!(on_disk, prov);

    let again = dir.path().join("b");
    stdout_json(&bethe(&["generate", "--model", &model, "--seed", "7", "--out", s(&again)]));
    assert_eq!(
        std::fs::read(out.join("graph.edges")).unwrap(),
        std::fs::read(again.join("graph.edges")).unwrap()
    );
    // No temporary files left behind.
    assert_eq!(std::fs::read_dir(&out).unwrap().count(), 3);
}

#[test]
fn zero_model_gives_empty_graph() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "m.json", "[[0, 0], [0, 0]]", 10);
    let out = dir.path().join("g");
    let prov = stdout_json(&bethe(&[
        "generate", "--model", &model, "--out", s(&out), "--graph-format", "matrix-market",
    ]));
    assert_eq!(prov["num_edges"], 0);
    let g = load_graph(out.join("graph.mtx"), GraphFormat::MatrixMarket).unwrap();
    assert_eq!((g.n(), g.num_edges()), (10, 0));
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_model(dir.path(), "bad.json", "[[1, 2], [3, 1]]", 10);
    assert_eq!(bethe(&["generate", "--model", &bad]).status.code(), Some(2));
    assert_eq!(bethe(&["count", "--graph", s(&dir.path().join("missing"))]).status.code(), Some(2));
    assert_eq!(bethe(&["count"]).status.code(), Some(2));
    assert_eq!(bethe(&["frobnicate"]).status.code(), Some(2));
    let model = write_model(dir.path(), "m.json", "[[10, 2], [2, 10]]", 300);
    assert_eq!(bethe(&["count", "--model", &model, "--epsilon", "-1"]).status.code(), Some(2));
    assert_eq!(bethe(&["spectrum", "--model", &model, "--bins", "0"]).status.code(), Some(2));
    // Below the degree threshold the counts are undefined.
    let sparse = write_model(dir.path(), "sparse.json", "[[0.5, 0.5], [0.5, 0.5]]", 300);
    let out = bethe(&["count", "--model", &sparse]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn count_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "m.json", "[[10, 2], [2, 10]]", 2000);
    let c = stdout_json(&bethe(&["count", "--model", &model, "--seed", "1"]));
    assert_eq!((c["r_hat_plus"].as_u64(), c["r_hat_minus"].as_u64()), (Some(2), Some(0)));
    assert_eq!(c["expected_plus"], 2);
    assert_eq!(c["correct"], true);
    let csv = bethe(&["count", "--model", &model, "--seed", "1", "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "n,d_hat,epsilon,r_hat_plus,r_hat_minus");
    assert!(text.lines().nth(1).unwrap().ends_with(",2,0"));
}

#[test]
fn spectrum_histograms() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "m.json", "[[6, 1], [1, 6]]", 400);
    let g = dir.path().join("g");
    stdout_json(&bethe(&["generate", "--model", &model, "--seed", "2", "--out", s(&g)]));
    let graph = g.join("graph.edges");

    // Automatic window: every eigenvalue lands in a bin.
    let out = dir.path().join("h");
    let h = stdout_json(&bethe(&["spectrum", "--graph", s(&graph), "--bins", "40", "--out", s(&out)]));
    let counts: Vec<u64> = h["counts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).collect();
    assert_eq!(counts.iter().sum::<u64>(), 400);
    assert_eq!(h["method"], "windowed-inertia");
    let csv = std::fs::read_to_string(out.join("histogram.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "bin_lo,bin_hi,count");
    assert_eq!(csv.lines().count(), 41);

    // Same histogram from the dense method.
    let d = stdout_json(&bethe(&["spectrum", "--graph", s(&graph), "--bins", "40", "--method", "dense"]));
    assert_eq!(d["counts"], h["counts"]);
    assert_eq!(d["negative_count"], h["negative_count"]);

    // t = 0 is D − I: the bin holding k − 1 counts the vertices of degree k.
    let t0 = stdout_json(&bethe(&[
        "spectrum", "--graph", s(&graph), "--t", "0", "--lo", "-1.5", "--hi", "2.5", "--bins", "4",
    ]));
    let degrees = load_graph(&graph, GraphFormat::EdgeList).unwrap().degrees();
    let expect: Vec<usize> = (0..4).map(|k| degrees.iter().filter(|&&d| d == k).count()).collect();
    let got: Vec<usize> = t0["counts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap() as usize).collect();
    assert_eq!(got, expect);

    // A window past the spectrum is empty.
    let far = stdout_json(&bethe(&["spectrum", "--graph", s(&graph), "--lo", "1000", "--hi", "2000"]));
    assert!(far["counts"].as_array().unwrap().iter().all(|c| c == 0));
    assert_eq!(far["below_window"], 400);
}

#[test]
fn cluster_writes_labels_and_embedding() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "m.json", "[[2, 10], [10, 2]]", 2000);
    let g = dir.path().join("g");
    stdout_json(&bethe(&["generate", "--model", &model, "--seed", "4", "--out", s(&g)]));
    let out = dir.path().join("c");
    let res = stdout_json(&bethe(&[
        "cluster",
        "--graph",
        s(&g.join("graph.edges")),
        "--labels",
        s(&g.join("labels.txt")),
        "--seed",
        "4",
        "--out",
        s(&out),
    ]));
    assert_eq!(res["r_hat"], 2);
    assert!(res["overlap"].as_f64().unwrap() >= 0.75);
    let labels = load_labels(out.join("labels.txt")).unwrap();
    assert_eq!(labels.len(), 2000);
    let v = load_eigv(out.join("embedding.eigv")).unwrap();
    assert_eq!(v.shape(), (2000, 2));
    let stored: Value = serde_json::from_str(&std::fs::read_to_string(out.join("cluster.json")).unwrap()).unwrap();
    assert_eq!(stored, res);
}

#[test]
fn verify_reports_theory() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "m.json", "[[10, 2], [2, 10]]", 4000);
    let out = dir.path().join("v");
    let r = stdout_json(&bethe(&["verify", "--model", &model, "--seed", "1", "--out", s(&out)]));
    assert_eq!(r["passed"], true);
    assert_eq!(r["signs"][0]["sign"], "Plus");
    let csv = std::fs::read_to_string(out.join("theory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    // --graph needs labels to compare with the model.
    let g = dir.path().join("g");
    stdout_json(&bethe(&["generate", "--model", &model, "--seed", "1", "--out", s(&g)]));
    let no_labels = bethe(&["verify", "--model", &model, "--graph", s(&g.join("graph.edges"))]);
    assert_eq!(no_labels.status.code(), Some(2));
    let with_labels = stdout_json(&bethe(&[
        "verify",
        "--model",
        &model,
        "--graph",
        s(&g.join("graph.edges")),
        "--labels",
        s(&g.join("labels.txt")),
        "--seed",
        "1",
    ]));
    assert_eq!(with_labels["inner_products"], r["inner_products"]);
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn assert_numeric_cells_finite(rows: &[Vec<String>], text_columns: &[usize]) {
    for row in rows {
        for (j, cell) in row.iter().enumerate() {
            if !text_columns.contains(&j) && !cell.is_empty() {
                assert!(cell.parse::<f64>().unwrap().is_finite(), "cell {cell:?}");
            }
        }
    }
}

#[test]
fn experiment_tables_have_fixed_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "m.json", "[[10, 2], [2, 10]]", 1500);
    let out = dir.path().join("e");
    let summary = stdout_json(&bethe(&[
        "experiment", "--kind", "counts", "--model", &model, "--seeds", "5,9,11", "--out", s(&out),
    ]));
    assert_eq!(summary["seeds"], serde_json::json!([5, 9, 11]));
    assert_eq!(summary["passed"], true);
    let (header, rows) = read_csv(&out.join("trials.csv"));
    assert_eq!(header, COUNTS_HEADER);
    assert_eq!(rows.len(), 3);
    assert_numeric_cells_finite(&rows, &[2, 3]);

    let out = dir.path().join("r");
    stdout_json(&bethe(&[
        "experiment", "--kind", "recovery", "--model", &model, "--trials", "2", "--seed", "3", "--out", s(&out),
        "--threads", "2",
    ]));
    let (header, rows) = read_csv(&out.join("trials.csv"));
    assert_eq!(header, RECOVERY_HEADER);
    assert_eq!(rows.iter().map(|r| r[1].as_str()).collect::<Vec<_>>(), ["3", "2"]);
    assert_numeric_cells_finite(&rows, &[2, 3]);
}

#[test]
fn experiment_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // No community structure: recovery misses its overlap floor.
    let flat = write_model(dir.path(), "flat.json", "[[5, 5], [5, 5]]", 1000);
    let out = dir.path().join("flat");
    let res = bethe(&["experiment", "--kind", "recovery", "--model", &flat, "--trials", "2", "--out", s(&out)]);
    assert_eq!(res.status.code(), Some(4));
    let summary: Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(summary["passed"], false);
    assert!(out.join("summary.json").exists());

    // Every trial errors: the run fails as a solver failure.
    let sparse = write_model(dir.path(), "sparse.json", "[[0.5, 0.5], [0.5, 0.5]]", 300);
    let out = dir.path().join("sparse");
    let res = bethe(&["experiment", "--kind", "counts", "--model", &sparse, "--trials", "3", "--out", s(&out)]);
    assert_eq!(res.status.code(), Some(3));
    let (_, rows) = read_csv(&out.join("trials.csv"));
    assert!(rows.iter().all(|r| r[2] == "validation" && !r[3].is_empty()));

    assert_eq!(bethe(&["experiment", "--kind", "counts"]).status.code(), Some(2));
    assert_eq!(bethe(&["experiment", "--kind", "figure1", "--trials", "0"]).status.code(), Some(2));
}

#[test]
fn theory_and_sweep_experiments() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "m.json", "[[10, 2], [2, 10]]", 4000);
    let out = dir.path().join("t");
    let summary = stdout_json(&bethe(&[
        "experiment", "--kind", "theory", "--model", &model, "--trials", "2", "--out", s(&out),
    ]));
    assert_eq!(summary["metrics"]["passed_trials"], 2);
    let outliers = &summary["metrics"]["signs"]["plus"]["eigenvalues"];
    assert!((outliers[0]["outlier_predicted"].as_f64().unwrap() + 5.1464).abs() < 1e-4);
    assert!((outliers[1]["outlier_predicted"].as_f64().unwrap() + 1.4722).abs() < 1e-4);
    let (header, rows) = read_csv(&out.join("trials.csv"));
    assert_eq!(header, bethe_cli::experiment::THEORY_HEADER);
    // Two informative eigenvalues per trial, one row each.
    assert_eq!(rows.len(), 4);
    assert_numeric_cells_finite(&rows, &[2, 3, 5]);

    let out = dir.path().join("s");
    let summary = stdout_json(&bethe(&[
        "experiment", "--kind", "sweep", "--ratios", "0.5,1.5", "--trials", "4", "--n", "2000", "--out", s(&out),
    ]));
    let points = summary["metrics"]["points"].as_array().unwrap();
    assert_eq!(points[0]["detection_rate"], 0.0);
    assert_eq!(points[1]["detection_rate"], 1.0);
    let (header, rows) = read_csv(&out.join("trials.csv"));
    assert_eq!(header, bethe_cli::experiment::SWEEP_HEADER);
    assert_eq!(rows.len(), 8);
}
