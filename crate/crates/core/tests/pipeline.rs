use std::fmt::Write as _;

use vqc_compress::experiment::{
    emit_report, render_report, run_experiment, ExperimentConfig, Method, Report, ReportFormat,
};
use vqc_compress::Error;

fn quick(seed: u64) -> ExperimentConfig {
    ExperimentConfig::parse(&format!(
        "seed = {seed}
         train.epochs = 20
         admm.max_iters = 3
         admm.epochs_per_iter = 5
         admm.retrain_epochs = 5
         admm.ratio = 0.5"
    ))
    .unwrap()
}

#[test]
fn vanilla_only_gives_one_row() {
    let mut cfg = quick(1);
    cfg.methods = vec![Method::Vanilla];
    let r = run_experiment(&cfg).unwrap();
    assert_eq!(r.rows.len(), 1);
    assert_eq!(r.rows[0].method, "vanilla");
    assert_eq!(r.rows[0].speedup, 1.0);
    assert_eq!(r.rows[0].delta_accuracy, 0.0);
    assert!(r.traces.is_empty());
}

#[test]
fn all_methods_are_deterministic_and_consistent() {
    let cfg = quick(2);
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    for f in [ReportFormat::Table, ReportFormat::Csv, ReportFormat::Json] {
        assert_eq!(render_report(&a, f).unwrap(), render_report(&b, f).unwrap());
    }
    let names: Vec<&str> = a.rows.iter().map(|r| r.method.as_str()).collect();
    assert_eq!(names, ["vanilla", "zero-only-pruning", "prune-only", "quant-only", "comp-aware"]);
    let base = &a.rows[0];
    for r in &a.rows {
        assert_eq!(r.speedup, base.tcd as f64 / r.tcd as f64);
        assert_eq!(r.delta_accuracy, r.accuracy - base.accuracy);
        assert_eq!(r.metric, r.accuracy * r.speedup);
    }
    assert_eq!(Report::rows_from_csv(&a.to_csv()).unwrap(), a.rows);
    assert_eq!(Report::from_json(&a.to_json().unwrap()).unwrap(), a);
    assert_eq!(a.config_hash, cfg.hash());
    assert_eq!(a.traces.len(), 4);
    assert!(a.traces[0].iterations.is_empty());
}

#[test]
fn report_is_written_to_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let mut cfg = quick(3);
    cfg.methods = vec![Method::Vanilla];
    cfg.output = Some(path.clone());
    cfg.format = ReportFormat::Json;
    let r = run_experiment(&cfg).unwrap();
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(Report::from_json(&written).unwrap(), r);

    let bad = dir.path().join("missing").join("r.csv");
    assert!(matches!(emit_report(&r, ReportFormat::Csv, &bad), Err(Error::Io(_))));
}

#[test]
fn csv_dataset_with_explicit_circuit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.csv");
    let mut text = String::from("label,a,b,c,d\n");
    for i in 0..40 {
        let (lo, hi) = (0.1 + 0.002 * i as f64, 0.9 - 0.002 * i as f64);
        let _ = match i % 2 {
            0 => writeln!(text, "0,{lo},{lo},{hi},{hi}"),
            _ => writeln!(text, "1,{hi},{hi},{lo},{lo}"),
        };
    }
    std::fs::write(&path, text).unwrap();
    let mut cfg = quick(4);
    cfg.set("dataset", &format!("csv:{}", path.display())).unwrap();
    assert!(cfg.validate().unwrap_err().is_config());
    cfg.set("circuit", "syn4").unwrap();
    cfg.set("methods", "vanilla,comp-aware").unwrap();
    let r = run_experiment(&cfg).unwrap();
    assert_eq!(r.rows.len(), 2);
    assert!(r.dataset.starts_with("csv:"));
}

#[test]
fn configuration_errors() {
    let mut cfg = quick(5);
    cfg.set("dataset", "csv:/nonexistent/file.csv").unwrap();
    cfg.set("circuit", "syn4").unwrap();
    assert!(run_experiment(&cfg).unwrap_err().is_config());

    let mut cfg = quick(5);
    cfg.set("dataset", "syn16").unwrap();
    cfg.set("circuit", "syn4").unwrap();
    assert!(run_experiment(&cfg).unwrap_err().is_config());

    let mut cfg = quick(5);
    cfg.methods.clear();
    assert!(run_experiment(&cfg).unwrap_err().is_config());
}
