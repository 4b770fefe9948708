//! End-to-end runs: train a vanilla model, compress it with each selected
//! method, and tabulate accuracy and depth.

mod config;
mod report;

pub use config::{DatasetSpec, ExperimentConfig, Method, ReportFormat};
pub use report::{emit_report, render_report, MethodRow, MethodTrace, Report};

use crate::admm::{baseline_compress, run_cqcp_admm, BaselineMode, CompressionOutcome};
use crate::circuit::{parse_circuit, reference_circuit, Circuit, ParameterVector};
use crate::error::{Error, Result};
use crate::lut::build_lut;
use crate::noise::noisy_accuracy;
use crate::training::{accuracy, generate_synthetic, init_params, load_csv, sgd_train, Dataset, TrainConfig};
use crate::transpiler::tcd;

/// Loads the dataset named by `config`.
pub fn load_dataset(config: &ExperimentConfig) -> Result<Dataset> {
    match &config.dataset {
        DatasetSpec::Syn4 => generate_synthetic(4, config.samples, config.seed),
        DatasetSpec::Syn16 => generate_synthetic(16, config.samples, config.seed),
        DatasetSpec::Csv { path } => load_csv(path, config.csv_classes, config.csv_pool, config.seed),
    }
}

/// Loads the circuit named by `config`, defaulting to the reference circuit
/// of a synthetic dataset.
pub fn load_circuit(config: &ExperimentConfig) -> Result<Circuit> {
    let name = match (config.circuit.as_str(), &config.dataset) {
        ("", DatasetSpec::Syn4) => "syn4",
        ("", DatasetSpec::Syn16) => "syn16",
        ("", DatasetSpec::Csv { .. }) => {
            return Err(Error::Config("csv datasets need an explicit circuit".into()))
        }
        (n, _) => n,
    };
    match name {
        "syn4" | "syn16" => reference_circuit(name),
        path => parse_circuit(&std::fs::read_to_string(path)?),
    }
}

/// Trains the uncompressed model from the configured initialisation.
pub fn train_vanilla(circuit: &Circuit, dataset: &Dataset, train: &TrainConfig) -> Result<ParameterVector> {
    let p0 = init_params(circuit.n_params(), train.init, train.seed);
    Ok(sgd_train(circuit, &p0, &dataset.train, train, None, None)?.params)
}

fn compress(
    method: Method,
    circuit: &Circuit,
    dataset: &Dataset,
    warm: &ParameterVector,
    config: &ExperimentConfig,
) -> Result<Option<CompressionOutcome>> {
    let lut = build_lut(circuit, &config.basis)?;
    let mut admm = config.admm.clone();
    admm.train = config.train.clone();
    let mode = match method {
        Method::Vanilla => return Ok(None),
        Method::CompAware => {
            return run_cqcp_admm(circuit, dataset, &lut, warm, &admm, &config.basis, config.seed).map(Some)
        }
        Method::ZeroOnlyPruning => BaselineMode::ZeroOnlyPruning,
        Method::PruneOnly => BaselineMode::PruneOnly,
        Method::QuantOnly => BaselineMode::QuantOnly,
    };
    baseline_compress(mode, circuit, dataset, &lut, warm, &admm, &config.basis, config.seed).map(Some)
}

/// Runs every selected method from one shared vanilla warm start. The
/// vanilla row is always present since speedups are measured against it.
/// Writes the report to `config.output` when set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let dataset = load_dataset(config)?;
    let circuit = load_circuit(config)?;
    if dataset.n_features() != circuit.n_features() {
        return Err(Error::Config(format!(
            "dataset has {} features but the circuit encodes {}",
            dataset.n_features(),
            circuit.n_features()
        )));
    }
    let train = TrainConfig {
        seed: config.seed,
        ..config.train.clone()
    };
    let warm = train_vanilla(&circuit, &dataset, &train)?;
    let base_tcd = tcd(&circuit, &warm, &config.basis)?;
    let base_acc = accuracy(&circuit, &warm, &dataset.test)?;

    let mut methods = config.methods.clone();
    if !methods.contains(&Method::Vanilla) {
        methods.push(Method::Vanilla);
    }
    methods.sort();
    methods.dedup();

    let mut rows = Vec::new();
    let mut traces = Vec::new();
    for method in methods {
        let outcome = compress(method, &circuit, &dataset, &warm, config)?;
        let params = outcome.as_ref().map_or(&warm, |o| &o.params);
        let acc = accuracy(&circuit, params, &dataset.test)?;
        let depth = tcd(&circuit, params, &config.basis)?;
        let speedup = base_tcd.max(1) as f64 / depth.max(1) as f64;
        let noisy = match &config.noise {
            Some(model) => Some(noisy_accuracy(
                &circuit,
                params,
                &dataset.test,
                &config.basis,
                model,
                config.seed,
            )?),
            None => None,
        };
        rows.push(MethodRow {
            method: method.name().to_string(),
            accuracy: acc,
            train_accuracy: accuracy(&circuit, params, &dataset.train)?,
            delta_accuracy: acc - base_acc,
            tcd: depth,
            speedup,
            metric: acc * speedup,
            masked: outcome.as_ref().map_or(0, |o| o.mask.count()),
            converged_at: outcome.as_ref().and_then(|o| o.report.converged_at),
            noisy_accuracy: noisy,
        });
        if let Some(o) = outcome {
            traces.push(MethodTrace {
                method: method.name().to_string(),
                iterations: o.report.iterations,
            });
        }
    }
    let report = Report {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed,
        config_hash: config.hash(),
        dataset: config.dataset.to_string(),
        rows,
        traces,
    };
    if let Some(path) = &config.output {
        emit_report(&report, config.format, path)?;
    }
    Ok(report)
}
