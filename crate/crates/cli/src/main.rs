use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vqc_compress::admm::{run_cqcp_admm, ADMMReport};
use vqc_compress::circuit::ParameterVector;
use vqc_compress::experiment::{
    load_circuit, load_dataset, render_report, run_experiment, train_vanilla, ExperimentConfig,
};
use vqc_compress::lut::build_lut;
use vqc_compress::recl::reconstruct_lut;
use vqc_compress::training::{accuracy, TrainConfig};
use vqc_compress::transpiler::{tcd, DepthTable, GENERIC_ANGLE};
use vqc_compress::{Error, Result};

#[derive(Parser)]
#[command(name = "vqcc", version, about = "Compilation-aware compression of variational quantum circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the uncompressed circuit and print its accuracy and depth.
    Train {
        #[command(flatten)]
        opts: Opts,
        /// Write the trained parameters here, one per line.
        #[arg(long)]
        params_out: Option<PathBuf>,
    },
    /// Print the standalone depth table as CSV, then the depth of a circuit.
    Depth {
        #[command(flatten)]
        opts: Opts,
        /// Parameters to evaluate the circuit at; generic angles otherwise.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Print the compression-level table for the circuit's gate kinds as CSV.
    Lut {
        #[command(flatten)]
        opts: Opts,
    },
    /// Train, then print the per-gate selected levels as CSV.
    Recl {
        #[command(flatten)]
        opts: Opts,
    },
    /// Train, compress with ADMM, and print the iteration trace.
    Compress {
        #[command(flatten)]
        opts: Opts,
        #[arg(long)]
        params_out: Option<PathBuf>,
    },
    /// Run every selected method and print the comparison table.
    Report {
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Args)]
struct Opts {
    /// key = value file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// syn4, syn16 or csv:<path>.
    #[arg(long)]
    dataset: Option<String>,
    /// Reference circuit name or circuit file.
    #[arg(long)]
    circuit: Option<String>,
    /// Comma-separated basis gate names.
    #[arg(long)]
    basis: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Comma-separated subset of vanilla, zero-only-pruning, prune-only,
    /// quant-only, comp-aware.
    #[arg(long)]
    methods: Option<String>,
    /// Per-gate depolarizing probability for noisy evaluation.
    #[arg(long)]
    noise_p: Option<f64>,
    #[arg(long)]
    shots: Option<usize>,
    /// table, csv or json.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Any other config key, as key=value. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Opts {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                ExperimentConfig::parse(&text)?
            }
            None => ExperimentConfig::default(),
        };
        let flags: [(&str, Option<String>); 15] = [
            ("dataset", self.dataset.clone()),
            ("circuit", self.circuit.clone()),
            ("basis", self.basis.clone()),
            ("seed", self.seed.map(|v| v.to_string())),
            ("train.epochs", self.epochs.map(|v| v.to_string())),
            ("admm.rho", self.rho.map(|v| v.to_string())),
            ("admm.alpha", self.alpha.map(|v| v.to_string())),
            ("admm.ratio", self.ratio.map(|v| v.to_string())),
            ("admm.zeta", self.zeta.map(|v| v.to_string())),
            ("admm.max_iters", self.max_iters.map(|v| v.to_string())),
            ("methods", self.methods.clone()),
            ("noise.shots", self.shots.map(|v| v.to_string())),
            ("noise.p", self.noise_p.map(|v| v.to_string())),
            ("format", self.format.clone()),
            ("output", self.output.as_ref().map(|p| p.display().to_string())),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.set(k, &v)?;
            }
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write_params(path: &PathBuf, p: &ParameterVector) -> Result<()> {
    let text: String = p.as_slice().iter().map(|v| format!("{v}\n")).collect();
    std::fs::write(path, text)?;
    Ok(())
}

fn read_params(path: &PathBuf) -> Result<ParameterVector> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut v = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        v.push(line.parse().map_err(|_| Error::Parse {
            line: i + 1,
            msg: format!("not a number: {line:?}"),
        })?);
    }
    ParameterVector::new(v)
}

fn train_config(cfg: &ExperimentConfig) -> TrainConfig {
    TrainConfig {
        seed: cfg.seed,
        ..cfg.train.clone()
    }
}

fn print_trace(report: &ADMMReport) {
    println!("r,loss,acc,tcd,theta_z_gap,masked");
    for it in &report.iterations {
        println!("{},{:.6},{:.4},{},{:.6},{}", it.r, it.loss, it.accuracy, it.tcd, it.theta_z_gap, it.masked);
    }
    match report.converged_at {
        Some(r) => println!("# converged at iteration {r}"),
        None => println!("# not converged"),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { opts, params_out } => {
            let cfg = opts.config()?;
            let (circuit, data) = (load_circuit(&cfg)?, load_dataset(&cfg)?);
            let params = train_vanilla(&circuit, &data, &train_config(&cfg))?;
            println!("train_accuracy {:.4}", accuracy(&circuit, &params, &data.train)?);
            println!("test_accuracy {:.4}", accuracy(&circuit, &params, &data.test)?);
            println!("tcd {}", tcd(&circuit, &params, &cfg.basis)?);
            if let Some(p) = params_out {
                write_params(&p, &params)?;
            }
        }
        Command::Depth { opts, params } => {
            let cfg = opts.config()?;
            print!("{}", DepthTable::build(&cfg.basis)?.to_csv());
            let circuit = load_circuit(&cfg)?;
            let theta = match params {
                Some(p) => read_params(&p)?,
                None => ParameterVector::new(vec![GENERIC_ANGLE; circuit.n_params()])?,
            };
            println!("# circuit tcd {}", tcd(&circuit, theta.as_slice(), &cfg.basis)?);
        }
        Command::Lut { opts } => {
            let cfg = opts.config()?;
            print!("{}", build_lut(&load_circuit(&cfg)?, &cfg.basis)?.to_csv());
        }
        Command::Recl { opts } => {
            let cfg = opts.config()?;
            let (circuit, data) = (load_circuit(&cfg)?, load_dataset(&cfg)?);
            let params = train_vanilla(&circuit, &data, &train_config(&cfg))?;
            let lut = build_lut(&circuit, &cfg.basis)?;
            let recon = reconstruct_lut(&circuit, &params, &lut, &data.train, &cfg.basis, cfg.admm.orientation)?;
            print!("{}", recon.to_csv(&circuit));
        }
        Command::Compress { opts, params_out } => {
            let cfg = opts.config()?;
            let (circuit, data) = (load_circuit(&cfg)?, load_dataset(&cfg)?);
            let warm = train_vanilla(&circuit, &data, &train_config(&cfg))?;
            let lut = build_lut(&circuit, &cfg.basis)?;
            let mut admm = cfg.admm.clone();
            admm.train = cfg.train.clone();
            let out = run_cqcp_admm(&circuit, &data, &lut, &warm, &admm, &cfg.basis, cfg.seed)?;
            print_trace(&out.report);
            let (t0, t1) = (tcd(&circuit, &warm, &cfg.basis)?, tcd(&circuit, &out.params, &cfg.basis)?);
            println!(
                "# vanilla acc {:.4} tcd {t0} | compressed acc {:.4} tcd {t1} speedup {:.2}x",
                accuracy(&circuit, &warm, &data.test)?,
                accuracy(&circuit, &out.params, &data.test)?,
                t0.max(1) as f64 / t1.max(1) as f64
            );
            if let Some(p) = params_out {
                write_params(&p, &out.params)?;
            }
        }
        Command::Report { opts } => {
            let cfg = opts.config()?;
            let report = run_experiment(&cfg)?;
            print!("{}", render_report(&report, cfg.format)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
