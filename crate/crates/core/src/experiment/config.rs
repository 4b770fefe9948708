use std::fmt;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::admm::ADMMConfig;
use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::recl::TauOrientation;
use crate::training::{InitScheme, TrainConfig};
use crate::transpiler::BasisGateSet;

#[derive(Clone, Debug, PartialEq)]
pub enum DatasetSpec {
    Syn4,
    Syn16,
    Csv { path: PathBuf },
}

impl DatasetSpec {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "syn4" => Ok(DatasetSpec::Syn4),
            "syn16" => Ok(DatasetSpec::Syn16),
            _ => match s.strip_prefix("csv:") {
                Some(p) if !p.is_empty() => Ok(DatasetSpec::Csv { path: p.into() }),
                _ => Err(Error::Config(format!("unknown dataset {s:?} (syn4, syn16, csv:<path>)"))),
            },
        }
    }
}

impl fmt::Display for DatasetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetSpec::Syn4 => f.write_str("syn4"),
            DatasetSpec::Syn16 => f.write_str("syn16"),
            DatasetSpec::Csv { path } => write!(f, "csv:{}", path.display()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Vanilla,
    ZeroOnlyPruning,
    PruneOnly,
    QuantOnly,
    CompAware,
}

impl Method {
    /// Execution and report order.
    pub const ALL: [Method; 5] = [
        Method::Vanilla,
        Method::ZeroOnlyPruning,
        Method::PruneOnly,
        Method::QuantOnly,
        Method::CompAware,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Vanilla => "vanilla",
            Method::ZeroOnlyPruning => "zero-only-pruning",
            Method::PruneOnly => "prune-only",
            Method::QuantOnly => "quant-only",
            Method::CompAware => "comp-aware",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Csv,
    Json,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::Config(format!("unknown report format {s:?} (table, csv, json)"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ReportFormat::Table => "table",
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

/// Everything a run depends on. Serialises to a flat `key = value` file.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    /// Reference circuit name (`syn4`, `syn16`) or path to a circuit file.
    /// Empty means the reference circuit named after the dataset.
    pub circuit: String,
    pub basis: BasisGateSet,
    pub samples: usize,
    pub csv_classes: usize,
    pub csv_pool: bool,
    pub train: TrainConfig,
    pub admm: ADMMConfig,
    pub methods: Vec<Method>,
    pub noise: Option<NoiseModel>,
    pub output: Option<PathBuf>,
    pub format: ReportFormat,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetSpec::Syn4,
            circuit: String::new(),
            basis: BasisGateSet::default(),
            samples: 100,
            csv_classes: 2,
            csv_pool: false,
            train: TrainConfig::default(),
            admm: ADMMConfig {
                target_ratio: 0.7,
                ..ADMMConfig::default()
            },
            methods: Method::ALL.to_vec(),
            noise: None,
            output: None,
            format: ReportFormat::Table,
            seed: 0,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

fn flag(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got {v:?}"))),
    }
}

impl ExperimentConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "dataset" => self.dataset = DatasetSpec::parse(v)?,
            "circuit" => self.circuit = v.to_string(),
            "basis" => self.basis = BasisGateSet::parse(v)?,
            "samples" => self.samples = num(key, v)?,
            "csv.classes" => self.csv_classes = num(key, v)?,
            "csv.pool" => self.csv_pool = flag(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "methods" => {
                let mut m = v
                    .split(',')
                    .map(|s| {
                        Method::from_name(s.trim())
                            .ok_or_else(|| Error::Config(format!("unknown method {:?}", s.trim())))
                    })
                    .collect::<Result<Vec<_>>>()?;
                m.sort();
                m.dedup();
                self.methods = m;
            }
            "train.lr" => self.train.learning_rate = num(key, v)?,
            "train.epochs" => self.train.epochs = num(key, v)?,
            "train.batch" => self.train.batch_size = num(key, v)?,
            "train.momentum" => self.train.momentum = num(key, v)?,
            "train.init" => {
                self.train.init = match v {
                    "uniform" => InitScheme::Uniform2Pi,
                    "zeros" => InitScheme::Zeros,
                    _ => return Err(Error::Config(format!("train.init: unknown scheme {v:?}"))),
                }
            }
            "admm.rho" => self.admm.rho = num(key, v)?,
            "admm.alpha" => self.admm.alpha = num(key, v)?,
            "admm.ratio" => self.admm.target_ratio = num(key, v)?,
            "admm.zeta" => self.admm.zeta = num(key, v)?,
            "admm.max_iters" => self.admm.max_iters = num(key, v)?,
            "admm.epochs_per_iter" => self.admm.epochs_per_iter = num(key, v)?,
            "admm.retrain_epochs" => self.admm.retrain_epochs = num(key, v)?,
            "admm.scaled_distance" => self.admm.scaled_distance = flag(key, v)?,
            "admm.tau" => {
                self.admm.orientation = match v {
                    "speedup" => TauOrientation::Speedup,
                    "ratio" => TauOrientation::Ratio,
                    _ => return Err(Error::Config(format!("admm.tau: expected speedup or ratio, got {v:?}"))),
                }
            }
            "noise.p" => {
                if v == "none" {
                    self.noise = None;
                } else {
                    let shots = self.noise.map_or(4096, |n| n.shots);
                    self.noise = Some(NoiseModel::new(num(key, v)?, shots).map_err(|e| Error::Config(e.to_string()))?);
                }
            }
            "noise.shots" => {
                let p = self.noise.map_or(0.0, |n| n.p);
                self.noise = Some(NoiseModel::new(p, num(key, v)?).map_err(|e| Error::Config(e.to_string()))?);
            }
            "output" => self.output = (!v.is_empty()).then(|| PathBuf::from(v)),
            "format" => self.format = ReportFormat::parse(v)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Parses a `key = value` file. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, "expected key = value"))?;
            cfg.set(k, v).map_err(|e| match e {
                Error::Config(m) => Error::parse(i + 1, m),
                other => other,
            })?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        if let DatasetSpec::Csv { path } = &self.dataset {
            if !path.exists() {
                return Err(Error::Config(format!("dataset file {} does not exist", path.display())));
            }
            if self.circuit.is_empty() {
                return Err(Error::Config("csv datasets need an explicit circuit".into()));
            }
        }
        if !self.circuit.is_empty() && !matches!(self.circuit.as_str(), "syn4" | "syn16") {
            let p = std::path::Path::new(&self.circuit);
            if !p.exists() {
                return Err(Error::Config(format!("circuit file {} does not exist", p.display())));
            }
        }
        self.train.validate()?;
        self.admm.validate()
    }

    /// Canonical `key = value` text; parsing it gives back `self`.
    pub fn to_kv(&self) -> String {
        let methods: Vec<_> = self.methods.iter().map(|m| m.name()).collect();
        let mut lines = vec![
            format!("dataset = {}", self.dataset),
            format!("circuit = {}", self.circuit),
            format!("basis = {}", self.basis),
            format!("samples = {}", self.samples),
            format!("csv.classes = {}", self.csv_classes),
            format!("csv.pool = {}", self.csv_pool),
            format!("seed = {}", self.seed),
            format!("methods = {}", methods.join(",")),
            format!("train.lr = {}", self.train.learning_rate),
            format!("train.epochs = {}", self.train.epochs),
            format!("train.batch = {}", self.train.batch_size),
            format!("train.momentum = {}", self.train.momentum),
            format!(
                "train.init = {}",
                match self.train.init {
                    InitScheme::Uniform2Pi => "uniform",
                    InitScheme::Zeros => "zeros",
                }
            ),
            format!("admm.rho = {}", self.admm.rho),
            format!("admm.alpha = {}", self.admm.alpha),
            format!("admm.ratio = {}", self.admm.target_ratio),
            format!("admm.zeta = {}", self.admm.zeta),
            format!("admm.max_iters = {}", self.admm.max_iters),
            format!("admm.epochs_per_iter = {}", self.admm.epochs_per_iter),
            format!("admm.retrain_epochs = {}", self.admm.retrain_epochs),
            format!("admm.scaled_distance = {}", self.admm.scaled_distance),
            format!(
                "admm.tau = {}",
                match self.admm.orientation {
                    TauOrientation::Speedup => "speedup",
                    TauOrientation::Ratio => "ratio",
                }
            ),
        ];
        match self.noise {
            Some(n) => {
                lines.push(format!("noise.p = {}", n.p));
                lines.push(format!("noise.shots = {}", n.shots));
            }
            None => lines.push("noise.p = none".into()),
        }
        if let Some(o) = &self.output {
            lines.push(format!("output = {}", o.display()));
        }
        lines.push(format!("format = {}", self.format.name()));
        lines.join("\n") + "\n"
    }

    /// SHA-256 of [`ExperimentConfig::to_kv`], hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_kv().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_round_trip() {
        let mut c = ExperimentConfig::default();
        c.set("admm.rho", "0.5").unwrap();
        c.set("methods", "comp-aware, vanilla").unwrap();
        c.set("noise.p", "0.01").unwrap();
        c.set("admm.tau", "ratio").unwrap();
        assert_eq!(c.methods, vec![Method::Vanilla, Method::CompAware]);
        let back = ExperimentConfig::parse(&c.to_kv()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        assert_eq!(c.noise.unwrap().shots, 4096);
    }

    #[test]
    fn bad_settings_are_config_errors() {
        let mut c = ExperimentConfig::default();
        assert!(c.set("nope", "1").unwrap_err().is_config());
        assert!(c.set("admm.rho", "abc").unwrap_err().is_config());
        assert!(c.set("dataset", "mnist").unwrap_err().is_config());
        match ExperimentConfig::parse("seed = 1\nadmm.alpha\n") {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        c.methods.clear();
        assert!(c.validate().unwrap_err().is_config());
        let mut c = ExperimentConfig::default();
        c.admm.alpha = 1.0;
        assert!(c.validate().unwrap_err().is_config());
    }
}
