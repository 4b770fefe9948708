use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
    pub n_classes: usize,
    pub seed: u64,
}

impl Dataset {
    /// Shuffles `samples` with `seed` and keeps the first 90% (rounded) for training.
    pub fn split(mut samples: Vec<Sample>, n_classes: usize, seed: u64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Data("dataset has no samples".into()));
        }
        if let Some(s) = samples.iter().find(|s| s.label >= n_classes) {
            return Err(Error::Data(format!("label {} >= {n_classes} classes", s.label)));
        }
        let width = samples[0].features.len();
        if samples.iter().any(|s| s.features.len() != width) {
            return Err(Error::Data("samples have differing feature counts".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        samples.shuffle(&mut rng);
        let n_train = (samples.len() * 9 + 5) / 10;
        let test = samples.split_off(n_train);
        Ok(Self {
            train: samples,
            test,
            n_classes,
            seed,
        })
    }

    pub fn n_features(&self) -> usize {
        self.train.first().map_or(0, |s| s.features.len())
    }
}

/// Generator settings for the two-Gaussian synthetic task.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub n_features: usize,
    pub n_samples: usize,
    /// Mean and standard deviation of D1.
    pub d1: (f64, f64),
    /// Mean and standard deviation of D2.
    pub d2: (f64, f64),
}

impl SyntheticSpec {
    pub fn new(n_features: usize, n_samples: usize) -> Self {
        Self {
            n_features,
            n_samples,
            d1: (0.25, 0.1),
            d2: (0.75, 0.1),
        }
    }
}

/// Two balanced classes. Class 0 draws the first half of its features from D1
/// and the second half from D2; class 1 the other way round. Values are
/// clipped to `[0, 1]`.
pub fn generate_synthetic(n_features: usize, n_samples: usize, seed: u64) -> Result<Dataset> {
    generate_synthetic_with(&SyntheticSpec::new(n_features, n_samples), seed)
}

pub fn generate_synthetic_with(spec: &SyntheticSpec, seed: u64) -> Result<Dataset> {
    if spec.n_features != 4 && spec.n_features != 16 {
        return Err(Error::Config(format!(
            "synthetic data supports 4 or 16 features, got {}",
            spec.n_features
        )));
    }
    if spec.n_samples < 2 {
        return Err(Error::Config("need at least two samples".into()));
    }
    let normal = |(m, s): (f64, f64)| {
        Normal::new(m, s).map_err(|e| Error::Config(format!("bad distribution ({m}, {s}): {e}")))
    };
    let (d1, d2) = (normal(spec.d1)?, normal(spec.d2)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = spec.n_features / 2;
    let samples = (0..spec.n_samples)
        .map(|i| {
            let label = usize::from(i >= spec.n_samples / 2);
            let features = (0..spec.n_features)
                .map(|k| {
                    let first = (k < half) == (label == 0);
                    let v = if first { d1.sample(&mut rng) } else { d2.sample(&mut rng) };
                    v.clamp(0.0, 1.0)
                })
                .collect();
            Sample { features, label }
        })
        .collect();
    Dataset::split(samples, 2, seed)
}

/// Side of the square images accepted by the pooling reducer.
pub const IMAGE_SIDE: usize = 28;
const POOL_OUT: usize = 4;

/// Average-pools a row-major 28×28 image to 4×4 (7×7 blocks).
pub fn pool_28_to_4(pixels: &[f64]) -> Result<Vec<f64>> {
    if pixels.len() != IMAGE_SIDE * IMAGE_SIDE {
        return Err(Error::Data(format!(
            "pooling expects {} pixels, got {}",
            IMAGE_SIDE * IMAGE_SIDE,
            pixels.len()
        )));
    }
    let b = IMAGE_SIDE / POOL_OUT;
    let mut out = Vec::with_capacity(POOL_OUT * POOL_OUT);
    for br in 0..POOL_OUT {
        for bc in 0..POOL_OUT {
            let mut sum = 0.0;
            for r in br * b..(br + 1) * b {
                sum += pixels[r * IMAGE_SIDE + bc * b..r * IMAGE_SIDE + (bc + 1) * b].iter().sum::<f64>();
            }
            out.push(sum / (b * b) as f64);
        }
    }
    Ok(out)
}

/// Parses `label,f1,...,fk` rows. Blank lines and lines starting with `#`
/// are skipped; a first line that does not parse as numbers is taken as a header.
pub fn parse_csv(text: &str, n_classes: usize, pool: bool) -> Result<Vec<Sample>> {
    let mut samples = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let label = match fields[0].parse::<usize>() {
            Ok(l) => l,
            Err(_) if samples.is_empty() && i == 0 => continue,
            Err(_) => return Err(Error::parse(i + 1, format!("bad label {:?}", fields[0]))),
        };
        if label >= n_classes {
            return Err(Error::parse(i + 1, format!("label {label} >= {n_classes} classes")));
        }
        let mut features = fields[1..]
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(i + 1, format!("bad feature {f:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if features.is_empty() {
            return Err(Error::parse(i + 1, "row has no features"));
        }
        if pool {
            features = pool_28_to_4(&features).map_err(|e| Error::parse(i + 1, e.to_string()))?;
        }
        samples.push(Sample { features, label });
    }
    Ok(samples)
}

pub fn load_csv(path: impl AsRef<Path>, n_classes: usize, pool: bool, seed: u64) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    Dataset::split(parse_csv(&text, n_classes, pool)?, n_classes, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_split_and_balance() {
        let d = generate_synthetic(4, 100, 7).unwrap();
        assert_eq!((d.train.len(), d.test.len()), (90, 10));
        let all: Vec<_> = d.train.iter().chain(&d.test).collect();
        assert_eq!(all.iter().filter(|s| s.label == 0).count(), 50);
        assert!(all.iter().flat_map(|s| &s.features).all(|v| (0.0..=1.0).contains(v)));
        assert!(generate_synthetic(5, 100, 7).unwrap_err().is_config());
        assert_eq!(generate_synthetic(16, 100, 3).unwrap(), generate_synthetic(16, 100, 3).unwrap());
    }

    #[test]
    fn csv_parsing() {
        let s = parse_csv("label,a,b\n0,0.1,0.2\n1,0.3,0.4\n", 2, false).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[1].features, vec![0.3, 0.4]);
        match parse_csv("0,0.1,0.2\n1,abc,0.4\n", 2, false) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(parse_csv("0,0.1\n2,0.3\n", 2, false).is_err());
    }

    #[test]
    fn pooling_blocks() {
        let mut img = vec![0.0; 784];
        // top-left block constant 1, block (3,3) constant 0.5
        for r in 0..7 {
            for c in 0..7 {
                img[r * 28 + c] = 1.0;
                img[(21 + r) * 28 + 21 + c] = 0.5;
            }
        }
        let p = pool_28_to_4(&img).unwrap();
        assert_eq!(p.len(), 16);
        assert!((p[0] - 1.0).abs() < 1e-12);
        assert!((p[15] - 0.5).abs() < 1e-12);
        assert!(p[1..15].iter().all(|&v| v == 0.0));
    }
}
