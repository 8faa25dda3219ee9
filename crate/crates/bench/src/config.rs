//! Flat `key = value` experiment configuration.
//!
//! Numeric keys accept lists: `a,b,c`, inclusive ranges `lo:hi` (step 1) and
//! stepped ranges `lo:step:hi`, freely mixed (`2,4,10:2:20`). Later settings
//! override earlier ones, so command-line overrides are applied after the file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use confined_omp::{SignalModel, DEFAULT_EPSILON};

use crate::error::{config_err, BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    NuVsK,
    GammaVsK,
    RecoveryVsK,
    OpcountVsK,
    RecoveryVsM,
    OpcountVsM,
    KhatSensitivity,
    NoisyConfProb,
    NoisySupport,
    DOptimization,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::NuVsK,
        Experiment::GammaVsK,
        Experiment::RecoveryVsK,
        Experiment::OpcountVsK,
        Experiment::RecoveryVsM,
        Experiment::OpcountVsM,
        Experiment::KhatSensitivity,
        Experiment::NoisyConfProb,
        Experiment::NoisySupport,
        Experiment::DOptimization,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::NuVsK => "nu_vs_K",
            Experiment::GammaVsK => "gamma_vs_K",
            Experiment::RecoveryVsK => "recovery_vs_K",
            Experiment::OpcountVsK => "opcount_vs_K",
            Experiment::RecoveryVsM => "recovery_vs_m",
            Experiment::OpcountVsM => "opcount_vs_m",
            Experiment::KhatSensitivity => "khat_sensitivity",
            Experiment::NoisyConfProb => "noisy_conf_prob",
            Experiment::NoisySupport => "noisy_support",
            Experiment::DOptimization => "d_optimization",
        }
    }

    pub fn is_noisy(self) -> bool {
        matches!(self, Experiment::NoisyConfProb | Experiment::NoisySupport)
    }

    fn defaults(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Experiment::NuVsK | Experiment::GammaVsK => &[("m", "100"), ("d", "8,12,16"), ("K", "1:20")],
            Experiment::RecoveryVsK | Experiment::OpcountVsK => &[("m", "128"), ("d", "10"), ("K", "2:2:40")],
            Experiment::RecoveryVsM | Experiment::OpcountVsM => &[("m", "50:10:200"), ("d", "10"), ("K", "8")],
            Experiment::KhatSensitivity => &[
                ("m", "128"),
                ("d", "10"),
                ("K", "2:2:40"),
                ("algorithms", "confined_omp,confined_gomp"),
            ],
            Experiment::NoisyConfProb => &[
                ("m", "128"),
                ("d", "10"),
                ("K", "10"),
                ("model", "flat"),
                ("theta", "0.4,0.8,1"),
                ("eta", "0.05:0.05:0.6"),
            ],
            Experiment::NoisySupport => &[
                ("m", "128"),
                ("d", "10"),
                ("K", "8"),
                ("model", "flat"),
                ("eta", "0.05:0.05:0.6"),
                ("algorithms", "omp,confined_omp"),
            ],
            Experiment::DOptimization => &[
                ("m", "100"),
                ("d", "auto"),
                ("K", "5,10"),
                ("model", "flat"),
                ("algorithms", "confined_omp"),
            ],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
                BenchError::Config(format!("unknown experiment `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Omp,
    ConfinedOmp,
    Gomp,
    ConfinedGomp,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Omp => "omp",
            Algorithm::ConfinedOmp => "confined_omp",
            Algorithm::Gomp => "gomp",
            Algorithm::ConfinedGomp => "confined_gomp",
        }
    }

    pub fn is_confined(self) -> bool {
        matches!(self, Algorithm::ConfinedOmp | Algorithm::ConfinedGomp)
    }
}

impl FromStr for Algorithm {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        [Algorithm::Omp, Algorithm::ConfinedOmp, Algorithm::Gomp, Algorithm::ConfinedGomp]
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| BenchError::Config(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Gaussian,
    Flat,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DegreeGrid {
    List(Vec<usize>),
    /// Every integer `d` with `ln m < d <= m / 2`.
    Auto,
}

impl DegreeGrid {
    pub fn for_m(&self, m: usize) -> Vec<usize> {
        match self {
            DegreeGrid::List(ds) => ds.clone(),
            DegreeGrid::Auto => ((m as f64).ln().floor() as usize + 1..=m / 2).collect(),
        }
    }
}

const COMMON_DEFAULTS: &[(&str, &str)] = &[
    ("n", "256"),
    ("model", "gaussian"),
    ("mu", "0"),
    ("sigma", "1"),
    ("theta", "1"),
    ("eta", "0"),
    ("N", "3"),
    ("epsilon", "1e-12"),
    ("margin", "2"),
    ("kmax", "auto"),
    ("algorithms", "omp,confined_omp,gomp,confined_gomp"),
    ("trials", "1000"),
    ("seed", "1"),
    ("workers", "0"),
];

const KEYS: &[&str] = &[
    "m", "n", "d", "K", "model", "mu", "sigma", "theta", "eta", "N", "epsilon", "margin", "kmax", "algorithms",
    "trials", "seed", "workers",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub m: Vec<usize>,
    pub n: Vec<usize>,
    pub d: DegreeGrid,
    pub k: Vec<usize>,
    pub model: ModelKind,
    /// Gaussian means, swept.
    pub mu: Vec<f64>,
    pub sigma: f64,
    /// Flat amplitudes, swept.
    pub theta: Vec<f64>,
    /// Noise bounds, swept by the noisy experiments and ignored elsewhere.
    pub eta: Vec<f64>,
    pub batch: usize,
    /// Confinement threshold for noiseless runs; noisy runs use `eta`.
    pub epsilon: f64,
    /// Extra iterations of the `K_hat + margin` variant.
    pub margin: usize,
    pub k_max: Option<usize>,
    pub algorithms: Vec<Algorithm>,
    pub trials: usize,
    pub seed: u64,
    /// Worker threads; 0 picks the machine default.
    pub workers: usize,
}

fn parse_scalar<T: FromStr>(key: &str, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| BenchError::Config(format!("`{key}`: cannot parse `{s}`")))
}

fn parse_usize_list(key: &str, s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim) {
        let parts: Vec<&str> = item.split(':').collect();
        let (lo, step, hi): (usize, usize, usize) = match parts.as_slice() {
            [v] => {
                out.push(parse_scalar(key, v)?);
                continue;
            }
            [lo, hi] => (parse_scalar(key, lo)?, 1, parse_scalar(key, hi)?),
            [lo, step, hi] => (parse_scalar(key, lo)?, parse_scalar(key, step)?, parse_scalar(key, hi)?),
            _ => return config_err(format!("`{key}`: malformed range `{item}`")),
        };
        if step == 0 || lo > hi {
            return config_err(format!("`{key}`: empty range `{item}`"));
        }
        out.extend((lo..=hi).step_by(step));
    }
    Ok(out)
}

fn parse_f64_list(key: &str, s: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim) {
        let parts: Vec<f64> = item.split(':').map(|p| parse_scalar(key, p)).collect::<Result<_>>()?;
        let (lo, step, hi) = match parts.as_slice() {
            [v] => {
                out.push(*v);
                continue;
            }
            [lo, hi] => (*lo, 1.0, *hi),
            [lo, step, hi] => (*lo, *step, *hi),
            _ => return config_err(format!("`{key}`: malformed range `{item}`")),
        };
        if !(step > 0.0) || lo > hi || !hi.is_finite() {
            return config_err(format!("`{key}`: empty range `{item}`"));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize;
        // round away the drift of repeated float steps
        out.extend((0..=count).map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12));
    }
    Ok(out)
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return config_err(format!("line {}: expected `key = value`, got `{line}`", no + 1));
        };
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_text(&text)
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        Self::from_pairs::<&str, &str>(experiment, &[]).expect("built-in defaults are valid")
    }

    /// Built-in defaults overlaid with `pairs` in order.
    pub fn from_pairs<K: AsRef<str>, V: AsRef<str>>(experiment: Experiment, pairs: &[(K, V)]) -> Result<Self> {
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        for (k, v) in COMMON_DEFAULTS.iter().chain(experiment.defaults()) {
            map.insert(k.to_string(), v.to_string());
        }
        for (k, v) in pairs {
            let key = match k.as_ref().trim() {
                "k" => "K",
                "batch" => "N",
                "master_seed" => "seed",
                other => other,
            };
            if key == "experiment" {
                if v.as_ref().parse::<Experiment>()? != experiment {
                    return config_err(format!("config is for `{}`, not `{experiment}`", v.as_ref()));
                }
                continue;
            }
            if !KEYS.contains(&key) {
                return config_err(format!("unknown key `{key}`"));
            }
            map.insert(key.to_string(), v.as_ref().to_string());
        }
        let get = |k: &str| map[k].as_str();

        let model = match get("model").to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => ModelKind::Gaussian,
            "flat" => ModelKind::Flat,
            other => return config_err(format!("`model`: expected gaussian or flat, got `{other}`")),
        };
        let d = if get("d") == "auto" {
            DegreeGrid::Auto
        } else {
            DegreeGrid::List(parse_usize_list("d", get("d"))?)
        };
        let k_max = match get("kmax") {
            "auto" => None,
            s => Some(parse_scalar("kmax", s)?),
        };
        let algorithms = get("algorithms")
            .split(',')
            .map(|a| a.trim().parse())
            .collect::<Result<Vec<Algorithm>>>()?;
        let cfg = ExperimentConfig {
            experiment,
            m: parse_usize_list("m", get("m"))?,
            n: parse_usize_list("n", get("n"))?,
            d,
            k: parse_usize_list("K", get("K"))?,
            model,
            mu: parse_f64_list("mu", get("mu"))?,
            sigma: parse_scalar("sigma", get("sigma"))?,
            theta: parse_f64_list("theta", get("theta"))?,
            eta: parse_f64_list("eta", get("eta"))?,
            batch: parse_scalar("N", get("N"))?,
            epsilon: parse_scalar("epsilon", get("epsilon"))?,
            margin: parse_scalar("margin", get("margin"))?,
            k_max,
            algorithms,
            trials: parse_scalar("trials", get("trials"))?,
            seed: parse_scalar("seed", get("seed"))?,
            workers: parse_scalar("workers", get("workers"))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let empty = |name: &str, len: usize| -> Result<()> {
            if len == 0 {
                config_err(format!("`{name}` sweep is empty"))
            } else {
                Ok(())
            }
        };
        empty("m", self.m.len())?;
        empty("n", self.n.len())?;
        empty("K", self.k.len())?;
        empty("eta", self.eta.len())?;
        empty("algorithms", self.algorithms.len())?;
        if let DegreeGrid::List(ds) = &self.d {
            empty("d", ds.len())?;
        }
        if self.trials == 0 {
            return config_err("`trials` must be >= 1");
        }
        if self.batch == 0 {
            return config_err("`N` must be >= 1");
        }
        if !(self.epsilon >= 0.0) {
            return config_err("`epsilon` must be >= 0");
        }
        if self.eta.iter().any(|&e| !(e >= 0.0)) {
            return config_err("`eta` values must be >= 0");
        }
        if self.k.contains(&0) {
            return config_err("`K` values must be >= 1");
        }
        for m in &self.m {
            let ds = self.d.for_m(*m);
            if ds.is_empty() {
                return config_err(format!("no admissible degree for m = {m}"));
            }
            if let Some(&d) = ds.iter().find(|&&d| d == 0 || d > *m) {
                return config_err(format!("degree d = {d} must satisfy 1 <= d <= m = {m}"));
            }
            for k in &self.k {
                if self.n.iter().any(|n| k > n) {
                    return config_err(format!("K = {k} exceeds n"));
                }
                if k > m {
                    return config_err(format!("K = {k} exceeds m = {m}"));
                }
            }
        }
        for (_, model) in self.models() {
            model.validate().map_err(|e| BenchError::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// `(amplitude, model)` pairs of the signal sweep.
    pub fn models(&self) -> Vec<(f64, SignalModel)> {
        match self.model {
            ModelKind::Gaussian => self
                .mu
                .iter()
                .map(|&mu| (mu, SignalModel::Gaussian { mean: mu, std_dev: self.sigma }))
                .collect(),
            ModelKind::Flat => self
                .theta
                .iter()
                .map(|&t| (t, SignalModel::Flat { amplitude: t }))
                .collect(),
        }
    }

    pub fn model_name(&self) -> &'static str {
        match self.model {
            ModelKind::Gaussian => "gaussian",
            ModelKind::Flat => "flat",
        }
    }

    /// Threshold used by the confined solvers at noise level `eta`.
    pub fn epsilon_for(&self, eta: f64) -> f64 {
        if self.experiment.is_noisy() {
            if eta > 0.0 {
                eta
            } else {
                DEFAULT_EPSILON
            }
        } else {
            self.epsilon
        }
    }

    pub fn etas(&self) -> Vec<f64> {
        if self.experiment.is_noisy() {
            self.eta.clone()
        } else {
            vec![0.0]
        }
    }
}
