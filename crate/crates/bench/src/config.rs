//! Experiment configuration.
//!
//! A configuration starts from the defaults of its experiment kind. A JSON
//! file and then command-line flags override individual fields; both are
//! expressed as a [`ConfigOverrides`]. Example file:
//!
//! ```json
//! {
//!   "experiment": "qft_frobenius",
//!   "num_layers": 5,
//!   "optimizers": [
//!     { "algorithm": "adam", "learning_rate": 0.05 },
//!     { "algorithm": "ipg" }
//!   ],
//!   "base_seed": 8,
//!   "grow_layers": { "threshold": 1e-5 }
//! }
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ipgq::ansatz::EntanglerPattern;
use ipgq::optim::Algorithm;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

/// Learning rate of the first-order baselines.
pub const DEFAULT_LEARNING_RATE: f64 = 0.09;
/// First seed of every default experiment.
pub const DEFAULT_BASE_SEED: u64 = 8;
/// Random input states per histogram of a unitary experiment.
pub const DEFAULT_HISTOGRAM_SAMPLES: usize = 1000;
/// Largest register accepted by the harness.
pub const MAX_QUBITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// `(|0..0> - |1..1>)/sqrt 2` from the all-zero input.
    GhzPrep,
    /// Equal superposition of the one-hot basis states from the all-zero input.
    WPrep,
    QftMatrixDistance,
    QftFrobenius,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 4] =
        [ExperimentKind::GhzPrep, ExperimentKind::WPrep, ExperimentKind::QftMatrixDistance, ExperimentKind::QftFrobenius];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::GhzPrep => "ghz_prep",
            ExperimentKind::WPrep => "w_prep",
            ExperimentKind::QftMatrixDistance => "qft_matrix_distance",
            ExperimentKind::QftFrobenius => "qft_frobenius",
        }
    }

    /// Whether the cost compares whole unitaries rather than output states.
    pub fn is_unitary(self) -> bool {
        matches!(self, ExperimentKind::QftMatrixDistance | ExperimentKind::QftFrobenius)
    }

    /// `(qubits, layers, iterations, runs)`.
    pub fn default_shape(self) -> (usize, usize, usize, usize) {
        match self {
            ExperimentKind::GhzPrep => (5, 3, 32, 3),
            ExperimentKind::WPrep => (4, 3, 64, 2),
            ExperimentKind::QftMatrixDistance => (3, 5, 80, 4),
            ExperimentKind::QftFrobenius => (3, 5, 64, 4),
        }
    }

    /// Optimizers compared in each experiment by default.
    pub fn default_optimizers(self) -> Vec<Algorithm> {
        let lr = DEFAULT_LEARNING_RATE;
        match self {
            ExperimentKind::GhzPrep => vec![Algorithm::gd(lr), Algorithm::adam(lr), Algorithm::ipg()],
            ExperimentKind::WPrep => {
                vec![Algorithm::gd(lr), Algorithm::adam(lr), Algorithm::lbfgs(), Algorithm::ipg()]
            }
            ExperimentKind::QftMatrixDistance | ExperimentKind::QftFrobenius => {
                vec![Algorithm::lbfgs(), Algorithm::adam(lr), Algorithm::ipg()]
            }
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "ghz" | "ghz_prep" => Ok(ExperimentKind::GhzPrep),
            "w" | "w_prep" => Ok(ExperimentKind::WPrep),
            "qft_md" | "qft_matrix_distance" => Ok(ExperimentKind::QftMatrixDistance),
            "qft" | "qft_frobenius" => Ok(ExperimentKind::QftFrobenius),
            _ => Err(BenchError::Config(format!(
                "unknown experiment '{s}' (expected ghz_prep, w_prep, qft_matrix_distance or qft_frobenius)"
            ))),
        }
    }
}

/// Default-settings optimizer for a tag such as `"ipg"`.
pub fn algorithm_from_name(name: &str) -> Result<Algorithm> {
    match name.to_ascii_lowercase().as_str() {
        "gd" => Ok(Algorithm::gd(DEFAULT_LEARNING_RATE)),
        "adam" => Ok(Algorithm::adam(DEFAULT_LEARNING_RATE)),
        "lbfgs" | "l-bfgs" => Ok(Algorithm::lbfgs()),
        "ipg" => Ok(Algorithm::ipg()),
        _ => Err(BenchError::Config(format!("unknown optimizer '{name}' (expected gd, adam, lbfgs or ipg)"))),
    }
}

pub fn entangler_from_name(name: &str) -> Result<EntanglerPattern> {
    match name.to_ascii_lowercase().replace('-', "_").as_str() {
        "every" | "chain_every_layer" => Ok(EntanglerPattern::ChainEveryLayer),
        "between" | "chain_between_layers" => Ok(EntanglerPattern::ChainBetweenLayers),
        _ => Err(BenchError::Config(format!("unknown entangler pattern '{name}' (expected every or between)"))),
    }
}

/// Re-run with two more layers while the best final cost stays above
/// `threshold`, at most `max_rounds` times.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowLayers {
    pub threshold: f64,
    #[serde(default = "default_grow_rounds")]
    pub max_rounds: usize,
}

fn default_grow_rounds() -> usize {
    3
}

impl GrowLayers {
    pub fn new(threshold: f64) -> Self {
        Self { threshold, max_rounds: default_grow_rounds() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub num_qubits: usize,
    pub num_layers: usize,
    pub optimizers: Vec<Algorithm>,
    pub iterations: usize,
    pub n_runs: usize,
    pub base_seed: u64,
    pub entangler: EntanglerPattern,
    /// Every optimizer starts from the same seeds. Otherwise optimizer `k`
    /// uses seeds `base_seed + k * n_runs ..`.
    pub shared_init: bool,
    pub grow_layers: Option<GrowLayers>,
    pub histogram_samples: usize,
    /// Not part of the record, so that output location does not change it.
    #[serde(skip)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn defaults(experiment: ExperimentKind) -> Self {
        let (num_qubits, num_layers, iterations, n_runs) = experiment.default_shape();
        Self {
            experiment,
            num_qubits,
            num_layers,
            optimizers: experiment.default_optimizers(),
            iterations,
            n_runs,
            base_seed: DEFAULT_BASE_SEED,
            entangler: EntanglerPattern::default(),
            shared_init: true,
            grow_layers: None,
            histogram_samples: DEFAULT_HISTOGRAM_SAMPLES,
            output_dir: None,
        }
    }

    /// Applies the set fields of `overrides`. The experiment kind is not
    /// changed here; pick it before calling [`ExperimentConfig::defaults`].
    pub fn apply(&mut self, overrides: &ConfigOverrides) {
        macro_rules! take {
            ($($field:ident),*) => {$(
                if let Some(v) = &overrides.$field {
                    self.$field = v.clone();
                }
            )*};
        }
        take!(num_qubits, num_layers, optimizers, iterations, n_runs, base_seed, entangler, shared_init, histogram_samples);
        if overrides.grow_layers.is_some() {
            self.grow_layers = overrides.grow_layers;
        }
        if overrides.output_dir.is_some() {
            self.output_dir = overrides.output_dir.clone();
        }
    }

    /// Defaults for the chosen kind, then the file, then the flags.
    ///
    /// The kind comes from the flags, else the file, else `fallback`.
    pub fn resolve(fallback: ExperimentKind, file: Option<&ConfigOverrides>, flags: &ConfigOverrides) -> Result<Self> {
        let kind = flags.experiment.or(file.and_then(|f| f.experiment)).unwrap_or(fallback);
        let mut config = Self::defaults(kind);
        if let Some(file) = file {
            config.apply(file);
        }
        config.apply(flags);
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(BenchError::Config(m));
        if !(1..=MAX_QUBITS).contains(&self.num_qubits) {
            return fail(format!("num_qubits must lie in 1..={MAX_QUBITS}, got {}", self.num_qubits));
        }
        if self.num_layers == 0 {
            return fail("num_layers must be at least 1".into());
        }
        if self.n_runs == 0 {
            return fail("n_runs must be at least 1".into());
        }
        if self.optimizers.is_empty() {
            return fail("at least one optimizer is required".into());
        }
        for (i, a) in self.optimizers.iter().enumerate() {
            if self.optimizers[..i].iter().any(|b| b.tag() == a.tag()) {
                return fail(format!("optimizer '{}' listed twice", a.tag()));
            }
            a.build().map_err(|e| BenchError::Config(format!("optimizer '{}': {e}", a.tag())))?;
        }
        if self.experiment.is_unitary() && self.histogram_samples == 0 {
            return fail("histogram_samples must be at least 1".into());
        }
        if let Some(g) = self.grow_layers {
            if !(g.threshold > 0.0) {
                return fail(format!("grow_layers threshold must be positive, got {}", g.threshold));
            }
        }
        let last_seed = self.n_runs as u64 * self.optimizers.len() as u64;
        if self.base_seed.checked_add(last_seed).is_none() {
            return fail("base_seed too large for the requested runs".into());
        }
        Ok(())
    }

    /// Seeds used by optimizer number `index`.
    pub fn seeds_for(&self, index: usize) -> std::ops::Range<u64> {
        let start = if self.shared_init { self.base_seed } else { self.base_seed + (index * self.n_runs) as u64 };
        start..start + self.n_runs as u64
    }
}

/// Partial configuration, as read from a JSON file or built from flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub experiment: Option<ExperimentKind>,
    pub num_qubits: Option<usize>,
    pub num_layers: Option<usize>,
    pub optimizers: Option<Vec<Algorithm>>,
    pub iterations: Option<usize>,
    pub n_runs: Option<usize>,
    pub base_seed: Option<u64>,
    pub entangler: Option<EntanglerPattern>,
    pub shared_init: Option<bool>,
    pub grow_layers: Option<GrowLayers>,
    pub histogram_samples: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

impl ConfigOverrides {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))
    }
}
