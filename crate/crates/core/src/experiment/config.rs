use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::agent::{Hyperparams, Variant};
use crate::datagen::SyntheticConfig;
use crate::error::{Error, Result};
use crate::game::CommunicationMode;
use crate::modality::{Modality, ModalityMask};

/// One of the four perception conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Condition(u8);

impl Condition {
    pub const ALL: [Condition; 4] = [Condition(1), Condition(2), Condition(3), Condition(4)];

    pub fn new(n: u8) -> Result<Self> {
        if (1..=4).contains(&n) {
            Ok(Condition(n))
        } else {
            Err(Error::config("condition", format!("must be between 1 and 4, got {n}")))
        }
    }

    pub fn number(self) -> u8 {
        self.0
    }

    /// Modalities perceived by agents A and B.
    pub fn masks(self) -> (ModalityMask, ModalityMask) {
        use Modality::*;
        let m = |ms: &[Modality]| ModalityMask::new(ms).expect("non-empty");
        match self.0 {
            1 => (ModalityMask::FULL, ModalityMask::FULL),
            2 => (ModalityMask::FULL, m(&[Vision, Sound])),
            3 => (ModalityMask::FULL, m(&[Vision])),
            4 => (m(&[Vision, Sound]), m(&[Haptic])),
            _ => unreachable!("validated on construction"),
        }
    }
}

impl TryFrom<u8> for Condition {
    type Error = Error;

    fn try_from(n: u8) -> Result<Self> {
        Condition::new(n)
    }
}

impl From<Condition> for u8 {
    fn from(c: Condition) -> u8 {
        c.0
    }
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub variant: Variant,
    pub method: CommunicationMode,
    pub condition: Condition,
    pub trials: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Model hyperparameters used by both agents.
    pub hyperparams: Hyperparams,
    /// Dataset shape and the priors the data is drawn from.
    pub synthetic: SyntheticConfig,
    pub output: PathBuf,
    /// Parallel trial limit; 0 uses every core, 1 runs sequentially.
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            variant: Variant::H2H,
            method: CommunicationMode::MH,
            condition: Condition(1),
            trials: 10,
            iterations: 300,
            seed: 0,
            hyperparams: Hyperparams::default(),
            synthetic: SyntheticConfig::default(),
            output: PathBuf::from("results"),
            jobs: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.iterations < 1 {
            return Err(Error::config("iterations", "must be at least 1"));
        }
        self.hyperparams.validate()?;
        self.synthetic.validate()
    }
}

/// Command-line values; each `Some` overrides the config file.
#[derive(Clone, Debug, Default)]
pub struct ConfigOverrides {
    pub variant: Option<String>,
    pub method: Option<String>,
    pub condition: Option<i64>,
    pub trials: Option<usize>,
    pub iterations: Option<usize>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub jobs: Option<usize>,
}

const TOP_KEYS: &[&str] = &[
    "variant",
    "method",
    "condition",
    "trials",
    "iterations",
    "seed",
    "hyperparams",
    "synthetic",
    "output",
    "jobs",
];
const HYPER_KEYS: &[&str] = &["alpha", "beta", "gamma", "categories", "signs"];
const BETA_KEYS: &[&str] = &["v", "s", "h"];
const SYNTH_KEYS: &[&str] = &[
    "num_types",
    "objects_per_type",
    "feature_dim",
    "draws_per_modality",
    "hyperparams",
];

fn check_keys(value: &Value, allowed: &[&str], prefix: &str) -> Result<()> {
    let Some(obj) = value.as_object() else {
        let key = if prefix.is_empty() {
            "<root>"
        } else {
            prefix.trim_end_matches('.')
        };
        return Err(Error::config(key, "expected a JSON object"));
    };
    for (k, v) in obj {
        let path = format!("{prefix}{k}");
        if !allowed.contains(&k.as_str()) {
            return Err(Error::config(path, "unknown key"));
        }
        let nested = match k.as_str() {
            "hyperparams" => Some(HYPER_KEYS),
            "synthetic" => Some(SYNTH_KEYS),
            "beta" => Some(BETA_KEYS),
            _ => None,
        };
        if let Some(keys) = nested {
            check_keys(v, keys, &format!("{path}."))?;
        }
    }
    Ok(())
}

fn field_error(obj: &Value, err: serde_json::Error) -> Error {
    // Re-run each top-level field on its own to find the culprit.
    if let Some(map) = obj.as_object() {
        for (k, v) in map {
            let probe = serde_json::json!({ k: v });
            if serde_json::from_value::<ExperimentConfig>(probe).is_err() {
                return Error::config(k.clone(), err.to_string());
            }
        }
    }
    Error::config("<root>", err.to_string())
}

/// Parses a JSON config document. Empty input yields the defaults.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    if text.trim().is_empty() {
        return Ok(ExperimentConfig::default());
    }
    let value: Value = serde_json::from_str(text).map_err(|e| Error::config("<root>", format!("invalid JSON: {e}")))?;
    check_keys(&value, TOP_KEYS, "")?;
    serde_json::from_value(value.clone()).map_err(|e| field_error(&value, e))
}

/// Merges an optional config file with command-line overrides (flags win).
pub fn parse_config(file: Option<&Path>, flags: &ConfigOverrides) -> Result<ExperimentConfig> {
    let mut cfg = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_config_str(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(v) = &flags.variant {
        cfg.variant = v.parse()?;
    }
    if let Some(m) = &flags.method {
        cfg.method = m.parse()?;
    }
    if let Some(c) = flags.condition {
        let n = u8::try_from(c).map_err(|_| Error::config("condition", format!("must be between 1 and 4, got {c}")))?;
        cfg.condition = Condition::new(n)?;
    }
    if let Some(t) = flags.trials {
        cfg.trials = t;
    }
    if let Some(i) = flags.iterations {
        cfg.iterations = i;
    }
    if let Some(s) = flags.seed {
        cfg.seed = s;
    }
    if let Some(o) = &flags.output {
        cfg.output = o.clone();
    }
    if let Some(j) = flags.jobs {
        cfg.jobs = j;
    }
    cfg.validate()?;
    Ok(cfg)
}
