//! Run configuration: built-in defaults, overridden by an optional JSON
//! config file, overridden by command-line flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use bugclass_core::ensemble::{EnsembleConfig, EnsembleMode};
use bugclass_core::extract::FeatureGroup;
use bugclass_core::nb::EventModelKind;

use crate::args::CommonTrainArgs;
use crate::errors::{io_error, CliError};

/// Fully resolved parameters for training and evaluation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub alpha: f64,
    pub seed: u64,
    pub train_fraction: f64,
    pub mode: EnsembleMode,
    pub priority_order: Vec<FeatureGroup>,
    pub model_kind_by_group: BTreeMap<FeatureGroup, EventModelKind>,
    pub select_k: BTreeMap<FeatureGroup, usize>,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        let ensemble = EnsembleConfig::default_config();
        let select_k = [
            (FeatureGroup::Title, 2000),
            (FeatureGroup::Description, 2000),
            (FeatureGroup::Syslogs, 500),
            (FeatureGroup::Commands, 500),
            (FeatureGroup::Traces, 200),
        ];
        RunConfig {
            corpus: None,
            model: None,
            alpha: 1.0,
            seed: 0,
            train_fraction: 0.7,
            mode: ensemble.mode,
            priority_order: ensemble.priority_order,
            model_kind_by_group: ensemble.model_kind_by_group,
            select_k: select_k.into_iter().collect(),
        }
    }
}

impl RunConfig {
    pub fn ensemble_config(&self) -> EnsembleConfig {
        EnsembleConfig {
            priority_order: self.priority_order.clone(),
            model_kind_by_group: self.model_kind_by_group.clone(),
            mode: self.mode,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(CliError::Usage(format!(
                "alpha must be positive and finite, got {}",
                self.alpha
            )));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(CliError::Usage(format!(
                "train fraction must lie strictly between 0 and 1, got {}",
                self.train_fraction
            )));
        }
        if let Some((_, &k)) = self.select_k.iter().find(|(_, &k)| k == 0) {
            return Err(CliError::Usage(format!(
                "select-k must be at least 1, got {k}"
            )));
        }
        self.ensemble_config()
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))
    }
}

/// The on-disk config file: every field optional, unknown fields rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ConfigFile {
    corpus: Option<PathBuf>,
    model: Option<PathBuf>,
    alpha: Option<f64>,
    seed: Option<u64>,
    train_fraction: Option<f64>,
    mode: Option<String>,
    priority_order: Option<Vec<String>>,
    model_kind_by_group: Option<BTreeMap<String, String>>,
    select_k: Option<BTreeMap<String, usize>>,
}

fn parse_group(name: &str) -> Result<FeatureGroup, CliError> {
    name.parse().map_err(CliError::Usage)
}

fn parse_kind(name: &str) -> Result<EventModelKind, CliError> {
    name.parse().map_err(CliError::Usage)
}

fn parse_mode(name: &str) -> Result<EnsembleMode, CliError> {
    name.parse().map_err(CliError::Usage)
}

fn parse_priority(list: &[String]) -> Result<Vec<FeatureGroup>, CliError> {
    list.iter().map(|name| parse_group(name)).collect()
}

/// Resolves the effective configuration for a command: defaults, then the
/// config file (if given), then flags. `corpus_flag`/`train_fraction`/`seed`
/// are the command-specific flags that participate in the same precedence.
pub fn resolve(
    common: &CommonTrainArgs,
    corpus_flag: Option<&Path>,
    model_flag: Option<&Path>,
    train_fraction_flag: Option<f64>,
    seed_flag: Option<u64>,
) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::default();

    if let Some(path) = &common.config {
        let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        let file: ConfigFile = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config file {}: {e}", path.display())))?;
        if let Some(v) = file.corpus {
            config.corpus = Some(v);
        }
        if let Some(v) = file.model {
            config.model = Some(v);
        }
        if let Some(v) = file.alpha {
            config.alpha = v;
        }
        if let Some(v) = file.seed {
            config.seed = v;
        }
        if let Some(v) = file.train_fraction {
            config.train_fraction = v;
        }
        if let Some(v) = file.mode {
            config.mode = parse_mode(&v)?;
        }
        if let Some(v) = file.priority_order {
            config.priority_order = parse_priority(&v)?;
        }
        if let Some(map) = file.model_kind_by_group {
            for (group, kind) in map {
                config
                    .model_kind_by_group
                    .insert(parse_group(&group)?, parse_kind(&kind)?);
            }
        }
        if let Some(map) = file.select_k {
            for (group, k) in map {
                config.select_k.insert(parse_group(&group)?, k);
            }
        }
    }

    if let Some(path) = corpus_flag {
        config.corpus = Some(path.to_path_buf());
    }
    if let Some(path) = model_flag {
        config.model = Some(path.to_path_buf());
    }
    if let Some(alpha) = common.alpha {
        config.alpha = alpha;
    }
    if let Some(k) = common.select_k {
        for value in config.select_k.values_mut() {
            *value = k;
        }
    }
    if let Some(mode) = &common.mode {
        config.mode = parse_mode(mode)?;
    }
    if let Some(priority) = &common.priority {
        let names: Vec<String> = priority.split(',').map(|s| s.to_string()).collect();
        config.priority_order = parse_priority(&names)?;
    }
    if let Some(fraction) = train_fraction_flag {
        config.train_fraction = fraction;
    }
    if let Some(seed) = seed_flag {
        config.seed = seed;
    }

    config.validate()?;
    Ok(config)
}

/// The corpus path is required by train and evaluate.
pub fn required_corpus(config: &RunConfig) -> Result<&Path, CliError> {
    config.corpus.as_deref().ok_or_else(|| {
        CliError::Usage("no corpus path given (flag --corpus or config file)".into())
    })
}

pub fn required_model(config: &RunConfig) -> Result<&Path, CliError> {
    config
        .model
        .as_deref()
        .ok_or_else(|| CliError::Usage("no model path given (flag --model or config file)".into()))
}
