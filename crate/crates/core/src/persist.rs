//! Versioned JSON persistence for trained ensembles.
//!
//! One file holds the whole ensemble: the combination config plus, per
//! feature group, the event model kind, smoothing, selected features in
//! order, and the log-space parameter arrays. Numbers are written with
//! enough precision to reload bit-exactly, so a reloaded model predicts
//! identically to the one saved.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ensemble::{EnsembleConfig, EnsembleModel};
use crate::extract::FeatureGroup;
use crate::features::Vocabulary;
use crate::nb::{ClassModel, EventModelKind};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed model JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported model format version {found} (expected {FORMAT_VERSION})")]
    UnsupportedVersion { found: u32 },
    #[error("invalid model file: {0}")]
    Invalid(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format_version: u32,
    categories: Vec<String>,
    config: EnsembleConfig,
    models: BTreeMap<FeatureGroup, StoredModel>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoredModel {
    kind: EventModelKind,
    group: FeatureGroup,
    alpha: f64,
    /// Selected vocabulary in model order (the vector axis of `log_prob`).
    features: Vec<String>,
    log_prior: Vec<f64>,
    log_prob: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    log_not_prob: Option<Vec<Vec<f64>>>,
}

/// Serializes an ensemble as pretty, newline-terminated JSON.
pub fn write_model<W: Write>(mut writer: W, model: &EnsembleModel) -> Result<(), PersistError> {
    let file = ModelFile {
        format_version: FORMAT_VERSION,
        categories: model.categories.clone(),
        config: model.config.clone(),
        models: model
            .models
            .iter()
            .map(|(&group, m)| {
                (
                    group,
                    StoredModel {
                        kind: m.kind,
                        group: m.group,
                        alpha: m.alpha,
                        features: m.vocab.terms().to_vec(),
                        log_prior: m.log_prior.clone(),
                        log_prob: m.log_prob.clone(),
                        log_not_prob: m.log_not_prob.clone(),
                    },
                )
            })
            .collect(),
    };
    serde_json::to_writer_pretty(&mut writer, &file)?;
    writer.write_all(b"\n").map_err(|source| PersistError::Io {
        path: PathBuf::from("<writer>"),
        source,
    })
}

/// Deserializes and structurally validates an ensemble.
pub fn read_model<R: io::Read>(reader: R) -> Result<EnsembleModel, PersistError> {
    let file: ModelFile = serde_json::from_reader(reader)?;
    if file.format_version != FORMAT_VERSION {
        return Err(PersistError::UnsupportedVersion {
            found: file.format_version,
        });
    }
    file.config
        .validate()
        .map_err(|e| PersistError::Invalid(e.to_string()))?;
    if file.categories.is_empty() {
        return Err(PersistError::Invalid("empty category list".to_string()));
    }

    let m = file.categories.len();
    let mut models = BTreeMap::new();
    for group in FeatureGroup::ALL {
        let stored = file
            .models
            .get(&group)
            .ok_or_else(|| PersistError::Invalid(format!("missing model for group {group}")))?;
        if stored.group != group {
            return Err(PersistError::Invalid(format!(
                "model stored under {group} declares group {}",
                stored.group
            )));
        }
        if stored.kind != file.config.model_kind_by_group[&group] {
            return Err(PersistError::Invalid(format!(
                "group {group}: stored kind {} disagrees with the config",
                stored.kind
            )));
        }
        if !(stored.alpha > 0.0 && stored.alpha.is_finite()) {
            return Err(PersistError::Invalid(format!(
                "group {group}: smoothing alpha must be positive and finite"
            )));
        }
        let v = stored.features.len();
        let distinct: std::collections::HashSet<&String> = stored.features.iter().collect();
        if distinct.len() != v {
            return Err(PersistError::Invalid(format!(
                "group {group}: duplicate feature in vocabulary"
            )));
        }
        check_matrix(group, "log_prob", &stored.log_prob, m, v)?;
        if stored.log_prior.len() != m || stored.log_prior.iter().any(|x| !x.is_finite()) {
            return Err(PersistError::Invalid(format!(
                "group {group}: log_prior must hold {m} finite values"
            )));
        }
        match (stored.kind, &stored.log_not_prob) {
            (EventModelKind::Bernoulli, Some(log_not_prob)) => {
                check_matrix(group, "log_not_prob", log_not_prob, m, v)?;
            }
            (EventModelKind::Bernoulli, None) => {
                return Err(PersistError::Invalid(format!(
                    "group {group}: bernoulli model is missing log_not_prob"
                )));
            }
            (EventModelKind::Multinomial, Some(_)) => {
                return Err(PersistError::Invalid(format!(
                    "group {group}: multinomial model must not carry log_not_prob"
                )));
            }
            (EventModelKind::Multinomial, None) => {
                if v == 0 {
                    return Err(PersistError::Invalid(format!(
                        "group {group}: multinomial model with empty vocabulary"
                    )));
                }
            }
        }

        models.insert(
            group,
            ClassModel {
                kind: stored.kind,
                group,
                categories: file.categories.clone(),
                alpha: stored.alpha,
                vocab: Vocabulary::from_terms(stored.features.clone()),
                log_prob: stored.log_prob.clone(),
                log_not_prob: stored.log_not_prob.clone(),
                log_prior: stored.log_prior.clone(),
            },
        );
    }

    Ok(EnsembleModel {
        config: file.config,
        categories: file.categories,
        models,
    })
}

fn check_matrix(
    group: FeatureGroup,
    name: &str,
    matrix: &[Vec<f64>],
    m: usize,
    v: usize,
) -> Result<(), PersistError> {
    if matrix.len() != m
        || matrix
            .iter()
            .any(|row| row.len() != v || row.iter().any(|x| !x.is_finite()))
    {
        return Err(PersistError::Invalid(format!(
            "group {group}: {name} must be a {m}x{v} matrix of finite values"
        )));
    }
    Ok(())
}

pub fn save_model(path: &Path, model: &EnsembleModel) -> Result<(), PersistError> {
    let file = File::create(path).map_err(|source| PersistError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut writer = BufWriter::new(file);
    write_model(&mut writer, model)?;
    writer.flush().map_err(|source| PersistError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_model(path: &Path) -> Result<EnsembleModel, PersistError> {
    let file = File::open(path).map_err(|source| PersistError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_model(BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::EnsembleConfig;
    use crate::syngen::{generate, GenSpec};

    fn trained_ensemble() -> EnsembleModel {
        let spec = GenSpec::new(vec!["os".into(), "bgp".into()], 6, 0.8, 11);
        let corpus = generate(&spec).unwrap();
        EnsembleModel::train(
            EnsembleConfig::default_config(),
            corpus.categories.clone(),
            &corpus.reports,
            1.0,
            &BTreeMap::new(),
        )
        .unwrap()
    }

    #[test]
    fn round_trip_preserves_the_model_exactly() {
        let model = trained_ensemble();
        let mut buffer = Vec::new();
        write_model(&mut buffer, &model).unwrap();
        let reloaded = read_model(buffer.as_slice()).unwrap();
        assert_eq!(model, reloaded);
    }

    #[test]
    fn round_trip_through_a_file() {
        let model = trained_ensemble();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&path, &model).unwrap();
        let reloaded = load_model(&path).unwrap();
        assert_eq!(model, reloaded);
    }

    #[test]
    fn output_is_newline_terminated() {
        let mut buffer = Vec::new();
        write_model(&mut buffer, &trained_ensemble()).unwrap();
        assert_eq!(buffer.last(), Some(&b'\n'));
    }

    #[test]
    fn wrong_version_is_rejected() {
        let mut buffer = Vec::new();
        write_model(&mut buffer, &trained_ensemble()).unwrap();
        let text = String::from_utf8(buffer)
            .unwrap()
            .replace("\"format_version\": 1", "\"format_version\": 2");
        let err = read_model(text.as_bytes()).unwrap_err();
        assert!(matches!(err, PersistError::UnsupportedVersion { found: 2 }));
    }

    #[test]
    fn tampered_files_are_rejected() {
        let mut buffer = Vec::new();
        write_model(&mut buffer, &trained_ensemble()).unwrap();
        let text = String::from_utf8(buffer).unwrap();

        let missing_group = text.replace("\"commands\": {", "\"commands_x\": {");
        assert!(read_model(missing_group.as_bytes()).is_err());

        let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
        value["models"]["title"]["log_prior"] = serde_json::json!([0.0]);
        let bad_prior = serde_json::to_string(&value).unwrap();
        assert!(matches!(
            read_model(bad_prior.as_bytes()),
            Err(PersistError::Invalid(_))
        ));

        let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
        value["models"]["description"]["log_not_prob"] =
            value["models"]["description"]["log_prob"].clone();
        let stray_matrix = serde_json::to_string(&value).unwrap();
        assert!(matches!(
            read_model(stray_matrix.as_bytes()),
            Err(PersistError::Invalid(_))
        ));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let mut buffer = Vec::new();
        write_model(&mut buffer, &trained_ensemble()).unwrap();
        let mut value: serde_json::Value =
            serde_json::from_str(std::str::from_utf8(&buffer).unwrap()).unwrap();
        value["surprise"] = serde_json::json!(true);
        let text = serde_json::to_string(&value).unwrap();
        assert!(matches!(
            read_model(text.as_bytes()),
            Err(PersistError::Json(_))
        ));
    }

    #[test]
    fn reloaded_model_predicts_identically() {
        let model = trained_ensemble();
        let mut buffer = Vec::new();
        write_model(&mut buffer, &model).unwrap();
        let reloaded = read_model(buffer.as_slice()).unwrap();

        let corpus = generate(&GenSpec::new(vec!["os".into(), "bgp".into()], 4, 0.3, 99)).unwrap();
        for report in &corpus.reports {
            assert_eq!(model.classify(report), reloaded.classify(report));
        }
    }
}
