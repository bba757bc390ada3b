//! Combines the five per-feature-group classifiers into one bug-level
//! decision.
//!
//! The default mode is a priority cascade: the report walks the groups in
//! priority order and the first group with any extracted evidence decides.
//! A score-sum alternative (`SumLogPosteriors`) adds the unnormalized
//! per-class log scores of every non-empty group instead, which makes the
//! single-evidence case coincide exactly with that group's own posterior.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::BugReport;
use crate::extract::{extract_all, FeatureGroup, FeatureGroupDoc};
use crate::features::{rank_by_information_gain, select_vocabulary, vectorize_binary, Vocabulary};
use crate::nb::{ClassModel, EventModelKind, NbError, Posterior};

/// How the per-group posteriors are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleMode {
    Cascade,
    SumLogPosteriors,
}

impl EnsembleMode {
    pub const ALL: [EnsembleMode; 2] = [EnsembleMode::Cascade, EnsembleMode::SumLogPosteriors];

    pub fn name(self) -> &'static str {
        match self {
            EnsembleMode::Cascade => "cascade",
            EnsembleMode::SumLogPosteriors => "sum_log_posteriors",
        }
    }
}

impl fmt::Display for EnsembleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnsembleMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EnsembleMode::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown ensemble mode {s:?}"))
    }
}

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("priority order must list each of the five feature groups exactly once")]
    InvalidPriorityOrder,
    #[error("no event model kind assigned to feature group {0}")]
    MissingKind(FeatureGroup),
    #[error("report {id:?} is unlabeled and cannot be used for training")]
    UnlabeledReport { id: String },
    #[error("report {id:?} has label {label:?} which is not a declared category")]
    UnknownLabel { id: String, label: String },
    #[error(transparent)]
    Nb(#[from] NbError),
}

/// Which event model runs for each feature group, the cascade priority, and
/// the combination mode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub priority_order: Vec<FeatureGroup>,
    pub model_kind_by_group: BTreeMap<FeatureGroup, EventModelKind>,
    pub mode: EnsembleMode,
}

impl EnsembleConfig {
    /// The shipped defaults: Multinomial for the verbose Description and
    /// Syslogs groups, Bernoulli elsewhere; priority Description, Title,
    /// Syslogs, Commands, Traces (groups ranked by how well they classify on
    /// their own); cascade combination.
    pub fn default_config() -> EnsembleConfig {
        let kinds = [
            (FeatureGroup::Title, EventModelKind::Bernoulli),
            (FeatureGroup::Description, EventModelKind::Multinomial),
            (FeatureGroup::Syslogs, EventModelKind::Multinomial),
            (FeatureGroup::Commands, EventModelKind::Bernoulli),
            (FeatureGroup::Traces, EventModelKind::Bernoulli),
        ];
        EnsembleConfig {
            priority_order: vec![
                FeatureGroup::Description,
                FeatureGroup::Title,
                FeatureGroup::Syslogs,
                FeatureGroup::Commands,
                FeatureGroup::Traces,
            ],
            model_kind_by_group: kinds.into_iter().collect(),
            mode: EnsembleMode::Cascade,
        }
    }

    pub fn validate(&self) -> Result<(), EnsembleError> {
        let mut seen = std::collections::BTreeSet::new();
        for &group in &self.priority_order {
            seen.insert(group);
        }
        if self.priority_order.len() != FeatureGroup::ALL.len()
            || seen.len() != FeatureGroup::ALL.len()
        {
            return Err(EnsembleError::InvalidPriorityOrder);
        }
        for group in FeatureGroup::ALL {
            if !self.model_kind_by_group.contains_key(&group) {
                return Err(EnsembleError::MissingKind(group));
            }
        }
        Ok(())
    }
}

/// The outcome of classifying one report: the combined posterior and, in
/// cascade mode, which group decided it (the highest-priority group when the
/// report had no evidence at all).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleDecision {
    pub posterior: Posterior,
    pub deciding_group: Option<FeatureGroup>,
}

/// One trained classifier per feature group plus the combination config.
/// All member models share the same category list in the same order.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    pub config: EnsembleConfig,
    pub categories: Vec<String>,
    pub models: BTreeMap<FeatureGroup, ClassModel>,
}

impl EnsembleModel {
    /// Trains one model per feature group from labeled reports: extracts all
    /// groups, builds each group's vocabulary, ranks it by information gain,
    /// keeps the top `select_k[group]` features (all of them for groups
    /// absent from the map), and fits the configured event model.
    pub fn train(
        config: EnsembleConfig,
        categories: Vec<String>,
        reports: &[BugReport],
        alpha: f64,
        select_k: &BTreeMap<FeatureGroup, usize>,
    ) -> Result<EnsembleModel, EnsembleError> {
        config.validate()?;
        let classes: Vec<usize> = reports
            .iter()
            .map(|report| match &report.label {
                None => Err(EnsembleError::UnlabeledReport {
                    id: report.id.clone(),
                }),
                Some(label) => categories.iter().position(|c| c == label).ok_or_else(|| {
                    EnsembleError::UnknownLabel {
                        id: report.id.clone(),
                        label: label.clone(),
                    }
                }),
            })
            .collect::<Result<_, _>>()?;
        let extracted: Vec<BTreeMap<FeatureGroup, FeatureGroupDoc>> =
            reports.iter().map(extract_all).collect();

        let mut models = BTreeMap::new();
        for group in FeatureGroup::ALL {
            let docs: Vec<&FeatureGroupDoc> = extracted.iter().map(|m| &m[&group]).collect();
            let full_vocab = Vocabulary::from_docs(docs.iter().copied());
            let vocab = match select_k.get(&group) {
                Some(&k) => {
                    let vectors: Vec<Vec<bool>> = docs
                        .iter()
                        .map(|doc| vectorize_binary(&full_vocab, doc))
                        .collect();
                    let ranking =
                        rank_by_information_gain(&full_vocab, &vectors, &classes, categories.len());
                    select_vocabulary(&full_vocab, &ranking, k)
                }
                None => full_vocab,
            };
            let kind = config.model_kind_by_group[&group];
            let examples: Vec<(&FeatureGroupDoc, usize)> =
                docs.into_iter().zip(classes.iter().copied()).collect();
            let model = ClassModel::train(kind, group, &categories, vocab, &examples, alpha)?;
            models.insert(group, model);
        }

        Ok(EnsembleModel {
            config,
            categories,
            models,
        })
    }

    /// Classifies one report according to the configured mode.
    ///
    /// Cascade: the first group in priority order with a non-empty extracted
    /// document decides; a report with no evidence anywhere falls back to the
    /// prior-only posterior of the highest-priority group's model.
    ///
    /// SumLogPosteriors: per class, the unnormalized log scores of every
    /// non-empty group are added and the sum renormalized; with no evidence
    /// the scores are all equal and the first category wins.
    pub fn classify(&self, report: &BugReport) -> EnsembleDecision {
        let extracted = extract_all(report);
        match self.config.mode {
            EnsembleMode::Cascade => {
                for &group in &self.config.priority_order {
                    let doc = &extracted[&group];
                    if !doc.is_empty() {
                        return EnsembleDecision {
                            posterior: self.models[&group].posterior(doc),
                            deciding_group: Some(group),
                        };
                    }
                }
                let top = self.config.priority_order[0];
                EnsembleDecision {
                    posterior: self.models[&top].prior_posterior(),
                    deciding_group: Some(top),
                }
            }
            EnsembleMode::SumLogPosteriors => {
                let mut scores = vec![0.0; self.categories.len()];
                for group in FeatureGroup::ALL {
                    let doc = &extracted[&group];
                    if !doc.is_empty() {
                        let posterior = self.models[&group].posterior(doc);
                        for (total, score) in scores.iter_mut().zip(&posterior.log_scores) {
                            *total += score;
                        }
                    }
                }
                EnsembleDecision {
                    posterior: Posterior::from_log_scores(scores, &self.categories),
                    deciding_group: None,
                }
            }
        }
    }
}
