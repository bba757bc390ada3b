//! Classification of network bug reports into protocol/component categories.
//!
//! The pipeline ingests raw bug reports (`corpus`), extracts five bug-specific
//! feature groups from them (`extract`), builds per-group vocabularies with
//! information-gain feature selection (`features`), trains Bernoulli and
//! Multinomial naive Bayes models per group (`nb`), combines them through a
//! priority-ordered cascade (`ensemble`), and measures the result (`eval`).
//! `syngen` produces labeled synthetic corpora so the whole pipeline can be
//! exercised end to end, and `persist` reads and writes trained model files.

pub mod corpus;
pub mod ensemble;
pub mod eval;
pub mod extract;
pub mod features;
pub mod nb;
pub mod persist;
pub mod syngen;

pub use corpus::{BugReport, Corpus, SectionKind};
pub use ensemble::{EnsembleConfig, EnsembleDecision, EnsembleMode, EnsembleModel};
pub use eval::{evaluate, split, ClassMetrics, Classifier, ConfusionMatrix, EvaluationReport};
pub use extract::{extract_all, FeatureGroup, FeatureGroupDoc};
pub use features::{IgRanking, Vocabulary};
pub use nb::{ClassModel, EventModelKind, Posterior};
pub use persist::{load_model, save_model};
pub use syngen::{generate, GenSpec};
