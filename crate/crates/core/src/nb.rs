//! Bernoulli and Multinomial naive Bayes event models for one feature group.
//!
//! Both models share class priors estimated as class frequency and Laplace
//! (additive) smoothing of the feature likelihoods, and both score in log
//! space. The Bernoulli model uses feature presence against the whole
//! vocabulary; the Multinomial model uses occurrence counts, dropping the
//! class-independent multinomial coefficient.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extract::{FeatureGroup, FeatureGroupDoc};
use crate::features::{vectorize_binary, vectorize_counts, Vocabulary};

/// The generative assumption: binary feature presence (Bernoulli) or feature
/// occurrence counts (Multinomial).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventModelKind {
    Bernoulli,
    Multinomial,
}

impl EventModelKind {
    pub const ALL: [EventModelKind; 2] = [EventModelKind::Bernoulli, EventModelKind::Multinomial];

    pub fn name(self) -> &'static str {
        match self {
            EventModelKind::Bernoulli => "bernoulli",
            EventModelKind::Multinomial => "multinomial",
        }
    }
}

impl fmt::Display for EventModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EventModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EventModelKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown event model {s:?}"))
    }
}

#[derive(Debug, Error)]
pub enum NbError {
    #[error("smoothing alpha must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("cannot train on an empty set of documents")]
    NoTrainingDocs,
    #[error("category {category:?} has no training documents")]
    EmptyClass { category: String },
    #[error("multinomial model requires a non-empty vocabulary")]
    MultinomialEmptyVocabulary,
}

/// A trained classifier for one (feature group, event model) pair: per-class
/// log priors and per-class, per-feature log likelihoods over a fixed
/// vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassModel {
    pub kind: EventModelKind,
    pub group: FeatureGroup,
    pub categories: Vec<String>,
    pub alpha: f64,
    pub vocab: Vocabulary,
    /// `log_prob[k][t]` = log P(feature t | class k).
    pub log_prob: Vec<Vec<f64>>,
    /// Bernoulli only: `log_not_prob[k][t]` = log(1 − P(feature t | class k)).
    pub log_not_prob: Option<Vec<Vec<f64>>>,
    pub log_prior: Vec<f64>,
}

/// The scored outcome of classifying one document: unnormalized per-class
/// log scores, their softmax, and the winning class name (ties go to the
/// earliest category in declared order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Posterior {
    pub log_scores: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub predicted: String,
}

impl ClassModel {
    /// Estimates priors and smoothed likelihoods from labeled documents.
    /// `examples` pairs each document with its class index into `categories`.
    /// Every class must be represented; the Multinomial kind additionally
    /// needs a non-empty vocabulary.
    pub fn train(
        kind: EventModelKind,
        group: FeatureGroup,
        categories: &[String],
        vocab: Vocabulary,
        examples: &[(&FeatureGroupDoc, usize)],
        alpha: f64,
    ) -> Result<ClassModel, NbError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(NbError::InvalidAlpha(alpha));
        }
        if examples.is_empty() {
            return Err(NbError::NoTrainingDocs);
        }
        let m = categories.len();
        let v = vocab.len();
        if kind == EventModelKind::Multinomial && v == 0 {
            return Err(NbError::MultinomialEmptyVocabulary);
        }

        let mut class_doc_counts = vec![0u64; m];
        for &(_, k) in examples {
            assert!(k < m, "class index out of range");
            class_doc_counts[k] += 1;
        }
        if let Some(k) = class_doc_counts.iter().position(|&c| c == 0) {
            return Err(NbError::EmptyClass {
                category: categories[k].clone(),
            });
        }

        let n = examples.len() as f64;
        let log_prior: Vec<f64> = class_doc_counts
            .iter()
            .map(|&nk| (nk as f64 / n).ln())
            .collect();

        let (log_prob, log_not_prob) = match kind {
            EventModelKind::Bernoulli => {
                // nk(Ft): documents of class k containing feature t.
                let mut presence = vec![vec![0u64; v]; m];
                for &(doc, k) in examples {
                    for (t, bit) in vectorize_binary(&vocab, doc).into_iter().enumerate() {
                        if bit {
                            presence[k][t] += 1;
                        }
                    }
                }
                let mut log_p = vec![vec![0.0; v]; m];
                let mut log_q = vec![vec![0.0; v]; m];
                for k in 0..m {
                    let nk = class_doc_counts[k] as f64;
                    for t in 0..v {
                        let p = (presence[k][t] as f64 + alpha) / (nk + 2.0 * alpha);
                        log_p[k][t] = p.ln();
                        log_q[k][t] = (1.0 - p).ln();
                    }
                }
                (log_p, Some(log_q))
            }
            EventModelKind::Multinomial => {
                let mut token_counts = vec![vec![0u64; v]; m];
                for &(doc, k) in examples {
                    for (t, count) in vectorize_counts(&vocab, doc).into_iter().enumerate() {
                        token_counts[k][t] += count;
                    }
                }
                let mut log_p = vec![vec![0.0; v]; m];
                for k in 0..m {
                    let total: u64 = token_counts[k].iter().sum();
                    let denom = total as f64 + alpha * v as f64;
                    for t in 0..v {
                        log_p[k][t] = ((token_counts[k][t] as f64 + alpha) / denom).ln();
                    }
                }
                (log_p, None)
            }
        };

        Ok(ClassModel {
            kind,
            group,
            categories: categories.to_vec(),
            alpha,
            vocab,
            log_prob,
            log_not_prob,
            log_prior,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.categories.len()
    }

    /// Bernoulli per-class log likelihood of a presence vector: every
    /// vocabulary position contributes, present or not.
    pub fn log_likelihood_bernoulli(&self, v: &[bool], k: usize) -> f64 {
        assert_eq!(self.kind, EventModelKind::Bernoulli);
        assert_eq!(v.len(), self.vocab.len());
        let log_q = self
            .log_not_prob
            .as_ref()
            .expect("bernoulli stores log(1-p)");
        v.iter()
            .enumerate()
            .map(|(t, &bit)| {
                if bit {
                    self.log_prob[k][t]
                } else {
                    log_q[k][t]
                }
            })
            .sum()
    }

    /// Multinomial per-class log likelihood of a count vector; the
    /// multinomial coefficient is class-independent and omitted.
    pub fn log_likelihood_multinomial(&self, v: &[u64], k: usize) -> f64 {
        assert_eq!(self.kind, EventModelKind::Multinomial);
        assert_eq!(v.len(), self.vocab.len());
        v.iter()
            .enumerate()
            .filter(|&(_, &count)| count > 0)
            .map(|(t, &count)| count as f64 * self.log_prob[k][t])
            .sum()
    }

    /// Scores a document of this model's feature group: vectorizes it against
    /// the model vocabulary and combines prior and likelihood per class.
    pub fn posterior(&self, doc: &FeatureGroupDoc) -> Posterior {
        assert_eq!(
            doc.group, self.group,
            "document from the wrong feature group"
        );
        let log_scores: Vec<f64> = match self.kind {
            EventModelKind::Bernoulli => {
                let v = vectorize_binary(&self.vocab, doc);
                (0..self.n_classes())
                    .map(|k| self.log_prior[k] + self.log_likelihood_bernoulli(&v, k))
                    .collect()
            }
            EventModelKind::Multinomial => {
                let v = vectorize_counts(&self.vocab, doc);
                (0..self.n_classes())
                    .map(|k| self.log_prior[k] + self.log_likelihood_multinomial(&v, k))
                    .collect()
            }
        };
        Posterior::from_log_scores(log_scores, &self.categories)
    }

    /// The posterior ignoring all evidence: softmax of the log priors alone.
    pub fn prior_posterior(&self) -> Posterior {
        Posterior::from_log_scores(self.log_prior.clone(), &self.categories)
    }
}

impl Posterior {
    /// Normalizes unnormalized log scores via a max-shifted softmax and picks
    /// the winner (first category on ties).
    pub fn from_log_scores(log_scores: Vec<f64>, categories: &[String]) -> Posterior {
        assert_eq!(log_scores.len(), categories.len());
        assert!(!log_scores.is_empty(), "at least one class required");
        let max = log_scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = log_scores.iter().map(|&s| (s - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        let probabilities: Vec<f64> = exps.iter().map(|&e| e / total).collect();
        let predicted = categories[argmax_first(&log_scores)].clone();
        Posterior {
            log_scores,
            probabilities,
            predicted,
        }
    }

    /// Index of the predicted class within the given category list.
    pub fn predicted_index(&self, categories: &[String]) -> Option<usize> {
        categories.iter().position(|c| *c == self.predicted)
    }
}

fn argmax_first(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(tokens: &[&str]) -> FeatureGroupDoc {
        FeatureGroupDoc {
            report_id: "r".to_string(),
            group: FeatureGroup::Title,
            tokens: tokens.iter().map(|t| t.to_string()).collect(),
        }
    }

    fn cats(names: &[&str]) -> Vec<String> {
        names.iter().map(|c| c.to_string()).collect()
    }

    #[test]
    fn priors_are_class_frequencies() {
        let categories = cats(&["c1", "c2"]);
        let docs: Vec<FeatureGroupDoc> =
            vec![doc(&["aa"]), doc(&["aa"]), doc(&["aa"]), doc(&["bb"])];
        let examples: Vec<(&FeatureGroupDoc, usize)> = docs.iter().zip([0, 0, 0, 1]).collect();
        let vocab = Vocabulary::from_docs(&docs);
        let model = ClassModel::train(
            EventModelKind::Bernoulli,
            FeatureGroup::Title,
            &categories,
            vocab,
            &examples,
            1.0,
        )
        .unwrap();
        assert!((model.log_prior[0].exp() - 0.75).abs() < 1e-12);
        assert!((model.log_prior[1].exp() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn bernoulli_smoothed_probability() {
        // Class c1 has 2 docs, neither containing "bb": P = (0+1)/(2+2) = 1/4.
        let categories = cats(&["c1", "c2"]);
        let docs = vec![doc(&["aa"]), doc(&["aa"]), doc(&["bb"])];
        let examples: Vec<(&FeatureGroupDoc, usize)> = docs.iter().zip([0, 0, 1]).collect();
        let vocab = Vocabulary::from_docs(&docs);
        let t = vocab.index_of("bb").unwrap();
        let model = ClassModel::train(
            EventModelKind::Bernoulli,
            FeatureGroup::Title,
            &categories,
            vocab,
            &examples,
            1.0,
        )
        .unwrap();
        assert!((model.log_prob[0][t].exp() - 0.25).abs() < 1e-12);
        assert!((model.log_not_prob.as_ref().unwrap()[0][t].exp() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn multinomial_smoothed_probabilities() {
        // |V| = 2, class c1 token counts (3, 0): P = (4/5, 1/5).
        let categories = cats(&["c1", "c2"]);
        let docs = vec![doc(&["aa", "aa", "aa"]), doc(&["bb"])];
        let examples: Vec<(&FeatureGroupDoc, usize)> = docs.iter().zip([0, 1]).collect();
        let vocab = Vocabulary::from_docs(&docs);
        let (ta, tb) = (vocab.index_of("aa").unwrap(), vocab.index_of("bb").unwrap());
        let model = ClassModel::train(
            EventModelKind::Multinomial,
            FeatureGroup::Title,
            &categories,
            vocab,
            &examples,
            1.0,
        )
        .unwrap();
        assert!((model.log_prob[0][ta].exp() - 0.8).abs() < 1e-12);
        assert!((model.log_prob[0][tb].exp() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn multinomial_likelihoods_sum_to_one_per_class() {
        let categories = cats(&["c1", "c2"]);
        let docs = vec![doc(&["aa", "bb", "aa"]), doc(&["cc"])];
        let examples: Vec<(&FeatureGroupDoc, usize)> = docs.iter().zip([0, 1]).collect();
        let model = ClassModel::train(
            EventModelKind::Multinomial,
            FeatureGroup::Title,
            &categories,
            Vocabulary::from_docs(&docs),
            &examples,
            0.5,
        )
        .unwrap();
        for k in 0..2 {
            let sum: f64 = model.log_prob[k].iter().map(|lp| lp.exp()).sum();
            assert!((sum - 1.0).abs() < 1e-9, "class {k} sums to {sum}");
        }
    }

    #[test]
    fn train_rejects_bad_inputs() {
        let categories = cats(&["c1", "c2"]);
        let docs = vec![doc(&["aa"])];
        let examples: Vec<(&FeatureGroupDoc, usize)> = docs.iter().zip([0]).collect();
        let vocab = || Vocabulary::from_docs(&docs);

        let err = ClassModel::train(
            EventModelKind::Bernoulli,
            FeatureGroup::Title,
            &categories,
            vocab(),
            &examples,
            0.0,
        )
        .unwrap_err();
        assert!(matches!(err, NbError::InvalidAlpha(_)));

        let err = ClassModel::train(
            EventModelKind::Bernoulli,
            FeatureGroup::Title,
            &categories,
            vocab(),
            &[],
            1.0,
        )
        .unwrap_err();
        assert!(matches!(err, NbError::NoTrainingDocs));

        let err = ClassModel::train(
            EventModelKind::Bernoulli,
            FeatureGroup::Title,
            &categories,
            vocab(),
            &examples,
            1.0,
        )
        .unwrap_err();
        assert!(matches!(err, NbError::EmptyClass { .. }));

        let err = ClassModel::train(
            EventModelKind::Multinomial,
            FeatureGroup::Title,
            &categories,
            Vocabulary::from_terms(Vec::new()),
            &examples,
            1.0,
        )
        .unwrap_err();
        assert!(matches!(err, NbError::MultinomialEmptyVocabulary));
    }

    #[test]
    fn empty_vocabulary_bernoulli_scores_by_prior() {
        let categories = cats(&["c1", "c2"]);
        let docs = [doc(&[]), doc(&[])];
        let examples: Vec<(&FeatureGroupDoc, usize)> = docs.iter().zip([0, 1]).collect();
        let model = ClassModel::train(
            EventModelKind::Bernoulli,
            FeatureGroup::Title,
            &categories,
            Vocabulary::from_terms(Vec::new()),
            &examples,
            1.0,
        )
        .unwrap();
        let post = model.posterior(&doc(&["anything"]));
        assert!((post.probabilities[0] - 0.5).abs() < 1e-12);
        assert_eq!(post.predicted, "c1");
    }

    #[test]
    fn oov_only_doc_yields_prior_probabilities() {
        let categories = cats(&["c1", "c2"]);
        let docs = vec![doc(&["aa"]), doc(&["aa"]), doc(&["aa"]), doc(&["bb"])];
        let examples: Vec<(&FeatureGroupDoc, usize)> = docs.iter().zip([0, 0, 0, 1]).collect();
        let model = ClassModel::train(
            EventModelKind::Multinomial,
            FeatureGroup::Title,
            &categories,
            Vocabulary::from_docs(&docs),
            &examples,
            1.0,
        )
        .unwrap();
        let post = model.posterior(&doc(&["zz", "qq"]));
        assert!((post.probabilities[0] - 0.75).abs() < 1e-12);
        assert!((post.probabilities[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn toy_two_class_model_predicts_matching_class() {
        let categories = cats(&["c1", "c2"]);
        let docs = [doc(&["a"]), doc(&["b"])];
        let examples: Vec<(&FeatureGroupDoc, usize)> = docs.iter().zip([0, 1]).collect();
        let vocab = Vocabulary::from_terms(vec!["a".into(), "b".into()]);
        let model = ClassModel::train(
            EventModelKind::Multinomial,
            FeatureGroup::Title,
            &categories,
            vocab,
            &examples,
            1.0,
        )
        .unwrap();
        let post = model.posterior(&doc(&["a"]));
        assert_eq!(post.predicted, "c1");
        assert!((post.probabilities[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((post.probabilities[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn bernoulli_complement_symmetry() {
        let categories = cats(&["c1", "c2"]);
        let docs = vec![doc(&["aa", "bb"]), doc(&["cc"])];
        let examples: Vec<(&FeatureGroupDoc, usize)> = docs.iter().zip([0, 1]).collect();
        let model = ClassModel::train(
            EventModelKind::Bernoulli,
            FeatureGroup::Title,
            &categories,
            Vocabulary::from_docs(&docs),
            &examples,
            1.0,
        )
        .unwrap();
        let v = [true, false, true];
        let complement: Vec<bool> = v.iter().map(|&b| !b).collect();
        for k in 0..2 {
            let swapped: f64 = complement
                .iter()
                .enumerate()
                .map(|(t, &bit)| {
                    if bit {
                        model.log_not_prob.as_ref().unwrap()[k][t]
                    } else {
                        model.log_prob[k][t]
                    }
                })
                .sum();
            let direct = model.log_likelihood_bernoulli(&v, k);
            assert!((direct - swapped).abs() < 1e-12);
        }
    }

    #[test]
    fn posterior_probabilities_sum_to_one() {
        let categories = cats(&["c1", "c2", "c3"]);
        let docs = vec![doc(&["aa"]), doc(&["bb"]), doc(&["cc"])];
        let examples: Vec<(&FeatureGroupDoc, usize)> = docs.iter().zip([0, 1, 2]).collect();
        for kind in EventModelKind::ALL {
            let model = ClassModel::train(
                kind,
                FeatureGroup::Title,
                &categories,
                Vocabulary::from_docs(&docs),
                &examples,
                1.0,
            )
            .unwrap();
            for query in [doc(&[]), doc(&["aa"]), doc(&["aa", "bb", "cc", "zz"])] {
                let post = model.posterior(&query);
                let sum: f64 = post.probabilities.iter().sum();
                assert!((sum - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn argmax_invariance_under_constant_shift() {
        let categories = cats(&["c1", "c2", "c3"]);
        let scores = vec![-3.0, -1.5, -2.0];
        let base = Posterior::from_log_scores(scores.clone(), &categories);
        let shifted =
            Posterior::from_log_scores(scores.iter().map(|s| s + 100.0).collect(), &categories);
        assert_eq!(base.predicted, shifted.predicted);
        for (a, b) in base.probabilities.iter().zip(&shifted.probabilities) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn ties_resolve_to_first_category() {
        let categories = cats(&["c1", "c2"]);
        let post = Posterior::from_log_scores(vec![-1.0, -1.0], &categories);
        assert_eq!(post.predicted, "c1");
    }

    #[test]
    fn training_is_permutation_invariant() {
        let categories = cats(&["c1", "c2"]);
        let docs = vec![doc(&["aa", "bb"]), doc(&["bb"]), doc(&["cc"]), doc(&["aa"])];
        let classes = [0, 0, 1, 1];
        let forward: Vec<(&FeatureGroupDoc, usize)> = docs.iter().zip(classes).collect();
        let mut backward = forward.clone();
        backward.reverse();
        for kind in EventModelKind::ALL {
            let a = ClassModel::train(
                kind,
                FeatureGroup::Title,
                &categories,
                Vocabulary::from_docs(&docs),
                &forward,
                1.0,
            )
            .unwrap();
            let b = ClassModel::train(
                kind,
                FeatureGroup::Title,
                &categories,
                Vocabulary::from_docs(&docs),
                &backward,
                1.0,
            )
            .unwrap();
            assert_eq!(a, b);
        }
    }
}
