//! Confusion matrices, the four classification metrics, evaluation of a
//! classifier over a labeled test set, and deterministic stratified
//! train/test splits.
//!
//! Precision is taken column-wise (TP over everything predicted as the
//! class) and recall row-wise (TP over everything actually of the class),
//! the standard convention. Macro averages are unweighted means over all
//! declared classes; zero-denominator metrics are 0 rather than errors.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{BugReport, Corpus};
use crate::ensemble::EnsembleModel;
use crate::extract::extract_all;
use crate::nb::{ClassModel, Posterior};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    InvalidFraction(f64),
    #[error("test report {id:?} is unlabeled")]
    UnlabeledReport { id: String },
    #[error("test report {id:?} has label {label:?} outside the classifier's categories")]
    UnknownLabel { id: String, label: String },
    #[error("cannot evaluate on an empty test set")]
    EmptyTestSet,
}

/// Row = actual class, column = predicted class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub categories: Vec<String>,
    pub cells: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(categories: Vec<String>) -> ConfusionMatrix {
        let m = categories.len();
        ConfusionMatrix {
            categories,
            cells: vec![vec![0; m]; m],
        }
    }

    pub fn record(&mut self, actual: usize, predicted: usize) {
        self.cells[actual][predicted] += 1;
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.categories.len()).map(|k| self.cells[k][k]).sum()
    }

    /// TP/(TP+FP) for class `k`; 0 when the class was never predicted.
    pub fn precision(&self, k: usize) -> f64 {
        let tp = self.cells[k][k];
        let predicted: u64 = (0..self.categories.len()).map(|a| self.cells[a][k]).sum();
        ratio(tp, predicted)
    }

    /// TP/(TP+FN) for class `k`; 0 when the class has no actual instances.
    pub fn recall(&self, k: usize) -> f64 {
        let tp = self.cells[k][k];
        let actual: u64 = self.cells[k].iter().sum();
        ratio(tp, actual)
    }

    /// Fraction of reports on the diagonal. Errors on an empty matrix.
    pub fn accuracy(&self) -> Result<f64, EvalError> {
        let total = self.total();
        if total == 0 {
            return Err(EvalError::EmptyTestSet);
        }
        Ok(self.trace() as f64 / total as f64)
    }
}

fn ratio(numerator: u64, denominator: u64) -> f64 {
    if denominator == 0 {
        0.0
    } else {
        numerator as f64 / denominator as f64
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

/// Everything evaluate computes: the matrix, per-class metrics in category
/// order, their unweighted macro average, and overall accuracy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub matrix: ConfusionMatrix,
    pub per_class: Vec<ClassMetrics>,
    #[serde(rename = "macro")]
    pub macro_avg: ClassMetrics,
    pub accuracy: f64,
}

impl EvaluationReport {
    /// Derives all metrics from a finished confusion matrix.
    pub fn from_matrix(matrix: ConfusionMatrix) -> Result<EvaluationReport, EvalError> {
        let accuracy = matrix.accuracy()?;
        let per_class: Vec<ClassMetrics> = (0..matrix.categories.len())
            .map(|k| {
                let precision = matrix.precision(k);
                let recall = matrix.recall(k);
                ClassMetrics {
                    precision,
                    recall,
                    f_measure: f_measure(precision, recall),
                }
            })
            .collect();
        let m = per_class.len() as f64;
        let macro_avg = ClassMetrics {
            precision: per_class.iter().map(|c| c.precision).sum::<f64>() / m,
            recall: per_class.iter().map(|c| c.recall).sum::<f64>() / m,
            f_measure: per_class.iter().map(|c| c.f_measure).sum::<f64>() / m,
        };
        Ok(EvaluationReport {
            matrix,
            per_class,
            macro_avg,
            accuracy,
        })
    }
}

/// Anything that can classify a whole bug report into one of its categories.
pub trait Classifier {
    fn categories(&self) -> &[String];
    fn classify_report(&self, report: &BugReport) -> Posterior;
}

/// A single-group model classifies a report by its own feature group's
/// extracted document, ignoring the rest of the report.
impl Classifier for ClassModel {
    fn categories(&self) -> &[String] {
        &self.categories
    }

    fn classify_report(&self, report: &BugReport) -> Posterior {
        let docs = extract_all(report);
        self.posterior(&docs[&self.group])
    }
}

impl Classifier for EnsembleModel {
    fn categories(&self) -> &[String] {
        &self.categories
    }

    fn classify_report(&self, report: &BugReport) -> Posterior {
        self.classify(report).posterior
    }
}

/// Classifies every labeled test report and aggregates the metrics. Errors
/// on an unlabeled report, a label outside the classifier's categories, or
/// an empty test set.
pub fn evaluate<C: Classifier>(
    classifier: &C,
    test_reports: &[BugReport],
) -> Result<EvaluationReport, EvalError> {
    let categories = classifier.categories().to_vec();
    let mut matrix = ConfusionMatrix::new(categories.clone());
    for report in test_reports {
        let label = report
            .label
            .as_ref()
            .ok_or_else(|| EvalError::UnlabeledReport {
                id: report.id.clone(),
            })?;
        let actual =
            categories
                .iter()
                .position(|c| c == label)
                .ok_or_else(|| EvalError::UnknownLabel {
                    id: report.id.clone(),
                    label: label.clone(),
                })?;
        let posterior = classifier.classify_report(report);
        let predicted = posterior
            .predicted_index(&categories)
            .expect("classifier predicts one of its own categories");
        matrix.record(actual, predicted);
    }
    EvaluationReport::from_matrix(matrix)
}

/// A stratified train/test split plus any stratification warnings.
#[derive(Debug, Clone)]
pub struct SplitOutcome {
    pub train: Corpus,
    pub test: Corpus,
    pub warnings: Vec<String>,
}

/// Splits a corpus per class: deterministic seeded shuffle, then
/// ceil(fraction · class size) reports to the training side. Classes with
/// fewer than two reports cannot stratify and go entirely to training, with
/// a warning; so do unlabeled reports.
pub fn split(corpus: &Corpus, train_fraction: f64, seed: u64) -> Result<SplitOutcome, EvalError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(EvalError::InvalidFraction(train_fraction));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut warnings = Vec::new();
    let mut train_indices: Vec<usize> = Vec::new();
    let mut test_indices: Vec<usize> = Vec::new();

    for category in &corpus.categories {
        let mut indices: Vec<usize> = corpus
            .reports
            .iter()
            .enumerate()
            .filter(|(_, r)| r.label.as_ref() == Some(category))
            .map(|(i, _)| i)
            .collect();
        if indices.len() < 2 {
            if !indices.is_empty() {
                warnings.push(format!(
                    "category {category:?} has fewer than 2 reports; keeping all in the training set"
                ));
            }
            train_indices.extend(indices);
            continue;
        }
        indices.shuffle(&mut rng);
        let n_train = (train_fraction * indices.len() as f64).ceil() as usize;
        train_indices.extend(&indices[..n_train]);
        test_indices.extend(&indices[n_train..]);
    }

    let unlabeled: Vec<usize> = corpus
        .reports
        .iter()
        .enumerate()
        .filter(|(_, r)| r.label.is_none())
        .map(|(i, _)| i)
        .collect();
    if !unlabeled.is_empty() {
        warnings.push(format!(
            "{} unlabeled report(s) kept in the training set",
            unlabeled.len()
        ));
        train_indices.extend(unlabeled);
    }

    train_indices.sort_unstable();
    test_indices.sort_unstable();
    let pick = |indices: &[usize]| -> Corpus {
        Corpus::new(
            corpus.categories.clone(),
            indices.iter().map(|&i| corpus.reports[i].clone()).collect(),
        )
        .expect("a subset of a valid corpus is valid")
    };
    Ok(SplitOutcome {
        train: pick(&train_indices),
        test: pick(&test_indices),
        warnings,
    })
}
