//! Vocabulary construction, information-gain feature selection, and the two
//! document vectorizations consumed by the event models.
//!
//! Information gain is computed in nats from document-presence counts: how
//! much the class-label entropy drops once we know whether a document
//! contains the feature. Ranking sorts by descending gain with ties broken
//! by ascending feature string, so selection is deterministic.

use std::collections::{BTreeSet, HashMap};

use crate::extract::FeatureGroupDoc;

/// An ordered feature list with reverse lookup. Order is significant: it is
/// the vector axis for both vectorizations and the storage order in model
/// files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary of all distinct tokens across the given documents,
    /// sorted ascending.
    pub fn from_docs<'a, I>(docs: I) -> Self
    where
        I: IntoIterator<Item = &'a FeatureGroupDoc>,
    {
        let unique: BTreeSet<&str> = docs
            .into_iter()
            .flat_map(|doc| doc.tokens.iter().map(String::as_str))
            .collect();
        Self::from_terms(unique.into_iter().map(str::to_string).collect())
    }

    /// Wraps an existing term list, preserving its order. Terms must be
    /// distinct.
    pub fn from_terms(terms: Vec<String>) -> Self {
        let index: HashMap<String, usize> = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        debug_assert_eq!(index.len(), terms.len(), "duplicate vocabulary term");
        Vocabulary { terms, index }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term(&self, index: usize) -> &str {
        &self.terms[index]
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }
}

/// Presence vector: `result[t]` is true when the document contains vocabulary
/// term `t` at least once. Out-of-vocabulary tokens are ignored.
pub fn vectorize_binary(vocab: &Vocabulary, doc: &FeatureGroupDoc) -> Vec<bool> {
    let mut v = vec![false; vocab.len()];
    for token in &doc.tokens {
        if let Some(t) = vocab.index_of(token) {
            v[t] = true;
        }
    }
    v
}

/// Count vector: `result[t]` is the number of occurrences of vocabulary term
/// `t` in the document. Out-of-vocabulary tokens are ignored.
pub fn vectorize_counts(vocab: &Vocabulary, doc: &FeatureGroupDoc) -> Vec<u64> {
    let mut v = vec![0u64; vocab.len()];
    for token in &doc.tokens {
        if let Some(t) = vocab.index_of(token) {
            v[t] += 1;
        }
    }
    v
}

/// Information gain, in nats, of a single feature given per-class document
/// counts (`class_doc_counts[k]` documents of class k) and per-class presence
/// counts (`term_doc_counts[k]` of them containing the feature).
///
/// Zero-probability terms contribute zero, and tiny negative rounding
/// residues are clamped to zero, so the result is always in
/// `[0, H(class distribution)]`.
pub fn information_gain(class_doc_counts: &[usize], term_doc_counts: &[usize]) -> f64 {
    assert_eq!(
        class_doc_counts.len(),
        term_doc_counts.len(),
        "class count vectors must align"
    );
    let n: usize = class_doc_counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n_present: usize = term_doc_counts.iter().sum();
    debug_assert!(
        class_doc_counts
            .iter()
            .zip(term_doc_counts)
            .all(|(nk, tk)| tk <= nk),
        "presence counts cannot exceed class document counts"
    );
    let n_absent = n - n_present;

    let class_entropy = entropy(class_doc_counts.iter().copied(), n);
    let mut conditional = 0.0;
    if n_present > 0 {
        conditional +=
            n_present as f64 / n as f64 * entropy(term_doc_counts.iter().copied(), n_present);
    }
    if n_absent > 0 {
        let absent_counts = class_doc_counts
            .iter()
            .zip(term_doc_counts)
            .map(|(nk, tk)| nk - tk);
        conditional += n_absent as f64 / n as f64 * entropy(absent_counts, n_absent);
    }
    (class_entropy - conditional).max(0.0)
}

fn entropy(counts: impl Iterator<Item = usize>, total: usize) -> f64 {
    let total = total as f64;
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum()
}

/// Information-gain scores per vocabulary term plus the selection order:
/// `order[r]` is the term index ranked r-th (descending score, ties by
/// ascending term string).
#[derive(Debug, Clone, PartialEq)]
pub struct IgRanking {
    pub scores: Vec<f64>,
    pub order: Vec<usize>,
}

impl IgRanking {
    /// Term indices of the top `k` ranks; all of them when `k` exceeds the
    /// vocabulary size.
    pub fn select_top(&self, k: usize) -> &[usize] {
        &self.order[..k.min(self.order.len())]
    }
}

/// Scores every vocabulary term by information gain over the given binary
/// document vectors and their class indices.
pub fn rank_by_information_gain(
    vocab: &Vocabulary,
    vectors: &[Vec<bool>],
    classes: &[usize],
    n_classes: usize,
) -> IgRanking {
    assert_eq!(vectors.len(), classes.len(), "one class per vector");
    let mut class_doc_counts = vec![0usize; n_classes];
    for &c in classes {
        class_doc_counts[c] += 1;
    }
    let mut term_doc_counts = vec![vec![0usize; n_classes]; vocab.len()];
    for (vector, &c) in vectors.iter().zip(classes) {
        assert_eq!(vector.len(), vocab.len(), "vector/vocabulary size mismatch");
        for (t, &present) in vector.iter().enumerate() {
            if present {
                term_doc_counts[t][c] += 1;
            }
        }
    }

    let scores: Vec<f64> = term_doc_counts
        .iter()
        .map(|counts| information_gain(&class_doc_counts, counts))
        .collect();
    let mut order: Vec<usize> = (0..vocab.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("information gain is finite")
            .then_with(|| vocab.term(a).cmp(vocab.term(b)))
    });
    IgRanking { scores, order }
}

/// The reduced vocabulary of the top `k` ranked terms, in rank order.
pub fn select_vocabulary(vocab: &Vocabulary, ranking: &IgRanking, k: usize) -> Vocabulary {
    Vocabulary::from_terms(
        ranking
            .select_top(k)
            .iter()
            .map(|&t| vocab.term(t).to_string())
            .collect(),
    )
}
