//! Deterministic synthetic corpora with class-correlated content in every
//! feature group.
//!
//! Each (group, class) pair owns a disjoint sublexicon, and each group also
//! has a shared lexicon; `signal_strength` is the per-token probability of
//! drawing from the class sublexicon instead of the shared one. The
//! generator writes the same textual surface forms the extractors parse
//! (`%CODE:` syslog lines, `CMD: '...'` quoting, `%[0x..]->>` trace lines),
//! so extraction recovers exactly the planted tokens and the generator
//! doubles as an extraction oracle.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::{BugReport, Corpus, SectionKind};
use crate::extract::FeatureGroup;

#[derive(Debug, Error)]
pub enum SynGenError {
    #[error("at least one category is required")]
    NoCategories,
    #[error("duplicate category {0:?}")]
    DuplicateCategory(String),
    #[error("category names must be non-empty")]
    EmptyCategory,
    #[error("docs_per_class must be positive")]
    ZeroDocsPerClass,
    #[error("signal_strength must lie in [0, 1], got {0}")]
    InvalidSignalStrength(f64),
    #[error("feature group {0} needs a positive vocabulary size")]
    BadVocabSize(FeatureGroup),
    #[error("feature group {0} needs a positive tokens-per-doc count")]
    BadTokensPerDoc(FeatureGroup),
}

/// Everything that determines a generated corpus. Two equal specs generate
/// byte-identical corpora.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub categories: Vec<String>,
    pub docs_per_class: usize,
    /// Size of each class sublexicon and of the shared lexicon, per group.
    pub vocab_sizes: BTreeMap<FeatureGroup, usize>,
    /// Exact number of tokens planted per document, per group.
    pub tokens_per_doc: BTreeMap<FeatureGroup, usize>,
    /// Probability that a planted token is class-specific rather than shared.
    pub signal_strength: f64,
    pub seed: u64,
}

impl GenSpec {
    /// A spec with desk-scale default lexicon sizes and per-document token
    /// counts (largest for Description, smallest for Traces).
    pub fn new(
        categories: Vec<String>,
        docs_per_class: usize,
        signal_strength: f64,
        seed: u64,
    ) -> GenSpec {
        let vocab_sizes = [
            (FeatureGroup::Title, 30),
            (FeatureGroup::Description, 60),
            (FeatureGroup::Syslogs, 20),
            (FeatureGroup::Commands, 20),
            (FeatureGroup::Traces, 12),
        ];
        let tokens_per_doc = [
            (FeatureGroup::Title, 8),
            (FeatureGroup::Description, 40),
            (FeatureGroup::Syslogs, 6),
            (FeatureGroup::Commands, 6),
            (FeatureGroup::Traces, 4),
        ];
        GenSpec {
            categories,
            docs_per_class,
            vocab_sizes: vocab_sizes.into_iter().collect(),
            tokens_per_doc: tokens_per_doc.into_iter().collect(),
            signal_strength,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SynGenError> {
        if self.categories.is_empty() {
            return Err(SynGenError::NoCategories);
        }
        let mut seen = std::collections::BTreeSet::new();
        for category in &self.categories {
            if category.is_empty() {
                return Err(SynGenError::EmptyCategory);
            }
            if !seen.insert(category) {
                return Err(SynGenError::DuplicateCategory(category.clone()));
            }
        }
        if self.docs_per_class == 0 {
            return Err(SynGenError::ZeroDocsPerClass);
        }
        if !(self.signal_strength >= 0.0 && self.signal_strength <= 1.0) {
            return Err(SynGenError::InvalidSignalStrength(self.signal_strength));
        }
        for group in FeatureGroup::ALL {
            if self.vocab_sizes.get(&group).copied().unwrap_or(0) == 0 {
                return Err(SynGenError::BadVocabSize(group));
            }
            if self.tokens_per_doc.get(&group).copied().unwrap_or(0) == 0 {
                return Err(SynGenError::BadTokensPerDoc(group));
            }
        }
        Ok(())
    }
}

/// The `i`-th token of class `class_idx`'s sublexicon for a group. Class
/// sublexicons are disjoint across classes and from the shared lexicon by
/// construction of the surface forms.
pub fn class_token(group: FeatureGroup, class_idx: usize, i: usize) -> String {
    match group {
        FeatureGroup::Title => format!("t{class_idx}cls{i}"),
        FeatureGroup::Description => format!("d{class_idx}cls{i}"),
        FeatureGroup::Syslogs => format!("SYN{class_idx}C{i}-5-EVENT"),
        FeatureGroup::Commands => format!("set class{class_idx} param{i}"),
        FeatureGroup::Traces => format!("fn{class_idx}cls{i}"),
    }
}

/// The `i`-th token of a group's shared (class-independent) lexicon.
pub fn shared_token(group: FeatureGroup, i: usize) -> String {
    match group {
        FeatureGroup::Title => format!("tsh{i}"),
        FeatureGroup::Description => format!("dsh{i}"),
        FeatureGroup::Syslogs => format!("SYNSH{i}-5-EVENT"),
        FeatureGroup::Commands => format!("set shared param{i}"),
        FeatureGroup::Traces => format!("fnsh{i}"),
    }
}

/// The tokens planted into one report, per feature group, in order.
pub type PlantedTokens = BTreeMap<FeatureGroup, Vec<String>>;

/// Generates the corpus together with each report's planted token lists
/// (corpus order), for tests that check extraction against ground truth.
pub fn generate_with_ground_truth(
    spec: &GenSpec,
) -> Result<(Corpus, Vec<PlantedTokens>), SynGenError> {
    spec.validate()?;
    let mut reports = Vec::new();
    let mut ground_truth = Vec::new();
    for (class_idx, category) in spec.categories.iter().enumerate() {
        for doc_idx in 0..spec.docs_per_class {
            let (report, planted) = generate_report(spec, class_idx, category, doc_idx);
            reports.push(report);
            ground_truth.push(planted);
        }
    }
    let corpus = Corpus::new(spec.categories.clone(), reports).expect("generated corpus is valid");
    Ok((corpus, ground_truth))
}

/// Generates a labeled corpus, fully determined by the [`GenSpec`].
pub fn generate(spec: &GenSpec) -> Result<Corpus, SynGenError> {
    generate_with_ground_truth(spec).map(|(corpus, _)| corpus)
}

fn generate_report(
    spec: &GenSpec,
    class_idx: usize,
    category: &str,
    doc_idx: usize,
) -> (BugReport, PlantedTokens) {
    // One independent, replayable RNG stream per report.
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(((class_idx as u64) << 32) | doc_idx as u64);

    let mut planted = PlantedTokens::new();
    for group in FeatureGroup::ALL {
        let size = spec.vocab_sizes[&group];
        let count = spec.tokens_per_doc[&group];
        let tokens: Vec<String> = (0..count)
            .map(|_| {
                let from_class = rng.gen_bool(spec.signal_strength);
                let i = rng.gen_range(0..size);
                if from_class {
                    class_token(group, class_idx, i)
                } else {
                    shared_token(group, i)
                }
            })
            .collect();
        planted.insert(group, tokens);
    }

    let mut report = BugReport::new(format!("{category}-{doc_idx:04}"), Some(category));
    report.set_section(SectionKind::Title, planted[&FeatureGroup::Title].join(" "));
    report.set_section(
        SectionKind::Description,
        planted[&FeatureGroup::Description].join(" "),
    );

    let event_log: String = planted[&FeatureGroup::Syslogs]
        .iter()
        .map(|code| format!("%{code}: synthetic event\n"))
        .collect();
    report.set_section(SectionKind::EventLog, event_log);

    let mut crash_info = String::new();
    for command in &planted[&FeatureGroup::Commands] {
        crash_info.push_str(&format!("CMD: '{command}' 19:30:05 EST Sat Nov 11 2006\n"));
    }
    for (slot, chunk) in planted[&FeatureGroup::Traces].iter().enumerate() {
        // The blank-ish separator line keeps consecutive planted chunks from
        // merging into one extracted chunk.
        crash_info.push_str("--- stack segment ---\n");
        crash_info.push_str(&format!("%[0x{:04X}]->>{chunk}\n", 0x4000 + slot));
    }
    report.set_section(SectionKind::CrashInfo, crash_info);

    (report, planted)
}
