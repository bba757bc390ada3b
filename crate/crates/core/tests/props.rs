//! Property-based invariants over the text-processing and model layers.

use std::collections::BTreeMap;

use proptest::prelude::*;

use bugclass_core::corpus::strip_html;
use bugclass_core::extract::{tokenize_words, FeatureGroup, FeatureGroupDoc};
use bugclass_core::features::{
    information_gain, rank_by_information_gain, vectorize_binary, vectorize_counts, Vocabulary,
};
use bugclass_core::nb::{ClassModel, EventModelKind};

const HTML_FRAGMENTS: &[&str] = &[
    "<p>",
    "</div>",
    "<B>",
    "<a href=\"x\">",
    "&lt;",
    "&gt;",
    "&amp;",
    "&quot;",
    "&#39;",
    "plain text",
    "a<b",
    "x > y",
    "\n",
    "\n\n\n\n",
    "<",
    ">",
    "&",
    ";",
    " ",
];

const DOC_TOKENS: &[&str] = &["aa", "bb", "cc", "dd", "ee"];
const QUERY_TOKENS: &[&str] = &["aa", "bb", "cc", "dd", "ee", "zz", "qq"];

fn arb_html() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(HTML_FRAGMENTS), 0..12)
        .prop_map(|parts| parts.concat())
}

fn arb_doc(pool: &'static [&'static str]) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(pool), 0..6)
        .prop_map(|v| v.into_iter().map(str::to_string).collect())
}

/// (class count, token lists per class) with at least one document per class.
fn arb_training() -> impl Strategy<Value = (usize, Vec<Vec<Vec<String>>>)> {
    (2usize..=4).prop_flat_map(|n| {
        prop::collection::vec(prop::collection::vec(arb_doc(DOC_TOKENS), 1..=3), n..=n)
            .prop_map(move |per_class| (n, per_class))
    })
}

fn doc(group: FeatureGroup, id: &str, tokens: Vec<String>) -> FeatureGroupDoc {
    FeatureGroupDoc {
        report_id: id.to_string(),
        group,
        tokens,
    }
}

fn train_from(
    kind: EventModelKind,
    per_class: &[Vec<Vec<String>>],
) -> (Vec<String>, Vec<FeatureGroupDoc>, ClassModel) {
    let categories: Vec<String> = (0..per_class.len()).map(|k| format!("c{k}")).collect();
    let mut docs = Vec::new();
    let mut classes = Vec::new();
    for (k, class_docs) in per_class.iter().enumerate() {
        for (i, tokens) in class_docs.iter().enumerate() {
            docs.push(doc(
                FeatureGroup::Title,
                &format!("r{k}-{i}"),
                tokens.clone(),
            ));
            classes.push(k);
        }
    }
    let vocab = Vocabulary::from_docs(docs.iter());
    let examples: Vec<(&FeatureGroupDoc, usize)> =
        docs.iter().zip(classes.iter().copied()).collect();
    let model = ClassModel::train(
        kind,
        FeatureGroup::Title,
        &categories,
        vocab,
        &examples,
        1.0,
    )
    .unwrap();
    (categories, docs, model)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn strip_html_is_idempotent(raw in arb_html()) {
        let once = strip_html(&raw);
        let twice = strip_html(&once);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn strip_html_idempotent_on_arbitrary_text(raw in "[ -~\n]{0,60}") {
        let once = strip_html(&raw);
        let twice = strip_html(&once);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn tokenize_words_output_is_well_formed(text in "[ -~\n]{0,80}") {
        for token in tokenize_words(&text) {
            prop_assert!(token.len() >= 2, "short token {token:?}");
            prop_assert!(
                token.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_'),
                "bad chars in {token:?}"
            );
            prop_assert!(
                !token.chars().all(|c| c.is_ascii_digit()),
                "all-digit token {token:?}"
            );
        }
    }

    #[test]
    fn information_gain_is_bounded(
        counts in prop::collection::vec((1usize..=20, 0usize..=20), 2..=6)
    ) {
        let class_doc_counts: Vec<usize> = counts.iter().map(|&(n, _)| n).collect();
        let term_doc_counts: Vec<usize> =
            counts.iter().map(|&(n, t)| t.min(n)).collect();
        let ig = information_gain(&class_doc_counts, &term_doc_counts);
        let bound = (class_doc_counts.len() as f64).ln();
        prop_assert!(ig >= 0.0, "negative gain {ig}");
        prop_assert!(ig <= bound + 1e-12, "gain {ig} above ln(classes) {bound}");
    }

    #[test]
    fn information_gain_is_class_order_invariant(
        counts in prop::collection::vec((1usize..=20, 0usize..=20), 2..=6),
        rot in 0usize..6,
    ) {
        let class_doc_counts: Vec<usize> = counts.iter().map(|&(n, _)| n).collect();
        let term_doc_counts: Vec<usize> =
            counts.iter().map(|&(n, t)| t.min(n)).collect();
        let base = information_gain(&class_doc_counts, &term_doc_counts);

        let n = class_doc_counts.len();
        let r = rot % n;
        let rotate = |v: &[usize]| -> Vec<usize> {
            (0..n).map(|i| v[(i + r) % n]).collect()
        };
        let rotated = information_gain(&rotate(&class_doc_counts), &rotate(&term_doc_counts));
        prop_assert!((base - rotated).abs() < 1e-12);

        let rev_c: Vec<usize> = class_doc_counts.iter().rev().copied().collect();
        let rev_t: Vec<usize> = term_doc_counts.iter().rev().copied().collect();
        let reversed = information_gain(&rev_c, &rev_t);
        prop_assert!((base - reversed).abs() < 1e-12);
    }

    #[test]
    fn posterior_is_a_probability_distribution(
        (n_classes, per_class) in arb_training(),
        query in arb_doc(QUERY_TOKENS),
    ) {
        let (categories, _docs, model) = train_from(EventModelKind::Bernoulli, &per_class);
        prop_assert_eq!(categories.len(), n_classes);

        let query_doc = doc(FeatureGroup::Title, "query", query);
        let posterior = model.posterior(&query_doc);

        let sum: f64 = posterior.probabilities.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-9, "probabilities sum to {sum}");
        for &p in &posterior.probabilities {
            prop_assert!((0.0..=1.0).contains(&p), "probability {p} out of range");
        }

        // Predicted class is the first argmax of the log scores.
        let mut best = 0usize;
        for (i, &s) in posterior.log_scores.iter().enumerate() {
            if s > posterior.log_scores[best] {
                best = i;
            }
        }
        prop_assert_eq!(&posterior.predicted, &categories[best]);
    }

    #[test]
    fn multinomial_class_distributions_sum_to_one(
        (_n, mut per_class) in arb_training()
    ) {
        // The multinomial model requires a non-empty vocabulary.
        per_class[0][0].push("aa".to_string());
        let (_categories, _docs, model) = train_from(EventModelKind::Multinomial, &per_class);
        for row in &model.log_prob {
            let sum: f64 = row.iter().map(|&lp| lp.exp()).sum();
            prop_assert!((sum - 1.0).abs() < 1e-9, "row sums to {sum}");
        }
    }

    #[test]
    fn vectorize_counts_matches_token_multiplicity(tokens in arb_doc(DOC_TOKENS)) {
        let d = doc(FeatureGroup::Title, "r0", tokens.clone());
        let vocab = Vocabulary::from_docs([&d]);
        let counts = vectorize_counts(&vocab, &d);
        let binary = vectorize_binary(&vocab, &d);

        let total: u64 = counts.iter().sum();
        prop_assert_eq!(total, tokens.len() as u64);
        for (i, &c) in counts.iter().enumerate() {
            prop_assert_eq!(binary[i], c > 0);
            let term = vocab.term(i);
            let expected = tokens.iter().filter(|t| t.as_str() == term).count() as u64;
            prop_assert_eq!(c, expected);
        }
    }

    #[test]
    fn ranking_orders_scores_descending_with_term_tiebreak(
        (_n, per_class) in arb_training()
    ) {
        let categories: Vec<String> = (0..per_class.len()).map(|k| format!("c{k}")).collect();
        let mut docs = Vec::new();
        let mut classes = Vec::new();
        for (k, class_docs) in per_class.iter().enumerate() {
            for (i, tokens) in class_docs.iter().enumerate() {
                docs.push(doc(FeatureGroup::Title, &format!("r{k}-{i}"), tokens.clone()));
                classes.push(k);
            }
        }
        let vocab = Vocabulary::from_docs(docs.iter());
        let vectors: Vec<Vec<bool>> =
            docs.iter().map(|d| vectorize_binary(&vocab, d)).collect();
        let ranking = rank_by_information_gain(&vocab, &vectors, &classes, categories.len());

        prop_assert_eq!(ranking.order.len(), vocab.len());
        for w in ranking.order.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (sa, sb) = (ranking.scores[a], ranking.scores[b]);
            prop_assert!(
                sa > sb || (sa == sb && vocab.term(a) < vocab.term(b)),
                "order violated: {}={} then {}={}",
                vocab.term(a), sa, vocab.term(b), sb
            );
        }
        for k in 0..=vocab.len() + 2 {
            let top = ranking.select_top(k);
            prop_assert_eq!(top.len(), k.min(vocab.len()));
            prop_assert_eq!(top, &ranking.order[..top.len()]);
        }
    }

    #[test]
    fn training_is_invariant_to_example_order(
        (_n, per_class) in arb_training()
    ) {
        let (_categories, docs, model) = train_from(EventModelKind::Bernoulli, &per_class);

        // Rebuild with the example list reversed; estimates must be identical.
        let categories: Vec<String> = (0..per_class.len()).map(|k| format!("c{k}")).collect();
        let mut classes = Vec::new();
        for (k, class_docs) in per_class.iter().enumerate() {
            for _ in class_docs {
                classes.push(k);
            }
        }
        let vocab = Vocabulary::from_docs(docs.iter());
        let mut examples: Vec<(&FeatureGroupDoc, usize)> =
            docs.iter().zip(classes.iter().copied()).collect();
        examples.reverse();
        let reversed = ClassModel::train(
            EventModelKind::Bernoulli,
            FeatureGroup::Title,
            &categories,
            vocab,
            &examples,
            1.0,
        )
        .unwrap();

        prop_assert_eq!(model.log_prob, reversed.log_prob);
        prop_assert_eq!(model.log_not_prob, reversed.log_not_prob);
        prop_assert_eq!(model.log_prior, reversed.log_prior);
    }
}

/// Non-proptest check kept here with the other invariants: group docs carry
/// their group marker and key maps correctly.
#[test]
fn feature_group_doc_sanity() {
    let d = doc(FeatureGroup::Commands, "r", vec!["show version".into()]);
    assert_eq!(d.group, FeatureGroup::Commands);
    assert!(!d.is_empty());
    let mut m = BTreeMap::new();
    m.insert(d.group, d);
    assert!(m.contains_key(&FeatureGroup::Commands));
}
