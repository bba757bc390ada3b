//! Implementations of the five subcommands.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};

use serde::Serialize;

use bugclass_core::corpus::{load_corpus, save_corpus, BugReport, Corpus};
use bugclass_core::ensemble::{EnsembleMode, EnsembleModel};
use bugclass_core::eval::{evaluate, split, EvaluationReport};
use bugclass_core::extract::{extract_all, FeatureGroup, FeatureGroupDoc};
use bugclass_core::features::{
    rank_by_information_gain, select_vocabulary, vectorize_binary, Vocabulary,
};
use bugclass_core::nb::{ClassModel, EventModelKind};
use bugclass_core::persist::{load_model, save_model};
use bugclass_core::syngen::{generate, GenSpec};

use crate::args::{EvaluateArgs, GenArgs, InspectArgs, PredictArgs, TrainArgs};
use crate::config::{required_corpus, required_model, resolve, RunConfig};
use crate::errors::{io_error, CliError};
use crate::table::{render, MetricRow};

pub fn cmd_gen(args: GenArgs) -> Result<(), CliError> {
    let spec = GenSpec::new(args.classes, args.per_class, args.signal, args.seed);
    let corpus = generate(&spec)?;
    save_corpus(&corpus, &args.output)?;
    eprintln!(
        "wrote {} reports ({} categories) to {}",
        corpus.reports.len(),
        corpus.categories.len(),
        args.output.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct RankedFeature {
    feature: String,
    score: f64,
}

#[derive(Serialize)]
struct InspectOutput<'a> {
    id: &'a str,
    groups: BTreeMap<FeatureGroup, FeatureGroupDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rankings: Option<BTreeMap<FeatureGroup, Vec<RankedFeature>>>,
}

pub fn cmd_inspect(args: InspectArgs) -> Result<(), CliError> {
    let corpus = load_corpus(&args.corpus)?;
    let report = corpus
        .find(&args.id)
        .ok_or_else(|| CliError::Data(format!("no report with id {:?} in the corpus", args.id)))?;
    let output = InspectOutput {
        id: &report.id,
        groups: extract_all(report),
        rankings: match args.rank {
            Some(top_n) => Some(compute_rankings(&corpus, top_n)?),
            None => None,
        },
    };
    print_json(&output)
}

fn compute_rankings(
    corpus: &Corpus,
    top_n: usize,
) -> Result<BTreeMap<FeatureGroup, Vec<RankedFeature>>, CliError> {
    let labeled: Vec<&BugReport> = corpus.labeled().collect();
    if labeled.is_empty() {
        return Err(CliError::Data(
            "cannot rank features: the corpus has no labeled reports".into(),
        ));
    }
    let classes = class_indices(&corpus.categories, labeled.iter().copied());
    let extracted: Vec<BTreeMap<FeatureGroup, FeatureGroupDoc>> =
        labeled.iter().map(|r| extract_all(r)).collect();

    let mut rankings = BTreeMap::new();
    for group in FeatureGroup::ALL {
        let docs: Vec<&FeatureGroupDoc> = extracted.iter().map(|m| &m[&group]).collect();
        let vocab = Vocabulary::from_docs(docs.iter().copied());
        let vectors: Vec<Vec<bool>> = docs.iter().map(|d| vectorize_binary(&vocab, d)).collect();
        let ranking = rank_by_information_gain(&vocab, &vectors, &classes, corpus.categories.len());
        let top: Vec<RankedFeature> = ranking
            .select_top(top_n)
            .iter()
            .map(|&t| RankedFeature {
                feature: vocab.term(t).to_string(),
                score: ranking.scores[t],
            })
            .collect();
        rankings.insert(group, top);
    }
    Ok(rankings)
}

pub fn cmd_train(args: TrainArgs) -> Result<(), CliError> {
    let config = resolve(
        &args.common,
        args.corpus.as_deref(),
        args.model.as_deref(),
        None,
        None,
    )?;
    let corpus_path = required_corpus(&config)?;
    let model_path = required_model(&config)?;
    let corpus = load_corpus(corpus_path)?;
    let labeled = labeled_only(&corpus.reports);

    let ensemble = EnsembleModel::train(
        config.ensemble_config(),
        corpus.categories.clone(),
        &labeled,
        config.alpha,
        &config.select_k,
    )?;
    save_model(model_path, &ensemble)?;
    eprintln!(
        "trained on {} reports across {} categories; wrote {}",
        labeled.len(),
        corpus.categories.len(),
        model_path.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct PredictionLine<'a> {
    id: &'a str,
    predicted: &'a str,
    deciding_group: Option<FeatureGroup>,
    probabilities: BTreeMap<&'a str, f64>,
}

pub fn cmd_predict(args: PredictArgs) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let corpus = load_corpus(&args.corpus)?;
    if corpus.categories != model.categories {
        return Err(CliError::Data(format!(
            "corpus categories {:?} do not match model categories {:?}",
            corpus.categories, model.categories
        )));
    }

    let mut out: Box<dyn Write> = match &args.output {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| io_error(path, e))?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    for report in &corpus.reports {
        let decision = model.classify(report);
        let line = PredictionLine {
            id: &report.id,
            predicted: &decision.posterior.predicted,
            deciding_group: decision.deciding_group,
            probabilities: model
                .categories
                .iter()
                .map(String::as_str)
                .zip(decision.posterior.probabilities.iter().copied())
                .collect(),
        };
        write_json_line(&mut out, &line)?;
    }
    out.flush().map_err(|e| CliError::Io(e.to_string()))
}

/// The full evaluation output: the resolved parameters that shaped the run
/// (paths excluded so identical flags give identical bytes), split sizes,
/// and one metrics report per (group, model) pair and per ensemble mode.
#[derive(Serialize)]
struct EvaluateOutput {
    seed: u64,
    train_fraction: f64,
    alpha: f64,
    select_k: BTreeMap<FeatureGroup, usize>,
    priority_order: Vec<FeatureGroup>,
    model_kind_by_group: BTreeMap<FeatureGroup, EventModelKind>,
    train_size: usize,
    test_size: usize,
    per_group: BTreeMap<FeatureGroup, BTreeMap<EventModelKind, EvaluationReport>>,
    ensemble: BTreeMap<EnsembleMode, EvaluationReport>,
}

pub fn cmd_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let config = resolve(
        &args.common,
        args.corpus.as_deref(),
        None,
        args.train_fraction,
        args.seed,
    )?;
    let corpus_path = required_corpus(&config)?;
    let corpus = load_corpus(corpus_path)?;

    let outcome = split(&corpus, config.train_fraction, config.seed)?;
    for warning in &outcome.warnings {
        eprintln!("warning: {warning}");
    }
    let train_reports = labeled_only(&outcome.train.reports);
    let test_reports = &outcome.test.reports;

    let per_group = evaluate_groups(&config, &corpus.categories, &train_reports, test_reports)?;

    let mut ensemble = EnsembleModel::train(
        config.ensemble_config(),
        corpus.categories.clone(),
        &train_reports,
        config.alpha,
        &config.select_k,
    )?;
    let mut ensemble_reports = BTreeMap::new();
    for mode in EnsembleMode::ALL {
        ensemble.config.mode = mode;
        ensemble_reports.insert(mode, evaluate(&ensemble, test_reports)?);
    }

    let output = EvaluateOutput {
        seed: config.seed,
        train_fraction: config.train_fraction,
        alpha: config.alpha,
        select_k: config.select_k.clone(),
        priority_order: config.priority_order.clone(),
        model_kind_by_group: config.model_kind_by_group.clone(),
        train_size: train_reports.len(),
        test_size: test_reports.len(),
        per_group,
        ensemble: ensemble_reports,
    };

    let mut rows = Vec::new();
    for group in FeatureGroup::ALL {
        for kind in EventModelKind::ALL {
            rows.push(metric_row(
                group.to_string(),
                kind.to_string(),
                &output.per_group[&group][&kind],
            ));
        }
    }
    for mode in EnsembleMode::ALL {
        rows.push(metric_row(
            "ensemble".to_string(),
            mode.to_string(),
            &output.ensemble[&mode],
        ));
    }
    print!("{}", render(&rows));

    if let Some(path) = &args.json {
        let file = File::create(path).map_err(|e| io_error(path, e))?;
        let mut writer = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut writer, &output)
            .map_err(|e| CliError::Io(e.to_string()))?;
        writer
            .write_all(b"\n")
            .and_then(|()| writer.flush())
            .map_err(|e| io_error(path, e))?;
    }
    Ok(())
}

/// Trains and scores every (feature group, event model) pair in isolation.
fn evaluate_groups(
    config: &RunConfig,
    categories: &[String],
    train_reports: &[BugReport],
    test_reports: &[BugReport],
) -> Result<BTreeMap<FeatureGroup, BTreeMap<EventModelKind, EvaluationReport>>, CliError> {
    let classes = class_indices(categories, train_reports.iter());
    let extracted: Vec<BTreeMap<FeatureGroup, FeatureGroupDoc>> =
        train_reports.iter().map(extract_all).collect();

    let mut per_group = BTreeMap::new();
    for group in FeatureGroup::ALL {
        let docs: Vec<&FeatureGroupDoc> = extracted.iter().map(|m| &m[&group]).collect();
        let full_vocab = Vocabulary::from_docs(docs.iter().copied());
        let vectors: Vec<Vec<bool>> = docs
            .iter()
            .map(|doc| vectorize_binary(&full_vocab, doc))
            .collect();
        let ranking = rank_by_information_gain(&full_vocab, &vectors, &classes, categories.len());
        let vocab = select_vocabulary(&full_vocab, &ranking, config.select_k[&group]);
        let examples: Vec<(&FeatureGroupDoc, usize)> =
            docs.into_iter().zip(classes.iter().copied()).collect();

        let mut by_kind = BTreeMap::new();
        for kind in EventModelKind::ALL {
            let model = ClassModel::train(
                kind,
                group,
                categories,
                vocab.clone(),
                &examples,
                config.alpha,
            )?;
            by_kind.insert(kind, evaluate(&model, test_reports)?);
        }
        per_group.insert(group, by_kind);
    }
    Ok(per_group)
}

fn metric_row(group: String, model: String, report: &EvaluationReport) -> MetricRow {
    MetricRow {
        group,
        model,
        precision: report.macro_avg.precision,
        recall: report.macro_avg.recall,
        f_measure: report.macro_avg.f_measure,
        accuracy: report.accuracy,
    }
}

/// Labels are validated at corpus load, so every `Some` label has an index.
fn class_indices<'a>(
    categories: &[String],
    reports: impl Iterator<Item = &'a BugReport>,
) -> Vec<usize> {
    reports
        .map(|r| {
            let label = r.label.as_ref().expect("caller passes labeled reports");
            categories
                .iter()
                .position(|c| c == label)
                .expect("corpus loading validates labels")
        })
        .collect()
}

fn labeled_only(reports: &[BugReport]) -> Vec<BugReport> {
    let labeled: Vec<BugReport> = reports
        .iter()
        .filter(|r| r.label.is_some())
        .cloned()
        .collect();
    let skipped = reports.len() - labeled.len();
    if skipped > 0 {
        eprintln!("warning: skipping {skipped} unlabeled report(s)");
    }
    labeled
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let mut stdout = io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, value).map_err(|e| CliError::Io(e.to_string()))?;
    stdout
        .write_all(b"\n")
        .and_then(|()| stdout.flush())
        .map_err(|e| CliError::Io(e.to_string()))
}

fn write_json_line<W: Write, T: Serialize>(writer: &mut W, value: &T) -> Result<(), CliError> {
    serde_json::to_writer(&mut *writer, value).map_err(|e| CliError::Io(e.to_string()))?;
    writer
        .write_all(b"\n")
        .map_err(|e| CliError::Io(e.to_string()))
}
