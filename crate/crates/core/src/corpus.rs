//! Bug report ingestion: HTML stripping, the JSON-Lines corpus format, and
//! the report/corpus domain types.
//!
//! A corpus file is UTF-8 JSON Lines. The first line is a header naming the
//! category set, e.g. `{"categories":["os","bgp","ip","ipv6","aaa","snmp"]}`.
//! Every following line is one report:
//! `{"id":"...","label":"snmp","title":"...","description":"...","crash_info":"...","event_log":"..."}`.
//! Missing section keys mean empty text, and `label` may be `null` for
//! unlabeled reports so the same format serves training and prediction.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The retained attachment kinds of a bug report.
///
/// Title and Description are kept as separate sections because they feed
/// separate feature groups downstream. Email and static-analysis attachments
/// are dropped at ingestion and have no section kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionKind {
    Title,
    Description,
    CrashInfo,
    EventLog,
}

impl SectionKind {
    pub const ALL: [SectionKind; 4] = [
        SectionKind::Title,
        SectionKind::Description,
        SectionKind::CrashInfo,
        SectionKind::EventLog,
    ];
}

/// One ingested bug report: an opaque id, an optional category label, and
/// the per-section raw texts (already HTML-stripped when loaded from a file).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BugReport {
    pub id: String,
    pub label: Option<String>,
    pub sections: BTreeMap<SectionKind, String>,
}

impl BugReport {
    pub fn new(id: impl Into<String>, label: Option<&str>) -> Self {
        BugReport {
            id: id.into(),
            label: label.map(str::to_string),
            sections: BTreeMap::new(),
        }
    }

    /// Stores `text` under `kind`. Empty text clears the section, which keeps
    /// "missing" and "empty" indistinguishable, as in the file format.
    pub fn set_section(&mut self, kind: SectionKind, text: impl Into<String>) {
        let text = text.into();
        if text.is_empty() {
            self.sections.remove(&kind);
        } else {
            self.sections.insert(kind, text);
        }
    }

    /// The text of a section, empty if the section is absent.
    pub fn section(&self, kind: SectionKind) -> &str {
        self.sections.get(&kind).map(String::as_str).unwrap_or("")
    }
}

/// An ordered category set plus the reports drawn from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub categories: Vec<String>,
    pub reports: Vec<BugReport>,
}

impl Corpus {
    /// Validates the corpus invariants: at least two distinct non-empty
    /// categories, unique non-empty report ids, labels drawn from the
    /// category set.
    pub fn new(categories: Vec<String>, reports: Vec<BugReport>) -> Result<Self, CorpusError> {
        validate_categories(&categories)?;
        let mut seen = HashSet::new();
        for report in &reports {
            if report.id.is_empty() {
                return Err(CorpusError::EmptyId { line: None });
            }
            if !seen.insert(report.id.as_str()) {
                return Err(CorpusError::DuplicateId {
                    id: report.id.clone(),
                    line: None,
                });
            }
            if let Some(label) = &report.label {
                if !categories.iter().any(|c| c == label) {
                    return Err(CorpusError::UnknownLabel {
                        label: label.clone(),
                        line: None,
                    });
                }
            }
        }
        Ok(Corpus {
            categories,
            reports,
        })
    }

    /// Reports that carry a label, in corpus order.
    pub fn labeled(&self) -> impl Iterator<Item = &BugReport> {
        self.reports.iter().filter(|r| r.label.is_some())
    }

    pub fn find(&self, id: &str) -> Option<&BugReport> {
        self.reports.iter().find(|r| r.id == id)
    }
}

fn validate_categories(categories: &[String]) -> Result<(), CorpusError> {
    if categories.len() < 2 {
        return Err(CorpusError::BadHeader {
            message: format!("need at least 2 categories, got {}", categories.len()),
        });
    }
    let mut seen = HashSet::new();
    for cat in categories {
        if cat.is_empty() {
            return Err(CorpusError::BadHeader {
                message: "empty category name".into(),
            });
        }
        if !seen.insert(cat.as_str()) {
            return Err(CorpusError::BadHeader {
                message: format!("duplicate category {:?}", cat),
            });
        }
    }
    Ok(())
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corpus file has no header line")]
    MissingHeader,
    #[error("bad corpus header: {message}")]
    BadHeader { message: String },
    #[error("line {line}: malformed report: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("duplicate report id {id:?}{}", fmt_line(.line))]
    DuplicateId { id: String, line: Option<usize> },
    #[error("label {label:?} is not in the corpus category set{}", fmt_line(.line))]
    UnknownLabel { label: String, line: Option<usize> },
    #[error("empty report id{}", fmt_line(.line))]
    EmptyId { line: Option<usize> },
}

fn fmt_line(line: &Option<usize>) -> String {
    match line {
        Some(n) => format!(" at line {n}"),
        None => String::new(),
    }
}

// --- HTML stripping ---------------------------------------------------------

const BLOCK_TAGS: [&str; 4] = ["p", "div", "li", "tr"];

const ENTITIES: [(&str, char); 5] = [
    ("&amp;", '&'),
    ("&lt;", '<'),
    ("&gt;", '>'),
    ("&quot;", '"'),
    ("&#39;", '\''),
];

/// Strips HTML tag spans from paragraph-level fragments.
///
/// Block-level tags (`p`, `div`, `li`, `tr`) become line breaks, `<br>` forces
/// one, other tags vanish, the five standard entities are decoded, and runs
/// of three or more newlines collapse to two. A `<` that does not open a
/// tag-like span (or has no closing `>` before end of input) is kept as
/// literal text, so inequality signs in prose survive.
///
/// The pass repeats until the text stops changing; decoding can reveal new
/// tag spans, and a single pass over such input would not be idempotent.
pub fn strip_html(raw: &str) -> String {
    let mut current = raw.to_string();
    loop {
        let next = strip_pass(&current);
        if next == current {
            return current;
        }
        current = next;
    }
}

fn strip_pass(input: &str) -> String {
    let stripped = remove_tags(input);
    let decoded = decode_entities(&stripped);
    collapse_newlines(&decoded)
}

fn remove_tags(input: &str) -> String {
    let mut out = String::with_capacity(input.len());
    let mut rest = input;
    while let Some(pos) = rest.find('<') {
        out.push_str(&rest[..pos]);
        let from_lt = &rest[pos..];
        let after_lt = &from_lt[1..];
        if !looks_like_tag(after_lt) {
            out.push('<');
            rest = after_lt;
            continue;
        }
        match after_lt.find('>') {
            Some(gt) => {
                apply_tag(&mut out, &after_lt[..gt]);
                rest = &after_lt[gt + 1..];
            }
            None => {
                // Unclosed tag: literal text from the `<` onward.
                out.push_str(from_lt);
                return out;
            }
        }
    }
    out.push_str(rest);
    out
}

fn looks_like_tag(after_lt: &str) -> bool {
    let mut chars = after_lt.chars();
    match chars.next() {
        Some('!') => true,
        Some('/') => matches!(chars.next(), Some(c) if c.is_ascii_alphabetic()),
        Some(c) => c.is_ascii_alphabetic(),
        None => false,
    }
}

fn apply_tag(out: &mut String, inner: &str) {
    let name: String = inner
        .trim_start_matches('/')
        .chars()
        .take_while(|c| c.is_ascii_alphanumeric())
        .collect();
    if name.eq_ignore_ascii_case("br") {
        out.push('\n');
    } else if BLOCK_TAGS.iter().any(|t| name.eq_ignore_ascii_case(t)) {
        // Block boundary: ensure a line break rather than stack them, so
        // `</div><div>` yields a single newline.
        if !out.is_empty() && !out.ends_with('\n') {
            out.push('\n');
        }
    }
}

fn decode_entities(input: &str) -> String {
    let mut out = String::with_capacity(input.len());
    let mut rest = input;
    while let Some(pos) = rest.find('&') {
        out.push_str(&rest[..pos]);
        rest = &rest[pos..];
        match ENTITIES.iter().find(|(e, _)| rest.starts_with(e)) {
            Some((entity, ch)) => {
                out.push(*ch);
                rest = &rest[entity.len()..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

fn collapse_newlines(input: &str) -> String {
    let mut out = String::with_capacity(input.len());
    let mut run = 0usize;
    for c in input.chars() {
        if c == '\n' {
            run += 1;
            if run <= 2 {
                out.push(c);
            }
        } else {
            run = 0;
            out.push(c);
        }
    }
    out
}

// --- JSON Lines I/O ---------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeaderLine {
    categories: Vec<String>,
}

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ReportLine {
    id: String,
    #[serde(default)]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    title: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    description: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    crash_info: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    event_log: String,
}

/// Loads a JSON-Lines corpus file. Every section is HTML-stripped on the way
/// in; `strip_html` is idempotent, so saving and reloading is lossless.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_corpus(BufReader::new(file)).map_err(|err| match err {
        CorpusError::Io { source, .. } => CorpusError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

/// Reads a corpus from any buffered reader; line numbers in errors are
/// 1-based over the raw input.
pub fn read_corpus<R: BufRead>(reader: R) -> Result<Corpus, CorpusError> {
    let mut categories: Option<Vec<String>> = None;
    let mut reports = Vec::new();
    let mut ids: HashSet<String> = HashSet::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| CorpusError::Io {
            path: PathBuf::new(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let cats = match &categories {
            None => {
                let header: HeaderLine =
                    serde_json::from_str(&line).map_err(|e| CorpusError::BadHeader {
                        message: e.to_string(),
                    })?;
                validate_categories(&header.categories)?;
                categories = Some(header.categories);
                continue;
            }
            Some(cats) => cats,
        };

        let parsed: ReportLine =
            serde_json::from_str(&line).map_err(|e| CorpusError::MalformedLine {
                line: line_no,
                message: e.to_string(),
            })?;
        if parsed.id.is_empty() {
            return Err(CorpusError::EmptyId {
                line: Some(line_no),
            });
        }
        if !ids.insert(parsed.id.clone()) {
            return Err(CorpusError::DuplicateId {
                id: parsed.id,
                line: Some(line_no),
            });
        }
        if let Some(label) = &parsed.label {
            if !cats.iter().any(|c| c == label) {
                return Err(CorpusError::UnknownLabel {
                    label: label.clone(),
                    line: Some(line_no),
                });
            }
        }

        let mut report = BugReport::new(parsed.id, parsed.label.as_deref());
        report.set_section(SectionKind::Title, strip_html(&parsed.title));
        report.set_section(SectionKind::Description, strip_html(&parsed.description));
        report.set_section(SectionKind::CrashInfo, strip_html(&parsed.crash_info));
        report.set_section(SectionKind::EventLog, strip_html(&parsed.event_log));
        reports.push(report);
    }

    match categories {
        Some(categories) => Ok(Corpus {
            categories,
            reports,
        }),
        None => Err(CorpusError::MissingHeader),
    }
}

pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let to_io = |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(to_io)?;
    let mut writer = BufWriter::new(file);
    write_corpus(corpus, &mut writer).map_err(to_io)?;
    writer.flush().map_err(to_io)
}

pub fn write_corpus<W: Write>(corpus: &Corpus, mut writer: W) -> std::io::Result<()> {
    let header = HeaderLine {
        categories: corpus.categories.clone(),
    };
    writeln!(
        writer,
        "{}",
        serde_json::to_string(&header).expect("header")
    )?;
    for report in &corpus.reports {
        let line = ReportLine {
            id: report.id.clone(),
            label: report.label.clone(),
            title: report.section(SectionKind::Title).to_string(),
            description: report.section(SectionKind::Description).to_string(),
            crash_info: report.section(SectionKind::CrashInfo).to_string(),
            event_log: report.section(SectionKind::EventLog).to_string(),
        };
        writeln!(writer, "{}", serde_json::to_string(&line).expect("report"))?;
    }
    Ok(())
}
