//! Turns bug reports into per-feature-group token documents.
//!
//! Natural-language sections (Title, Description) are tokenized bag-of-words
//! style. Programming-language content is pulled out by the fixed pattern
//! table: syslog event codes (`%IDENT:`), crash-file command lines
//! (`CMD: '...'` or the `Current Configuration` ... `end` block), and trace
//! decode lines (`%[0x...]:` / `%[0x...]->>`) whose consecutive runs are
//! joined into ordered call chunks.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::{BugReport, SectionKind};

/// The five channels of evidence extracted from a report. Priority between
/// them is ensemble configuration, not a property of the enum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureGroup {
    Title,
    Description,
    Syslogs,
    Commands,
    Traces,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 5] = [
        FeatureGroup::Title,
        FeatureGroup::Description,
        FeatureGroup::Syslogs,
        FeatureGroup::Commands,
        FeatureGroup::Traces,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureGroup::Title => "title",
            FeatureGroup::Description => "description",
            FeatureGroup::Syslogs => "syslogs",
            FeatureGroup::Commands => "commands",
            FeatureGroup::Traces => "traces",
        }
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureGroup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FeatureGroup::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown feature group {s:?}"))
    }
}

/// The extracted feature tokens of one report for one feature group.
/// Tokens keep their multiplicity and extraction order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureGroupDoc {
    pub report_id: String,
    pub group: FeatureGroup,
    pub tokens: Vec<String>,
}

impl FeatureGroupDoc {
    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// One row of the fixed pattern table driving programming-language feature
/// extraction: match rules in application order, an optional from/to marker
/// pair bounding a line block, and the separator splitting multi-feature
/// matches.
#[derive(Debug, Clone)]
pub struct ExtractionPattern {
    pub group: FeatureGroup,
    pub pattern_regexes: Vec<&'static str>,
    pub from_marker: Option<&'static str>,
    pub to_marker: Option<&'static str>,
    pub separator: Option<&'static str>,
}

const SYSLOG_PATTERN: &str = r"%([A-Za-z0-9_-]+):";
const CMD_QUOTED_PATTERN: &str = r"CMD: '([^']*)'";
const CONFIG_LINE_PATTERN: &str = r"(.+)";
const TRACE_SPACED_PATTERN: &str = r"^%\[0x[0-9A-Fa-f]+\]:(.*)$";
const TRACE_CHAIN_PATTERN: &str = r"^%\[0x[0-9A-Fa-f]+\]->>(.*)$";

const CONFIG_FROM_MARKER: &str = "Current Configuration";
const CONFIG_TO_MARKER: &str = "end";

/// The built-in pattern table. `extract_commands` skips the marker-bounded
/// second rule whenever the first produced features.
pub fn builtin_patterns() -> Vec<ExtractionPattern> {
    vec![
        ExtractionPattern {
            group: FeatureGroup::Commands,
            pattern_regexes: vec![CMD_QUOTED_PATTERN, CONFIG_LINE_PATTERN],
            from_marker: Some(CONFIG_FROM_MARKER),
            to_marker: Some(CONFIG_TO_MARKER),
            separator: None,
        },
        ExtractionPattern {
            group: FeatureGroup::Syslogs,
            pattern_regexes: vec![SYSLOG_PATTERN],
            from_marker: None,
            to_marker: None,
            separator: None,
        },
        ExtractionPattern {
            group: FeatureGroup::Traces,
            pattern_regexes: vec![TRACE_SPACED_PATTERN],
            from_marker: None,
            to_marker: None,
            separator: Some(" "),
        },
        ExtractionPattern {
            group: FeatureGroup::Traces,
            pattern_regexes: vec![TRACE_CHAIN_PATTERN],
            from_marker: None,
            to_marker: None,
            separator: None,
        },
    ]
}

static SYSLOG_RE: Lazy<Regex> = Lazy::new(|| Regex::new(SYSLOG_PATTERN).unwrap());
static CMD_QUOTED_RE: Lazy<Regex> = Lazy::new(|| Regex::new(CMD_QUOTED_PATTERN).unwrap());
static TRACE_SPACED_RE: Lazy<Regex> = Lazy::new(|| Regex::new(TRACE_SPACED_PATTERN).unwrap());
static TRACE_CHAIN_RE: Lazy<Regex> = Lazy::new(|| Regex::new(TRACE_CHAIN_PATTERN).unwrap());

/// Syslog event codes: the identifier between a `%` and the next `:`.
/// Identifier characters are `[A-Za-z0-9_-]` with at least one letter, which
/// keeps timestamps like `00:30:02` out.
pub fn extract_syslog(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for line in text.lines() {
        for caps in SYSLOG_RE.captures_iter(line) {
            let ident = caps.get(1).unwrap().as_str();
            if ident.chars().any(|c| c.is_ascii_alphabetic()) {
                tokens.push(ident.to_string());
            }
        }
    }
    tokens
}

/// Command features, two rules in order: the string quoted in `CMD: '...'`
/// lines, else every trimmed line strictly inside a
/// `Current Configuration` ... `end` block. When the first rule matched
/// anything the second is skipped entirely.
pub fn extract_commands(text: &str) -> Vec<String> {
    let quoted: Vec<String> = text
        .lines()
        .filter_map(|line| CMD_QUOTED_RE.captures(line))
        .map(|caps| caps.get(1).unwrap().as_str().to_string())
        .filter(|cmd| !cmd.is_empty())
        .collect();
    if !quoted.is_empty() {
        return quoted;
    }

    let mut tokens = Vec::new();
    let mut block: Option<Vec<String>> = None;
    for line in text.lines() {
        let trimmed = line.trim();
        match &mut block {
            Some(pending) => {
                if trimmed.eq_ignore_ascii_case(CONFIG_TO_MARKER) {
                    tokens.append(pending);
                    block = None;
                } else if !trimmed.is_empty() {
                    pending.push(trimmed.to_string());
                }
            }
            None => {
                if trimmed
                    .to_ascii_lowercase()
                    .starts_with(&CONFIG_FROM_MARKER.to_ascii_lowercase())
                {
                    block = Some(Vec::new());
                }
            }
        }
    }
    // A block never closed by an `end` line contributes nothing.
    tokens
}

/// Trace-decode chunks. Each line of the form `%[0x...]:names` (whitespace
/// separated) or `%[0x...]->>name` contributes its function names, and every
/// maximal run of consecutive trace lines is joined into one ordered chunk
/// token — the call chain, not the individual names, is the feature.
pub fn extract_traces(text: &str) -> Vec<String> {
    let mut chunks = Vec::new();
    let mut pieces: Vec<String> = Vec::new();
    for line in text.lines() {
        let trimmed = line.trim();
        if let Some(caps) = TRACE_SPACED_RE.captures(trimmed) {
            pieces.extend(
                caps.get(1)
                    .unwrap()
                    .as_str()
                    .split_whitespace()
                    .map(str::to_string),
            );
        } else if let Some(caps) = TRACE_CHAIN_RE.captures(trimmed) {
            let rest = caps.get(1).unwrap().as_str().trim();
            if !rest.is_empty() {
                pieces.push(rest.to_string());
            }
        } else {
            flush_chunk(&mut pieces, &mut chunks);
        }
    }
    flush_chunk(&mut pieces, &mut chunks);
    chunks
}

fn flush_chunk(pieces: &mut Vec<String>, chunks: &mut Vec<String>) {
    if !pieces.is_empty() {
        chunks.push(pieces.join(" "));
        pieces.clear();
    }
}

/// Bag-of-words tokens: lowercased maximal runs of `[a-z0-9_]` of length at
/// least two, in order, duplicates kept, pure-digit runs dropped.
pub fn tokenize_words(text: &str) -> Vec<String> {
    let lowered = text.to_ascii_lowercase();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in lowered.chars() {
        if c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' {
            current.push(c);
        } else {
            take_word(&mut current, &mut tokens);
        }
    }
    take_word(&mut current, &mut tokens);
    tokens
}

fn take_word(current: &mut String, tokens: &mut Vec<String>) {
    if current.len() >= 2 && !current.chars().all(|c| c.is_ascii_digit()) {
        tokens.push(std::mem::take(current));
    } else {
        current.clear();
    }
}

/// Runs every extractor over its source sections. All five groups are always
/// present in the result, possibly with empty token lists. Syslog codes are
/// read from the event log first and the crash info second; commands and
/// traces come from the crash info.
pub fn extract_all(report: &BugReport) -> BTreeMap<FeatureGroup, FeatureGroupDoc> {
    let crash_info = report.section(SectionKind::CrashInfo);

    let mut syslogs = extract_syslog(report.section(SectionKind::EventLog));
    syslogs.extend(extract_syslog(crash_info));

    let tokens_by_group = [
        (
            FeatureGroup::Title,
            tokenize_words(report.section(SectionKind::Title)),
        ),
        (
            FeatureGroup::Description,
            tokenize_words(report.section(SectionKind::Description)),
        ),
        (FeatureGroup::Syslogs, syslogs),
        (FeatureGroup::Commands, extract_commands(crash_info)),
        (FeatureGroup::Traces, extract_traces(crash_info)),
    ];

    tokens_by_group
        .into_iter()
        .map(|(group, tokens)| {
            (
                group,
                FeatureGroupDoc {
                    report_id: report.id.clone(),
                    group,
                    tokens,
                },
            )
        })
        .collect()
}
