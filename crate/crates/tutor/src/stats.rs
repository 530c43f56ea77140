//! Error statistics per group, exercise and statement type.
//!
//! For each key, a session *attempted* it if it submitted a formula for a
//! matching statement, and *erred* if one of those submissions was rejected
//! with an error classification. The error rate is erring over attempting sessions. The most
//! frequent error is the classification the most sessions exhibited (ties go
//! to the smaller name); its rate counts those sessions over attempting ones.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use logic_tutor_core::feedback::ErrorClass;
use serde::{Deserialize, Serialize};

use crate::log::{read_log, EventRecord, MalformedLog};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatFilter {
    #[serde(default)]
    pub exercise: Option<String>,
    #[serde(default)]
    pub group: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    pub group: Option<String>,
    pub exercise: String,
    pub statement_type: String,
    /// Sessions that attempted the statement type.
    pub n: usize,
    pub erring: usize,
    pub error_rate: f64,
    pub most_frequent_error: Option<ErrorClass>,
    pub most_frequent_count: usize,
    pub most_frequent_error_rate: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub rows: Vec<StatRow>,
}

type Key = (Option<String>, String, String);

#[derive(Default)]
struct Tally {
    attempted: BTreeSet<String>,
    errors: BTreeMap<String, BTreeSet<ErrorClass>>,
}

/// The statement label: its declared type, or its position for untyped ones.
fn statement_label(r: &EventRecord) -> Option<String> {
    let statement = r.statement?;
    Some(r.statement_type.clone().unwrap_or_else(|| format!("task{}.statement{statement}", r.task)))
}

pub fn compute_stats(records: &[EventRecord], filter: &StatFilter) -> StatReport {
    let mut tallies: BTreeMap<Key, Tally> = BTreeMap::new();
    let wanted = |r: &EventRecord| {
        filter.exercise.as_ref().is_none_or(|e| *e == r.exercise)
            && filter.group.as_ref().is_none_or(|g| Some(g) == r.group.as_ref())
    };
    for r in records.iter().filter(|r| r.action == "submit-formula" && wanted(r)) {
        let Some(label) = statement_label(r) else { continue };
        let tally = tallies.entry((r.group.clone(), r.exercise.clone(), label)).or_default();
        tally.attempted.insert(r.session.clone());
        // A rejection classified `none` is a re-submission of an accepted
        // statement, not a mistake.
        if !r.accepted && r.classification != ErrorClass::None {
            tally.errors.entry(r.session.clone()).or_default().insert(r.classification.clone());
        }
    }
    let rows = tallies
        .into_iter()
        .map(|((group, exercise, statement_type), tally)| {
            let n = tally.attempted.len();
            let erring = tally.errors.len();
            let mut per_class: BTreeMap<&ErrorClass, usize> = BTreeMap::new();
            for class in tally.errors.values().flatten() {
                *per_class.entry(class).or_default() += 1;
            }
            // Classes are visited in name order, so the first maximum wins ties.
            let mut mode: Option<(&ErrorClass, usize)> = None;
            for (class, count) in per_class {
                if mode.is_none_or(|(_, best)| count > best) {
                    mode = Some((class, count));
                }
            }
            let most_frequent_count = mode.map_or(0, |(_, c)| c);
            StatRow {
                group,
                exercise,
                statement_type,
                n,
                erring,
                error_rate: erring as f64 / n as f64,
                most_frequent_error: mode.map(|(c, _)| c.clone()),
                most_frequent_count,
                most_frequent_error_rate: most_frequent_count as f64 / n as f64,
            }
        })
        .collect();
    StatReport { rows }
}

/// Statistics straight from log bytes, with the reader's warnings.
pub fn stats_from_log(bytes: &[u8], filter: &StatFilter) -> Result<(StatReport, Vec<String>), MalformedLog> {
    let contents = read_log(bytes)?;
    Ok((compute_stats(&contents.records, filter), contents.warnings))
}

pub fn render_table(report: &StatReport) -> String {
    let header = ["group", "exercise", "statement type", "n", "error rate", "most frequent error", "rate"];
    let mut rows: Vec<[String; 7]> = vec![header.map(str::to_string)];
    for r in &report.rows {
        rows.push([
            r.group.clone().unwrap_or_else(|| "-".into()),
            r.exercise.clone(),
            r.statement_type.clone(),
            r.n.to_string(),
            format!("{:.2}", r.error_rate),
            r.most_frequent_error.as_ref().map_or_else(|| "-".into(), ToString::to_string),
            format!("{:.2}", r.most_frequent_error_rate),
        ]);
    }
    let widths: Vec<usize> = (0..7).map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in &rows {
        let cells: Vec<String> = row.iter().zip(&widths).map(|(cell, w)| format!("{cell:<w$}")).collect();
        writeln!(out, "{}", cells.join("  ").trim_end()).unwrap();
    }
    out
}
