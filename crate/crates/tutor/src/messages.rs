//! Message catalogues and the plain-text rendering of feedback reports.
//!
//! Feedback items carry message keys and parameters; the text is looked up
//! here, per language, with English as the fallback. The CLI and the HTTP
//! service both go through [`resolve_report`], so their texts agree.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::OnceLock;

use logic_tutor_core::feedback::{FeedbackItem, FeedbackReport, ItemKind, Params};
use logic_tutor_core::formula::{Assignment, Span};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    #[default]
    En,
    De,
}

impl FromStr for Language {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "en" | "english" => Ok(Language::En),
            "de" | "german" | "deutsch" => Ok(Language::De),
            other => Err(format!("unsupported language `{other}`; use en or de")),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Catalogue {
    entries: HashMap<String, String>,
}

impl Catalogue {
    /// Parses `key = template` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut entries = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, template) =
                line.split_once('=').ok_or_else(|| format!("line {}: expected `key = text`", n + 1))?;
            if entries.insert(key.trim().to_string(), template.trim().to_string()).is_some() {
                return Err(format!("line {}: duplicate key `{}`", n + 1, key.trim()));
            }
        }
        Ok(Catalogue { entries })
    }

    pub fn builtin(lang: Language) -> &'static Catalogue {
        static EN: OnceLock<Catalogue> = OnceLock::new();
        static DE: OnceLock<Catalogue> = OnceLock::new();
        match lang {
            Language::En => {
                EN.get_or_init(|| Catalogue::parse(include_str!("../messages/en.txt")).expect("en catalogue"))
            }
            Language::De => {
                DE.get_or_init(|| Catalogue::parse(include_str!("../messages/de.txt")).expect("de catalogue"))
            }
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

/// Fills `{name}` placeholders; unknown placeholders stay as written.
pub fn fill(template: &str, params: &Params) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        match rest[open..].find('}') {
            Some(close) => {
                let name = &rest[open + 1..open + close];
                match params.get(name) {
                    Some(value) => out.push_str(value),
                    None => out.push_str(&rest[open..=open + close]),
                }
                rest = &rest[open + close + 1..];
            }
            None => {
                out.push_str(&rest[open..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}

/// The item's text in `lang`, falling back to English and then to the key.
pub fn message(item: &FeedbackItem, lang: Language) -> String {
    let template = Catalogue::builtin(lang)
        .get(&item.key)
        .or_else(|| Catalogue::builtin(Language::En).get(&item.key))
        .unwrap_or(&item.key);
    fill(template, &item.params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WireVerdict {
    Correct,
    Wrong,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedItem {
    pub level: u8,
    pub kind: ItemKind,
    pub key: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Params::is_empty")]
    pub params: Params,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<Span>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<Assignment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedReport {
    pub verdict: WireVerdict,
    pub items: Vec<ResolvedItem>,
}

pub fn resolve_report(report: &FeedbackReport, lang: Language) -> ResolvedReport {
    ResolvedReport {
        verdict: if report.verdict.is_correct() { WireVerdict::Correct } else { WireVerdict::Wrong },
        items: report
            .items
            .iter()
            .map(|item| ResolvedItem {
                level: item.level,
                kind: item.kind,
                key: item.key.clone(),
                text: message(item, lang),
                params: item.params.clone(),
                span: item.span,
                assignment: item.assignment.clone(),
            })
            .collect(),
    }
}

/// Plain text: the verdict, then one line per item. Items with a span are
/// followed by `input` with the span underlined by carets.
pub fn render_plain(input: &str, report: &ResolvedReport) -> String {
    let mut out = String::new();
    out.push_str(match report.verdict {
        WireVerdict::Correct => "correct\n",
        WireVerdict::Wrong => "wrong\n",
    });
    for item in &report.items {
        writeln!(out, "- {}", item.text).unwrap();
        if let Some(span) = item.span {
            writeln!(out, "    {input}").unwrap();
            writeln!(out, "    {}{}", " ".repeat(span.start), "^".repeat(span.len().max(1))).unwrap();
        }
        if let Some(a) = &item.assignment {
            let cells: Vec<String> = a.iter().map(|(v, b)| format!("{v}={}", u8::from(b))).collect();
            writeln!(out, "    {}", cells.join(" ")).unwrap();
        }
    }
    out
}
