//! Cascading feedback for formula submissions.
//!
//! The cascade is: verdict; then either the syntax message or the semantic
//! branch (variable usage, then a misconception diagnosis from the reversion
//! search, or a counterexample when no diagnosis is found). The engine emits
//! message keys with parameters; texts live in per-language catalogues.

mod rules;
mod search;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

pub use rules::{apply_rule, ReversionRule, RuleCatalogue, RuleCategory, RuleError};
pub use search::{
    find_reversion, search_reversion, ReversionSequence, ReversionStep, SearchLimits, SearchOutcome, SearchReport,
    DEFAULT_CANDIDATE_CAP, DEFAULT_MAX_LENGTH,
};

use crate::formula::{self, Assignment, Formula, FormulaError, Node, Span, SyntaxError, VariableSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Correct,
    SyntacticallyWrong,
    SemanticallyWrong,
}

impl Verdict {
    pub fn is_correct(self) -> bool {
        self == Verdict::Correct
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ItemKind {
    VerdictMessage,
    SyntaxMessage,
    VariableUsage,
    MisconceptionGeneral,
    MisconceptionPrecise,
    Highlight,
    Counterexample,
    /// Task-specific notes outside the formula cascade (transformation and
    /// resolution steps, questionnaires).
    Info,
}

pub type VariableMeaningMap = BTreeMap<String, String>;
pub type Params = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackItem {
    pub level: u8,
    pub kind: ItemKind,
    pub key: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: Params,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<Span>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<Assignment>,
}

impl FeedbackItem {
    pub fn new(level: u8, kind: ItemKind, key: impl Into<String>) -> Self {
        FeedbackItem { level, kind, key: key.into(), params: Params::new(), span: None, assignment: None }
    }

    pub fn param(mut self, name: &str, value: impl fmt::Display) -> Self {
        self.params.insert(name.to_string(), value.to_string());
        self
    }

    pub fn with_span(mut self, span: Option<Span>) -> Self {
        self.span = span;
        self
    }

    pub fn with_assignment(mut self, assignment: Assignment) -> Self {
        self.assignment = Some(assignment);
        self
    }

    pub fn info(key: impl Into<String>) -> Self {
        FeedbackItem::new(0, ItemKind::Info, key)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackReport {
    pub verdict: Verdict,
    pub items: Vec<FeedbackItem>,
}

impl FeedbackReport {
    pub fn new(verdict: Verdict) -> Self {
        FeedbackReport { verdict, items: Vec::new() }
    }

    pub fn with_item(mut self, item: FeedbackItem) -> Self {
        self.items.push(item);
        self
    }

    pub fn push(&mut self, item: FeedbackItem) {
        self.items.push(item);
    }

    /// Drops items above `max_level`.
    pub fn filtered(mut self, max_level: u8) -> Self {
        self.items.retain(|item| item.level <= max_level);
        self
    }

    pub fn kinds(&self) -> Vec<ItemKind> {
        self.items.iter().map(|i| i.kind).collect()
    }

    pub fn find(&self, kind: ItemKind) -> Option<&FeedbackItem> {
        self.items.iter().find(|i| i.kind == kind)
    }
}

pub const LEVEL_VERDICT: u8 = 0;
pub const LEVEL_BASIC: u8 = 1;
pub const LEVEL_DIAGNOSIS: u8 = 2;
pub const MAX_LEVEL: u8 = LEVEL_DIAGNOSIS;

#[derive(Debug, Clone)]
pub struct FeedbackConfig {
    pub max_level: u8,
    pub catalogue: Arc<RuleCatalogue>,
    pub meanings: VariableMeaningMap,
    /// Variables the student may use; `None` allows any.
    pub allowed: Option<VariableSet>,
    /// Variables the student should use; `None` means the solution's variables.
    pub required: Option<VariableSet>,
    pub limits: SearchLimits,
}

impl Default for FeedbackConfig {
    fn default() -> Self {
        FeedbackConfig {
            max_level: MAX_LEVEL,
            catalogue: Arc::new(RuleCatalogue::standard()),
            meanings: VariableMeaningMap::new(),
            allowed: None,
            required: None,
            limits: SearchLimits::default(),
        }
    }
}

/// How a wrong submission was classified, for logging and statistics.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErrorClass {
    None,
    Syntax,
    Inequivalent,
    RuleDiagnosed(String),
    NotResolvable,
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorClass::None => f.write_str("none"),
            ErrorClass::Syntax => f.write_str("syntax"),
            ErrorClass::Inequivalent => f.write_str("inequivalent"),
            ErrorClass::RuleDiagnosed(rule) => write!(f, "rule-diagnosed:{rule}"),
            ErrorClass::NotResolvable => f.write_str("not-resolvable"),
        }
    }
}

impl core::str::FromStr for ErrorClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "none" => ErrorClass::None,
            "syntax" => ErrorClass::Syntax,
            "inequivalent" => ErrorClass::Inequivalent,
            "not-resolvable" => ErrorClass::NotResolvable,
            other => match other.strip_prefix("rule-diagnosed:") {
                Some(rule) if !rule.is_empty() => ErrorClass::RuleDiagnosed(rule.to_string()),
                _ => return Err(format!("unknown classification `{other}`")),
            },
        })
    }
}

impl Serialize for ErrorClass {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ErrorClass {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Everything the cascade computed, beyond the report itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Analysis {
    pub report: FeedbackReport,
    pub student: Option<Formula>,
    pub diagnosis: Option<ReversionSequence>,
    pub class: ErrorClass,
}

/// One item per used variable outside `allowed` and per `required` variable
/// the student did not use.
pub fn check_variables(
    student: &Formula,
    allowed: Option<&VariableSet>,
    required: &VariableSet,
    meanings: &VariableMeaningMap,
) -> Vec<FeedbackItem> {
    let used = student.variables();
    let mut items = Vec::new();
    if let Some(allowed) = allowed {
        for name in used.iter().filter(|v| !allowed.contains(v)) {
            items.push(
                FeedbackItem::new(LEVEL_BASIC, ItemKind::VariableUsage, "variables.unknown").param("variable", name),
            );
        }
    }
    for name in required.iter().filter(|v| !used.contains(v)) {
        let item = match meanings.get(name) {
            Some(meaning) => FeedbackItem::new(LEVEL_BASIC, ItemKind::VariableUsage, "variables.unused.described")
                .param("meaning", meaning),
            None => FeedbackItem::new(LEVEL_BASIC, ItemKind::VariableUsage, "variables.unused"),
        };
        items.push(item.param("variable", name));
    }
    items
}

pub fn generate_feedback(student_text: &str, solution: &Formula, config: &FeedbackConfig) -> FeedbackReport {
    analyse(student_text, solution, config).report
}

/// Runs the full cascade and returns the report with its intermediate results.
pub fn analyse(student_text: &str, solution: &Formula, config: &FeedbackConfig) -> Analysis {
    let student = match formula::parse(student_text) {
        Ok(f) => f,
        Err(err) => {
            let report = syntax_report(&err).filtered(config.max_level);
            return Analysis { report, student: None, diagnosis: None, class: ErrorClass::Syntax };
        }
    };
    let (report, diagnosis, class) = semantic_branch(&student, solution, config);
    Analysis { report: report.filtered(config.max_level), student: Some(student), diagnosis, class }
}

/// Verdict plus the "please enter a propositional formula" item.
pub fn syntax_report(err: &SyntaxError) -> FeedbackReport {
    FeedbackReport::new(Verdict::SyntacticallyWrong).with_item(verdict_wrong()).with_item(
        FeedbackItem::new(LEVEL_BASIC, ItemKind::SyntaxMessage, "syntax.not-a-formula")
            .param("offset", err.offset)
            .param("expected", err.expectation())
            .with_span(Some(Span::new(err.offset, err.offset))),
    )
}

/// Verdict plus a counterexample, for submissions that must be equivalent to
/// a reference formula but are not.
pub fn inequivalence_report(student: &Formula, reference: &Formula) -> FeedbackReport {
    FeedbackReport::new(Verdict::SemanticallyWrong)
        .with_item(verdict_wrong())
        .with_item(counterexample(student, reference))
}

fn verdict_wrong() -> FeedbackItem {
    FeedbackItem::new(LEVEL_VERDICT, ItemKind::VerdictMessage, "verdict.wrong")
}

fn semantic_branch(
    student: &Formula,
    solution: &Formula,
    config: &FeedbackConfig,
) -> (FeedbackReport, Option<ReversionSequence>, ErrorClass) {
    match formula::equivalent(student, solution) {
        Ok(true) => {
            let report = FeedbackReport::new(Verdict::Correct).with_item(FeedbackItem::new(
                LEVEL_VERDICT,
                ItemKind::VerdictMessage,
                "verdict.correct",
            ));
            return (report, None, ErrorClass::None);
        }
        Ok(false) => {}
        Err(FormulaError::TooManyVariables { count, limit }) => {
            let report = FeedbackReport::new(Verdict::SemanticallyWrong).with_item(verdict_wrong()).with_item(
                FeedbackItem::new(LEVEL_BASIC, ItemKind::SyntaxMessage, "formula.too-many-variables")
                    .param("count", count)
                    .param("limit", limit),
            );
            return (report, None, ErrorClass::Inequivalent);
        }
        Err(other) => unreachable!("joint variable set covers both formulas: {other}"),
    }

    let mut report = FeedbackReport::new(Verdict::SemanticallyWrong).with_item(verdict_wrong());
    let required = config.required.clone().unwrap_or_else(|| solution.variables());
    report.items.extend(check_variables(student, config.allowed.as_ref(), &required, &config.meanings));

    // The search is the expensive part; skip it when its items would be dropped.
    if config.max_level < LEVEL_DIAGNOSIS {
        return (report, None, ErrorClass::Inequivalent);
    }
    let outcome = search_reversion(student, solution, &config.catalogue, config.limits)
        .map(|r| r.outcome)
        .unwrap_or(SearchOutcome::Exhausted);
    match outcome {
        SearchOutcome::Found(seq) => {
            let first = &seq.steps[0];
            let rule = config.catalogue.get(&first.rule).expect("diagnosis uses catalogue rules");
            let general = FeedbackItem::new(
                LEVEL_DIAGNOSIS,
                ItemKind::MisconceptionGeneral,
                format!("misconception.{}.general", rule.misconception_key),
            )
            .param("rule", &rule.id);
            let mut precise = FeedbackItem::new(
                LEVEL_DIAGNOSIS,
                ItemKind::MisconceptionPrecise,
                format!("misconception.{}.precise", rule.misconception_key),
            )
            .param("rule", &rule.id)
            .with_span(highlight_span(student, first));
            precise.params.extend(precise_params(rule, student, first));
            let highlight = FeedbackItem::new(LEVEL_DIAGNOSIS, ItemKind::Highlight, "highlight")
                .param("rule", &rule.id)
                .with_span(highlight_span(student, first));
            report.push(general);
            report.push(precise);
            report.push(highlight);
            let class = ErrorClass::RuleDiagnosed(rule.id.clone());
            (report, Some(seq), class)
        }
        SearchOutcome::Exhausted | SearchOutcome::CapExceeded => {
            report.push(counterexample(student, solution));
            (report, None, ErrorClass::Inequivalent)
        }
    }
}

/// The matched span, or the nearest ancestor's when the match is synthetic.
fn highlight_span(student: &Formula, step: &ReversionStep) -> Option<Span> {
    step.matched.span.or_else(|| student.spans_towards_root(&step.matched.position).into_iter().flatten().next())
}

fn precise_params(rule: &ReversionRule, student: &Formula, step: &ReversionStep) -> Params {
    let mut params = Params::new();
    let binding = &step.matched.binding;
    let mut put = |k: &str, v: String| {
        params.insert(k.to_string(), v);
    };
    if let Some(sub) = student.at(&step.matched.position) {
        put("subformula", sub.without_spans().to_string());
        if let Node::Binary(op, ..) = sub.node() {
            put("used", op.name().to_string());
        }
    }
    if let crate::pattern::Pattern::Binary(op, ..) = &rule.rhs {
        put("intended", op.name().to_string());
    }
    for (name, value) in binding {
        put(&format!("meta.{name}"), value.to_string());
    }
    if let Some(placeholder) = &rule.placeholder {
        if let Some(part) = binding.get(placeholder) {
            put("part", part.to_string());
        }
    }
    params
}

/// Item carrying the first assignment on which the two formulas differ.
pub fn counterexample(student: &Formula, solution: &Formula) -> FeedbackItem {
    let item = FeedbackItem::new(LEVEL_DIAGNOSIS, ItemKind::Counterexample, "counterexample");
    match formula::distinguishing_assignment(student, solution) {
        Ok(Some(assignment)) => {
            let student_value = formula::evaluate(student, &assignment).unwrap_or(false);
            item.param("student-value", student_value as u8)
                .param("solution-value", !student_value as u8)
                .param("assignment", &assignment)
                .with_assignment(assignment)
        }
        _ => item,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use alloc::vec;

    fn report(student: &str, solution: &str, level: u8) -> FeedbackReport {
        let config = FeedbackConfig { max_level: level, ..FeedbackConfig::default() };
        generate_feedback(student, &parse(solution).unwrap(), &config)
    }

    #[test]
    fn interchange_diagnosis() {
        let r = report("(D & U) -> !B", "!B -> (D & U)", 2);
        assert_eq!(r.verdict, Verdict::SemanticallyWrong);
        assert_eq!(
            r.kinds(),
            [
                ItemKind::VerdictMessage,
                ItemKind::MisconceptionGeneral,
                ItemKind::MisconceptionPrecise,
                ItemKind::Highlight
            ]
        );
        assert_eq!(r.items[1].key, "misconception.implication-swap.general");
        assert_eq!(r.items[3].span, Some(Span::new(0, 13)));
        assert_eq!(r.items[2].params["rule"], "implication-swap");
    }

    #[test]
    fn syntax_branch() {
        let r = report("D -> ", "D -> B", 2);
        assert_eq!(r.verdict, Verdict::SyntacticallyWrong);
        assert_eq!(r.kinds(), [ItemKind::VerdictMessage, ItemKind::SyntaxMessage]);
        assert_eq!(r.items[1].params["offset"], "5");
        assert_eq!(report("D -> ", "D -> B", 0).kinds(), [ItemKind::VerdictMessage]);
    }

    #[test]
    fn correct_has_only_verdict() {
        for level in 0..=2 {
            let r = report("B <- D", "D -> B", level);
            // `<-` is not in the grammar, so this is a syntax error.
            assert_eq!(r.verdict, Verdict::SyntacticallyWrong);
            let r = report("!B | D", "B -> D", level);
            assert_eq!(r.verdict, Verdict::Correct);
            assert_eq!(r.kinds(), [ItemKind::VerdictMessage]);
            assert_eq!(r.items[0].key, "verdict.correct");
        }
    }

    #[test]
    fn variable_items() {
        let meanings: VariableMeaningMap = [("U".to_string(), "the user interface".to_string())].into();
        let required = VariableSet::from_names(["D", "B", "U"]);
        let items = check_variables(&parse("D -> B").unwrap(), None, &required, &meanings);
        assert_eq!(items.len(), 1);
        assert_eq!(items[0].key, "variables.unused.described");
        assert_eq!(items[0].params["meaning"], "the user interface");
        let allowed = VariableSet::from_names(["B", "D", "U"]);
        let items = check_variables(&parse("X & B & D & U").unwrap(), Some(&allowed), &required, &meanings);
        assert_eq!(items.len(), 1);
        assert_eq!(items[0].params["variable"], "X");
        assert!(check_variables(&parse("B & D & U").unwrap(), Some(&allowed), &required, &meanings).is_empty());
    }

    #[test]
    fn counterexample_fallback() {
        // A zero cap stops the search at once, which forces the fallback.
        let config =
            FeedbackConfig { limits: SearchLimits { max_length: 2, candidate_cap: 0 }, ..FeedbackConfig::default() };
        let r = generate_feedback("A & B & C & D", &parse("(A xor B) <-> (C -> !D)").unwrap(), &config);
        assert_eq!(r.kinds(), [ItemKind::VerdictMessage, ItemKind::Counterexample]);
        let last = r.items.last().unwrap();
        assert_eq!(last.kind, ItemKind::Counterexample);
        let a = last.assignment.as_ref().unwrap();
        let s = parse("A & B & C & D").unwrap();
        let t = parse("(A xor B) <-> (C -> !D)").unwrap();
        assert_ne!(formula::evaluate(&s, a).unwrap(), formula::evaluate(&t, a).unwrap());
    }

    #[test]
    fn levels_are_monotone() {
        let inputs = [("(D & U) -> !B", "!B -> (D & U)"), ("D -> ", "D"), ("A | X", "A xor B")];
        for (s, t) in inputs {
            let items: Vec<Vec<FeedbackItem>> = (0..=2).map(|l| report(s, t, l).items).collect();
            for pair in items.windows(2) {
                assert!(pair[0].iter().all(|i| pair[1].contains(i)));
            }
        }
    }

    #[test]
    fn classification_strings() {
        let cases = vec![
            ErrorClass::None,
            ErrorClass::Syntax,
            ErrorClass::Inequivalent,
            ErrorClass::RuleDiagnosed("or-to-xor".into()),
            ErrorClass::NotResolvable,
        ];
        for c in cases {
            assert_eq!(c.to_string().parse::<ErrorClass>().unwrap(), c);
        }
        assert!("rule-diagnosed:".parse::<ErrorClass>().is_err());
    }
}
