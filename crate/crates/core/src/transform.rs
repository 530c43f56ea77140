//! Step-by-step transformation of a formula towards a normal form or a given
//! target, either by free-text steps or by applying named equivalence rules.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::feedback::{inequivalence_report, syntax_report, FeedbackItem, FeedbackReport, ItemKind, Verdict};
use crate::formula::{self, is_cnf, is_dnf, is_nnf, BinOp, Formula, Node};
use crate::pattern::{Binding, Pattern};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Cnf,
    Dnf,
    Nnf,
    Formula(Formula),
}

impl Target {
    pub fn is_reached_by(&self, f: &Formula) -> bool {
        match self {
            Target::Cnf => is_cnf(f),
            Target::Dnf => is_dnf(f),
            Target::Nnf => is_nnf(f),
            Target::Formula(target) => equal_modulo_ac(f, target),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Cnf => f.write_str("cnf"),
            Target::Dnf => f.write_str("dnf"),
            Target::Nnf => f.write_str("nnf"),
            Target::Formula(g) => write!(f, "{g}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("rule `{rule}` is not applicable at position {position:?}")]
    RuleNotApplicable { rule: String, position: Vec<u8> },
    #[error("rule `{0}` is not an equivalence")]
    UnsoundRule(String),
    #[error("nothing to undo")]
    NothingToUndo,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceRule {
    pub id: String,
    /// Message-catalogue key of the rule family, e.g. `rule.de-morgan`.
    pub name_key: String,
    pub lhs: Pattern,
    pub rhs: Pattern,
}

impl EquivalenceRule {
    pub fn new(id: &str, family: &str, lhs: &str, rhs: &str) -> Self {
        EquivalenceRule {
            id: id.to_string(),
            name_key: alloc::format!("rule.{family}"),
            lhs: Pattern::parse(lhs).expect("rule pattern"),
            rhs: Pattern::parse(rhs).expect("rule pattern"),
        }
    }

    /// Instantiates each metavariable with a fresh variable and compares truth
    /// tables. Fresh variables are independent, so this checks the schema.
    pub fn is_sound(&self) -> bool {
        let mut binding = Binding::new();
        for name in self.lhs.metavariables().into_iter().chain(self.rhs.metavariables()) {
            binding.insert(name.clone(), Formula::var(alloc::format!("{name}_")));
        }
        match (self.lhs.instantiate(&binding), self.rhs.instantiate(&binding)) {
            (Some(l), Some(r)) => {
                formula::equivalent(&l, &r).unwrap_or(false) && r.variables().is_subset(&l.variables())
            }
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceCatalogue {
    rules: Vec<EquivalenceRule>,
}

impl EquivalenceCatalogue {
    /// Checks every rule; an unsound rule is a configuration error.
    pub fn new(rules: Vec<EquivalenceRule>) -> Result<Self, TransformError> {
        if let Some(bad) = rules.iter().find(|r| !r.is_sound()) {
            return Err(TransformError::UnsoundRule(bad.id.clone()));
        }
        Ok(EquivalenceCatalogue { rules })
    }

    pub fn standard() -> Self {
        let r = EquivalenceRule::new;
        let rules = alloc::vec![
            r("de-morgan-and", "de-morgan", "!($X & $Y)", "!$X | !$Y"),
            r("de-morgan-or", "de-morgan", "!($X | $Y)", "!$X & !$Y"),
            r("de-morgan-and-reverse", "de-morgan", "!$X | !$Y", "!($X & $Y)"),
            r("de-morgan-or-reverse", "de-morgan", "!$X & !$Y", "!($X | $Y)"),
            r("distribute-or-left", "distributivity", "$X | ($Y & $Z)", "($X | $Y) & ($X | $Z)"),
            r("distribute-or-right", "distributivity", "($X & $Y) | $Z", "($X | $Z) & ($Y | $Z)"),
            r("distribute-and-left", "distributivity", "$X & ($Y | $Z)", "($X & $Y) | ($X & $Z)"),
            r("distribute-and-right", "distributivity", "($X | $Y) & $Z", "($X & $Z) | ($Y & $Z)"),
            r("factor-or-left", "distributivity", "($X | $Y) & ($X | $Z)", "$X | ($Y & $Z)"),
            r("factor-and-left", "distributivity", "($X & $Y) | ($X & $Z)", "$X & ($Y | $Z)"),
            r("double-negation", "double-negation", "!!$X", "$X"),
            r("double-negation-introduce", "double-negation", "$X", "!!$X"),
            r("implication-elimination", "implication-elimination", "$X -> $Y", "!$X | $Y"),
            r("implication-introduction", "implication-elimination", "!$X | $Y", "$X -> $Y"),
            r("biconditional-elimination", "biconditional-elimination", "$X <-> $Y", "($X -> $Y) & ($Y -> $X)"),
            r("biconditional-introduction", "biconditional-elimination", "($X -> $Y) & ($Y -> $X)", "$X <-> $Y"),
            r("commutativity-and", "commutativity", "$X & $Y", "$Y & $X"),
            r("commutativity-or", "commutativity", "$X | $Y", "$Y | $X"),
            r("absorption-and", "absorption", "$X & ($X | $Y)", "$X"),
            r("absorption-or", "absorption", "$X | ($X & $Y)", "$X"),
            r("idempotence-and", "idempotence", "$X & $X", "$X"),
            r("idempotence-or", "idempotence", "$X | $X", "$X"),
        ];
        EquivalenceCatalogue::new(rules).expect("built-in rules are equivalences")
    }

    pub fn rules(&self) -> &[EquivalenceRule] {
        &self.rules
    }

    pub fn get(&self, id: &str) -> Option<&EquivalenceRule> {
        self.rules.iter().find(|r| r.id == id)
    }
}

impl Default for EquivalenceCatalogue {
    fn default() -> Self {
        EquivalenceCatalogue::standard()
    }
}

/// The original formula and every accepted step; the last one is current.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformationState {
    pub original: Formula,
    pub steps: Vec<Formula>,
    pub target: Target,
}

impl TransformationState {
    pub fn new(original: Formula, target: Target) -> Self {
        TransformationState { original: original.without_spans(), steps: Vec::new(), target }
    }

    pub fn latest(&self) -> &Formula {
        self.steps.last().unwrap_or(&self.original)
    }

    /// Accepts any formula equivalent to the original.
    pub fn submit_step(&mut self, candidate_text: &str) -> FeedbackReport {
        let candidate = match formula::parse(candidate_text) {
            Ok(f) => f,
            Err(err) => return syntax_report(&err),
        };
        match formula::equivalent(&candidate, &self.original) {
            Ok(true) => {
                self.steps.push(candidate.without_spans());
                accepted("transformation.step-accepted")
            }
            Ok(false) => inequivalence_report(&candidate, &self.original),
            Err(_) => FeedbackReport::new(Verdict::SemanticallyWrong)
                .with_item(FeedbackItem::new(0, ItemKind::VerdictMessage, "verdict.wrong"))
                .with_item(FeedbackItem::new(1, ItemKind::SyntaxMessage, "formula.too-many-variables")),
        }
    }

    /// Rewrites the current formula at `position` with a catalogue rule.
    pub fn apply_named_rule(
        &mut self,
        catalogue: &EquivalenceCatalogue,
        rule_id: &str,
        position: &[u8],
    ) -> Result<&Formula, TransformError> {
        let rule = catalogue.get(rule_id).ok_or_else(|| TransformError::UnknownRule(rule_id.to_string()))?;
        let not_applicable =
            || TransformError::RuleNotApplicable { rule: rule_id.to_string(), position: position.to_vec() };
        let latest = self.latest();
        let sub = latest.at(position).ok_or_else(not_applicable)?;
        let binding = rule.lhs.match_root(sub).ok_or_else(not_applicable)?;
        let replacement = rule.rhs.instantiate(&binding).ok_or_else(not_applicable)?;
        let next = latest.replace_at(position, replacement).ok_or_else(not_applicable)?;
        self.steps.push(next);
        Ok(self.latest())
    }

    /// Drops the last accepted step.
    pub fn undo(&mut self) -> Result<&Formula, TransformError> {
        self.steps.pop().ok_or(TransformError::NothingToUndo)?;
        Ok(self.latest())
    }

    pub fn check_complete(&self) -> (bool, FeedbackReport) {
        if self.target.is_reached_by(self.latest()) {
            (true, accepted("transformation.complete"))
        } else {
            let report = FeedbackReport::new(Verdict::SemanticallyWrong)
                .with_item(FeedbackItem::new(0, ItemKind::VerdictMessage, "verdict.wrong"))
                .with_item(
                    FeedbackItem::new(1, ItemKind::Info, "transformation.incomplete").param("target", &self.target),
                );
            (false, report)
        }
    }
}

fn accepted(key: &str) -> FeedbackReport {
    FeedbackReport::new(Verdict::Correct)
        .with_item(FeedbackItem::new(0, ItemKind::VerdictMessage, "verdict.correct"))
        .with_item(FeedbackItem::new(1, ItemKind::Info, key))
}

/// Structural equality after flattening and sorting every `&` and `|` chain.
pub fn equal_modulo_ac(f: &Formula, g: &Formula) -> bool {
    normalize_ac(f) == normalize_ac(g)
}

pub fn normalize_ac(f: &Formula) -> Formula {
    match f.node() {
        Node::Const(_) | Node::Var(_) => f.without_spans(),
        Node::Not(inner) => Formula::not(normalize_ac(inner)),
        Node::Binary(op @ (BinOp::And | BinOp::Or), ..) => {
            let mut parts = Vec::new();
            flatten(f, *op, &mut parts);
            let mut parts: Vec<Formula> = parts.into_iter().map(normalize_ac).collect();
            parts.sort();
            Formula::chain(*op, parts).expect("chain has at least two operands")
        }
        Node::Binary(op, l, r) => Formula::binary(*op, normalize_ac(l), normalize_ac(r)),
    }
}

fn flatten<'a>(f: &'a Formula, op: BinOp, out: &mut Vec<&'a Formula>) {
    match f.node() {
        Node::Binary(o, l, r) if *o == op => {
            flatten(l, op, out);
            flatten(r, op, out);
        }
        _ => out.push(f),
    }
}
