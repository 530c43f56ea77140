//! Reversion rules: rewrites that undo a typical modelling mistake.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::formula::{BinOp, Formula};
use crate::pattern::{Match, Pattern};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleCategory {
    ImplicationSwap,
    OperatorSubstitution,
    Negation,
    Completion,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuleError {
    #[error("rule `{rule}` does not match at position {position:?}")]
    InvalidMatch { rule: String, position: Vec<u8> },
    #[error("rule `{rule}` uses metavariable `${name}` on its right-hand side without binding it")]
    UnboundMetavariable { rule: String, name: String },
    #[error("duplicate rule id `{0}`")]
    DuplicateId(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReversionRule {
    pub id: String,
    pub lhs: Pattern,
    pub rhs: Pattern,
    /// Message-catalogue stem; texts live under `<key>.general` and `<key>.precise`.
    pub misconception_key: String,
    pub category: RuleCategory,
    /// Completion rules bind this metavariable to a subformula of the solution
    /// during the search instead of through the left-hand side.
    pub placeholder: Option<String>,
}

impl ReversionRule {
    pub fn new(
        id: impl Into<String>,
        lhs: &str,
        rhs: &str,
        misconception_key: impl Into<String>,
        category: RuleCategory,
    ) -> Result<Self, RuleError> {
        Self::build(id.into(), lhs, rhs, misconception_key.into(), category, None)
    }

    pub fn completion(
        id: impl Into<String>,
        lhs: &str,
        rhs: &str,
        placeholder: &str,
        misconception_key: impl Into<String>,
    ) -> Result<Self, RuleError> {
        Self::build(id.into(), lhs, rhs, misconception_key.into(), RuleCategory::Completion, Some(placeholder.into()))
    }

    fn build(
        id: String,
        lhs: &str,
        rhs: &str,
        misconception_key: String,
        category: RuleCategory,
        placeholder: Option<String>,
    ) -> Result<Self, RuleError> {
        let lhs = Pattern::parse(lhs).expect("rule pattern");
        let rhs = Pattern::parse(rhs).expect("rule pattern");
        let rule = ReversionRule { id, lhs, rhs, misconception_key, category, placeholder };
        rule.validate()?;
        Ok(rule)
    }

    /// Every right-hand metavariable is bound by the left side or is the placeholder.
    pub fn validate(&self) -> Result<(), RuleError> {
        let bound = self.lhs.metavariables();
        for name in self.rhs.metavariables() {
            if !bound.contains(&name) && self.placeholder.as_ref() != Some(&name) {
                return Err(RuleError::UnboundMetavariable { rule: self.id.clone(), name });
            }
        }
        Ok(())
    }
}

/// Rewrites `f` at `m.position` with the rule's right-hand side under `m.binding`.
pub fn apply_rule(rule: &ReversionRule, f: &Formula, m: &Match) -> Result<Formula, RuleError> {
    let invalid = || RuleError::InvalidMatch { rule: rule.id.clone(), position: m.position.clone() };
    let sub = f.at(&m.position).ok_or_else(invalid)?;
    let lhs_binding = rule.lhs.match_root(sub).ok_or_else(invalid)?;
    if lhs_binding.iter().any(|(k, v)| m.binding.get(k) != Some(v)) {
        return Err(invalid());
    }
    let replacement = rule.rhs.instantiate(&m.binding).ok_or_else(invalid)?;
    f.replace_at(&m.position, replacement).ok_or_else(invalid)
}

/// Ordered, immutable list of reversion rules. Order is the search's tie-breaker.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleCatalogue {
    rules: Vec<ReversionRule>,
}

impl RuleCatalogue {
    pub fn new(rules: Vec<ReversionRule>) -> Result<Self, RuleError> {
        for (i, rule) in rules.iter().enumerate() {
            rule.validate()?;
            if rules[..i].iter().any(|r| r.id == rule.id) {
                return Err(RuleError::DuplicateId(rule.id.clone()));
            }
        }
        Ok(RuleCatalogue { rules })
    }

    /// The built-in catalogue, in tie-breaking order: implication swap, operator
    /// substitutions, negation insertion and removal, completion.
    pub fn standard() -> Self {
        let mut rules = Vec::new();
        rules.push(
            ReversionRule::new(
                "implication-swap",
                "$X -> $Y",
                "$Y -> $X",
                "implication-swap",
                RuleCategory::ImplicationSwap,
            )
            .unwrap(),
        );
        for from in BinOp::ALL {
            for to in BinOp::ALL {
                if from == to {
                    continue;
                }
                let id = format!("{}-to-{}", from.name(), to.name());
                let key = if (from, to) == (BinOp::Or, BinOp::Xor) { "either-or" } else { "wrong-operator" };
                let lhs = Pattern::Binary(from, Pattern::meta("X").into(), Pattern::meta("Y").into());
                let rhs = Pattern::Binary(to, Pattern::meta("X").into(), Pattern::meta("Y").into());
                rules.push(ReversionRule {
                    id,
                    lhs,
                    rhs,
                    misconception_key: key.to_string(),
                    category: RuleCategory::OperatorSubstitution,
                    placeholder: None,
                });
            }
        }
        rules.push(
            ReversionRule::new("negation-insert", "$X", "!$X", "missing-negation", RuleCategory::Negation).unwrap(),
        );
        rules.push(
            ReversionRule::new("negation-remove", "!$X", "$X", "superfluous-negation", RuleCategory::Negation).unwrap(),
        );
        rules.push(ReversionRule::completion("complete-and", "$X", "$X & $S", "S", "missing-part").unwrap());
        rules.push(ReversionRule::completion("complete-or", "$X", "$X | $S", "S", "missing-part").unwrap());
        RuleCatalogue { rules }
    }

    pub fn rules(&self) -> &[ReversionRule] {
        &self.rules
    }

    pub fn get(&self, id: &str) -> Option<&ReversionRule> {
        self.rules.iter().find(|r| r.id == id)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

impl Default for RuleCatalogue {
    fn default() -> Self {
        RuleCatalogue::standard()
    }
}
