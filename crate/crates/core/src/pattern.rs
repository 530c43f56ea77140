//! Formula patterns with metavariables.
//!
//! A [`Pattern`] is a formula whose leaves may also be metavariables written
//! `$X`. A metavariable matches any subformula; a metavariable used twice
//! requires both occurrences to bind structurally equal subformulas.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::formula::{self, BinOp, Formula, Node, Path, Span, SyntaxError};

/// Metavariable name (without the `$`) to bound subformula.
pub type Binding = BTreeMap<String, Formula>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Pattern {
    Meta(String),
    Const(bool),
    Var(String),
    Not(Box<Pattern>),
    Binary(BinOp, Box<Pattern>, Box<Pattern>),
}

impl Pattern {
    /// Parses the formula grammar extended with `$Name` metavariables.
    pub fn parse(text: &str) -> Result<Pattern, SyntaxError> {
        formula::parse_with_metavariables(text).map(|f| Pattern::from_formula(&f))
    }

    fn from_formula(f: &Formula) -> Pattern {
        match f.node() {
            Node::Const(v) => Pattern::Const(*v),
            Node::Var(name) => match name.strip_prefix('$') {
                Some(meta) => Pattern::Meta(String::from(meta)),
                None => Pattern::Var(name.clone()),
            },
            Node::Not(inner) => Pattern::Not(Box::new(Pattern::from_formula(inner))),
            Node::Binary(op, l, r) => {
                Pattern::Binary(*op, Box::new(Pattern::from_formula(l)), Box::new(Pattern::from_formula(r)))
            }
        }
    }

    pub fn meta(name: impl Into<String>) -> Pattern {
        Pattern::Meta(name.into())
    }

    /// Metavariable names in first-occurrence order.
    pub fn metavariables(&self) -> Vec<String> {
        fn walk(p: &Pattern, out: &mut Vec<String>) {
            match p {
                Pattern::Meta(name) => {
                    if !out.contains(name) {
                        out.push(name.clone());
                    }
                }
                Pattern::Const(_) | Pattern::Var(_) => {}
                Pattern::Not(inner) => walk(inner, out),
                Pattern::Binary(_, l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    /// Matches at the root of `f`.
    pub fn match_root(&self, f: &Formula) -> Option<Binding> {
        let mut binding = Binding::new();
        self.unify(f, &mut binding).then_some(binding)
    }

    fn unify(&self, f: &Formula, binding: &mut Binding) -> bool {
        match (self, f.node()) {
            (Pattern::Meta(name), _) => match binding.get(name) {
                Some(bound) => bound == f,
                None => {
                    binding.insert(name.clone(), f.without_spans());
                    true
                }
            },
            (Pattern::Const(a), Node::Const(b)) => a == b,
            (Pattern::Var(a), Node::Var(b)) => a == b,
            (Pattern::Not(p), Node::Not(inner)) => p.unify(inner, binding),
            (Pattern::Binary(op, pl, pr), Node::Binary(fop, fl, fr)) => {
                op == fop && pl.unify(fl, binding) && pr.unify(fr, binding)
            }
            _ => false,
        }
    }

    /// Substitutes the binding; `None` if some metavariable is unbound.
    pub fn instantiate(&self, binding: &Binding) -> Option<Formula> {
        Some(match self {
            Pattern::Meta(name) => binding.get(name)?.clone(),
            Pattern::Const(v) => Formula::constant(*v),
            Pattern::Var(name) => Formula::var(name.clone()),
            Pattern::Not(inner) => Formula::not(inner.instantiate(binding)?),
            Pattern::Binary(op, l, r) => Formula::binary(*op, l.instantiate(binding)?, r.instantiate(binding)?),
        })
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Render through the formula printer with `$` names as leaves.
        fn to_formula(p: &Pattern) -> Formula {
            match p {
                Pattern::Meta(name) => Formula::var(alloc::format!("${name}")),
                Pattern::Const(v) => Formula::constant(*v),
                Pattern::Var(name) => Formula::var(name.clone()),
                Pattern::Not(inner) => Formula::not(to_formula(inner)),
                Pattern::Binary(op, l, r) => Formula::binary(*op, to_formula(l), to_formula(r)),
            }
        }
        write!(f, "{}", to_formula(self))
    }
}

impl Serialize for Pattern {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Pattern {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Pattern::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// A place in a formula where a pattern unifies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Match {
    pub position: Path,
    pub binding: Binding,
    /// Source span of the matched subformula, if it came from parsed text.
    pub span: Option<Span>,
}

/// Every position of `f` where `p` unifies, leftmost-outermost.
pub fn match_all(p: &Pattern, f: &Formula) -> Vec<Match> {
    f.positions()
        .into_iter()
        .filter_map(|(position, sub)| p.match_root(sub).map(|binding| Match { position, binding, span: sub.span() }))
        .collect()
}
