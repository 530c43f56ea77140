//! Propositional formulas.
//!
//! A [`Formula`] is an immutable tree. Every node optionally carries the
//! [`Span`] of source text it was parsed from; nodes built programmatically or
//! produced by rewriting have no span. Equality, ordering and hashing ignore
//! spans, so two formulas compare equal exactly when they are structurally
//! identical.

mod clause;
mod normal;
mod parse;
mod render;
mod semantics;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::hash::{Hash, Hasher};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use clause::{clauses, Clause, ClauseSet, Literal};
pub use normal::{is_cnf, is_dnf, is_nnf, to_cnf, to_dnf, to_nnf};
pub(crate) use parse::parse_with_metavariables;
pub use parse::{is_identifier, parse, parse_with, ParsedFormula, SyntaxError, SyntaxErrorKind};
pub use render::{render, Style};
pub use semantics::{
    distinguishing_assignment, equivalent, evaluate, satisfiable, Assignment, TruthTable, VariableSet,
    MAX_EXHAUSTIVE_VARIABLES,
};

/// Errors raised by semantic operations on formulas.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormulaError {
    #[error("variable `{0}` is not declared in the assignment")]
    UndeclaredVariable(String),
    #[error("{count} variables exceed the exhaustive-check limit of {limit}")]
    TooManyVariables { count: usize, limit: usize },
    #[error("formula is not in conjunctive normal form")]
    NotInCnf,
}

/// Half-open range of character offsets into the parsed source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// Binary connectives, listed loosest-binding last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinOp {
    And,
    Or,
    Xor,
    Implies,
    Iff,
}

impl BinOp {
    pub const ALL: [BinOp; 5] = [BinOp::And, BinOp::Or, BinOp::Implies, BinOp::Iff, BinOp::Xor];

    /// Binding strength; higher binds tighter. Negation sits above all of these.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::And => 5,
            BinOp::Or => 4,
            BinOp::Xor => 3,
            BinOp::Implies => 2,
            BinOp::Iff => 1,
        }
    }

    /// Stable lowercase name used in rule ids and message parameters.
    pub fn name(self) -> &'static str {
        match self {
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::Xor => "xor",
            BinOp::Implies => "implies",
            BinOp::Iff => "iff",
        }
    }

    pub fn eval(self, l: bool, r: bool) -> bool {
        match self {
            BinOp::And => l && r,
            BinOp::Or => l || r,
            BinOp::Xor => l != r,
            BinOp::Implies => !l || r,
            BinOp::Iff => l == r,
        }
    }

    pub fn is_commutative(self) -> bool {
        !matches!(self, BinOp::Implies)
    }
}

/// Position of a subformula: the child indices taken from the root.
/// Negation has child 0; binary connectives have children 0 (left) and 1 (right).
pub type Path = Vec<u8>;

#[derive(Debug, Clone)]
pub enum Node {
    Const(bool),
    Var(String),
    Not(Box<Formula>),
    Binary(BinOp, Box<Formula>, Box<Formula>),
}

#[derive(Debug, Clone)]
pub struct Formula {
    node: Node,
    span: Option<Span>,
}

impl Formula {
    pub fn new(node: Node) -> Self {
        Formula { node, span: None }
    }

    pub fn with_span(mut self, span: Span) -> Self {
        self.span = Some(span);
        self
    }

    pub fn constant(value: bool) -> Self {
        Formula::new(Node::Const(value))
    }

    pub fn var(name: impl Into<String>) -> Self {
        Formula::new(Node::Var(name.into()))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(inner: Formula) -> Self {
        Formula::new(Node::Not(Box::new(inner)))
    }

    pub fn binary(op: BinOp, left: Formula, right: Formula) -> Self {
        Formula::new(Node::Binary(op, Box::new(left), Box::new(right)))
    }

    pub fn and(left: Formula, right: Formula) -> Self {
        Formula::binary(BinOp::And, left, right)
    }

    pub fn or(left: Formula, right: Formula) -> Self {
        Formula::binary(BinOp::Or, left, right)
    }

    pub fn implies(left: Formula, right: Formula) -> Self {
        Formula::binary(BinOp::Implies, left, right)
    }

    pub fn iff(left: Formula, right: Formula) -> Self {
        Formula::binary(BinOp::Iff, left, right)
    }

    pub fn xor(left: Formula, right: Formula) -> Self {
        Formula::binary(BinOp::Xor, left, right)
    }

    /// Right-nested chain `f1 op (f2 op (... fn))`; `None` for an empty iterator.
    pub fn chain(op: BinOp, parts: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        let mut parts: Vec<Formula> = parts.into_iter().collect();
        let mut acc = parts.pop()?;
        while let Some(next) = parts.pop() {
            acc = Formula::binary(op, next, acc);
        }
        Some(acc)
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn into_node(self) -> Node {
        self.node
    }

    pub fn span(&self) -> Option<Span> {
        self.span
    }

    pub fn children(&self) -> impl Iterator<Item = &Formula> {
        let (a, b) = match &self.node {
            Node::Const(_) | Node::Var(_) => (None, None),
            Node::Not(inner) => (Some(&**inner), None),
            Node::Binary(_, l, r) => (Some(&**l), Some(&**r)),
        };
        a.into_iter().chain(b)
    }

    pub fn child(&self, index: u8) -> Option<&Formula> {
        self.children().nth(index as usize)
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + self.children().map(Formula::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().map(Formula::depth).max().unwrap_or(0)
    }

    pub fn as_var(&self) -> Option<&str> {
        match &self.node {
            Node::Var(name) => Some(name),
            _ => None,
        }
    }

    /// Variables in first-occurrence order.
    pub fn variables(&self) -> VariableSet {
        let mut set = VariableSet::new();
        self.visit(&mut |f| {
            if let Node::Var(name) = &f.node {
                set.insert(name.clone());
            }
        });
        set
    }

    /// Preorder traversal (root first, then left to right).
    pub fn visit<'a>(&'a self, visitor: &mut impl FnMut(&'a Formula)) {
        visitor(self);
        for child in self.children() {
            child.visit(visitor);
        }
    }

    /// All positions together with their subformulas, in leftmost-outermost order.
    pub fn positions(&self) -> Vec<(Path, &Formula)> {
        fn walk<'a>(f: &'a Formula, path: &mut Path, out: &mut Vec<(Path, &'a Formula)>) {
            out.push((path.clone(), f));
            for (i, child) in f.children().enumerate() {
                path.push(i as u8);
                walk(child, path, out);
                path.pop();
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn at(&self, path: &[u8]) -> Option<&Formula> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.child(i)?.at(rest),
        }
    }

    /// The spans of the node at `path` and of each ancestor, innermost first.
    pub fn spans_towards_root(&self, path: &[u8]) -> Vec<Option<Span>> {
        let mut spans = Vec::with_capacity(path.len() + 1);
        let mut node = Some(self);
        spans.push(self.span);
        for &i in path {
            node = node.and_then(|n| n.child(i));
            spans.push(node.and_then(|n| n.span));
        }
        spans.reverse();
        spans
    }

    /// Returns a copy with the node at `path` replaced. Ancestors of the replaced
    /// node lose their span since their text no longer matches.
    pub fn replace_at(&self, path: &[u8], replacement: Formula) -> Option<Formula> {
        let Some((&i, rest)) = path.split_first() else {
            return Some(replacement);
        };
        let node = match &self.node {
            Node::Not(inner) if i == 0 => Node::Not(Box::new(inner.replace_at(rest, replacement)?)),
            Node::Binary(op, l, r) if i == 0 => {
                Node::Binary(*op, Box::new(l.replace_at(rest, replacement)?), r.clone())
            }
            Node::Binary(op, l, r) if i == 1 => {
                Node::Binary(*op, l.clone(), Box::new(r.replace_at(rest, replacement)?))
            }
            _ => return None,
        };
        Some(Formula::new(node))
    }

    /// Copy with every span removed.
    pub fn without_spans(&self) -> Formula {
        let node = match &self.node {
            Node::Const(v) => Node::Const(*v),
            Node::Var(name) => Node::Var(name.clone()),
            Node::Not(inner) => Node::Not(Box::new(inner.without_spans())),
            Node::Binary(op, l, r) => Node::Binary(*op, Box::new(l.without_spans()), Box::new(r.without_spans())),
        };
        Formula::new(node)
    }

    /// True if `needle` occurs as a subformula (structurally).
    pub fn contains(&self, needle: &Formula) -> bool {
        self == needle || self.children().any(|c| c.contains(needle))
    }

    /// Distinct subformulas in preorder of first occurrence.
    pub fn subformulas(&self) -> Vec<&Formula> {
        let mut out: Vec<&Formula> = Vec::new();
        self.visit(&mut |f| {
            if !out.contains(&f) {
                out.push(f);
            }
        });
        out
    }

    fn discriminant(&self) -> u8 {
        match self.node {
            Node::Const(_) => 0,
            Node::Var(_) => 1,
            Node::Not(_) => 2,
            Node::Binary(..) => 3,
        }
    }
}

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        match (&self.node, &other.node) {
            (Node::Const(a), Node::Const(b)) => a == b,
            (Node::Var(a), Node::Var(b)) => a == b,
            (Node::Not(a), Node::Not(b)) => a == b,
            (Node::Binary(o1, l1, r1), Node::Binary(o2, l2, r2)) => o1 == o2 && l1 == l2 && r1 == r2,
            _ => false,
        }
    }
}

impl Eq for Formula {}

impl Ord for Formula {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.node, &other.node) {
            (Node::Const(a), Node::Const(b)) => a.cmp(b),
            (Node::Var(a), Node::Var(b)) => a.cmp(b),
            (Node::Not(a), Node::Not(b)) => a.cmp(b),
            (Node::Binary(o1, l1, r1), Node::Binary(o2, l2, r2)) => {
                o1.cmp(o2).then_with(|| l1.cmp(l2)).then_with(|| r1.cmp(r2))
            }
            _ => self.discriminant().cmp(&other.discriminant()),
        }
    }
}

impl PartialOrd for Formula {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Hash for Formula {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.discriminant().hash(state);
        match &self.node {
            Node::Const(v) => v.hash(state),
            Node::Var(name) => name.hash(state),
            Node::Not(inner) => inner.hash(state),
            Node::Binary(op, l, r) => {
                op.hash(state);
                l.hash(state);
                r.hash(state);
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self, Style::Ascii))
    }
}

impl core::str::FromStr for Formula {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

// Formulas travel as ASCII text; spans are not part of the wire form.
impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&render(self, Style::Ascii))
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse(&text).map(|f| f.without_spans()).map_err(serde::de::Error::custom)
    }
}
