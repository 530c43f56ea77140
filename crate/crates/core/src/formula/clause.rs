use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::{is_cnf, BinOp, Formula, FormulaError, Node};

/// A variable or its negation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub variable: String,
    pub positive: bool,
}

impl Literal {
    pub fn positive(variable: impl Into<String>) -> Self {
        Literal { variable: variable.into(), positive: true }
    }

    pub fn negative(variable: impl Into<String>) -> Self {
        Literal { variable: variable.into(), positive: false }
    }

    pub fn negated(&self) -> Self {
        Literal { variable: self.variable.clone(), positive: !self.positive }
    }

    pub fn to_formula(&self) -> Formula {
        let atom = Formula::var(self.variable.clone());
        if self.positive {
            atom
        } else {
            Formula::not(atom)
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("!")?;
        }
        f.write_str(&self.variable)
    }
}

/// A set of literals, kept sorted by variable name then polarity.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Clause {
    literals: BTreeSet<Literal>,
}

impl Clause {
    pub fn empty() -> Self {
        Clause::default()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn contains(&self, literal: &Literal) -> bool {
        self.literals.contains(literal)
    }

    pub fn insert(&mut self, literal: Literal) -> bool {
        self.literals.insert(literal)
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.literals.iter()
    }

    /// Contains some literal together with its negation.
    pub fn is_tautology(&self) -> bool {
        self.literals.iter().any(|l| l.positive && self.literals.contains(&l.negated()))
    }

    pub fn subsumes(&self, other: &Clause) -> bool {
        self.literals.is_subset(&other.literals)
    }

    /// Variables occurring positively in one clause and negatively in the other.
    pub fn complementary_variables(&self, other: &Clause) -> Vec<String> {
        self.literals.iter().filter(|l| other.contains(&l.negated())).map(|l| l.variable.clone()).collect()
    }

    /// Resolvent on `pivot`, or `None` when the clauses do not clash on it.
    pub fn resolve(&self, other: &Clause, pivot: &str) -> Option<Clause> {
        let pos = Literal::positive(pivot);
        let neg = Literal::negative(pivot);
        let (with_pos, with_neg) = if self.contains(&pos) && other.contains(&neg) {
            (self, other)
        } else if self.contains(&neg) && other.contains(&pos) {
            (other, self)
        } else {
            return None;
        };
        let mut literals: BTreeSet<Literal> = with_pos.literals.iter().filter(|l| **l != pos).cloned().collect();
        literals.extend(with_neg.literals.iter().filter(|l| **l != neg).cloned());
        Some(Clause { literals })
    }

    /// Disjunction of the literals; the empty clause is `false`.
    pub fn to_formula(&self) -> Formula {
        Formula::chain(BinOp::Or, self.literals.iter().map(Literal::to_formula))
            .unwrap_or_else(|| Formula::constant(false))
    }
}

impl FromIterator<Literal> for Clause {
    fn from_iter<T: IntoIterator<Item = Literal>>(iter: T) -> Self {
        Clause { literals: iter.into_iter().collect() }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, lit) in self.literals.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{lit}")?;
        }
        f.write_str("}")
    }
}

/// Distinct clauses in first-occurrence order. Equality is set equality.
#[derive(Debug, Clone, Default, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<Clause>", into = "Vec<Clause>")]
pub struct ClauseSet {
    clauses: Vec<Clause>,
}

impl ClauseSet {
    pub fn new() -> Self {
        ClauseSet::default()
    }

    pub fn insert(&mut self, clause: Clause) -> bool {
        if self.clauses.contains(&clause) {
            false
        } else {
            self.clauses.push(clause);
            true
        }
    }

    pub fn contains(&self, clause: &Clause) -> bool {
        self.clauses.contains(clause)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter()
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn variables(&self) -> super::VariableSet {
        let mut vars = super::VariableSet::new();
        for clause in &self.clauses {
            for lit in clause.literals() {
                vars.insert(lit.variable.clone());
            }
        }
        vars
    }

    /// Conjunction of the clauses; the empty set is `true`.
    pub fn to_formula(&self) -> Formula {
        Formula::chain(BinOp::And, self.clauses.iter().map(Clause::to_formula))
            .unwrap_or_else(|| Formula::constant(true))
    }
}

impl PartialEq for ClauseSet {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.clauses.iter().all(|c| other.contains(c))
    }
}

impl From<Vec<Clause>> for ClauseSet {
    fn from(clauses: Vec<Clause>) -> Self {
        clauses.into_iter().collect()
    }
}

impl From<ClauseSet> for Vec<Clause> {
    fn from(set: ClauseSet) -> Self {
        set.clauses
    }
}

impl FromIterator<Clause> for ClauseSet {
    fn from_iter<T: IntoIterator<Item = Clause>>(iter: T) -> Self {
        let mut set = ClauseSet::new();
        for clause in iter {
            set.insert(clause);
        }
        set
    }
}

/// One clause per conjunct of a CNF formula. A conjunct containing `true` is
/// dropped; `false` contributes no literal.
pub fn clauses(f: &Formula) -> Result<ClauseSet, FormulaError> {
    if !is_cnf(f) {
        return Err(FormulaError::NotInCnf);
    }
    let mut set = ClauseSet::new();
    let mut conjuncts = Vec::new();
    split(f, BinOp::And, &mut conjuncts);
    'conjuncts: for conjunct in conjuncts {
        let mut parts = Vec::new();
        split(conjunct, BinOp::Or, &mut parts);
        let mut clause = Clause::empty();
        for part in parts {
            match part.node() {
                Node::Const(true) => continue 'conjuncts,
                Node::Const(false) => {}
                Node::Var(name) => {
                    clause.insert(Literal::positive(name.clone()));
                }
                Node::Not(inner) => {
                    let name = inner.as_var().expect("literal in CNF");
                    clause.insert(Literal::negative(name));
                }
                Node::Binary(..) => unreachable!("checked by is_cnf"),
            }
        }
        set.insert(clause);
    }
    Ok(set)
}

fn split<'a>(f: &'a Formula, op: BinOp, out: &mut Vec<&'a Formula>) {
    match f.node() {
        Node::Binary(o, l, r) if *o == op => {
            split(l, op, out);
            split(r, op, out);
        }
        _ => out.push(f),
    }
}
