//! Truth-functional semantics.
//!
//! [`evaluate`] walks the tree against an explicit [`Assignment`]. The
//! exhaustive checks ([`equivalent`], [`satisfiable`],
//! [`distinguishing_assignment`]) instead evaluate whole [`TruthTable`]s as
//! bitsets. Row `r` of a table assigns variable `i` of its [`VariableSet`] the
//! value of bit `i` of `r`, so rows run through ascending binary counters with
//! the first declared variable as the least significant bit.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Not;

use serde::{Deserialize, Serialize};

use super::{BinOp, Formula, FormulaError, Node};

/// Upper bound on variables for truth-table based checks (65 536 rows).
pub const MAX_EXHAUSTIVE_VARIABLES: usize = 16;

/// Ordered set of variable names without duplicates.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct VariableSet {
    names: Vec<String>,
}

impl VariableSet {
    pub fn new() -> Self {
        VariableSet::default()
    }

    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = VariableSet::new();
        for name in names {
            set.insert(name.into());
        }
        set
    }

    /// Appends `name` unless already present; returns whether it was added.
    pub fn insert(&mut self, name: String) -> bool {
        if self.contains(&name) {
            false
        } else {
            self.names.push(name);
            true
        }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.names.iter().any(|n| n == name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// `self` followed by the names of `other` not already in `self`.
    pub fn union(&self, other: &VariableSet) -> VariableSet {
        let mut out = self.clone();
        for name in other.iter() {
            out.insert(String::from(name));
        }
        out
    }

    pub fn is_subset(&self, other: &VariableSet) -> bool {
        self.iter().all(|n| other.contains(n))
    }

    /// Order-insensitive comparison.
    pub fn same_members(&self, other: &VariableSet) -> bool {
        self.len() == other.len() && self.is_subset(other)
    }
}

impl From<Vec<String>> for VariableSet {
    fn from(names: Vec<String>) -> Self {
        VariableSet::from_names(names)
    }
}

impl From<VariableSet> for Vec<String> {
    fn from(set: VariableSet) -> Self {
        set.names
    }
}

impl<'a> FromIterator<&'a str> for VariableSet {
    fn from_iter<T: IntoIterator<Item = &'a str>>(iter: T) -> Self {
        VariableSet::from_names(iter)
    }
}

/// One variable's value inside an [`Assignment`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Binding {
    pub variable: String,
    pub value: bool,
}

/// Total map from a declared variable set to truth values, in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment {
    bindings: Vec<Binding>,
}

impl Assignment {
    pub fn new<I, S>(values: I) -> Self
    where
        I: IntoIterator<Item = (S, bool)>,
        S: Into<String>,
    {
        let mut bindings: Vec<Binding> = Vec::new();
        for (name, value) in values {
            let name = name.into();
            match bindings.iter_mut().find(|b| b.variable == name) {
                Some(existing) => existing.value = value,
                None => bindings.push(Binding { variable: name, value }),
            }
        }
        Assignment { bindings }
    }

    /// The assignment for truth-table row `row` over `vars`.
    pub fn from_row(vars: &VariableSet, row: usize) -> Self {
        Assignment {
            bindings: vars
                .iter()
                .enumerate()
                .map(|(i, name)| Binding { variable: String::from(name), value: (row >> i) & 1 == 1 })
                .collect(),
        }
    }

    pub fn get(&self, name: &str) -> Result<bool, FormulaError> {
        self.bindings
            .iter()
            .find(|b| b.variable == name)
            .map(|b| b.value)
            .ok_or_else(|| FormulaError::UndeclaredVariable(String::from(name)))
    }

    pub fn variables(&self) -> VariableSet {
        VariableSet::from_names(self.bindings.iter().map(|b| b.variable.as_str()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, bool)> {
        self.bindings.iter().map(|b| (b.variable.as_str(), b.value))
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, b) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}: {}", b.variable, u8::from(b.value))?;
        }
        f.write_str("}")
    }
}

pub fn evaluate(f: &Formula, a: &Assignment) -> Result<bool, FormulaError> {
    Ok(match f.node() {
        Node::Const(v) => *v,
        Node::Var(name) => a.get(name)?,
        Node::Not(inner) => !evaluate(inner, a)?,
        Node::Binary(op, l, r) => op.eval(evaluate(l, a)?, evaluate(r, a)?),
    })
}

/// Bitset of a formula's value on every row over a fixed variable set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruthTable {
    vars: usize,
    words: Vec<u64>,
}

const COLUMN_PATTERNS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

impl TruthTable {
    fn word_count(vars: usize) -> usize {
        if vars <= 6 {
            1
        } else {
            1 << (vars - 6)
        }
    }

    fn last_mask(vars: usize) -> u64 {
        if vars >= 6 {
            u64::MAX
        } else {
            (1u64 << (1 << vars)) - 1
        }
    }

    pub fn constant(vars: usize, value: bool) -> Self {
        let fill = if value { Self::last_mask(vars) } else { 0 };
        TruthTable { vars, words: vec![fill; Self::word_count(vars)] }
    }

    /// Column of variable `index`.
    pub fn column(vars: usize, index: usize) -> Self {
        let words = (0..Self::word_count(vars))
            .map(|w| {
                if index < 6 {
                    COLUMN_PATTERNS[index] & Self::last_mask(vars)
                } else if (w >> (index - 6)) & 1 == 1 {
                    u64::MAX
                } else {
                    0
                }
            })
            .collect();
        TruthTable { vars, words }
    }

    /// Table of `f` over `vars`.
    pub fn of(f: &Formula, vars: &VariableSet) -> Result<Self, FormulaError> {
        check_limit(vars.len())?;
        Self::build(f, vars)
    }

    fn build(f: &Formula, vars: &VariableSet) -> Result<Self, FormulaError> {
        Ok(match f.node() {
            Node::Const(v) => Self::constant(vars.len(), *v),
            Node::Var(name) => {
                let index = vars.index_of(name).ok_or_else(|| FormulaError::UndeclaredVariable(name.clone()))?;
                Self::column(vars.len(), index)
            }
            Node::Not(inner) => Self::build(inner, vars)?.not(),
            Node::Binary(op, l, r) => Self::build(l, vars)?.combine(*op, &Self::build(r, vars)?),
        })
    }

    pub fn combine(&self, op: BinOp, other: &TruthTable) -> Self {
        debug_assert_eq!(self.vars, other.vars);
        let mask = Self::last_mask(self.vars);
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&l, &r)| {
                let w = match op {
                    BinOp::And => l & r,
                    BinOp::Or => l | r,
                    BinOp::Xor => l ^ r,
                    BinOp::Implies => !l | r,
                    BinOp::Iff => !(l ^ r),
                };
                w & mask
            })
            .collect();
        TruthTable { vars: self.vars, words }
    }

    /// True iff the tables are equal on every row set in `mask`.
    pub fn agrees_on(&self, other: &TruthTable, mask: &TruthTable) -> bool {
        self.words.iter().zip(&other.words).zip(&mask.words).all(|((&a, &b), &m)| (a ^ b) & m == 0)
    }

    pub fn rows(&self) -> usize {
        1 << self.vars
    }

    pub fn get(&self, row: usize) -> bool {
        (self.words[row / 64] >> (row % 64)) & 1 == 1
    }

    pub fn any(&self) -> bool {
        self.words.iter().any(|&w| w != 0)
    }

    pub fn count_true(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// First row (in enumeration order) where the two tables differ.
    pub fn first_difference(&self, other: &TruthTable) -> Option<usize> {
        self.words.iter().zip(&other.words).enumerate().find_map(|(i, (&a, &b))| {
            let diff = a ^ b;
            (diff != 0).then(|| i * 64 + diff.trailing_zeros() as usize)
        })
    }
}

fn check_limit(count: usize) -> Result<(), FormulaError> {
    if count > MAX_EXHAUSTIVE_VARIABLES {
        Err(FormulaError::TooManyVariables { count, limit: MAX_EXHAUSTIVE_VARIABLES })
    } else {
        Ok(())
    }
}

fn joint_tables(f: &Formula, g: &Formula) -> Result<(VariableSet, TruthTable, TruthTable), FormulaError> {
    let vars = f.variables().union(&g.variables());
    let tf = TruthTable::of(f, &vars)?;
    let tg = TruthTable::of(g, &vars)?;
    Ok((vars, tf, tg))
}

/// True iff `f` and `g` agree on every assignment over their joint variables.
pub fn equivalent(f: &Formula, g: &Formula) -> Result<bool, FormulaError> {
    let (_, tf, tg) = joint_tables(f, g)?;
    Ok(tf == tg)
}

/// The first assignment (variables of `f`, then new ones of `g`; all-false row
/// first) on which the formulas differ, or `None` if they are equivalent.
pub fn distinguishing_assignment(f: &Formula, g: &Formula) -> Result<Option<Assignment>, FormulaError> {
    let (vars, tf, tg) = joint_tables(f, g)?;
    Ok(tf.first_difference(&tg).map(|row| Assignment::from_row(&vars, row)))
}

pub fn satisfiable(f: &Formula) -> Result<bool, FormulaError> {
    Ok(TruthTable::of(f, &f.variables())?.any())
}

impl core::ops::Not for TruthTable {
    type Output = TruthTable;

    fn not(mut self) -> Self {
        let mask = Self::last_mask(self.vars);
        for w in &mut self.words {
            *w = !*w & mask;
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn p(text: &str) -> Formula {
        parse(text).unwrap()
    }

    /// Row-by-row oracle over `evaluate`.
    fn brute_force_rows(f: &Formula, vars: &VariableSet) -> Vec<bool> {
        (0..1usize << vars.len()).map(|row| evaluate(f, &Assignment::from_row(vars, row)).unwrap()).collect()
    }

    #[test]
    fn evaluate_examples() {
        let f = p("D -> B");
        assert!(!evaluate(&f, &Assignment::new([("D", true), ("B", false)])).unwrap());
        assert!(evaluate(&f, &Assignment::new([("D", false), ("B", false)])).unwrap());
        let g = p("!(B & D & U)");
        assert!(!evaluate(&g, &Assignment::new([("B", true), ("D", true), ("U", true)])).unwrap());
        assert!(evaluate(&p("A xor B"), &Assignment::new([("A", true), ("B", false)])).unwrap());
    }

    #[test]
    fn evaluate_rejects_undeclared() {
        let err = evaluate(&p("D -> B"), &Assignment::new([("D", true)])).unwrap_err();
        assert_eq!(err, FormulaError::UndeclaredVariable("B".into()));
    }

    #[test]
    fn truth_tables_match_brute_force() {
        let samples = ["A & !B | C", "(A <-> B) xor (C -> D)", "true", "P1 -> P2 -> P3 -> P4 -> P5 -> P6 -> P7 -> P8"];
        for text in samples {
            let f = p(text);
            let vars = f.variables();
            let table = TruthTable::of(&f, &vars).unwrap();
            let rows = brute_force_rows(&f, &vars);
            assert_eq!((0..table.rows()).map(|r| table.get(r)).collect::<Vec<_>>(), rows, "{text}");
        }
    }

    #[test]
    fn equivalence_examples() {
        assert!(equivalent(&p("!(B & D & U)"), &p("!B | !D | !U")).unwrap());
        assert!(!equivalent(&p("D -> B"), &p("B -> D")).unwrap());
        let f = p("A xor (B -> C)");
        assert!(equivalent(&f, &f).unwrap());
    }

    #[test]
    fn distinguishing_assignment_examples() {
        let witness = distinguishing_assignment(&p("D -> B"), &p("B -> D")).unwrap().unwrap();
        assert_eq!(witness, Assignment::new([("D", true), ("B", false)]));
        assert_eq!(distinguishing_assignment(&p("A & B"), &p("A & B")).unwrap(), None);
        assert_eq!(distinguishing_assignment(&p("A"), &p("!A")).unwrap(), Some(Assignment::new([("A", false)])));
    }

    #[test]
    fn satisfiability_examples() {
        assert!(!satisfiable(&p("(D -> B) & (B -> (D & U)) & !(B & D & U) & D")).unwrap());
        assert!(satisfiable(&p("A | !A")).unwrap());
        assert!(!satisfiable(&p("A & !A")).unwrap());
        assert!(satisfiable(&p("true")).unwrap());
        assert!(!satisfiable(&p("false")).unwrap());
    }

    #[test]
    fn variable_limit() {
        let names: Vec<String> = (0..17).map(|i| alloc::format!("V{i}")).collect();
        let f = Formula::chain(BinOp::Or, names.iter().map(|n| Formula::var(n.as_str()))).unwrap();
        assert_eq!(satisfiable(&f).unwrap_err(), FormulaError::TooManyVariables { count: 17, limit: 16 });
        let g = Formula::chain(BinOp::Or, names[..16].iter().map(|n| Formula::var(n.as_str()))).unwrap();
        assert!(satisfiable(&g).unwrap());
        assert!(equivalent(&g, &g).unwrap());
    }

    #[test]
    fn variable_set_semantics() {
        let mut set = VariableSet::from_names(["D", "B", "D"]);
        assert_eq!(set.names(), ["D", "B"]);
        assert!(!set.insert("B".into()));
        assert!(set.same_members(&VariableSet::from_names(["B", "D"])));
        assert_eq!(set.union(&VariableSet::from_names(["U", "B"])).names(), ["D", "B", "U"]);
    }
}
