//! Negation, conjunctive and disjunctive normal forms.
//!
//! Conversion removes `->`, `<->` and `xor`, pushes negations to the
//! variables, then distributes. Distribution works on literal sets so that
//! duplicate literals, duplicate clauses and complementary clauses vanish as
//! they appear; the result is always logically equivalent to the input.
//! Constants survive only as a whole result (`true` or `false`).

use alloc::vec::Vec;

use super::{BinOp, Formula, Literal, Node};

/// Negation normal form: only `&`, `|`, negated variables and constants.
pub fn to_nnf(f: &Formula) -> Formula {
    nnf(f, true)
}

fn nnf(f: &Formula, positive: bool) -> Formula {
    match f.node() {
        Node::Const(v) => Formula::constant(*v == positive),
        Node::Var(_) => {
            let atom = f.without_spans();
            if positive {
                atom
            } else {
                Formula::not(atom)
            }
        }
        Node::Not(inner) => nnf(inner, !positive),
        Node::Binary(op, l, r) => match (op, positive) {
            (BinOp::And, true) => Formula::and(nnf(l, true), nnf(r, true)),
            (BinOp::And, false) => Formula::or(nnf(l, false), nnf(r, false)),
            (BinOp::Or, true) => Formula::or(nnf(l, true), nnf(r, true)),
            (BinOp::Or, false) => Formula::and(nnf(l, false), nnf(r, false)),
            (BinOp::Implies, true) => Formula::or(nnf(l, false), nnf(r, true)),
            (BinOp::Implies, false) => Formula::and(nnf(l, true), nnf(r, false)),
            // a <-> b  ==  (!a | b) & (a | !b)
            (BinOp::Iff, true) | (BinOp::Xor, false) => {
                Formula::and(Formula::or(nnf(l, false), nnf(r, true)), Formula::or(nnf(l, true), nnf(r, false)))
            }
            // a xor b  ==  (a | b) & (!a | !b)
            (BinOp::Xor, true) | (BinOp::Iff, false) => {
                Formula::and(Formula::or(nnf(l, true), nnf(r, true)), Formula::or(nnf(l, false), nnf(r, false)))
            }
        },
    }
}

/// One conjunct (CNF) or disjunct (DNF) as an ordered literal list.
type Group = Vec<Literal>;

/// Groups of an NNF formula. `inner` joins literals within a group, the dual
/// connective joins groups.
fn groups(f: &Formula, inner: BinOp) -> Vec<Group> {
    let outer = if inner == BinOp::Or { BinOp::And } else { BinOp::Or };
    match f.node() {
        // For CNF `true` is no clause at all and `false` is the empty clause; dually for DNF.
        Node::Const(v) => {
            if *v == (outer == BinOp::And) {
                Vec::new()
            } else {
                alloc::vec![Vec::new()]
            }
        }
        Node::Var(_) | Node::Not(_) => alloc::vec![alloc::vec![literal_of(f)]],
        Node::Binary(op, l, r) if *op == outer => {
            let mut out = groups(l, inner);
            for g in groups(r, inner) {
                push_group(&mut out, g);
            }
            out
        }
        Node::Binary(_, l, r) => {
            let left = groups(l, inner);
            let right = groups(r, inner);
            let mut out = Vec::new();
            for a in &left {
                for b in &right {
                    let mut merged = a.clone();
                    for lit in b {
                        if !merged.contains(lit) {
                            merged.push(lit.clone());
                        }
                    }
                    if !is_complementary(&merged) {
                        push_group(&mut out, merged);
                    }
                }
            }
            out
        }
    }
}

fn literal_of(f: &Formula) -> Literal {
    match f.node() {
        Node::Var(name) => Literal::positive(name.clone()),
        Node::Not(inner) => match inner.node() {
            Node::Var(name) => Literal::negative(name.clone()),
            _ => unreachable!("input is in negation normal form"),
        },
        _ => unreachable!("input is in negation normal form"),
    }
}

fn is_complementary(group: &[Literal]) -> bool {
    group.iter().any(|l| group.contains(&l.negated()))
}

fn same_group(a: &Group, b: &Group) -> bool {
    a.len() == b.len() && a.iter().all(|l| b.contains(l))
}

fn push_group(out: &mut Vec<Group>, group: Group) {
    if !out.iter().any(|g| same_group(g, &group)) {
        out.push(group);
    }
}

fn rebuild(groups: Vec<Group>, inner: BinOp) -> Formula {
    let outer = if inner == BinOp::Or { BinOp::And } else { BinOp::Or };
    let neutral = outer == BinOp::And;
    if groups.iter().any(Vec::is_empty) {
        return Formula::constant(!neutral);
    }
    let parts = groups
        .into_iter()
        .map(|g| Formula::chain(inner, g.into_iter().map(|lit| lit.to_formula())).expect("non-empty group"));
    Formula::chain(outer, parts).unwrap_or_else(|| Formula::constant(neutral))
}

pub fn to_cnf(f: &Formula) -> Formula {
    rebuild(groups(&to_nnf(f), BinOp::Or), BinOp::Or)
}

pub fn to_dnf(f: &Formula) -> Formula {
    rebuild(groups(&to_nnf(f), BinOp::And), BinOp::And)
}

fn is_literal(f: &Formula) -> bool {
    match f.node() {
        Node::Const(_) | Node::Var(_) => true,
        Node::Not(inner) => matches!(inner.node(), Node::Var(_)),
        Node::Binary(..) => false,
    }
}

pub fn is_nnf(f: &Formula) -> bool {
    match f.node() {
        Node::Binary(BinOp::And | BinOp::Or, l, r) => is_nnf(l) && is_nnf(r),
        Node::Binary(..) => false,
        _ => is_literal(f),
    }
}

fn is_flat(f: &Formula, op: BinOp) -> bool {
    match f.node() {
        Node::Binary(o, l, r) if *o == op => is_flat(l, op) && is_flat(r, op),
        _ => is_literal(f),
    }
}

fn is_two_level(f: &Formula, outer: BinOp, inner: BinOp) -> bool {
    match f.node() {
        Node::Binary(o, l, r) if *o == outer => is_two_level(l, outer, inner) && is_two_level(r, outer, inner),
        _ => is_flat(f, inner),
    }
}

/// Conjunction of disjunctions of literals; a single clause or literal counts.
pub fn is_cnf(f: &Formula) -> bool {
    is_two_level(f, BinOp::And, BinOp::Or)
}

pub fn is_dnf(f: &Formula) -> bool {
    is_two_level(f, BinOp::Or, BinOp::And)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{equivalent, parse};

    fn p(text: &str) -> Formula {
        parse(text).unwrap()
    }

    #[test]
    fn nnf_de_morgan() {
        assert_eq!(to_nnf(&p("!(B & D)")), p("!B | !D"));
        assert_eq!(to_nnf(&p("!!A")), p("A"));
        assert_eq!(to_nnf(&p("!true")), p("false"));
    }

    #[test]
    fn cnf_of_implication() {
        assert_eq!(to_cnf(&p("D -> B")), p("!D | B"));
    }

    #[test]
    fn cnf_is_idempotent_on_cnf_input() {
        let f = p("(!B | D) & (!B | U) & A");
        assert_eq!(to_cnf(&f), f);
        assert_eq!(to_cnf(&p("(A | A) & A")), p("A"));
    }

    #[test]
    fn cnf_of_example_inference_formula() {
        let f = p("(D -> B) & (B -> (D & U)) & !(B & D & U) & !!D");
        let cnf = to_cnf(&f);
        assert!(is_cnf(&cnf));
        assert!(equivalent(&f, &cnf).unwrap());
        assert_eq!(cnf, p("(!D | B) & (!B | D) & (!B | U) & (!B | !D | !U) & D"));
    }

    #[test]
    fn degenerate_constants() {
        assert_eq!(to_cnf(&p("A | !A")), p("true"));
        assert_eq!(to_cnf(&p("A & !A")), p("A & !A"));
        assert_eq!(to_dnf(&p("A & !A")), p("false"));
        assert_eq!(to_dnf(&p("A | !A")), p("A | !A"));
        assert_eq!(to_dnf(&p("true")), p("true"));
        assert!(is_cnf(&p("true")));
    }

    #[test]
    fn predicates() {
        assert!(is_cnf(&p("!D | B")));
        assert!(!is_cnf(&p("D -> B")));
        assert!(is_cnf(&p("A & (B | !C)")));
        assert!(!is_cnf(&p("A | (B & C)")));
        assert!(is_dnf(&p("A | (B & C)")));
        assert!(is_dnf(&p("!A")));
        assert!(is_nnf(&p("A | (B & !C)")));
        assert!(!is_nnf(&p("!(A & B)")));
        assert!(!is_nnf(&p("!!A")));
        assert!(!is_cnf(&p("!!A")));
    }

    #[test]
    fn xor_and_iff_conversions() {
        for text in ["A xor B", "!(A <-> B)", "(A xor B) <-> (C -> !A)", "!(A xor (B xor C))"] {
            let f = p(text);
            for (g, check) in [(to_nnf(&f), is_nnf as fn(&Formula) -> bool), (to_cnf(&f), is_cnf), (to_dnf(&f), is_dnf)]
            {
                assert!(check(&g), "{text} -> {g}");
                assert!(equivalent(&f, &g).unwrap(), "{text} -> {g}");
            }
        }
    }
}
