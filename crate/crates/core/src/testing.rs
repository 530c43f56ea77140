//! Random formulas and forward mutations for property tests.
//!
//! Each forward mutation is the exact inverse of one reversion rule, so a
//! student formula built from a solution by `k` mutations can always be
//! reverted by some sequence of at most `k` catalogue applications.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::feedback::{apply_rule, RuleCatalogue};
use crate::formula::{equivalent, BinOp, Clause, ClauseSet, Formula, Literal, Node, Path, TruthTable};
use crate::pattern::{match_all, Match};

/// A random formula over `vars` with at most `max_depth` nested connectives.
pub fn random_formula<R: Rng + ?Sized>(rng: &mut R, vars: &[&str], max_depth: usize) -> Formula {
    if max_depth == 0 || rng.gen_ratio(1, 4) {
        return Formula::var(*vars.choose(rng).expect("at least one variable"));
    }
    if rng.gen_ratio(1, 5) {
        return Formula::not(random_formula(rng, vars, max_depth - 1));
    }
    let op = *BinOp::ALL.choose(rng).expect("operators");
    Formula::binary(op, random_formula(rng, vars, max_depth - 1), random_formula(rng, vars, max_depth - 1))
}

/// A random formula shaped like a teacher's solution: at least two binary
/// connectives over at least two variables, no constant subformula (such as
/// `D <-> D`), and every subformula matters (negating any node changes the
/// truth table).
pub fn random_solution<R: Rng + ?Sized>(rng: &mut R, vars: &[&str], max_depth: usize) -> Formula {
    loop {
        let f = random_formula(rng, vars, max_depth);
        let binaries = f.positions().iter().filter(|(_, g)| matches!(g.node(), Node::Binary(..))).count();
        if binaries >= 2
            && f.variables().len() >= 2.min(vars.len())
            && !has_constant_subformula(&f)
            && all_nodes_relevant(&f)
        {
            return f;
        }
    }
}

/// Some subformula is a tautology or a contradiction.
pub fn has_constant_subformula(f: &Formula) -> bool {
    f.positions().into_iter().any(|(_, sub)| {
        let vars = sub.variables();
        let table = TruthTable::of(sub, &vars).expect("small formula");
        table.count_true() == 0 || table.count_true() == table.rows()
    })
}

/// No node can be negated without changing the formula's meaning.
pub fn all_nodes_relevant(f: &Formula) -> bool {
    f.positions().into_iter().all(|(path, sub)| {
        let flipped = f.replace_at(&path, Formula::not(sub.clone())).expect("valid position");
        !equivalent(&flipped, f).expect("small formula")
    })
}

/// A random clause set over `vars` with `count` clauses of up to `width` literals.
pub fn random_clauses<R: Rng + ?Sized>(rng: &mut R, vars: &[&str], count: usize, width: usize) -> ClauseSet {
    (0..count)
        .map(|_| {
            let len = rng.gen_range(1..=width);
            (0..len)
                .map(|_| Literal { variable: String::from(*vars.choose(rng).expect("vars")), positive: rng.gen() })
                .collect::<Clause>()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mutation {
    /// Swap the operands of an implication.
    SwapImplication,
    /// Replace a binary connective.
    ChangeOperator(BinOp),
    /// Remove a negation.
    DropNegation,
    /// Wrap the node in a negation.
    AddNegation,
    /// Replace `X & S` or `X | S` by `X`, where `S` is a proper subformula of
    /// the solution that no longer occurs afterwards.
    DropOperand,
}

/// Every forward mutation of `f` as (position, mutation, result), in
/// preorder position order.
pub fn forward_mutations(f: &Formula, solution: &Formula) -> Vec<(Path, Mutation, Formula)> {
    let parts: Vec<Formula> = solution.subformulas().into_iter().skip(1).map(Formula::without_spans).collect();
    let mut out = Vec::new();
    for (path, sub) in f.positions() {
        let mut push = |m: Mutation, replacement: Formula| {
            let result = f.replace_at(&path, replacement).expect("valid position");
            out.push((path.clone(), m, result));
        };
        match sub.node() {
            Node::Binary(op, l, r) => {
                if *op == BinOp::Implies {
                    push(Mutation::SwapImplication, Formula::implies((**r).clone(), (**l).clone()));
                }
                for other in BinOp::ALL {
                    if other != *op {
                        push(Mutation::ChangeOperator(other), Formula::binary(other, (**l).clone(), (**r).clone()));
                    }
                }
                if matches!(op, BinOp::And | BinOp::Or) && parts.contains(r) {
                    let candidate = f.replace_at(&path, (**l).clone()).expect("valid position");
                    if !candidate.contains(r) {
                        out.push((path.clone(), Mutation::DropOperand, candidate));
                    }
                }
            }
            Node::Not(inner) => push(Mutation::DropNegation, (**inner).clone()),
            Node::Const(_) | Node::Var(_) => {}
        }
        let mut push = |m: Mutation, replacement: Formula| {
            let result = f.replace_at(&path, replacement).expect("valid position");
            out.push((path.clone(), m, result));
        };
        push(Mutation::AddNegation, Formula::not(sub.without_spans()));
    }
    out
}

/// Applies `k` random forward mutations, each relative to the original
/// solution. Returns `None` if some step has no applicable mutation.
pub fn mutate<R: Rng + ?Sized>(rng: &mut R, solution: &Formula, k: usize) -> Option<Formula> {
    let mut current = solution.without_spans();
    for _ in 0..k {
        let options = forward_mutations(&current, solution);
        let (_, _, next) = options.choose(rng)?.clone();
        current = next;
    }
    Some(current)
}

/// Like [`mutate`], but the mutated positions lie in pairwise disjoint
/// subtrees, so the `k` mistakes are independent of each other.
pub fn mutate_independent<R: Rng + ?Sized>(rng: &mut R, solution: &Formula, k: usize) -> Option<Formula> {
    let mut current = solution.without_spans();
    let mut touched: Vec<Path> = Vec::new();
    for _ in 0..k {
        let options: Vec<(Path, Mutation, Formula)> = forward_mutations(&current, solution)
            .into_iter()
            .filter(|(p, _, _)| touched.iter().all(|t| !t.starts_with(p) && !p.starts_with(t)))
            .collect();
        let (path, _, next) = options.choose(rng)?.clone();
        touched.push(path);
        current = next;
    }
    Some(current)
}

/// Reference reversion search: plain breadth-first enumeration that rewrites
/// with [`apply_rule`] and checks each candidate with [`equivalent`]. Same
/// order as the real search, no pruning, no candidate cap.
pub fn naive_reversion(
    student: &Formula,
    solution: &Formula,
    catalogue: &RuleCatalogue,
    max_length: usize,
) -> Option<Vec<(String, Path)>> {
    let fillers: Vec<Formula> = solution.subformulas().into_iter().skip(1).map(Formula::without_spans).collect();
    let mut seen = BTreeSet::new();
    seen.insert(student.without_spans());
    let mut frontier = alloc::vec![(student.without_spans(), Vec::new())];
    for _ in 0..max_length {
        let mut next = Vec::new();
        for (current, steps) in &frontier {
            for rule in catalogue.rules() {
                for m in match_all(&rule.lhs, current) {
                    let options: Vec<Match> = match &rule.placeholder {
                        None => alloc::vec![m],
                        Some(name) => fillers
                            .iter()
                            .filter(|s| !current.contains(s))
                            .map(|s| {
                                let mut m = m.clone();
                                m.binding.insert(name.clone(), s.clone());
                                m
                            })
                            .collect(),
                    };
                    for m in options {
                        let rewritten = apply_rule(rule, current, &m).expect("match applies");
                        let mut path: Vec<(String, Path)> = steps.clone();
                        path.push((rule.id.clone(), m.position.clone()));
                        if equivalent(&rewritten, solution).expect("small formulas") {
                            return Some(path);
                        }
                        if seen.insert(rewritten.clone()) {
                            next.push((rewritten, path));
                        }
                    }
                }
            }
        }
        frontier = next;
    }
    None
}
