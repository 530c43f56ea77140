//! Breadth-first reversion search.
//!
//! Candidates are enumerated in a fixed order: sequence length first, then
//! catalogue order, then leftmost-outermost position, then (for completion
//! rules) preorder position of the completing subformula in the solution.
//! Each candidate is checked against the solution's truth table. The table of
//! a candidate is computed incrementally: only the nodes on the path from the
//! rewritten position to the root are recomputed.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Not;

use serde::{Deserialize, Serialize};

use super::rules::{apply_rule, ReversionRule, RuleCatalogue, RuleError};
use crate::formula::{Formula, FormulaError, Node, TruthTable, VariableSet};
use crate::pattern::{Binding, Match, Pattern};

pub const DEFAULT_MAX_LENGTH: usize = 2;
pub const DEFAULT_CANDIDATE_CAP: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchLimits {
    pub max_length: usize,
    /// Upper bound on candidate formulas checked for equivalence.
    pub candidate_cap: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { max_length: DEFAULT_MAX_LENGTH, candidate_cap: DEFAULT_CANDIDATE_CAP }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReversionStep {
    pub rule: String,
    #[serde(rename = "match")]
    pub matched: Match,
}

/// Rule applications that turn the student's formula into one equivalent to
/// the solution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReversionSequence {
    pub steps: Vec<ReversionStep>,
    pub result: Formula,
}

impl ReversionSequence {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Reapplies the steps to `student` with [`apply_rule`].
    pub fn replay(&self, student: &Formula, catalogue: &RuleCatalogue) -> Result<Formula, RuleError> {
        let mut current = student.clone();
        for step in &self.steps {
            let rule = catalogue.get(&step.rule).ok_or_else(|| RuleError::InvalidMatch {
                rule: step.rule.clone(),
                position: step.matched.position.clone(),
            })?;
            current = apply_rule(rule, &current, &step.matched)?;
        }
        Ok(current)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(ReversionSequence),
    /// Every sequence up to the length bound was checked.
    Exhausted,
    /// The candidate cap was reached before the space was exhausted.
    CapExceeded,
}

/// Receives rewrites that cannot hit, to build the next level.
type Visit<'v> = Option<&'v mut dyn FnMut(ReversionStep, &ReversionRule)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchReport {
    pub outcome: SearchOutcome,
    pub candidates: usize,
}

/// Runs the search; errors only when the joint variable count is too large
/// for truth tables.
pub fn search_reversion(
    student: &Formula,
    solution: &Formula,
    catalogue: &RuleCatalogue,
    limits: SearchLimits,
) -> Result<SearchReport, FormulaError> {
    let vars = student.variables().union(&solution.variables());
    let target = TruthTable::of(solution, &vars)?;
    // The solution itself is not offered as a completion: `X & solution` only
    // restates the answer and says nothing about the missing part.
    let completions: Vec<(Formula, TruthTable)> = solution
        .subformulas()
        .into_iter()
        .skip(1)
        .map(|s| {
            let s = s.without_spans();
            let t = TruthTable::of(&s, &vars).expect("variables checked");
            (s, t)
        })
        .collect();
    let mut search = Search { vars, target, completions, catalogue, cap: limits.candidate_cap, candidates: 0 };
    let outcome = search.run(student, limits.max_length);
    Ok(SearchReport { outcome, candidates: search.candidates })
}

/// Shortest reversion sequence within the default limits, if any.
pub fn find_reversion(student: &Formula, solution: &Formula, catalogue: &RuleCatalogue) -> Option<ReversionSequence> {
    match search_reversion(student, solution, catalogue, SearchLimits::default()) {
        Ok(SearchReport { outcome: SearchOutcome::Found(seq), .. }) => Some(seq),
        _ => None,
    }
}

struct Search<'a> {
    vars: VariableSet,
    target: TruthTable,
    completions: Vec<(Formula, TruthTable)>,
    catalogue: &'a RuleCatalogue,
    cap: usize,
    candidates: usize,
}

enum Step {
    Hit(ReversionStep),
    Continue,
    Stop,
}

impl Search<'_> {
    fn run(&mut self, student: &Formula, max_length: usize) -> SearchOutcome {
        let mut seen: BTreeSet<Formula> = BTreeSet::new();
        seen.insert(student.without_spans());
        let mut frontier: Vec<(Formula, Vec<ReversionStep>)> = alloc::vec![(student.clone(), Vec::new())];
        for depth in 1..=max_length {
            let expand = depth < max_length;
            let mut next = Vec::new();
            for (formula, steps) in &frontier {
                let analysis = Analysis::new(formula, &self.vars, &self.target);
                let mut expand_with = |step: ReversionStep, rule: &ReversionRule| {
                    let rewritten = apply_rule(rule, formula, &step.matched).expect("enumerated match applies");
                    if seen.insert(rewritten.clone()) {
                        let mut path = steps.clone();
                        path.push(step);
                        next.push((rewritten, path));
                    }
                };
                let visit: Visit<'_> = if expand { Some(&mut expand_with) } else { None };
                match self.candidates_of(formula, &analysis, visit) {
                    Step::Hit(step) => {
                        let rule = self.catalogue.get(&step.rule).expect("rule from catalogue");
                        let result = apply_rule(rule, formula, &step.matched).expect("enumerated match applies");
                        let mut path = steps.clone();
                        path.push(step);
                        return SearchOutcome::Found(ReversionSequence { steps: path, result });
                    }
                    Step::Stop => return SearchOutcome::CapExceeded,
                    Step::Continue => {}
                }
            }
            frontier = next;
        }
        SearchOutcome::Exhausted
    }

    /// Enumerates the one-step rewrites of `formula` in order. Rewrites at a
    /// position whose fixed rows already disagree with the target cannot hit
    /// and are only handed to `visit`, which collects the next level.
    fn candidates_of(&mut self, formula: &Formula, analysis: &Analysis, mut visit: Visit<'_>) -> Step {
        let positions = formula.positions();
        for rule in self.catalogue.rules() {
            let fillers: Vec<usize> = match &rule.placeholder {
                Some(_) => (0..self.completions.len()).filter(|&i| !formula.contains(&self.completions[i].0)).collect(),
                None => Vec::new(),
            };
            for (index, (path, sub)) in positions.iter().enumerate() {
                let Some(binding) = rule.lhs.match_root(sub) else { continue };
                let window = analysis.window(index);
                if window.is_none() && visit.is_none() {
                    continue;
                }
                let mut tables = BTreeMap::new();
                if window.is_some() {
                    analysis.bind_tables(&rule.lhs, index, &mut tables);
                }
                let step_for = |binding: Binding| ReversionStep {
                    rule: rule.id.clone(),
                    matched: Match { position: path.clone(), binding, span: sub.span() },
                };
                let fillers: &[usize] = if rule.placeholder.is_some() { &fillers } else { &[usize::MAX] };
                for &i in fillers {
                    if self.candidates >= self.cap {
                        return Step::Stop;
                    }
                    self.candidates += 1;
                    let mut binding = binding.clone();
                    if let Some(name) = &rule.placeholder {
                        let (filler, table) = &self.completions[i];
                        binding.insert(name.clone(), filler.clone());
                        tables.insert(name.clone(), table.clone());
                    }
                    if let Some(window) = window {
                        let local = pattern_table(&rule.rhs, &tables, &self.vars);
                        if local.agrees_on(&window.need, &window.care) {
                            return Step::Hit(step_for(binding));
                        }
                    }
                    if let Some(visit) = visit.as_mut() {
                        visit(step_for(binding), rule);
                    }
                }
            }
        }
        Step::Continue
    }
}

/// How the root's value depends on one node: on `care` rows the root must
/// equal the target exactly when the node's value equals `need`; on the
/// remaining rows the root is fixed regardless of the node.
struct Window {
    care: TruthTable,
    need: TruthTable,
}

/// Truth tables of every node of a formula, in preorder, with the window
/// through which each node influences the root.
struct Analysis {
    nodes: Vec<NodeInfo>,
    windows: Vec<Option<Window>>,
}

struct NodeInfo {
    table: TruthTable,
    kind: Kind,
    children: [usize; 2],
    parent: Option<(usize, u8)>,
}

#[derive(Clone, Copy)]
enum Kind {
    Leaf,
    Not,
    Binary(crate::formula::BinOp),
}

impl Analysis {
    fn new(f: &Formula, vars: &VariableSet, target: &TruthTable) -> Analysis {
        let mut nodes = Vec::with_capacity(f.size());
        Self::build(f, vars, None, &mut nodes);
        let windows = Self::windows(&nodes, vars.len(), target);
        Analysis { nodes, windows }
    }

    fn build(f: &Formula, vars: &VariableSet, parent: Option<(usize, u8)>, nodes: &mut Vec<NodeInfo>) -> usize {
        let index = nodes.len();
        let placeholder = TruthTable::constant(vars.len(), false);
        let kind = match f.node() {
            Node::Const(_) | Node::Var(_) => Kind::Leaf,
            Node::Not(_) => Kind::Not,
            Node::Binary(op, ..) => Kind::Binary(*op),
        };
        nodes.push(NodeInfo { table: placeholder, kind, children: [usize::MAX; 2], parent });
        let table = match f.node() {
            Node::Const(_) | Node::Var(_) => TruthTable::of(f, vars).expect("variables checked"),
            Node::Not(inner) => {
                let c = Self::build(inner, vars, Some((index, 0)), nodes);
                nodes[index].children[0] = c;
                nodes[c].table.clone().not()
            }
            Node::Binary(op, l, r) => {
                let a = Self::build(l, vars, Some((index, 0)), nodes);
                let b = Self::build(r, vars, Some((index, 1)), nodes);
                nodes[index].children = [a, b];
                nodes[a].table.combine(*op, &nodes[b].table)
            }
        };
        nodes[index].table = table;
        index
    }

    /// Top-down pass: for each node, the rows where the root still depends on
    /// it (`care`), whether the path inverts it there (`flip`), and the
    /// root's fixed value elsewhere (`base`). Parents precede children in
    /// preorder, so one forward sweep suffices.
    fn windows(nodes: &[NodeInfo], vars: usize, target: &TruthTable) -> Vec<Option<Window>> {
        use crate::formula::BinOp::{And, Or, Xor};
        let zero = TruthTable::constant(vars, false);
        let one = TruthTable::constant(vars, true);
        let mut maps: Vec<(TruthTable, TruthTable, TruthTable)> = Vec::with_capacity(nodes.len());
        for node in nodes {
            let map = match node.parent {
                None => (one.clone(), zero.clone(), zero.clone()),
                Some((p, slot)) => {
                    let (care, flip, base) = &maps[p];
                    match nodes[p].kind {
                        Kind::Not => (care.clone(), flip.clone().not(), base.clone()),
                        Kind::Binary(op) => {
                            let sibling = &nodes[nodes[p].children[1 - slot as usize]].table;
                            let (f0, f1) = if slot == 0 {
                                (zero.combine(op, sibling), one.combine(op, sibling))
                            } else {
                                (sibling.combine(op, &zero), sibling.combine(op, &one))
                            };
                            let sensitive = f0.combine(Xor, &f1);
                            let child_care = care.combine(And, &sensitive);
                            let child_flip = flip.combine(Xor, &f0);
                            let fixed_here = care.combine(And, &sensitive.clone().not());
                            let child_base = base
                                .combine(And, &care.clone().not())
                                .combine(Or, &f0.combine(Xor, flip).combine(And, &fixed_here));
                            (child_care, child_flip, child_base)
                        }
                        Kind::Leaf => unreachable!("leaves have no children"),
                    }
                }
            };
            maps.push(map);
        }
        maps.into_iter()
            .map(|(care, flip, base)| {
                base.agrees_on(target, &care.clone().not()).then(|| Window { need: target.combine(Xor, &flip), care })
            })
            .collect()
    }

    fn window(&self, index: usize) -> Option<&Window> {
        self.windows[index].as_ref()
    }

    /// Collects the tables of the subformulas a pattern's metavariables bind
    /// at node `index`. Assumes the pattern matches there.
    fn bind_tables(&self, p: &Pattern, index: usize, out: &mut BTreeMap<String, TruthTable>) {
        match p {
            Pattern::Meta(name) => {
                out.entry(name.clone()).or_insert_with(|| self.nodes[index].table.clone());
            }
            Pattern::Const(_) | Pattern::Var(_) => {}
            Pattern::Not(inner) => self.bind_tables(inner, self.nodes[index].children[0], out),
            Pattern::Binary(_, l, r) => {
                let [a, b] = self.nodes[index].children;
                self.bind_tables(l, a, out);
                self.bind_tables(r, b, out);
            }
        }
    }
}

fn pattern_table(p: &Pattern, metas: &BTreeMap<String, TruthTable>, vars: &VariableSet) -> TruthTable {
    match p {
        Pattern::Meta(name) => metas[name].clone(),
        Pattern::Const(v) => TruthTable::constant(vars.len(), *v),
        Pattern::Var(name) => TruthTable::of(&Formula::var(name.clone()), vars)
            .unwrap_or_else(|_| TruthTable::constant(vars.len(), false)),
        Pattern::Not(inner) => pattern_table(inner, metas, vars).not(),
        Pattern::Binary(op, l, r) => pattern_table(l, metas, vars).combine(*op, &pattern_table(r, metas, vars)),
    }
}
