//! Propositional resolution: an append-only derivation graph over clauses,
//! student steps with validation, and an automatic refuter.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::formula::{clauses, Clause, ClauseSet, Formula, FormulaError, Literal};

pub type ClauseId = usize;

pub const DEFAULT_NODE_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ResolutionError {
    #[error("formula is not in conjunctive normal form")]
    NotInCnf,
    #[error("no clause with id {0}")]
    UnknownClause(ClauseId),
    #[error("a clause cannot be resolved with itself")]
    IdenticalClauses,
    #[error("clauses have no complementary pair{}", pivot.as_ref().map(|p| alloc::format!(" on `{p}`")).unwrap_or_default())]
    NotResolvable { pivot: Option<String> },
    #[error("clauses clash on several variables; choose a pivot among {0:?}")]
    AmbiguousPivot(Vec<String>),
    #[error("saturation stopped after {0} clauses")]
    CapExceeded(usize),
}

impl From<FormulaError> for ResolutionError {
    fn from(_: FormulaError) -> Self {
        ResolutionError::NotInCnf
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Origin {
    Initial,
    Derived { parents: [ClauseId; 2], pivot: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseNode {
    pub id: ClauseId,
    pub clause: Clause,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionState {
    nodes: Vec<ClauseNode>,
    goal_reached: bool,
}

/// Result of one resolution step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub id: ClauseId,
    pub clause: Clause,
    pub pivot: String,
    /// False when the resolvent was already a node.
    pub added: bool,
    pub tautology: bool,
    pub goal_reached: bool,
}

pub fn init_resolution(f: &Formula) -> Result<ResolutionState, ResolutionError> {
    Ok(ResolutionState::from_clauses(&clauses(f)?))
}

impl ResolutionState {
    pub fn from_clauses(cs: &ClauseSet) -> Self {
        let nodes: Vec<ClauseNode> = cs
            .iter()
            .enumerate()
            .map(|(id, clause)| ClauseNode { id, clause: clause.clone(), origin: Origin::Initial })
            .collect();
        let goal_reached = nodes.iter().any(|n| n.clause.is_empty());
        ResolutionState { nodes, goal_reached }
    }

    pub fn nodes(&self) -> &[ClauseNode] {
        &self.nodes
    }

    pub fn node(&self, id: ClauseId) -> Option<&ClauseNode> {
        self.nodes.get(id)
    }

    pub fn goal_reached(&self) -> bool {
        self.goal_reached
    }

    pub fn initial(&self) -> impl Iterator<Item = &ClauseNode> {
        self.nodes.iter().filter(|n| n.origin == Origin::Initial)
    }

    pub fn derived(&self) -> impl Iterator<Item = &ClauseNode> {
        self.nodes.iter().filter(|n| n.origin != Origin::Initial)
    }

    /// Resolves two nodes. The pivot may be omitted when the clauses clash on
    /// exactly one variable.
    pub fn resolve_step(
        &mut self,
        c1: ClauseId,
        c2: ClauseId,
        pivot: Option<&str>,
    ) -> Result<StepOutcome, ResolutionError> {
        let a = &self.nodes.get(c1).ok_or(ResolutionError::UnknownClause(c1))?.clause;
        let b = &self.nodes.get(c2).ok_or(ResolutionError::UnknownClause(c2))?.clause;
        if c1 == c2 {
            return Err(ResolutionError::IdenticalClauses);
        }
        let pivot = match pivot {
            Some(p) => p.to_string(),
            None => {
                let clashes = a.complementary_variables(b);
                match clashes.len() {
                    0 => return Err(ResolutionError::NotResolvable { pivot: None }),
                    1 => clashes.into_iter().next().expect("one clash"),
                    _ => return Err(ResolutionError::AmbiguousPivot(clashes)),
                }
            }
        };
        let resolvent =
            a.resolve(b, &pivot).ok_or_else(|| ResolutionError::NotResolvable { pivot: Some(pivot.clone()) })?;
        let tautology = resolvent.is_tautology();
        let (id, added) = match self.nodes.iter().find(|n| n.clause == resolvent) {
            Some(existing) => (existing.id, false),
            None => {
                let id = self.nodes.len();
                self.nodes.push(ClauseNode {
                    id,
                    clause: resolvent.clone(),
                    origin: Origin::Derived { parents: [c1, c2], pivot: pivot.clone() },
                });
                (id, true)
            }
        };
        if resolvent.is_empty() {
            self.goal_reached = true;
        }
        Ok(StepOutcome { id, clause: resolvent, pivot, added, tautology, goal_reached: self.goal_reached })
    }

    /// The derivation recorded in this graph, in id order.
    pub fn derivation(&self) -> Derivation {
        let steps = self
            .nodes
            .iter()
            .filter_map(|n| match &n.origin {
                Origin::Initial => None,
                Origin::Derived { parents, pivot } => Some(DerivationStep {
                    child: n.id,
                    parents: *parents,
                    pivot: pivot.clone(),
                    literals: n.clause.literals().cloned().collect(),
                }),
            })
            .collect();
        Derivation { steps }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationStep {
    pub child: ClauseId,
    pub parents: [ClauseId; 2],
    pub pivot: String,
    pub literals: Vec<Literal>,
}

/// Ordered resolution steps; replaying them on the initial clause set
/// reproduces the recorded ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Derivation {
    pub steps: Vec<DerivationStep>,
}

impl Derivation {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn ends_in_empty_clause(&self) -> bool {
        self.steps.last().is_some_and(|s| s.literals.is_empty())
    }

    /// Applies every step through [`ResolutionState::resolve_step`] and checks
    /// that ids and resolvents match the record.
    pub fn replay(&self, state: &mut ResolutionState) -> Result<(), ReplayError> {
        for (index, step) in self.steps.iter().enumerate() {
            let outcome = state.resolve_step(step.parents[0], step.parents[1], Some(&step.pivot))?;
            let recorded: Clause = step.literals.iter().cloned().collect();
            if outcome.id != step.child || outcome.clause != recorded {
                return Err(ReplayError::Mismatch { step: index });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error(transparent)]
    Step(#[from] ResolutionError),
    #[error("step {step} does not reproduce the recorded clause")]
    Mismatch { step: usize },
}

/// Level saturation with forward subsumption. `Ok(None)` means saturation
/// reached a fixpoint without the empty clause, so the set is satisfiable.
pub fn auto_refute(cs: &ClauseSet, node_cap: usize) -> Result<Option<Derivation>, ResolutionError> {
    let mut state = ResolutionState::from_clauses(cs);
    if state.goal_reached {
        return Ok(Some(Derivation::default()));
    }
    let initial = state.nodes.len();
    // Indices of clauses used for further resolution.
    let mut active: Vec<ClauseId> = state.nodes.iter().filter(|n| !n.clause.is_tautology()).map(|n| n.id).collect();
    // Clauses at or beyond this index of `active` were added in the last level.
    let mut fresh_from = 0;
    loop {
        let level_end = active.len();
        let mut added_this_level: Vec<ClauseId> = Vec::new();
        for j in fresh_from..level_end {
            for i in 0..j {
                let (a, b) = (active[i], active[j]);
                let clashes = state.nodes[a].clause.complementary_variables(&state.nodes[b].clause);
                for pivot in clashes {
                    let resolvent = state.nodes[a].clause.resolve(&state.nodes[b].clause, &pivot).expect("clash");
                    if resolvent.is_tautology() {
                        continue;
                    }
                    let subsumed =
                        active.iter().chain(&added_this_level).any(|&k| state.nodes[k].clause.subsumes(&resolvent));
                    if subsumed {
                        continue;
                    }
                    if state.nodes.len() >= node_cap {
                        return Err(ResolutionError::CapExceeded(node_cap));
                    }
                    let id = state.nodes.len();
                    let empty = resolvent.is_empty();
                    state.nodes.push(ClauseNode {
                        id,
                        clause: resolvent,
                        origin: Origin::Derived { parents: [a, b], pivot },
                    });
                    if empty {
                        return Ok(Some(extract(&state, id, initial)));
                    }
                    added_this_level.push(id);
                }
            }
        }
        if added_this_level.is_empty() {
            return Ok(None);
        }
        fresh_from = level_end;
        active.extend(added_this_level);
    }
}

/// The ancestors of `goal`, renumbered consecutively after the initial clauses.
fn extract(state: &ResolutionState, goal: ClauseId, initial: usize) -> Derivation {
    let mut needed = alloc::vec![false; state.nodes.len()];
    let mut stack = alloc::vec![goal];
    while let Some(id) = stack.pop() {
        if needed[id] {
            continue;
        }
        needed[id] = true;
        if let Origin::Derived { parents, .. } = &state.nodes[id].origin {
            stack.extend_from_slice(parents);
        }
    }
    let mut renumber = alloc::vec![usize::MAX; state.nodes.len()];
    for (id, slot) in renumber.iter_mut().enumerate().take(initial) {
        *slot = id;
    }
    let mut steps = Vec::new();
    for (next, node) in (initial..).zip(state.nodes.iter().skip(initial).filter(|n| needed[n.id])) {
        renumber[node.id] = next;
        let Origin::Derived { parents, pivot } = &node.origin else { unreachable!("derived node") };
        steps.push(DerivationStep {
            child: next,
            parents: [renumber[parents[0]], renumber[parents[1]]],
            pivot: pivot.clone(),
            literals: node.clause.literals().cloned().collect(),
        });
    }
    Derivation { steps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    const EXAMPLE: &str = "(!D | B) & (!B | D) & (!B | U) & (!B | !D | !U) & D";

    fn lits(spec: &[(&str, bool)]) -> Clause {
        spec.iter().map(|&(v, p)| Literal { variable: v.into(), positive: p }).collect()
    }

    #[test]
    fn initial_clauses() {
        assert_eq!(init_resolution(&parse(EXAMPLE).unwrap()).unwrap().nodes().len(), 5);
        assert_eq!(init_resolution(&parse("A").unwrap()).unwrap().nodes().len(), 1);
        assert_eq!(init_resolution(&parse("A & !A").unwrap()).unwrap().nodes().len(), 2);
        assert_eq!(init_resolution(&parse("A -> B").unwrap()), Err(ResolutionError::NotInCnf));
    }

    #[test]
    fn steps_and_errors() {
        let mut s = init_resolution(&parse(EXAMPLE).unwrap()).unwrap();
        let out = s.resolve_step(4, 0, Some("D")).unwrap();
        assert_eq!(out.clause, lits(&[("B", true)]));
        assert_eq!(out.id, 5);
        assert!(out.added);
        let again = s.resolve_step(0, 4, None).unwrap();
        assert_eq!((again.id, again.added), (5, false));
        assert_eq!(s.resolve_step(1, 1, None), Err(ResolutionError::IdenticalClauses));
        assert_eq!(s.resolve_step(1, 99, None), Err(ResolutionError::UnknownClause(99)));
        assert_eq!(s.resolve_step(0, 2, Some("D")), Err(ResolutionError::NotResolvable { pivot: Some("D".into()) }));
        assert_eq!(
            s.resolve_step(0, 1, None),
            Err(ResolutionError::AmbiguousPivot(alloc::vec!["B".into(), "D".into()]))
        );
        let taut = s.resolve_step(0, 1, Some("B")).unwrap();
        assert!(taut.tautology);
    }

    #[test]
    fn empty_clause_sets_goal() {
        let mut s = init_resolution(&parse("B & !B").unwrap()).unwrap();
        let out = s.resolve_step(0, 1, None).unwrap();
        assert!(out.clause.is_empty() && out.goal_reached && s.goal_reached());
        let mut s = init_resolution(&parse("(A | B) & (A | C)").unwrap()).unwrap();
        assert_eq!(s.resolve_step(0, 1, Some("A")), Err(ResolutionError::NotResolvable { pivot: Some("A".into()) }));
    }

    #[test]
    fn refutes_example() {
        let cs = clauses(&parse(EXAMPLE).unwrap()).unwrap();
        let derivation = auto_refute(&cs, DEFAULT_NODE_CAP).unwrap().unwrap();
        assert!(derivation.ends_in_empty_clause());
        let mut state = ResolutionState::from_clauses(&cs);
        derivation.replay(&mut state).unwrap();
        assert!(state.goal_reached());
        assert_eq!(state.derivation(), derivation);
    }

    #[test]
    fn satisfiable_sets_reach_fixpoint() {
        let cs = clauses(&parse("A").unwrap()).unwrap();
        assert_eq!(auto_refute(&cs, DEFAULT_NODE_CAP), Ok(None));
        let cs = clauses(&parse("(A | B) & (!A | B)").unwrap()).unwrap();
        assert_eq!(auto_refute(&cs, DEFAULT_NODE_CAP), Ok(None));
    }

    #[test]
    fn cap_is_reported() {
        let cs = clauses(&parse(EXAMPLE).unwrap()).unwrap();
        assert_eq!(auto_refute(&cs, 5), Err(ResolutionError::CapExceeded(5)));
    }
}
