#![allow(dead_code)]

use std::path::PathBuf;

use logic_tutor::exercise::{load_exercise, Exercise};
use logic_tutor::session::{Action, ActionKind};
use logic_tutor_core::formula::{clauses, parse};
use logic_tutor_core::resolution::{auto_refute, DEFAULT_NODE_CAP};

pub const EXAMPLE_CNF: &str = "(!D | B) & (!B | D) & (!B | U) & (!B | !D | !U) & D";
pub const EXAMPLE_INFERENCE: &str = "(D -> B) & (B -> (D & U)) & !(B & D & U) & !!D";

pub fn exercises_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("exercises")
}

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn load(name: &str) -> Exercise {
    let text = std::fs::read_to_string(exercises_dir().join(name)).unwrap();
    load_exercise(&text).unwrap().exercise
}

pub fn submit(task: usize, statement: usize, text: &str) -> Action {
    Action { task, kind: ActionKind::SubmitFormula { statement, text: text.into() } }
}

pub fn pick(task: usize, names: &[&str]) -> Action {
    Action { task, kind: ActionKind::PickVariables { variables: names.iter().map(|s| s.to_string()).collect() } }
}

/// Actions for tasks 0 to 4 of the faulty-software exercise, all correct.
pub fn example_prefix() -> Vec<Action> {
    vec![
        pick(0, &["B", "D", "U"]),
        submit(1, 0, "D -> B"),
        submit(1, 1, "B -> (D & U)"),
        submit(1, 2, "!(B & D & U)"),
        submit(2, 0, "!D"),
        submit(3, 0, EXAMPLE_INFERENCE),
        Action { task: 4, kind: ActionKind::SubmitTransformation { text: EXAMPLE_CNF.into() } },
    ]
}

/// A refutation of the example CNF found by the automatic prover, as
/// resolve-step actions on task 5.
pub fn example_refutation() -> Vec<Action> {
    let cs = clauses(&parse(EXAMPLE_CNF).unwrap()).unwrap();
    let derivation = auto_refute(&cs, DEFAULT_NODE_CAP).unwrap().expect("the example is unsatisfiable");
    derivation
        .steps
        .iter()
        .map(|s| Action { task: 5, kind: ActionKind::ResolveStep { clauses: s.parents, pivot: Some(s.pivot.clone()) } })
        .collect()
}
