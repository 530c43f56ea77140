//! Acceptance suite: one line per criterion.
//!
//! Runs without the libtest harness. Each check returns `Ok(detail)` on
//! success and `Err(detail)` on failure; a panic counts as a failure. A
//! check marked as a known shortfall prints FAIL without failing the run.
//! Every expected value is derived here by brute force, independent of the
//! library's own evaluator.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use logic_tutor::engine::Engine;
use logic_tutor::exercise::{load_exercise, to_xml, Exercise, LoadError};
use logic_tutor::latex::convert_document;
use logic_tutor::log::EventRecord;
use logic_tutor::session::{replay, Action, ActionKind, SessionState, Settings, Snapshot, TaskState};
use logic_tutor::stats::{compute_stats, StatFilter};
use logic_tutor_core::feedback::{
    analyse, search_reversion, ErrorClass, FeedbackConfig, ItemKind, RuleCatalogue, SearchLimits, SearchOutcome,
};
use logic_tutor_core::formula::{
    is_cnf, is_dnf, is_nnf, parse, to_cnf, to_dnf, to_nnf, BinOp, Clause, ClauseSet, Formula, Node,
};
use logic_tutor_core::resolution::{auto_refute, ResolutionState, DEFAULT_NODE_CAP};
use logic_tutor_core::testing::{mutate_independent, random_clauses, random_formula, random_solution};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

// ---------------------------------------------------------------- oracles

type Env = BTreeMap<String, bool>;

fn eval(f: &Formula, env: &Env) -> bool {
    match f.node() {
        Node::Const(b) => *b,
        Node::Var(v) => env[v.as_str()],
        Node::Not(g) => !eval(g, env),
        Node::Binary(op, l, r) => {
            let (a, b) = (eval(l, env), eval(r, env));
            match op {
                BinOp::And => a && b,
                BinOp::Or => a || b,
                BinOp::Xor => a != b,
                BinOp::Implies => !a || b,
                BinOp::Iff => a == b,
            }
        }
    }
}

fn vars_of(f: &Formula, out: &mut BTreeSet<String>) {
    match f.node() {
        Node::Const(_) => {}
        Node::Var(v) => {
            out.insert(v.clone());
        }
        Node::Not(g) => vars_of(g, out),
        Node::Binary(_, l, r) => {
            vars_of(l, out);
            vars_of(r, out);
        }
    }
}

fn all_envs(vars: &BTreeSet<String>) -> Vec<Env> {
    let names: Vec<&String> = vars.iter().collect();
    (0..1usize << names.len())
        .map(|row| names.iter().enumerate().map(|(i, n)| ((*n).clone(), row >> i & 1 == 1)).collect())
        .collect()
}

fn same_truth_table(f: &Formula, g: &Formula) -> bool {
    let mut vars = BTreeSet::new();
    vars_of(f, &mut vars);
    vars_of(g, &mut vars);
    all_envs(&vars).iter().all(|env| eval(f, env) == eval(g, env))
}

fn oracle_satisfiable(f: &Formula) -> bool {
    let mut vars = BTreeSet::new();
    vars_of(f, &mut vars);
    all_envs(&vars).iter().any(|env| eval(f, env))
}

fn clause_true(c: &Clause, env: &Env) -> bool {
    c.literals().any(|l| env.get(&l.variable).copied().unwrap_or(false) == l.positive)
}

fn clause_vars(cs: &[&Clause]) -> BTreeSet<String> {
    cs.iter().flat_map(|c| c.literals().map(|l| l.variable.clone())).collect()
}

fn clauses_satisfiable(cs: &ClauseSet) -> bool {
    let all: Vec<&Clause> = cs.iter().collect();
    all_envs(&clause_vars(&all)).iter().any(|env| all.iter().all(|c| clause_true(c, env)))
}

/// Every assignment satisfying both parents satisfies the resolvent.
fn resolvent_sound(a: &Clause, b: &Clause, r: &Clause) -> bool {
    all_envs(&clause_vars(&[a, b, r]))
        .iter()
        .all(|env| !(clause_true(a, env) && clause_true(b, env)) || clause_true(r, env))
}

fn is_literal(f: &Formula) -> bool {
    match f.node() {
        Node::Var(_) => true,
        Node::Not(g) => matches!(g.node(), Node::Var(_)),
        _ => false,
    }
}

fn only(f: &Formula, op: BinOp, leaf: &dyn Fn(&Formula) -> bool) -> bool {
    match f.node() {
        Node::Binary(o, l, r) if *o == op => only(l, op, leaf) && only(r, op, leaf),
        _ => leaf(f),
    }
}

fn shape_nnf(f: &Formula) -> bool {
    match f.node() {
        Node::Binary(BinOp::And | BinOp::Or, l, r) => shape_nnf(l) && shape_nnf(r),
        _ => is_literal(f),
    }
}

fn shape_normal(f: &Formula, outer: BinOp, inner: BinOp) -> bool {
    matches!(f.node(), Node::Const(_)) || only(f, outer, &|c| only(c, inner, &is_literal))
}

// --------------------------------------------------------------- criteria

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let exercise = load("faulty-software.xml");
    let mut actions = example_prefix();
    actions.extend(example_refutation());
    let (state, results) = replay(&exercise, "e2e", &actions, &Settings::default());
    for (a, r) in actions.iter().zip(&results) {
        let r = r.as_ref().map_err(|e| format!("{a:?}: {e}"))?;
        ensure!(r.accepted, "{a:?} was rejected");
    }
    ensure!(state.is_complete(), "exercise not complete after {} actions", actions.len());
    let formulae = state.environment["FORMULAE"].clone();
    let conclusion = state.environment["CONCLUSIONFORMULA"].clone();
    let combined = logic_tutor::session::inference_formula(&[&formulae, &conclusion]).ok_or("no combination")?;
    ensure!(!logic_tutor_core::formula::satisfiable(&combined).unwrap(), "satisfiable() holds for {combined}");
    ensure!(!oracle_satisfiable(&combined), "oracle finds {combined} satisfiable");
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("{} actions, combined formula unsatisfiable, {elapsed:.0?}", actions.len()))
}

fn interchange_diagnosis() -> Outcome {
    let solution = parse("!B -> (D & U)").unwrap();
    let student = "(D & U) -> !B";
    let config = FeedbackConfig::default();
    let analysis = analyse(student, &solution, &config);
    let report = logic_tutor_core::feedback::generate_feedback(student, &solution, &config);
    ensure!(report == analysis.report, "generate_feedback and analyse disagree");
    let want =
        [ItemKind::VerdictMessage, ItemKind::MisconceptionGeneral, ItemKind::MisconceptionPrecise, ItemKind::Highlight];
    ensure!(report.kinds() == want, "items {:?}", report.kinds());
    let precise = report.find(ItemKind::MisconceptionPrecise).unwrap();
    ensure!(precise.key.contains("implication-swap"), "precise item {}", precise.key);
    let sequence = analysis.diagnosis.ok_or("no reversion sequence")?;
    ensure!(sequence.len() == 1, "sequence of length {}", sequence.len());
    ensure!(same_truth_table(&sequence.result, &solution), "sequence does not restore the solution");
    ensure!(analysis.class == ErrorClass::RuleDiagnosed("implication-swap".into()), "class {}", analysis.class);
    Ok("verdict, general, precise (interchange), highlight; sequence length 1".into())
}

fn reversion_property() -> Outcome {
    const VARS: [&str; 4] = ["A", "B", "C", "D"];
    const CASES: usize = 500;
    let start = Instant::now();
    let catalogue = RuleCatalogue::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut cases, mut restored, mut cancelled) = (0, 0, 0);
    while cases < CASES {
        let solution = random_solution(&mut rng, &VARS, 5);
        let k = 1 + cases % 2;
        let Some(student) = mutate_independent(&mut rng, &solution, k) else { continue };
        cases += 1;
        if same_truth_table(&student, &solution) {
            cancelled += 1;
            continue;
        }
        let report = search_reversion(&student, &solution, &catalogue, SearchLimits::default()).unwrap();
        match report.outcome {
            SearchOutcome::Found(seq) => {
                ensure!(seq.len() <= k, "{student} vs {solution}: length {} for k = {k}", seq.len());
                let result = seq.replay(&student, &catalogue).unwrap();
                ensure!(same_truth_table(&result, &solution), "{student}: replay does not restore {solution}");
                restored += 1;
            }
            other => return Err(format!("{student} vs {solution} (k = {k}) not a cancellation: {other:?}")),
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    let rate = restored as f64 / cases as f64 * 100.0;
    let detail = format!(
        "{restored}/{cases} restored ({rate:.1}%), {cancelled} cancellations into equivalence, \
         all others restored with length <= k, {elapsed:.1?}"
    );
    if rate >= 95.0 {
        Ok(detail)
    } else {
        Err(format!("{detail}; below the 95% target"))
    }
}

fn depth_bound() -> Outcome {
    // Three independent mistakes: swapped implication, `|` for `&`, dropped negation.
    let solution = parse("(A -> B) & (C -> !D)").unwrap();
    let student_text = "(B -> A) | (C -> D)";
    let student = parse(student_text).unwrap();
    let limits = SearchLimits { max_length: 2, candidate_cap: usize::MAX };
    let outcome = search_reversion(&student, &solution, &RuleCatalogue::standard(), limits).unwrap().outcome;
    ensure!(outcome == SearchOutcome::Exhausted, "search at length 2: {outcome:?}");
    let analysis = analyse(student_text, &solution, &FeedbackConfig::default());
    ensure!(analysis.diagnosis.is_none(), "a diagnosis was found");
    ensure!(
        analysis.report.kinds() == [ItemKind::VerdictMessage, ItemKind::Counterexample],
        "items {:?}",
        analysis.report.kinds()
    );
    let assignment =
        analysis.report.find(ItemKind::Counterexample).unwrap().assignment.clone().ok_or("no assignment")?;
    let env: Env = assignment.iter().map(|(n, b)| (n.to_string(), b)).collect();
    ensure!(eval(&student, &env) != eval(&solution, &env), "assignment {env:?} does not distinguish");
    Ok(format!("no sequence of length <= 2; counterexample {env:?} verified"))
}

fn normal_forms() -> Outcome {
    const VARS: [&str; 6] = ["A", "B", "C", "D", "E", "F"];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    for _ in 0..1000 {
        let width = rng.gen_range(1..=6);
        let f = random_formula(&mut rng, &VARS[..width], 5);
        for (name, g, own, shape) in [
            ("nnf", to_nnf(&f), is_nnf as fn(&Formula) -> bool, shape_nnf as fn(&Formula) -> bool),
            ("cnf", to_cnf(&f), is_cnf, |g: &Formula| shape_normal(g, BinOp::And, BinOp::Or)),
            ("dnf", to_dnf(&f), is_dnf, |g: &Formula| shape_normal(g, BinOp::Or, BinOp::And)),
        ] {
            ensure!(own(&g), "is_{name} rejects to_{name}({f}) = {g}");
            ensure!(shape(&g), "to_{name}({f}) = {g} has the wrong shape");
            ensure!(same_truth_table(&f, &g), "to_{name}({f}) = {g} changes the truth table");
            checked += 1;
        }
    }
    Ok(format!("{checked} conversions of 1000 formulas, zero failures"))
}

fn resolution_oracle() -> Outcome {
    const VARS: [&str; 6] = ["A", "B", "C", "D", "E", "F"];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut refuted, mut satisfiable, mut steps) = (0, 0, 0);
    for i in 0..200 {
        let vars = &VARS[..rng.gen_range(2..=6)];
        let count = rng.gen_range(2..=14);
        let cs = random_clauses(&mut rng, vars, count, 3);
        let sat = clauses_satisfiable(&cs);
        let derivation = auto_refute(&cs, DEFAULT_NODE_CAP).map_err(|e| format!("case {i}: {e}"))?;
        ensure!(
            derivation.is_some() != sat,
            "case {i}: {cs:?} satisfiable = {sat}, refutation = {}",
            derivation.is_some()
        );
        if let Some(d) = &derivation {
            ensure!(
                d.ends_in_empty_clause() || cs.iter().any(|c| c.literals().next().is_none()),
                "case {i}: no empty clause"
            );
            refuted += 1;
            let mut state = ResolutionState::from_clauses(&cs);
            for s in &d.steps {
                let outcome =
                    state.resolve_step(s.parents[0], s.parents[1], Some(&s.pivot)).map_err(|e| e.to_string())?;
                let (a, b) = (&state.nodes()[s.parents[0]].clause, &state.nodes()[s.parents[1]].clause);
                ensure!(resolvent_sound(a, b, &outcome.clause), "case {i}: unsound resolvent {}", outcome.clause);
                steps += 1;
            }
            ensure!(state.goal_reached(), "case {i}: replay does not reach the empty clause");
        } else {
            satisfiable += 1;
        }
        // Random student steps: whatever is accepted must be sound.
        let mut state = ResolutionState::from_clauses(&cs);
        for _ in 0..10 {
            let n = state.nodes().len();
            let (x, y) = (rng.gen_range(0..n), rng.gen_range(0..n));
            let pivot = vars.choose(&mut rng).map(|v| v.to_string());
            if let Ok(outcome) = state.resolve_step(x, y, pivot.as_deref()) {
                let (a, b) = (&state.nodes()[x].clause, &state.nodes()[y].clause);
                ensure!(resolvent_sound(a, b, &outcome.clause), "case {i}: unsound resolvent {}", outcome.clause);
                steps += 1;
            }
        }
    }
    ensure!(refuted > 20 && satisfiable > 20, "unbalanced sample: {refuted} refuted, {satisfiable} satisfiable");
    Ok(format!("200 clause sets ({refuted} refuted, {satisfiable} satisfiable), {steps} resolvents sound"))
}

/// Candidate actions per task for the fuzzer, right and wrong alike.
fn action_pool(file: &str) -> Vec<Vec<Action>> {
    let task = |t: usize, kinds: Vec<ActionKind>| kinds.into_iter().map(|kind| Action { task: t, kind }).collect();
    let transform = |text: &str| ActionKind::SubmitTransformation { text: text.into() };
    let formula = |statement: usize, text: &str| ActionKind::SubmitFormula { statement, text: text.into() };
    let vars = |names: &[&str]| ActionKind::PickVariables { variables: names.iter().map(|s| s.to_string()).collect() };
    match file {
        "faulty-software.xml" => {
            let mut resolution: Vec<ActionKind> = example_refutation().into_iter().map(|a| a.kind).collect();
            resolution.push(ActionKind::ResolveStep { clauses: [0, 0], pivot: None });
            resolution.push(ActionKind::ResolveStep { clauses: [0, 1], pivot: Some("U".into()) });
            resolution.push(ActionKind::ResolveStep { clauses: [0, 99], pivot: None });
            vec![
                task(0, vec![vars(&["B", "D", "U"]), vars(&["B", "D"]), vars(&["B", "D", "X"]), vars(&["Q"])]),
                task(
                    1,
                    vec![
                        formula(0, "D -> B"),
                        formula(1, "B -> (D & U)"),
                        formula(2, "!(B & D & U)"),
                        formula(0, "B -> D"),
                        formula(1, "(D & U) -> B"),
                        formula(2, "B & D & U"),
                        formula(1, "B -> "),
                        formula(0, "X -> B"),
                        formula(5, "B"),
                    ],
                ),
                task(2, vec![formula(0, "!D"), formula(0, "D"), formula(0, "!(")]),
                task(3, vec![formula(0, EXAMPLE_INFERENCE), formula(0, "B & !B"), formula(0, "(D -> B) & !D")]),
                task(
                    4,
                    vec![
                        transform(EXAMPLE_CNF),
                        transform("B | D"),
                        transform("(!D | B) & (!B | D & U)"),
                        ActionKind::Undo,
                        ActionKind::CompleteTask,
                    ],
                ),
                task(5, resolution),
            ]
        }
        "only-if.xml" => {
            let rule = |rule: &str| ActionKind::ApplyRule { rule: rule.into(), position: Default::default() };
            vec![
                task(0, vec![vars(&["B", "D", "U"]), vars(&["B"])]),
                task(1, vec![formula(0, "!B -> (D & U)"), formula(0, "(D & U) -> !B"), formula(0, "B | D")]),
                task(
                    2,
                    vec![
                        rule("implication-elimination"),
                        rule("double-negation"),
                        rule("de-morgan-and"),
                        ActionKind::Undo,
                        ActionKind::CompleteTask,
                        transform("B | D & U"),
                    ],
                ),
            ]
        }
        "admin.xml" => vec![
            task(0, vec![ActionKind::Acknowledge, ActionKind::CompleteTask]),
            task(
                1,
                vec![
                    ActionKind::AnswerQuestionnaire { answers: vec![1, 0, 1, 0] },
                    ActionKind::AnswerQuestionnaire { answers: vec![0, 0, 0, 0] },
                    ActionKind::AnswerQuestionnaire { answers: vec![7] },
                ],
            ),
            task(
                2,
                vec![
                    ActionKind::SubmitFeedback { text: "fine".into() },
                    ActionKind::SubmitFeedback { text: String::new() },
                ],
            ),
        ],
        other => unreachable!("no pool for {other}"),
    }
}

fn fuzz_sequence(rng: &mut ChaCha8Rng, exercise: &Exercise, pool: &[Vec<Action>], settings: &Settings) -> Vec<Action> {
    let mut state = SessionState::start("fuzz", exercise);
    let mut actions = Vec::new();
    for _ in 0..rng.gen_range(5..40) {
        // Mostly the active task, sometimes any task.
        let task = match state.current_task() {
            Some(t) if rng.gen_ratio(4, 5) => t,
            _ => rng.gen_range(0..pool.len()),
        };
        let action = pool[task].choose(rng).unwrap().clone();
        let _ = logic_tutor::session::dispatch(exercise, &mut state, &action, settings);
        actions.push(action);
    }
    actions
}

/// Environment keys are exactly the outputs of completed tasks, and no
/// completed task is ever reopened.
fn pipeline_safe(exercise: &Exercise, actions: &[Action], settings: &Settings) -> Result<(), String> {
    let mut state = SessionState::start("check", exercise);
    let mut done: BTreeSet<usize> = BTreeSet::new();
    for (i, action) in actions.iter().enumerate() {
        let _ = logic_tutor::session::dispatch(exercise, &mut state, action, settings);
        let completed: BTreeSet<usize> = state
            .tasks
            .iter()
            .enumerate()
            .filter(|(_, t)| matches!(t, TaskState::Completed { .. }))
            .map(|(i, _)| i)
            .collect();
        ensure!(done.is_subset(&completed), "step {i}: a completed task was reopened");
        let outputs: BTreeSet<&str> = completed.iter().filter_map(|t| exercise.tasks[*t].output.as_deref()).collect();
        let keys: BTreeSet<&str> = state.environment.keys().map(String::as_str).collect();
        ensure!(keys == outputs, "step {i}: environment {keys:?}, completed outputs {outputs:?}");
        done = completed;
    }
    Ok(())
}

fn replay_determinism() -> Outcome {
    let settings = Settings::default();
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let files = ["faulty-software.xml", "only-if.xml", "admin.xml"];
    let mut total_actions = 0;
    let mut completed_runs = 0;
    for i in 0..50 {
        let file = files[i % files.len()];
        let exercise = load(file);
        let pool = action_pool(file);
        let mut actions = fuzz_sequence(&mut rng, &exercise, &pool, &settings);
        if i % 10 == 0 && file == "faulty-software.xml" {
            // Make sure some sequences go all the way through.
            actions.extend(example_prefix());
            actions.extend(example_refutation());
        }
        total_actions += actions.len();
        let wire = serde_json::to_string(&actions).unwrap();
        let recorded: Vec<Action> = serde_json::from_str(&wire).unwrap();
        ensure!(recorded == actions, "sequence {i}: actions do not survive serialization");
        let (first, first_results) = replay(&exercise, "s", &actions, &settings);
        let (second, second_results) = replay(&exercise, "s", &recorded, &settings);
        let snapshot = |state: &SessionState| {
            Snapshot {
                version: 1,
                exercise_id: "x".into(),
                group: None,
                state: state.clone(),
                actions: actions.clone(),
            }
            .to_json()
        };
        ensure!(snapshot(&first) == snapshot(&second), "sequence {i} ({file}): snapshots differ");
        ensure!(format!("{first_results:?}") == format!("{second_results:?}"), "sequence {i} ({file}): reports differ");
        let restored = Snapshot::from_json(&snapshot(&first)).unwrap().restore(&exercise, &settings);
        ensure!(
            restored.as_ref().is_ok_and(|s| *s == first),
            "sequence {i} ({file}): snapshot restore differs: {restored:?}"
        );
        pipeline_safe(&exercise, &actions, &settings).map_err(|e| format!("sequence {i} ({file}): {e}"))?;
        completed_runs += usize::from(first.is_complete());
    }
    Ok(format!(
        "50 sequences, {total_actions} actions, {completed_runs} reach the end; identical snapshots and reports"
    ))
}

fn stats_arithmetic() -> Outcome {
    let record = |seq: u64, session: &str, class: &str| EventRecord {
        seq,
        timestamp: "2026-01-01T00:00:00.000Z".into(),
        session: session.into(),
        exercise: "ex".into(),
        group: Some("EG1".into()),
        task: 1,
        statement: Some(0),
        statement_type: Some("only-if".into()),
        action: "submit-formula".into(),
        accepted: class == "none",
        classification: class.parse().unwrap(),
        text: String::new(),
        score: None,
    };
    let swap = "rule-diagnosed:implication-swap";
    let xor = "rule-diagnosed:or-to-xor";
    // 4 sessions attempt; s1 and s3 err with the swap: 2/4 and 2/4.
    let log = [
        record(1, "s1", swap),
        record(2, "s1", "none"),
        record(3, "s2", "none"),
        record(4, "s3", swap),
        record(5, "s4", "none"),
    ];
    let row = compute_stats(&log, &StatFilter::default()).rows.remove(0);
    ensure!(row.n == 4 && row.error_rate == 0.5 && row.most_frequent_error_rate == 0.5, "{row:?}");
    // Errors {swap, swap, or-to-xor} across 3 of 3 sessions: error rate 1, mode swap at 2/3.
    let log = [record(1, "a", swap), record(2, "b", swap), record(3, "c", xor)];
    let row = compute_stats(&log, &StatFilter::default()).rows.remove(0);
    ensure!(row.error_rate == 1.0 && row.most_frequent_error_rate == 2.0 / 3.0, "{row:?}");
    ensure!(row.most_frequent_error == Some(ErrorClass::RuleDiagnosed("implication-swap".into())), "{row:?}");
    // One swap and one or-to-xor: tie broken by name.
    let log = [record(1, "a", xor), record(2, "b", swap)];
    let row = compute_stats(&log, &StatFilter::default()).rows.remove(0);
    ensure!(row.most_frequent_error.as_ref().map(ToString::to_string).as_deref() == Some(swap), "{row:?}");
    // Through the engine and the real log file.
    let dir = tempfile::tempdir().unwrap();
    let (log, _) = logic_tutor::log::EventLog::open(dir.path().join("events.jsonl")).unwrap();
    let mut engine = Engine::new(Settings::default(), Some(log));
    engine.load_dir(&exercises_dir()).unwrap();
    for text in ["B -> D", "D -> B", "B -> D", "D -> B"] {
        let id = engine.create_session("faulty-software-system-exercise", Some("EG2".into())).unwrap();
        engine.act(&id, pick(0, &["B", "D", "U"])).unwrap();
        engine.act(&id, submit(1, 0, text)).unwrap();
    }
    let rows = engine.stats(&StatFilter::default()).unwrap().rows;
    ensure!(rows.len() == 1 && rows[0].n == 4 && rows[0].error_rate == 0.5, "{rows:?}");
    ensure!(rows[0].most_frequent_error_rate == 0.5, "{rows:?}");
    Ok("2/4 -> 0.50/0.50, {swap, swap, or-to-xor} -> 1.00/0.67, ties by name, engine log 2/4 -> 0.50".into())
}

fn xml_round_trip() -> Outcome {
    let mut documents: Vec<(String, String)> = Vec::new();
    for entry in std::fs::read_dir(exercises_dir()).unwrap() {
        let path = entry.unwrap().path();
        documents.push((path.display().to_string(), std::fs::read_to_string(&path).unwrap()));
    }
    let legacy = std::fs::read_to_string(fixtures_dir().join("latex-legacy.xml")).unwrap();
    documents.push(("latex-legacy.xml (converted)".into(), convert_document(&legacy).map_err(|e| e.to_string())?));
    for (name, text) in &documents {
        let first = load_exercise(text).map_err(|e| format!("{name}: {e}"))?.exercise;
        let xml = to_xml(&first);
        let second = load_exercise(&xml).map_err(|e| format!("{name} after serializing: {e}"))?.exercise;
        ensure!(first == second, "{name}: exercise changes across a round trip");
        ensure!(to_xml(&second) == xml, "{name}: serialization is not stable");
    }
    for (file, want) in
        [("dangling-input.xml", "/Exercise/Task[3]/Input[1]"), ("duplicate-output.xml", "/Exercise/Task[3]/Output[1]")]
    {
        let text = std::fs::read_to_string(fixtures_dir().join(file)).unwrap();
        let failure = load_exercise(&text).err().ok_or(format!("{file} was accepted"))?;
        let ok = failure.errors.iter().any(|e| match (file, e) {
            ("dangling-input.xml", LoadError::DanglingInput { path, .. }) => path == want,
            ("duplicate-output.xml", LoadError::DuplicateOutput { path, .. }) => path == want,
            _ => false,
        });
        ensure!(ok, "{file}: errors {:?}", failure.errors);
    }
    Ok(format!("{} documents round-trip; dangling input and duplicate output rejected at their paths", documents.len()))
}

// ------------------------------------------------------------------ main

struct Criterion {
    name: &'static str,
    check: fn() -> Outcome,
    /// Documented as not attainable; FAIL is reported but does not fail the run.
    known_shortfall: bool,
}

fn main() {
    let criteria = [
        Criterion { name: "end-to-end example", check: end_to_end, known_shortfall: false },
        Criterion { name: "interchange diagnosis", check: interchange_diagnosis, known_shortfall: false },
        Criterion { name: "reversion property (>= 95%)", check: reversion_property, known_shortfall: true },
        Criterion { name: "depth bound", check: depth_bound, known_shortfall: false },
        Criterion { name: "normal forms", check: normal_forms, known_shortfall: false },
        Criterion { name: "resolution cross-oracle", check: resolution_oracle, known_shortfall: false },
        Criterion { name: "replay determinism", check: replay_determinism, known_shortfall: false },
        Criterion { name: "stats arithmetic", check: stats_arithmetic, known_shortfall: false },
        Criterion { name: "xml round trip", check: xml_round_trip, known_shortfall: false },
    ];
    // Keep panic output of failed checks short; the outcome line says enough.
    std::panic::set_hook(Box::new(|_| {}));
    let mut unexpected = 0;
    for c in &criteria {
        let outcome = catch_unwind(AssertUnwindSafe(c.check)).unwrap_or_else(|panic| {
            let message = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {message}"))
        });
        match outcome {
            Ok(detail) => println!("PASS  {}: {detail}", c.name),
            Err(detail) if c.known_shortfall => println!("FAIL  {}: {detail} (known shortfall, see README)", c.name),
            Err(detail) => {
                println!("FAIL  {}: {detail}", c.name);
                unexpected += 1;
            }
        }
    }
    if unexpected > 0 {
        std::process::exit(1);
    }
}
