//! The per-session task state machine.
//!
//! A session walks the exercise's tasks in declaration order. Each action is
//! routed to the active task; a task that completes binds its output in the
//! environment and the next task is entered. Actions that do not apply leave
//! the state untouched. Everything here is deterministic, so replaying the
//! recorded actions on a fresh session reproduces the same state.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use logic_tutor_core::feedback::{
    analyse, counterexample, syntax_report, ErrorClass, FeedbackConfig, FeedbackItem, FeedbackReport, ItemKind,
    RuleCatalogue, SearchLimits, Verdict, LEVEL_BASIC, LEVEL_VERDICT,
};
use logic_tutor_core::formula::{self, clauses, is_cnf, to_cnf, BinOp, Formula, Node, VariableSet};
use logic_tutor_core::resolution::{ClauseId, ResolutionError, ResolutionState, StepOutcome};
use logic_tutor_core::transform::{EquivalenceCatalogue, TransformError, TransformationState};
use logic_tutor_core::Path;
use serde::{Deserialize, Serialize};

use crate::exercise::{Exercise, FeedbackSettings, Statement, TaskKind, TaskSpec};

/// A value bound in the session environment under a task's output name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Value {
    Variables(VariableSet),
    Formula(Formula),
    Formulas(Vec<Formula>),
}

impl Value {
    /// The value read as one formula; a list is its conjunction.
    pub fn as_formula(&self) -> Option<Formula> {
        match self {
            Value::Formula(f) => Some(f.clone()),
            Value::Formulas(fs) => Formula::chain(BinOp::And, fs.iter().cloned()),
            Value::Variables(_) => None,
        }
    }

    fn formulas(&self) -> Vec<Formula> {
        match self {
            Value::Formula(f) => vec![f.clone()],
            Value::Formulas(fs) => fs.clone(),
            Value::Variables(_) => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum TaskState {
    NotStarted,
    InProgress {
        model: TaskModel,
    },
    Completed {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        output: Option<Value>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        response: Option<Response>,
    },
}

/// Working state of the active task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum TaskModel {
    /// Tasks answered by a single action.
    Open,
    /// Accepted answers per statement, in declaration order.
    Statements {
        accepted: Vec<Option<Formula>>,
    },
    Transformation {
        state: TransformationState,
    },
    Resolution {
        state: ResolutionState,
    },
}

/// What an administrative task recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Response {
    Answers { selected: Vec<usize>, score: Option<f64> },
    Text { text: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub id: String,
    pub exercise: String,
    /// Index of the active task; equal to the task count once finished.
    pub current: usize,
    pub tasks: Vec<TaskState>,
    pub environment: BTreeMap<String, Value>,
    /// Actions dispatched to each task, accepted or not.
    pub attempts: Vec<u32>,
}

/// A student action on one task. On the wire this is
/// `{"task": 1, "kind": "submit-formula", "payload": {...}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "wire::Action", try_from = "wire::Action")]
pub struct Action {
    pub task: usize,
    pub kind: ActionKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "kebab-case")]
pub enum ActionKind {
    SubmitFormula {
        #[serde(default)]
        statement: usize,
        text: String,
    },
    PickVariables {
        variables: Vec<String>,
    },
    SubmitTransformation {
        text: String,
    },
    ApplyRule {
        rule: String,
        #[serde(default)]
        position: Path,
    },
    Undo,
    ResolveStep {
        clauses: [ClauseId; 2],
        #[serde(default)]
        pivot: Option<String>,
    },
    CompleteTask,
    Acknowledge,
    AnswerQuestionnaire {
        answers: Vec<usize>,
    },
    SubmitFeedback {
        #[serde(default)]
        text: String,
    },
}

impl ActionKind {
    pub fn name(&self) -> &'static str {
        match self {
            ActionKind::SubmitFormula { .. } => "submit-formula",
            ActionKind::PickVariables { .. } => "pick-variables",
            ActionKind::SubmitTransformation { .. } => "submit-transformation",
            ActionKind::ApplyRule { .. } => "apply-rule",
            ActionKind::Undo => "undo",
            ActionKind::ResolveStep { .. } => "resolve-step",
            ActionKind::CompleteTask => "complete-task",
            ActionKind::Acknowledge => "acknowledge",
            ActionKind::AnswerQuestionnaire { .. } => "answer-questionnaire",
            ActionKind::SubmitFeedback { .. } => "submit-feedback",
        }
    }

    /// The raw text the student submitted, for the event log.
    pub fn text(&self) -> String {
        match self {
            ActionKind::SubmitFormula { text, .. }
            | ActionKind::SubmitTransformation { text }
            | ActionKind::SubmitFeedback { text } => text.clone(),
            ActionKind::PickVariables { variables } => variables.join(","),
            ActionKind::ApplyRule { rule, position } => {
                let p: Vec<String> = position.iter().map(u8::to_string).collect();
                format!("{rule}@{}", p.join("."))
            }
            ActionKind::ResolveStep { clauses, pivot } => match pivot {
                Some(p) => format!("{},{}/{p}", clauses[0], clauses[1]),
                None => format!("{},{}", clauses[0], clauses[1]),
            },
            ActionKind::AnswerQuestionnaire { answers } => {
                answers.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
            }
            ActionKind::Undo | ActionKind::CompleteTask | ActionKind::Acknowledge => String::new(),
        }
    }
}

mod wire {
    use serde::{Deserialize, Serialize};

    #[derive(Serialize, Deserialize)]
    pub struct Action {
        pub task: usize,
        pub kind: String,
        #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
        pub payload: serde_json::Value,
    }

    impl From<super::Action> for Action {
        fn from(a: super::Action) -> Self {
            let mut value = serde_json::to_value(&a.kind).expect("actions serialize");
            let payload = value.get_mut("payload").map(serde_json::Value::take).unwrap_or_default();
            Action { task: a.task, kind: a.kind.name().to_string(), payload }
        }
    }

    impl TryFrom<Action> for super::Action {
        type Error = String;

        fn try_from(a: Action) -> Result<Self, String> {
            let mut tagged = serde_json::Map::new();
            tagged.insert("kind".into(), a.kind.clone().into());
            if !a.payload.is_null() {
                tagged.insert("payload".into(), a.payload);
            }
            let kind = serde_json::from_value(tagged.into()).map_err(|e| format!("`{}`: {e}", a.kind))?;
            Ok(super::Action { task: a.task, kind })
        }
    }
}

/// A malformed action body, with the offending field.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{field}: {message}")]
pub struct FieldError {
    /// Dotted path such as `payload.text`.
    pub field: String,
    pub message: String,
}

impl Action {
    /// Parses the wire form, naming the field that does not fit.
    pub fn from_json(bytes: &[u8]) -> Result<Action, FieldError> {
        let de = &mut serde_json::Deserializer::from_slice(bytes);
        let raw: wire::Action = serde_path_to_error::deserialize(de).map_err(field_error)?;
        let mut tagged = serde_json::Map::new();
        tagged.insert("kind".into(), raw.kind.into());
        if !raw.payload.is_null() {
            tagged.insert("payload".into(), raw.payload);
        }
        let kind = serde_path_to_error::deserialize(serde_json::Value::Object(tagged)).map_err(field_error)?;
        Ok(Action { task: raw.task, kind })
    }
}

fn field_error<E: std::fmt::Display>(e: serde_path_to_error::Error<E>) -> FieldError {
    let message = e.inner().to_string();
    let mut field = e.path().to_string();
    if field == "." {
        // Missing fields are reported against their parent.
        field =
            message.split('`').nth(1).filter(|_| message.starts_with("missing field")).unwrap_or("body").to_string();
    } else if message.starts_with("missing field") {
        if let Some(name) = message.split('`').nth(1) {
            field = format!("{field}.{name}");
        }
    }
    FieldError { field, message }
}

/// What changed, so a client need not refetch the session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDelta {
    /// The active task after the action, `None` once the exercise is done.
    pub current_task: Option<usize>,
    pub completed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<String>,
    /// Latest formula of a transformation task.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<Formula>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clause: Option<StepOutcome>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionResult {
    pub accepted: bool,
    pub report: FeedbackReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<StateDelta>,
}

/// An action's result plus what the event log records about it.
#[derive(Debug, Clone, PartialEq)]
pub struct Dispatched {
    pub result: ActionResult,
    pub class: ErrorClass,
    pub statement: Option<usize>,
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("no session `{0}`")]
    SessionNotFound(String),
    #[error("no exercise `{0}`")]
    ExerciseNotFound(String),
    #[error("task {task} is not active")]
    TaskNotActive { task: usize, current: Option<usize> },
    #[error("malformed action: {0}")]
    MalformedAction(String),
    #[error("`{0}` is not one of the offered options")]
    UnknownOption(String),
    #[error("session is busy with another action")]
    Busy,
    #[error("event log unavailable: {0}")]
    Storage(String),
    #[error("internal error: {0}")]
    Internal(String),
}

/// Catalogues and search limits shared by all sessions.
#[derive(Debug, Clone)]
pub struct Settings {
    pub reversion_rules: Arc<RuleCatalogue>,
    pub equivalences: Arc<EquivalenceCatalogue>,
    pub limits: SearchLimits,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            reversion_rules: Arc::new(RuleCatalogue::standard()),
            equivalences: Arc::new(EquivalenceCatalogue::standard()),
            limits: SearchLimits::default(),
        }
    }
}

impl SessionState {
    /// A fresh session positioned on the first task.
    pub fn start(id: impl Into<String>, exercise: &Exercise) -> Self {
        let mut state = SessionState {
            id: id.into(),
            exercise: exercise.name.clone(),
            current: 0,
            tasks: vec![TaskState::NotStarted; exercise.tasks.len()],
            environment: BTreeMap::new(),
            attempts: vec![0; exercise.tasks.len()],
        };
        if !exercise.tasks.is_empty() {
            state.enter(exercise, 0).expect("the first task has no inputs");
        }
        state
    }

    pub fn is_complete(&self) -> bool {
        self.current >= self.tasks.len()
    }

    pub fn current_task(&self) -> Option<usize> {
        (!self.is_complete()).then_some(self.current)
    }

    /// Inputs of task `index`, or `None` if any is unbound.
    fn inputs<'a>(&'a self, spec: &TaskSpec) -> Option<Vec<&'a Value>> {
        spec.inputs.iter().map(|name| self.environment.get(name)).collect()
    }

    fn enter(&mut self, exercise: &Exercise, index: usize) -> Result<(), EngineError> {
        let spec = &exercise.tasks[index];
        let inputs = self
            .inputs(spec)
            .ok_or_else(|| EngineError::Internal(format!("task {index} entered with an unbound input")))?;
        let single = || inputs.first().and_then(|v| v.as_formula());
        let model = match &spec.kind {
            TaskKind::CreateFormulas { statements, .. } => {
                TaskModel::Statements { accepted: vec![None; statements.len()] }
            }
            TaskKind::ManualTransformation { target } | TaskKind::GuiTransformation { target } => {
                let original = single().ok_or_else(|| EngineError::Internal("transformation without input".into()))?;
                TaskModel::Transformation { state: TransformationState::new(original, target.clone()) }
            }
            TaskKind::Resolution => {
                let f = single().ok_or_else(|| EngineError::Internal("resolution without input".into()))?;
                let cnf = if is_cnf(&f) { f } else { to_cnf(&f) };
                let cs = clauses(&cnf).map_err(|e| EngineError::Internal(e.to_string()))?;
                TaskModel::Resolution { state: ResolutionState::from_clauses(&cs) }
            }
            _ => TaskModel::Open,
        };
        self.tasks[index] = TaskState::InProgress { model };
        Ok(())
    }

    fn complete(
        &mut self,
        exercise: &Exercise,
        index: usize,
        output: Option<Value>,
        response: Option<Response>,
    ) -> Result<StateDelta, EngineError> {
        let name = exercise.tasks[index].output.clone();
        if let (Some(name), Some(value)) = (&name, &output) {
            self.environment.insert(name.clone(), value.clone());
        }
        self.tasks[index] = TaskState::Completed { output, response };
        self.current = index + 1;
        if self.current < self.tasks.len() {
            self.enter(exercise, self.current)?;
        }
        Ok(StateDelta { current_task: self.current_task(), completed: true, bound: name, formula: None, clause: None })
    }

    fn progress(&self) -> StateDelta {
        StateDelta { current_task: self.current_task(), completed: false, bound: None, formula: None, clause: None }
    }
}

/// Applies `action` to `session`. Errors never change the state.
pub fn dispatch(
    exercise: &Exercise,
    session: &mut SessionState,
    action: &Action,
    settings: &Settings,
) -> Result<Dispatched, EngineError> {
    let t = action.task;
    let spec =
        exercise.tasks.get(t).ok_or_else(|| EngineError::MalformedAction(format!("exercise has no task {t}")))?;
    match &session.tasks[t] {
        TaskState::Completed { .. } => {
            let report = FeedbackReport::new(Verdict::Correct).with_item(FeedbackItem::info("task.already-completed"));
            return Ok(plain(ActionResult { accepted: false, report, delta: None }, ErrorClass::None));
        }
        TaskState::NotStarted => return Err(EngineError::TaskNotActive { task: t, current: session.current_task() }),
        TaskState::InProgress { .. } => {}
    }
    // Handlers work on a copy, so a failing action leaves no trace.
    let mut next = session.clone();
    next.attempts[t] += 1;
    let TaskState::InProgress { model } = &mut next.tasks[t] else { unreachable!("checked above") };
    let mut model = model.clone();
    let outcome = handle(exercise, t, &next, &mut model, &action.kind, settings)?;
    if let TaskState::InProgress { model: m } = &mut next.tasks[t] {
        *m = model;
    }
    let mut result = ActionResult { accepted: outcome.accepted, report: gate(outcome.report, spec), delta: None };
    result.delta = Some(match outcome.completion {
        Some((output, response)) => next.complete(exercise, t, output, response)?,
        None => next.progress(),
    });
    if let Some(delta) = &mut result.delta {
        delta.formula = outcome.formula;
        delta.clause = outcome.clause;
    }
    *session = next;
    Ok(Dispatched { result, class: outcome.class, statement: outcome.statement, score: outcome.score })
}

fn plain(result: ActionResult, class: ErrorClass) -> Dispatched {
    Dispatched { result, class, statement: None, score: None }
}

/// Keeps verdict items plus items whose level the task enables.
fn gate(mut report: FeedbackReport, spec: &TaskSpec) -> FeedbackReport {
    report.items.retain(|i| i.kind == ItemKind::VerdictMessage || spec.feedback_levels.contains(&i.level));
    report
}

struct Outcome {
    accepted: bool,
    report: FeedbackReport,
    class: ErrorClass,
    completion: Option<(Option<Value>, Option<Response>)>,
    statement: Option<usize>,
    score: Option<f64>,
    formula: Option<Formula>,
    clause: Option<StepOutcome>,
}

impl Outcome {
    fn new(report: FeedbackReport, class: ErrorClass) -> Self {
        Outcome {
            accepted: report.verdict.is_correct(),
            report,
            class,
            completion: None,
            statement: None,
            score: None,
            formula: None,
            clause: None,
        }
    }

    fn rejected(key: &str, class: ErrorClass) -> Self {
        let report = FeedbackReport::new(Verdict::SemanticallyWrong)
            .with_item(FeedbackItem::new(LEVEL_VERDICT, ItemKind::VerdictMessage, "verdict.wrong"))
            .with_item(FeedbackItem::new(LEVEL_VERDICT, ItemKind::Info, key));
        Outcome::new(report, class)
    }

    fn done(mut self, output: Option<Value>, response: Option<Response>) -> Self {
        self.completion = Some((output, response));
        self
    }
}

fn correct() -> FeedbackReport {
    FeedbackReport::new(Verdict::Correct).with_item(FeedbackItem::new(
        LEVEL_VERDICT,
        ItemKind::VerdictMessage,
        "verdict.correct",
    ))
}

fn handle(
    exercise: &Exercise,
    task: usize,
    session: &SessionState,
    model: &mut TaskModel,
    kind: &ActionKind,
    settings: &Settings,
) -> Result<Outcome, EngineError> {
    let spec = &exercise.tasks[task];
    let inputs = session.inputs(spec).ok_or_else(|| EngineError::Internal("active task with unbound input".into()))?;
    match (&spec.kind, model, kind) {
        (TaskKind::PickVariables { options }, _, ActionKind::PickVariables { variables }) => {
            let offered: VariableSet = options.iter().map(|o| o.name.as_str()).collect();
            if let Some(unknown) = variables.iter().find(|v| !offered.contains(v)) {
                return Err(EngineError::UnknownOption(unknown.clone()));
            }
            let solution = exercise.variable_solution(task).expect("pick-variables task");
            Ok(pick_variables(&solution, &VariableSet::from_names(variables.iter().map(String::as_str))))
        }
        (
            TaskKind::CreateFormulas { statements, feedback },
            TaskModel::Statements { accepted },
            ActionKind::SubmitFormula { statement, text },
        ) => {
            let s = *statement;
            let spec_statement =
                statements.get(s).ok_or_else(|| EngineError::MalformedAction(format!("task has no statement {s}")))?;
            if accepted[s].is_some() {
                let report = correct().with_item(FeedbackItem::info("statement.already-accepted"));
                let mut out = Outcome::new(report, ErrorClass::None);
                out.accepted = false;
                out.statement = Some(s);
                return Ok(out);
            }
            let allowed = inputs.iter().fold(None, |acc: Option<VariableSet>, v| match v {
                Value::Variables(vars) => Some(acc.map_or_else(|| vars.clone(), |a| a.union(vars))),
                _ => acc,
            });
            let config = feedback_config(spec, feedback, allowed, settings);
            let analysis = analyse(text, &spec_statement.solution, &config);
            let mut out = Outcome::new(analysis.report, analysis.class);
            out.statement = Some(s);
            if out.accepted {
                accepted[s] = analysis.student.map(|f| f.without_spans());
                if accepted.iter().all(Option::is_some) {
                    let list = accepted.iter().flatten().cloned().collect();
                    return Ok(out.done(Some(Value::Formulas(list)), None));
                }
            }
            Ok(out)
        }
        (TaskKind::InferenceFormula, _, ActionKind::SubmitFormula { text, .. }) => {
            let student = match formula::parse(text) {
                Ok(f) => f,
                Err(e) => return Ok(Outcome::new(syntax_report(&e), ErrorClass::Syntax)),
            };
            match check_inference(&inputs, &student) {
                Ok(report) if report.verdict.is_correct() => {
                    Ok(Outcome::new(report, ErrorClass::None).done(Some(Value::Formula(student.without_spans())), None))
                }
                Ok(report) => Ok(Outcome::new(report, ErrorClass::Inequivalent)),
                Err(_) => Ok(Outcome::rejected("formula.too-many-variables", ErrorClass::Inequivalent)),
            }
        }
        // The text-field variant takes whole formulas, the GUI variant only
        // named rule applications.
        (TaskKind::ManualTransformation { .. }, TaskModel::Transformation { state }, kind)
            if !matches!(kind, ActionKind::ApplyRule { .. }) =>
        {
            transformation(state, kind, settings)
        }
        (TaskKind::GuiTransformation { .. }, TaskModel::Transformation { state }, kind)
            if !matches!(kind, ActionKind::SubmitTransformation { .. }) =>
        {
            transformation(state, kind, settings)
        }
        (TaskKind::Resolution, TaskModel::Resolution { state }, ActionKind::ResolveStep { clauses, pivot }) => {
            resolution(state, *clauses, pivot.as_deref())
        }
        (TaskKind::Message, _, ActionKind::Acknowledge) => {
            Ok(Outcome::new(correct(), ErrorClass::None).done(None, None))
        }
        (TaskKind::Questionnaire { questions }, _, ActionKind::AnswerQuestionnaire { answers }) => {
            if answers.len() != questions.len() {
                return Err(EngineError::MalformedAction(format!(
                    "expected {} answers, got {}",
                    questions.len(),
                    answers.len()
                )));
            }
            for (i, (q, a)) in questions.iter().zip(answers).enumerate() {
                if *a >= q.options.len() {
                    return Err(EngineError::MalformedAction(format!("question {i} has no option {a}")));
                }
            }
            let graded: Vec<bool> =
                questions.iter().zip(answers).filter_map(|(q, a)| q.answer.map(|k| k == *a)).collect();
            let right = graded.iter().filter(|g| **g).count();
            let score = (!graded.is_empty()).then(|| right as f64 / graded.len() as f64);
            let report = correct().with_item(
                FeedbackItem::new(LEVEL_BASIC, ItemKind::Info, "questionnaire.recorded")
                    .param("correct", right)
                    .param("graded", graded.len()),
            );
            let mut out = Outcome::new(report, ErrorClass::None);
            out.score = score;
            Ok(out.done(None, Some(Response::Answers { selected: answers.clone(), score })))
        }
        (TaskKind::CollectFeedback, _, ActionKind::SubmitFeedback { text }) => {
            Ok(Outcome::new(correct(), ErrorClass::None).done(None, Some(Response::Text { text: text.clone() })))
        }
        (kind_spec, _, action) => Err(EngineError::MalformedAction(format!(
            "`{}` does not apply to {} tasks",
            action.name(),
            kind_spec.task_type().name()
        ))),
    }
}

fn feedback_config(
    spec: &TaskSpec,
    settings_xml: &FeedbackSettings,
    allowed: Option<VariableSet>,
    settings: &Settings,
) -> FeedbackConfig {
    let mut limits = settings.limits;
    if let Some(n) = settings_xml.max_reversion_length {
        limits.max_length = n;
    }
    FeedbackConfig {
        max_level: spec.max_level(),
        catalogue: settings.reversion_rules.clone(),
        meanings: settings_xml.meanings.clone(),
        allowed,
        required: None,
        limits,
    }
}

/// Feedback on `text` for one statement of a `CreateFormulas` task, as a
/// session whose earlier tasks were solved correctly would give it.
/// `max_level` further restricts the task's enabled levels.
pub fn diagnose_statement(
    exercise: &Exercise,
    task: usize,
    statement: usize,
    text: &str,
    settings: &Settings,
    max_level: Option<u8>,
) -> Result<(FeedbackReport, ErrorClass), EngineError> {
    let spec =
        exercise.tasks.get(task).ok_or_else(|| EngineError::MalformedAction(format!("exercise has no task {task}")))?;
    let TaskKind::CreateFormulas { statements, feedback } = &spec.kind else {
        return Err(EngineError::MalformedAction(format!("task {task} is not a CreateFormulas task")));
    };
    let solution = &statements
        .get(statement)
        .ok_or_else(|| EngineError::MalformedAction(format!("task has no statement {statement}")))?
        .solution;
    let allowed = spec
        .inputs
        .iter()
        .filter_map(|name| exercise.tasks.iter().position(|t| t.output.as_deref() == Some(name)))
        .filter_map(|i| exercise.variable_solution(i))
        .reduce(|a, b| a.union(&b));
    let mut spec = spec.clone();
    if let Some(max) = max_level {
        spec.feedback_levels.retain(|l| *l <= max);
    }
    let config = feedback_config(&spec, feedback, allowed, settings);
    let analysis = analyse(text, solution, &config);
    Ok((gate(analysis.report, &spec), analysis.class))
}

/// `φ1 ∧ … ∧ φk ∧ ¬φ`: every input but the last is a premise, the last is
/// the conclusion.
pub fn inference_formula(inputs: &[&Value]) -> Option<Formula> {
    Formula::chain(BinOp::And, inference_parts(inputs)?)
}

/// The conjuncts of the canonical combination, premises flattened.
fn inference_parts(inputs: &[&Value]) -> Option<Vec<Formula>> {
    let (conclusion, premises) = inputs.split_last()?;
    let mut parts: Vec<Formula> = Vec::new();
    for f in premises.iter().flat_map(|v| v.formulas()) {
        conjuncts(&f, &mut parts);
    }
    parts.push(Formula::not(conclusion.as_formula()?));
    Some(parts)
}

fn conjuncts(f: &Formula, out: &mut Vec<Formula>) {
    match f.node() {
        Node::Binary(BinOp::And, l, r) => {
            conjuncts(l, out);
            conjuncts(r, out);
        }
        _ => out.push(f.clone()),
    }
}

/// Checks a student's combination of the inputs.
///
/// When the premises do imply the conclusion, the canonical combination is
/// unsatisfiable and so equivalent to every other unsatisfiable formula. An
/// equivalence check would then accept `A & !A`. Instead, each top-level
/// conjunct of the answer must be equivalent to one part of the canonical
/// combination and each part must be matched. `!(premises -> conclusion)`
/// is read as the same conjunction.
fn check_inference(inputs: &[&Value], student: &Formula) -> Result<FeedbackReport, formula::FormulaError> {
    let expected = inference_parts(inputs).unwrap_or_default();
    let mut given = Vec::new();
    match student.node() {
        Node::Not(inner) => match inner.node() {
            Node::Binary(BinOp::Implies, premises, conclusion) => {
                conjuncts(premises, &mut given);
                given.push(Formula::not((**conclusion).clone()));
            }
            _ => given.push(student.clone()),
        },
        _ => conjuncts(student, &mut given),
    }
    let matches_any = |f: &Formula, pool: &[Formula]| -> Result<bool, formula::FormulaError> {
        for g in pool {
            if formula::equivalent(f, g)? {
                return Ok(true);
            }
        }
        Ok(false)
    };
    let mut items = Vec::new();
    for part in &expected {
        if !matches_any(part, &given)? {
            items.push(FeedbackItem::new(LEVEL_BASIC, ItemKind::Info, "inference.missing-part").param("part", part));
        }
    }
    for part in &given {
        if !matches_any(part, &expected)? {
            items.push(
                FeedbackItem::new(LEVEL_BASIC, ItemKind::Info, "inference.superfluous-part")
                    .param("part", part)
                    .with_span(part.span()),
            );
        }
    }
    if items.is_empty() {
        return Ok(correct());
    }
    let mut report = FeedbackReport::new(Verdict::SemanticallyWrong).with_item(FeedbackItem::new(
        LEVEL_VERDICT,
        ItemKind::VerdictMessage,
        "verdict.wrong",
    ));
    for item in items {
        report.push(item);
    }
    if let Some(canonical) = Formula::chain(BinOp::And, expected) {
        if !formula::equivalent(student, &canonical)? {
            report.push(counterexample(student, &canonical));
        }
    }
    Ok(report)
}

fn pick_variables(solution: &VariableSet, chosen: &VariableSet) -> Outcome {
    if chosen.same_members(solution) {
        return Outcome::new(correct(), ErrorClass::None).done(Some(Value::Variables(solution.clone())), None);
    }
    let mut report = FeedbackReport::new(Verdict::SemanticallyWrong).with_item(FeedbackItem::new(
        LEVEL_VERDICT,
        ItemKind::VerdictMessage,
        "verdict.wrong",
    ));
    if chosen.len() != solution.len() {
        report.push(
            FeedbackItem::new(LEVEL_VERDICT, ItemKind::Info, "variables.count-mismatch")
                .param("expected", solution.len())
                .param("chosen", chosen.len()),
        );
    } else {
        report.push(FeedbackItem::new(LEVEL_VERDICT, ItemKind::Info, "variables.wrong-choice"));
    }
    for v in solution.iter().filter(|v| !chosen.contains(v)) {
        report.push(FeedbackItem::new(LEVEL_BASIC, ItemKind::VariableUsage, "variables.missing").param("variable", v));
    }
    for v in chosen.iter().filter(|v| !solution.contains(v)) {
        report.push(
            FeedbackItem::new(LEVEL_BASIC, ItemKind::VariableUsage, "variables.superfluous").param("variable", v),
        );
    }
    Outcome::new(report, ErrorClass::Inequivalent)
}

fn transformation(
    state: &mut TransformationState,
    kind: &ActionKind,
    settings: &Settings,
) -> Result<Outcome, EngineError> {
    let mut out = match kind {
        ActionKind::SubmitTransformation { text } => {
            let report = state.submit_step(text);
            let class = match report.verdict {
                Verdict::Correct => ErrorClass::None,
                Verdict::SyntacticallyWrong => ErrorClass::Syntax,
                Verdict::SemanticallyWrong => ErrorClass::Inequivalent,
            };
            Outcome::new(report, class)
        }
        ActionKind::ApplyRule { rule, position } => {
            match state.apply_named_rule(&settings.equivalences, rule, position) {
                Ok(_) => Outcome::new(
                    correct().with_item(
                        FeedbackItem::new(LEVEL_BASIC, ItemKind::Info, "transformation.rule-applied")
                            .param("rule", rule),
                    ),
                    ErrorClass::None,
                ),
                Err(TransformError::UnknownRule(r)) => {
                    return Err(EngineError::MalformedAction(format!("unknown rule `{r}`")))
                }
                Err(_) => {
                    let mut out = Outcome::rejected("transformation.rule-not-applicable", ErrorClass::None);
                    out.report.items[1].params.insert("rule".into(), rule.clone());
                    out
                }
            }
        }
        ActionKind::Undo => match state.undo() {
            Ok(_) => Outcome::new(correct().with_item(FeedbackItem::info("transformation.undone")), ErrorClass::None),
            Err(_) => Outcome::rejected("transformation.nothing-to-undo", ErrorClass::None),
        },
        ActionKind::CompleteTask => {
            let (done, report) = state.check_complete();
            let out = Outcome::new(report, ErrorClass::None);
            if done {
                let latest = state.latest().clone();
                return Ok(with_formula(out.done(Some(Value::Formula(latest)), None), state));
            }
            out
        }
        other => {
            return Err(EngineError::MalformedAction(format!(
                "`{}` does not apply to transformation tasks",
                other.name()
            )))
        }
    };
    // An accepted step that reaches the target form finishes the task.
    if out.accepted && !matches!(kind, ActionKind::Undo) && state.target.is_reached_by(state.latest()) {
        out.report.push(FeedbackItem::new(LEVEL_BASIC, ItemKind::Info, "transformation.complete"));
        out = out.done(Some(Value::Formula(state.latest().clone())), None);
    }
    Ok(with_formula(out, state))
}

fn with_formula(mut out: Outcome, state: &TransformationState) -> Outcome {
    out.formula = Some(state.latest().clone());
    out
}

fn resolution(state: &mut ResolutionState, ids: [ClauseId; 2], pivot: Option<&str>) -> Result<Outcome, EngineError> {
    let step = match state.resolve_step(ids[0], ids[1], pivot) {
        Ok(step) => step,
        Err(ResolutionError::UnknownClause(id)) => return Err(EngineError::MalformedAction(format!("no clause {id}"))),
        Err(ResolutionError::IdenticalClauses) => {
            return Ok(Outcome::rejected("resolution.identical-clauses", ErrorClass::NotResolvable))
        }
        Err(ResolutionError::AmbiguousPivot(candidates)) => {
            let mut out = Outcome::rejected("resolution.ambiguous-pivot", ErrorClass::NotResolvable);
            out.report.items[1].params.insert("candidates".into(), candidates.join(", "));
            return Ok(out);
        }
        Err(ResolutionError::NotResolvable { pivot }) => {
            let mut out = Outcome::rejected("resolution.not-resolvable", ErrorClass::NotResolvable);
            if let Some(p) = pivot {
                out.report.items[1].key = "resolution.not-resolvable-on".into();
                out.report.items[1].params.insert("pivot".into(), p);
            }
            return Ok(out);
        }
        Err(other) => return Err(EngineError::Internal(other.to_string())),
    };
    let clause_text = step.clause.to_string();
    let mut report = correct().with_item(
        FeedbackItem::new(LEVEL_BASIC, ItemKind::Info, "resolution.resolvent")
            .param("clause", &clause_text)
            .param("pivot", &step.pivot)
            .param("id", step.id),
    );
    if step.tautology {
        report
            .push(FeedbackItem::new(LEVEL_BASIC, ItemKind::Info, "resolution.tautology").param("clause", &clause_text));
    }
    if !step.added {
        report.push(FeedbackItem::new(LEVEL_BASIC, ItemKind::Info, "resolution.duplicate").param("id", step.id));
    }
    let goal = step.goal_reached;
    let mut out = Outcome::new(report, ErrorClass::None);
    out.clause = Some(step);
    if goal {
        out.report.push(FeedbackItem::new(LEVEL_VERDICT, ItemKind::Info, "resolution.empty-clause"));
        out = out.done(None, None);
    }
    Ok(out)
}

/// Replays `actions` on a fresh session.
pub fn replay(
    exercise: &Exercise,
    id: &str,
    actions: &[Action],
    settings: &Settings,
) -> (SessionState, Vec<Result<ActionResult, EngineError>>) {
    let mut state = SessionState::start(id, exercise);
    let results = actions.iter().map(|a| dispatch(exercise, &mut state, a, settings).map(|d| d.result)).collect();
    (state, results)
}

pub const SNAPSHOT_VERSION: u32 = 1;

/// A persisted session: the state plus the actions that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub version: u32,
    pub exercise_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub state: SessionState,
    pub actions: Vec<Action>,
}

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("unsupported snapshot version {0}")]
    Version(u32),
    #[error("snapshot does not parse: {0}")]
    Format(#[from] serde_json::Error),
    #[error("replaying the recorded actions does not reproduce the stored state")]
    Mismatch,
}

impl Snapshot {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("snapshots serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, SnapshotError> {
        #[derive(Deserialize)]
        struct Header {
            version: u32,
        }
        let header: Header = serde_json::from_str(text)?;
        if header.version != SNAPSHOT_VERSION {
            return Err(SnapshotError::Version(header.version));
        }
        Ok(serde_json::from_str(text)?)
    }

    /// Rebuilds the state by replay and checks it against the stored one.
    pub fn restore(&self, exercise: &Exercise, settings: &Settings) -> Result<SessionState, SnapshotError> {
        let (state, _) = replay(exercise, &self.state.id, &self.actions, settings);
        if serde_json::to_value(&state)? != serde_json::to_value(&self.state)? {
            return Err(SnapshotError::Mismatch);
        }
        Ok(state)
    }
}

/// Student-facing view of a session. Solutions and transformation targets
/// never appear here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub exercise: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub current_task: Option<usize>,
    pub complete: bool,
    pub tasks: Vec<TaskProgress>,
    pub environment: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskProgress {
    pub index: usize,
    pub status: String,
    pub attempts: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accepted: Option<Vec<Option<Formula>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<Vec<Formula>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clauses: Option<ResolutionState>,
}

impl SessionState {
    pub fn view(&self, exercise_id: &str, group: Option<&str>) -> SessionView {
        let tasks = self
            .tasks
            .iter()
            .enumerate()
            .map(|(index, task)| {
                let mut p = TaskProgress {
                    index,
                    status: String::new(),
                    attempts: self.attempts[index],
                    accepted: None,
                    steps: None,
                    clauses: None,
                };
                p.status = match task {
                    TaskState::NotStarted => "not-started".into(),
                    TaskState::Completed { .. } => "completed".into(),
                    TaskState::InProgress { model } => {
                        match model {
                            TaskModel::Statements { accepted } => p.accepted = Some(accepted.clone()),
                            TaskModel::Transformation { state } => {
                                let mut steps = vec![state.original.clone()];
                                steps.extend(state.steps.iter().cloned());
                                p.steps = Some(steps);
                            }
                            TaskModel::Resolution { state } => p.clauses = Some(state.clone()),
                            TaskModel::Open => {}
                        }
                        "in-progress".into()
                    }
                };
                p
            })
            .collect();
        SessionView {
            id: self.id.clone(),
            exercise: exercise_id.to_string(),
            group: group.map(str::to_string),
            current_task: self.current_task(),
            complete: self.is_complete(),
            tasks,
            environment: self.environment.clone(),
        }
    }
}

/// Statement metadata used when logging a submission.
pub fn statement_of(exercise: &Exercise, task: usize, statement: Option<usize>) -> Option<&Statement> {
    match &exercise.tasks.get(task)?.kind {
        TaskKind::CreateFormulas { statements, .. } => statements.get(statement?),
        _ => None,
    }
}

/// Tasks whose inputs are all bound in `state`, for pipeline checks.
pub fn enterable(exercise: &Exercise, state: &SessionState) -> BTreeSet<usize> {
    exercise.tasks.iter().enumerate().filter(|(_, spec)| state.inputs(spec).is_some()).map(|(i, _)| i).collect()
}
