//! Reading and writing the exercise XML format.
//!
//! Element and attribute names follow the published format (`Exercise`,
//! `Task[type, feedbackLevels]`, `Input`, `Output`, `Formula`, `Solution`,
//! `FeedbackGenerator`, ...). `schema/exercise.xsd` is the normative
//! description; this module additionally checks what a schema cannot, such
//! as pipeline wiring and that solutions parse.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use logic_tutor_core::feedback::{VariableMeaningMap, MAX_LEVEL};
use logic_tutor_core::formula::{self, is_identifier, Formula, VariableSet};
use logic_tutor_core::transform::Target;
use roxmltree::{Document, Node};

use super::{Exercise, FeedbackSettings, Question, Statement, TaskKind, TaskSpec, TaskType, ValueKind, VariableOption};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LoadError {
    #[error("not well-formed XML: {0}")]
    Xml(String),
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: input `{name}` is not the output of an earlier task")]
    DanglingInput { name: String, path: String },
    #[error("{path}: output `{name}` is already declared by an earlier task")]
    DuplicateOutput { name: String, path: String },
}

impl LoadError {
    pub fn path(&self) -> Option<&str> {
        match self {
            LoadError::Xml(_) => None,
            LoadError::Schema { path, .. }
            | LoadError::DanglingInput { path, .. }
            | LoadError::DuplicateOutput { path, .. } => Some(path),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Warning {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Loaded {
    pub exercise: Exercise,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{} error(s), first: {}", errors.len(), errors[0])]
pub struct LoadFailure {
    pub errors: Vec<LoadError>,
    pub warnings: Vec<Warning>,
}

/// Parses and validates an exercise document.
pub fn load_exercise(text: &str) -> Result<Loaded, LoadFailure> {
    let doc = Document::parse(text)
        .map_err(|e| LoadFailure { errors: vec![LoadError::Xml(e.to_string())], warnings: Vec::new() })?;
    let mut cx = Context::default();
    let exercise = cx.exercise(doc.root_element());
    match (exercise, cx.errors.is_empty()) {
        (Some(exercise), true) => Ok(Loaded { exercise, warnings: cx.warnings }),
        _ => Err(LoadFailure { errors: cx.errors, warnings: cx.warnings }),
    }
}

#[derive(Default)]
struct Context {
    errors: Vec<LoadError>,
    warnings: Vec<Warning>,
}

/// Outputs declared so far: kind, plus the chosen variables for `PickVariables`.
type Outputs = HashMap<String, (ValueKind, Option<VariableSet>)>;

impl Context {
    fn schema(&mut self, path: &str, message: impl Into<String>) {
        self.errors.push(LoadError::Schema { path: path.to_string(), message: message.into() });
    }

    fn warn(&mut self, path: &str, message: impl Into<String>) {
        self.warnings.push(Warning { path: path.to_string(), message: message.into() });
    }

    fn check_attributes(&mut self, node: Node, path: &str, known: &[&str]) {
        for attr in node.attributes() {
            if !known.contains(&attr.name()) {
                self.warn(path, format!("unknown attribute `{}` ignored", attr.name()));
            }
        }
    }

    fn exercise(&mut self, root: Node) -> Option<Exercise> {
        let path = "/Exercise";
        if root.tag_name().name() != "Exercise" {
            self.schema(&format!("/{}", root.tag_name().name()), "root element must be `Exercise`");
            return None;
        }
        self.check_attributes(root, path, &["name"]);
        let name = match root.attribute("name") {
            Some(n) if !n.trim().is_empty() => n.trim().to_string(),
            _ => {
                self.schema(path, "missing attribute `name`");
                String::new()
            }
        };
        let mut exercise = Exercise { name, title: String::new(), description: String::new(), tasks: Vec::new() };
        let mut outputs = Outputs::new();
        for (child, child_path) in element_children(root, path) {
            match child.tag_name().name() {
                "Title" => exercise.title = text_content(child),
                "Description" => exercise.description = sanitize_fragment(child),
                "Task" => {
                    if let Some(task) = self.task(child, &child_path, &mut outputs) {
                        exercise.tasks.push(task);
                    }
                }
                other => self.warn(&child_path, format!("unknown element `{other}` ignored")),
            }
        }
        Some(exercise)
    }

    fn task(&mut self, node: Node, path: &str, outputs: &mut Outputs) -> Option<TaskSpec> {
        let raw_type = node.attribute("type").unwrap_or_default();
        let Some((task_type, legacy_target)) = task_type(raw_type) else {
            let message = if raw_type.is_empty() {
                "missing attribute `type`".to_string()
            } else {
                format!("unknown task type `{raw_type}`")
            };
            self.schema(path, message);
            return None;
        };
        let mut known = vec!["type", "feedbackLevels", "assimilationGenerator"];
        if matches!(task_type, TaskType::ManualTransformation | TaskType::GuiTransformation) {
            known.push("target");
        }
        self.check_attributes(node, path, &known);

        let feedback_levels = match node.attribute("feedbackLevels") {
            None => (0..=MAX_LEVEL).collect(),
            Some(text) => self.levels(text, path),
        };
        let mut spec = TaskSpec {
            title: String::new(),
            description: String::new(),
            inputs: Vec::new(),
            output: None,
            feedback_levels,
            assimilation_generator: node.attribute("assimilationGenerator").map(str::to_string),
            kind: TaskKind::Message,
        };

        let mut input_kinds = Vec::new();
        let mut dangling = false;
        let mut allowed: Option<VariableSet> = None;
        let mut output_path = None;
        let mut payload = Vec::new();
        for (child, child_path) in element_children(node, path) {
            match child.tag_name().name() {
                "Title" => spec.title = text_content(child),
                "Description" => spec.description = sanitize_fragment(child),
                "Input" => {
                    let name = text_content(child);
                    match outputs.get(&name) {
                        Some((kind, vars)) => {
                            input_kinds.push((*kind, child_path.clone()));
                            if let Some(vars) = vars {
                                allowed = Some(allowed.map_or_else(|| vars.clone(), |a| a.union(vars)));
                            }
                        }
                        None => {
                            dangling = true;
                            self.errors.push(LoadError::DanglingInput { name: name.clone(), path: child_path });
                        }
                    }
                    spec.inputs.push(name);
                }
                "Output" => {
                    if spec.output.is_some() {
                        self.schema(&child_path, "a task declares at most one output");
                        continue;
                    }
                    spec.output = Some(text_content(child));
                    output_path = Some(child_path);
                }
                _ => payload.push((child, child_path)),
            }
        }

        spec.kind = match task_type {
            TaskType::PickVariables => self.pick_variables(&payload),
            TaskType::CreateFormulas => self.create_formulas(&payload, path, allowed.as_ref()),
            TaskType::ManualTransformation | TaskType::GuiTransformation => {
                let target = self.target(node, &payload, path, legacy_target);
                if task_type == TaskType::ManualTransformation {
                    TaskKind::ManualTransformation { target }
                } else {
                    TaskKind::GuiTransformation { target }
                }
            }
            TaskType::Questionnaire => self.questionnaire(&payload, path),
            TaskType::InferenceFormula => self.no_payload(&payload, TaskKind::InferenceFormula),
            TaskType::Resolution => self.no_payload(&payload, TaskKind::Resolution),
            TaskType::Message => self.no_payload(&payload, TaskKind::Message),
            TaskType::CollectFeedback => self.no_payload(&payload, TaskKind::CollectFeedback),
        };

        if !dangling {
            self.check_inputs(task_type, &input_kinds, path);
        }
        if let (Some(name), Some(output_path)) = (&spec.output, output_path) {
            match task_type.produces() {
                None => self.schema(&output_path, format!("{} tasks have no output", task_type.name())),
                Some(_) if outputs.contains_key(name) => {
                    self.errors.push(LoadError::DuplicateOutput { name: name.clone(), path: output_path })
                }
                Some(kind) => {
                    let vars = match &spec.kind {
                        TaskKind::PickVariables { options } => {
                            Some(options.iter().filter(|o| o.correct).map(|o| o.name.as_str()).collect())
                        }
                        _ => None,
                    };
                    outputs.insert(name.clone(), (kind, vars));
                }
            }
        }
        Some(spec)
    }

    fn levels(&mut self, text: &str, path: &str) -> BTreeSet<u8> {
        let mut levels = BTreeSet::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.parse::<u8>() {
                Ok(level) if level <= MAX_LEVEL => {
                    levels.insert(level);
                }
                _ => self.schema(path, format!("feedback level `{part}` is not in 0..={MAX_LEVEL}")),
            }
        }
        levels
    }

    fn check_inputs(&mut self, task_type: TaskType, inputs: &[(ValueKind, String)], path: &str) {
        let formula_like = |k: &ValueKind| matches!(k, ValueKind::Formula | ValueKind::Formulas);
        let (ok, expected) = match task_type {
            TaskType::PickVariables | TaskType::Questionnaire | TaskType::Message | TaskType::CollectFeedback => {
                (inputs.is_empty(), "no inputs")
            }
            TaskType::CreateFormulas => {
                (inputs.iter().all(|(k, _)| *k == ValueKind::Variables), "only variable inputs")
            }
            TaskType::InferenceFormula => {
                (inputs.len() >= 2 && inputs.iter().all(|(k, _)| formula_like(k)), "two or more formula inputs")
            }
            TaskType::ManualTransformation | TaskType::GuiTransformation | TaskType::Resolution => {
                (inputs.len() == 1 && formula_like(&inputs[0].0), "exactly one formula input")
            }
        };
        if !ok {
            self.schema(path, format!("{} tasks take {expected}", task_type.name()));
        }
    }

    fn no_payload(&mut self, payload: &[(Node, String)], kind: TaskKind) -> TaskKind {
        for (node, path) in payload {
            self.warn(path, format!("unknown element `{}` ignored", node.tag_name().name()));
        }
        kind
    }

    fn pick_variables(&mut self, payload: &[(Node, String)]) -> TaskKind {
        let mut options: Vec<VariableOption> = Vec::new();
        for (node, path) in payload {
            if node.tag_name().name() != "Variable" {
                self.warn(path, format!("unknown element `{}` ignored", node.tag_name().name()));
                continue;
            }
            self.check_attributes(*node, path, &["name", "correct"]);
            let name = node.attribute("name").unwrap_or_default().trim().to_string();
            if !is_identifier(&name) {
                self.schema(path, format!("`{name}` is not a valid variable name"));
                continue;
            }
            if options.iter().any(|o| o.name == name) {
                self.schema(path, format!("variable `{name}` is offered twice"));
                continue;
            }
            let correct = match node.attribute("correct") {
                None | Some("false") => false,
                Some("true") => true,
                Some(other) => {
                    self.schema(path, format!("attribute `correct` must be `true` or `false`, not `{other}`"));
                    false
                }
            };
            options.push(VariableOption { name, description: text_content(*node), correct });
        }
        TaskKind::PickVariables { options }
    }

    fn create_formulas(&mut self, payload: &[(Node, String)], path: &str, allowed: Option<&VariableSet>) -> TaskKind {
        let mut statements = Vec::new();
        let mut feedback = FeedbackSettings::default();
        for (node, node_path) in payload {
            match node.tag_name().name() {
                "Formula" => {
                    if let Some(s) = self.statement(*node, node_path, allowed) {
                        statements.push(s);
                    }
                }
                "FeedbackGenerator" => self.feedback_generator(*node, node_path, &mut feedback),
                other => self.warn(node_path, format!("unknown element `{other}` ignored")),
            }
        }
        if !payload.iter().any(|(n, _)| n.tag_name().name() == "Formula") {
            self.schema(path, "CreateFormulas tasks need at least one `Formula`");
        }
        TaskKind::CreateFormulas { statements, feedback }
    }

    fn statement(&mut self, node: Node, path: &str, allowed: Option<&VariableSet>) -> Option<Statement> {
        self.check_attributes(node, path, &["statementType"]);
        let mut description = String::new();
        let mut solution = None;
        let mut seen_solution = false;
        for (child, child_path) in element_children(node, path) {
            match child.tag_name().name() {
                "Description" => description = sanitize_fragment(child),
                "Solution" => {
                    seen_solution = true;
                    solution = self.solution(child, &child_path);
                }
                other => self.warn(&child_path, format!("unknown element `{other}` ignored")),
            }
        }
        let Some(solution) = solution else {
            if !seen_solution {
                self.schema(path, "missing `Solution`");
            }
            return None;
        };
        if let Some(allowed) = allowed {
            if let Some(extra) = solution.variables().iter().find(|v| !allowed.contains(v)) {
                self.schema(path, format!("solution uses `{extra}`, which is not among the chosen variables"));
            }
        }
        let statement_type = node.attribute("statementType").map(str::to_string);
        Some(Statement { description, solution, statement_type })
    }

    fn solution(&mut self, node: Node, path: &str) -> Option<Formula> {
        let text = text_content(node);
        if text.contains('$') || text.contains('\\') {
            self.schema(path, "solution is written in LaTeX; convert it with `logic-tutor convert-latex`");
            return None;
        }
        match formula::parse(&text) {
            Ok(f) => Some(f.without_spans()),
            Err(e) => {
                self.schema(path, format!("solution `{text}` does not parse: {e}"));
                None
            }
        }
    }

    fn feedback_generator(&mut self, node: Node, path: &str, settings: &mut FeedbackSettings) {
        for (child, child_path) in element_children(node, path) {
            if child.tag_name().name() != "Feedback" {
                self.warn(&child_path, format!("unknown element `{}` ignored", child.tag_name().name()));
                continue;
            }
            match child.attribute("type").unwrap_or_default() {
                "VariableNames" => {
                    self.check_attributes(child, &child_path, &["type"]);
                    settings.meanings.extend(self.meanings(child, &child_path));
                }
                "ReversionSearch" => {
                    self.check_attributes(child, &child_path, &["type", "maxLength"]);
                    match child.attribute("maxLength").map(str::parse::<usize>) {
                        Some(Ok(n)) => settings.max_reversion_length = Some(n),
                        Some(Err(_)) => self.schema(&child_path, "attribute `maxLength` must be a number"),
                        None => {}
                    }
                }
                other => self.warn(&child_path, format!("unknown feedback type `{other}` ignored")),
            }
        }
    }

    fn meanings(&mut self, node: Node, path: &str) -> VariableMeaningMap {
        let mut meanings = BTreeMap::new();
        for (child, child_path) in element_children(node, path) {
            match (child.tag_name().name(), child.attribute("name")) {
                ("Variable", Some(name)) if is_identifier(name) => {
                    meanings.insert(name.to_string(), text_content(child));
                }
                ("Variable", _) => self.schema(&child_path, "`Variable` needs a valid `name`"),
                (other, _) => self.warn(&child_path, format!("unknown element `{other}` ignored")),
            }
        }
        meanings
    }

    fn target(&mut self, node: Node, payload: &[(Node, String)], path: &str, legacy: Option<Target>) -> Target {
        let mut formula_target = None;
        for (child, child_path) in payload {
            if child.tag_name().name() == "TargetFormula" {
                formula_target = self.solution(*child, child_path);
            } else {
                self.warn(child_path, format!("unknown element `{}` ignored", child.tag_name().name()));
            }
        }
        match (node.attribute("target"), legacy) {
            (None, Some(t)) => t,
            (Some("cnf"), _) => Target::Cnf,
            (Some("dnf"), _) => Target::Dnf,
            (Some("nnf"), _) => Target::Nnf,
            (Some("formula"), _) => match formula_target {
                Some(f) => Target::Formula(f),
                None => {
                    self.schema(path, "target `formula` needs a `TargetFormula`");
                    Target::Cnf
                }
            },
            (Some(other), _) => {
                self.schema(path, format!("unknown target `{other}`; expected cnf, dnf, nnf or formula"));
                Target::Cnf
            }
            (None, None) => {
                self.schema(path, "missing attribute `target`");
                Target::Cnf
            }
        }
    }

    fn questionnaire(&mut self, payload: &[(Node, String)], path: &str) -> TaskKind {
        let mut questions = Vec::new();
        for (node, node_path) in payload {
            if node.tag_name().name() != "Question" {
                self.warn(node_path, format!("unknown element `{}` ignored", node.tag_name().name()));
                continue;
            }
            let mut q = Question { text: String::new(), options: Vec::new(), answer: None };
            for (child, child_path) in element_children(*node, node_path) {
                match child.tag_name().name() {
                    "Text" => q.text = text_content(child),
                    "Option" => {
                        self.check_attributes(child, &child_path, &["correct"]);
                        if child.attribute("correct") == Some("true") {
                            if q.answer.is_some() {
                                self.schema(&child_path, "a question has at most one correct option");
                            }
                            q.answer = Some(q.options.len());
                        }
                        q.options.push(text_content(child));
                    }
                    other => self.warn(&child_path, format!("unknown element `{other}` ignored")),
                }
            }
            if q.options.is_empty() {
                self.schema(node_path, "a question needs at least one `Option`");
            }
            questions.push(q);
        }
        if questions.is_empty() {
            self.schema(path, "Questionnaire tasks need at least one `Question`");
        }
        TaskKind::Questionnaire { questions }
    }
}

/// Canonical type for a `type` attribute, including legacy spellings.
fn task_type(name: &str) -> Option<(TaskType, Option<Target>)> {
    let t = match name {
        "CompleteFormula" => TaskType::InferenceFormula,
        "transformToCnf" => return Some((TaskType::ManualTransformation, Some(Target::Cnf))),
        "CreateFormula" => TaskType::CreateFormulas,
        "PickVariable" => TaskType::PickVariables,
        "Questionaire" => TaskType::Questionnaire,
        other => *TaskType::ALL.iter().find(|t| t.name() == other)?,
    };
    Some((t, None))
}

/// Element children with their paths, e.g. `/Exercise/Task[2]`.
fn element_children<'a, 'i>(node: Node<'a, 'i>, path: &str) -> Vec<(Node<'a, 'i>, String)> {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    node.children()
        .filter(Node::is_element)
        .map(|child| {
            let name = child.tag_name().name();
            let n = seen.entry(name).or_default();
            *n += 1;
            (child, format!("{path}/{name}[{n}]"))
        })
        .collect()
}

fn text_content(node: Node) -> String {
    let raw: String = node.descendants().filter(Node::is_text).filter_map(|n| n.text()).collect();
    collapse(&raw).trim().to_string()
}

fn collapse(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut space = false;
    for c in text.chars() {
        if c.is_whitespace() {
            if !space {
                out.push(' ');
            }
            space = true;
        } else {
            out.push(c);
            space = false;
        }
    }
    out
}

const ALLOWED_TAGS: [&str; 15] =
    ["p", "br", "em", "strong", "b", "i", "u", "code", "pre", "ul", "ol", "li", "sub", "sup", "span"];

/// The element's content as an HTML fragment with only formatting tags, no
/// attributes, and whitespace collapsed. Scripts and styles are dropped with
/// their content; other unknown elements are replaced by their content.
pub fn sanitize_fragment(node: Node) -> String {
    fn walk(node: Node, out: &mut String) {
        for child in node.children() {
            if child.is_text() {
                out.push_str(&escape(&collapse(child.text().unwrap_or_default())));
            } else if child.is_element() {
                let name = child.tag_name().name();
                if matches!(name, "script" | "style") {
                    continue;
                }
                if !ALLOWED_TAGS.contains(&name) {
                    walk(child, out);
                } else if name == "br" {
                    out.push_str("<br/>");
                } else {
                    write!(out, "<{name}>").unwrap();
                    walk(child, out);
                    write!(out, "</{name}>").unwrap();
                }
            }
        }
    }
    let mut out = String::new();
    walk(node, &mut out);
    collapse(&out).trim().to_string()
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}

/// Serializes an exercise in canonical form: legacy type names are written
/// under their current names and every default is spelled out.
pub fn to_xml(exercise: &Exercise) -> String {
    let mut w = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    writeln!(w, "<Exercise name=\"{}\">", escape(&exercise.name)).unwrap();
    writeln!(w, "  <Title>{}</Title>", escape(&exercise.title)).unwrap();
    writeln!(w, "  <Description>{}</Description>", exercise.description).unwrap();
    for task in &exercise.tasks {
        write_task(&mut w, task);
    }
    w.push_str("</Exercise>\n");
    w
}

fn write_task(w: &mut String, task: &TaskSpec) {
    let levels: Vec<String> = task.feedback_levels.iter().map(u8::to_string).collect();
    write!(w, "  <Task type=\"{}\" feedbackLevels=\"{}\"", task.task_type().name(), levels.join(",")).unwrap();
    if let Some(g) = &task.assimilation_generator {
        write!(w, " assimilationGenerator=\"{}\"", escape(g)).unwrap();
    }
    let target = match &task.kind {
        TaskKind::ManualTransformation { target } | TaskKind::GuiTransformation { target } => Some(target),
        _ => None,
    };
    if let Some(target) = target {
        let name = if matches!(target, Target::Formula(_)) { "formula".to_string() } else { target.to_string() };
        write!(w, " target=\"{name}\"").unwrap();
    }
    w.push_str(">\n");
    for input in &task.inputs {
        writeln!(w, "    <Input>{}</Input>", escape(input)).unwrap();
    }
    writeln!(w, "    <Title>{}</Title>", escape(&task.title)).unwrap();
    writeln!(w, "    <Description>{}</Description>", task.description).unwrap();
    match &task.kind {
        TaskKind::PickVariables { options } => {
            for o in options {
                writeln!(
                    w,
                    "    <Variable name=\"{}\" correct=\"{}\">{}</Variable>",
                    o.name,
                    o.correct,
                    escape(&o.description)
                )
                .unwrap();
            }
        }
        TaskKind::CreateFormulas { statements, feedback } => {
            for s in statements {
                match &s.statement_type {
                    Some(t) => writeln!(w, "    <Formula statementType=\"{}\">", escape(t)).unwrap(),
                    None => w.push_str("    <Formula>\n"),
                }
                writeln!(w, "      <Description>{}</Description>", s.description).unwrap();
                writeln!(w, "      <Solution>{}</Solution>", escape(&s.solution.to_string())).unwrap();
                w.push_str("    </Formula>\n");
            }
            if !feedback.meanings.is_empty() || feedback.max_reversion_length.is_some() {
                w.push_str("    <FeedbackGenerator>\n");
                if !feedback.meanings.is_empty() {
                    w.push_str("      <Feedback type=\"VariableNames\">\n");
                    for (name, meaning) in &feedback.meanings {
                        writeln!(w, "        <Variable name=\"{name}\">{}</Variable>", escape(meaning)).unwrap();
                    }
                    w.push_str("      </Feedback>\n");
                }
                if let Some(n) = feedback.max_reversion_length {
                    writeln!(w, "      <Feedback type=\"ReversionSearch\" maxLength=\"{n}\"/>").unwrap();
                }
                w.push_str("    </FeedbackGenerator>\n");
            }
        }
        TaskKind::ManualTransformation { target: Target::Formula(f) }
        | TaskKind::GuiTransformation { target: Target::Formula(f) } => {
            writeln!(w, "    <TargetFormula>{}</TargetFormula>", escape(&f.to_string())).unwrap();
        }
        TaskKind::Questionnaire { questions } => {
            for q in questions {
                w.push_str("    <Question>\n");
                writeln!(w, "      <Text>{}</Text>", escape(&q.text)).unwrap();
                for (i, o) in q.options.iter().enumerate() {
                    let correct = if q.answer == Some(i) { " correct=\"true\"" } else { "" };
                    writeln!(w, "      <Option{correct}>{}</Option>", escape(o)).unwrap();
                }
                w.push_str("    </Question>\n");
            }
        }
        _ => {}
    }
    if let Some(output) = &task.output {
        writeln!(w, "    <Output>{}</Output>", escape(output)).unwrap();
    }
    w.push_str("  </Task>\n");
}
