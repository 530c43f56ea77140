//! Exercises: an ordered pipeline of tasks whose named outputs feed the
//! inputs of later tasks.

mod xml;

use std::collections::BTreeSet;

use logic_tutor_core::feedback::VariableMeaningMap;
use logic_tutor_core::formula::{Formula, VariableSet};
use logic_tutor_core::transform::Target;
use serde::{Deserialize, Serialize};

pub use xml::{load_exercise, sanitize_fragment, to_xml, LoadError, LoadFailure, Loaded, Warning};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exercise {
    pub name: String,
    pub title: String,
    /// Sanitized HTML fragment.
    pub description: String,
    pub tasks: Vec<TaskSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub title: String,
    pub description: String,
    pub inputs: Vec<String>,
    pub output: Option<String>,
    pub feedback_levels: BTreeSet<u8>,
    /// Kept for the frontend's live syntax check; the engine ignores it.
    pub assimilation_generator: Option<String>,
    pub kind: TaskKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TaskType {
    PickVariables,
    CreateFormulas,
    InferenceFormula,
    ManualTransformation,
    GuiTransformation,
    Resolution,
    Questionnaire,
    Message,
    CollectFeedback,
}

impl TaskType {
    pub const ALL: [TaskType; 9] = [
        TaskType::PickVariables,
        TaskType::CreateFormulas,
        TaskType::InferenceFormula,
        TaskType::ManualTransformation,
        TaskType::GuiTransformation,
        TaskType::Resolution,
        TaskType::Questionnaire,
        TaskType::Message,
        TaskType::CollectFeedback,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskType::PickVariables => "PickVariables",
            TaskType::CreateFormulas => "CreateFormulas",
            TaskType::InferenceFormula => "InferenceFormula",
            TaskType::ManualTransformation => "ManualTransformation",
            TaskType::GuiTransformation => "GuiTransformation",
            TaskType::Resolution => "Resolution",
            TaskType::Questionnaire => "Questionnaire",
            TaskType::Message => "Message",
            TaskType::CollectFeedback => "CollectFeedback",
        }
    }

    /// What the task binds under its output name, if it has one.
    pub fn produces(self) -> Option<ValueKind> {
        match self {
            TaskType::PickVariables => Some(ValueKind::Variables),
            TaskType::CreateFormulas => Some(ValueKind::Formulas),
            TaskType::InferenceFormula | TaskType::ManualTransformation | TaskType::GuiTransformation => {
                Some(ValueKind::Formula)
            }
            TaskType::Resolution | TaskType::Questionnaire | TaskType::Message | TaskType::CollectFeedback => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueKind {
    Variables,
    Formula,
    Formulas,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TaskKind {
    PickVariables { options: Vec<VariableOption> },
    CreateFormulas { statements: Vec<Statement>, feedback: FeedbackSettings },
    InferenceFormula,
    ManualTransformation { target: Target },
    GuiTransformation { target: Target },
    Resolution,
    Questionnaire { questions: Vec<Question> },
    Message,
    CollectFeedback,
}

impl TaskKind {
    pub fn task_type(&self) -> TaskType {
        match self {
            TaskKind::PickVariables { .. } => TaskType::PickVariables,
            TaskKind::CreateFormulas { .. } => TaskType::CreateFormulas,
            TaskKind::InferenceFormula => TaskType::InferenceFormula,
            TaskKind::ManualTransformation { .. } => TaskType::ManualTransformation,
            TaskKind::GuiTransformation { .. } => TaskType::GuiTransformation,
            TaskKind::Resolution => TaskType::Resolution,
            TaskKind::Questionnaire { .. } => TaskType::Questionnaire,
            TaskKind::Message => TaskType::Message,
            TaskKind::CollectFeedback => TaskType::CollectFeedback,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableOption {
    pub name: String,
    pub description: String,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub description: String,
    pub solution: Formula,
    /// Label used to group statistics, such as `only-if` or `either-or`.
    pub statement_type: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackSettings {
    pub meanings: VariableMeaningMap,
    /// Overrides the default reversion sequence bound.
    pub max_reversion_length: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub text: String,
    pub options: Vec<String>,
    /// Index of the correct option, when the question is graded.
    pub answer: Option<usize>,
}

impl TaskSpec {
    pub fn task_type(&self) -> TaskType {
        self.kind.task_type()
    }

    pub fn max_level(&self) -> u8 {
        self.feedback_levels.iter().copied().max().unwrap_or(0)
    }
}

impl Exercise {
    /// The `PickVariables` solution of task `index`, in option order.
    pub fn variable_solution(&self, index: usize) -> Option<VariableSet> {
        match &self.tasks.get(index)?.kind {
            TaskKind::PickVariables { options } => {
                Some(options.iter().filter(|o| o.correct).map(|o| o.name.as_str()).collect())
            }
            _ => None,
        }
    }

    /// Output names in task order, e.g. `VARIABLES → FORMULAE → …`.
    pub fn pipeline(&self) -> Vec<&str> {
        self.tasks.iter().filter_map(|t| t.output.as_deref()).collect()
    }

    /// The student-facing view: statements, options and questions without
    /// any solution or answer key.
    pub fn view(&self, id: &str) -> ExerciseView {
        ExerciseView {
            id: id.to_string(),
            name: self.name.clone(),
            title: self.title.clone(),
            description: self.description.clone(),
            tasks: self.tasks.iter().enumerate().map(|(i, t)| t.view(i)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExerciseView {
    pub id: String,
    pub name: String,
    pub title: String,
    pub description: String,
    pub tasks: Vec<TaskView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskView {
    pub index: usize,
    #[serde(rename = "type")]
    pub task_type: TaskType,
    pub title: String,
    pub description: String,
    pub inputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub feedback_levels: BTreeSet<u8>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub statements: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub options: Vec<OptionView>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub questions: Vec<QuestionView>,
    /// Normal form the transformation must reach.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionView {
    pub name: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionView {
    pub text: String,
    pub options: Vec<String>,
}

impl TaskSpec {
    fn view(&self, index: usize) -> TaskView {
        let mut view = TaskView {
            index,
            task_type: self.task_type(),
            title: self.title.clone(),
            description: self.description.clone(),
            inputs: self.inputs.clone(),
            output: self.output.clone(),
            feedback_levels: self.feedback_levels.clone(),
            statements: Vec::new(),
            options: Vec::new(),
            questions: Vec::new(),
            target: None,
        };
        match &self.kind {
            TaskKind::PickVariables { options } => {
                view.options = options
                    .iter()
                    .map(|o| OptionView { name: o.name.clone(), description: o.description.clone() })
                    .collect();
            }
            TaskKind::CreateFormulas { statements, .. } => {
                view.statements = statements.iter().map(|s| s.description.clone()).collect();
            }
            TaskKind::ManualTransformation { target } | TaskKind::GuiTransformation { target } => {
                // A formula target is the answer itself; only name its kind.
                view.target = Some(match target {
                    Target::Formula(_) => "formula".to_string(),
                    other => other.to_string(),
                });
            }
            TaskKind::Questionnaire { questions } => {
                view.questions = questions
                    .iter()
                    .map(|q| QuestionView { text: q.text.clone(), options: q.options.clone() })
                    .collect();
            }
            TaskKind::InferenceFormula | TaskKind::Resolution | TaskKind::Message | TaskKind::CollectFeedback => {}
        }
        view
    }
}
