//! Command-line interface. [`run`] takes its arguments and output streams
//! explicitly so tests can drive it in-process.
//!
//! Exit codes: 0 success, 1 invalid data (bad exercise, wrong log, ...),
//! 2 usage errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use logic_tutor_core::feedback::{analyse, ErrorClass, FeedbackConfig};
use logic_tutor_core::formula::{self, VariableSet};
use serde::Serialize;

use crate::config::Config;
use crate::engine::xml_files;
use crate::exercise::load_exercise;
use crate::latex::{convert_document, convert_formula};
use crate::messages::{render_plain, resolve_report, Language, ResolvedReport};
use crate::session::{diagnose_statement, Settings};
use crate::stats::{render_table, stats_from_log, StatFilter};

#[derive(Debug, Parser)]
#[command(name = "logic-tutor", version, about = "Propositional logic exercises with diagnostic feedback")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the HTTP service.
    Serve {
        /// TOML configuration file; LOGIC_TUTOR_* variables override it.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Check exercise files, or every *.xml below a directory.
    ValidateExercise {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Feedback on a student formula against a solution.
    Diagnose {
        /// The student's formula.
        student: String,
        /// The reference solution.
        #[arg(long, conflicts_with = "exercise", required_unless_present = "exercise")]
        solution: Option<String>,
        /// Variables the student may use, comma separated.
        #[arg(long, value_delimiter = ',', requires = "solution")]
        variables: Vec<String>,
        /// Take the solution from a statement of this exercise file.
        #[arg(long, requires = "task")]
        exercise: Option<PathBuf>,
        #[arg(long)]
        task: Option<usize>,
        #[arg(long, default_value_t = 0)]
        statement: usize,
        /// Highest feedback level to show.
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(0..=2))]
        level: u8,
        #[arg(long, default_value = "en")]
        lang: Language,
        #[arg(long, value_enum, default_value_t = Format::Plain)]
        format: Format,
        /// Longest reversion sequence to search for.
        #[arg(long)]
        max_length: Option<usize>,
    },
    /// Error statistics from an event log.
    Stats {
        log: PathBuf,
        #[arg(long)]
        exercise: Option<String>,
        #[arg(long)]
        group: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Plain)]
        format: Format,
    },
    /// Rewrite LaTeX solutions of a legacy exercise file into ASCII syntax.
    ConvertLatex {
        #[arg(required_unless_present = "formula", conflicts_with = "formula")]
        file: Option<PathBuf>,
        /// Convert a single formula instead of a file.
        #[arg(long)]
        formula: Option<String>,
        #[arg(long, conflicts_with = "output")]
        in_place: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Plain,
    Structured,
}

/// Runs the CLI and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Serve { config } => serve(config.as_deref()),
        Command::ValidateExercise { paths } => validate(&paths, out),
        Command::Diagnose {
            student,
            solution,
            variables,
            exercise,
            task,
            statement,
            level,
            lang,
            format,
            max_length,
        } => {
            let source = match (solution, exercise, task) {
                (Some(solution), _, _) => Source::Solution { solution, variables },
                (None, Some(path), Some(task)) => Source::Exercise { path, task, statement },
                _ => unreachable!("clap enforces one source"),
            };
            diagnose(&student, source, level, lang, format, max_length, out)
        }
        Command::Stats { log, exercise, group, format } => {
            stats(&log, StatFilter { exercise, group }, format, out, err)
        }
        Command::ConvertLatex { file, formula, in_place, output } => convert(file, formula, in_place, output, out),
    };
    match result {
        Ok(code) => code,
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            1
        }
    }
}

type CmdResult = Result<i32, String>;

fn serve(config: Option<&Path>) -> CmdResult {
    let config = Config::load(config, |name| std::env::var(name).ok()).map_err(|e| e.to_string())?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    runtime.block_on(crate::service::serve(config)).map_err(|e| e.to_string())?;
    Ok(0)
}

fn validate(paths: &[PathBuf], out: &mut dyn Write) -> CmdResult {
    let mut failed = false;
    for root in paths {
        let files = xml_files(root).map_err(|e| format!("{}: {e}", root.display()))?;
        if files.is_empty() {
            writeln!(out, "{}: no exercise files", root.display()).map_err(io)?;
            failed = true;
        }
        for path in files {
            let shown = path.display();
            let text = match std::fs::read_to_string(&path) {
                Ok(text) => text,
                Err(e) => {
                    writeln!(out, "{shown}: error: {e}").map_err(io)?;
                    failed = true;
                    continue;
                }
            };
            match load_exercise(&text) {
                Ok(loaded) => {
                    for w in &loaded.warnings {
                        writeln!(out, "{shown}: warning: {w}").map_err(io)?;
                    }
                    let e = &loaded.exercise;
                    let pipeline = e.pipeline();
                    let pipeline =
                        if pipeline.is_empty() { "(no outputs)".to_string() } else { pipeline.join(" → ") };
                    writeln!(out, "{shown}: OK, {} tasks, pipeline {pipeline}", e.tasks.len()).map_err(io)?;
                }
                Err(failure) => {
                    for w in &failure.warnings {
                        writeln!(out, "{shown}: warning: {w}").map_err(io)?;
                    }
                    for e in &failure.errors {
                        writeln!(out, "{shown}: error: {e}").map_err(io)?;
                    }
                    failed = true;
                }
            }
        }
    }
    Ok(i32::from(failed))
}

enum Source {
    Solution { solution: String, variables: Vec<String> },
    Exercise { path: PathBuf, task: usize, statement: usize },
}

#[derive(Serialize)]
struct Structured {
    classification: ErrorClass,
    #[serde(flatten)]
    report: ResolvedReport,
}

fn diagnose(
    student: &str,
    source: Source,
    level: u8,
    lang: Language,
    format: Format,
    max_length: Option<usize>,
    out: &mut dyn Write,
) -> CmdResult {
    let mut settings = Settings::default();
    if let Some(n) = max_length {
        settings.limits.max_length = n;
    }
    let (report, class) = match source {
        Source::Solution { solution, variables } => {
            let solution = formula::parse(&solution).map_err(|e| format!("solution: {e}"))?;
            let config = FeedbackConfig {
                max_level: level,
                allowed: (!variables.is_empty()).then(|| VariableSet::from_names(variables.iter().map(String::as_str))),
                limits: settings.limits,
                ..FeedbackConfig::default()
            };
            let analysis = analyse(student, &solution, &config);
            (analysis.report.filtered(level), analysis.class)
        }
        Source::Exercise { path, task, statement } => {
            let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            let exercise = load_exercise(&text).map_err(|e| format!("{}: {e}", path.display()))?.exercise;
            diagnose_statement(&exercise, task, statement, student, &settings, Some(level))
                .map_err(|e| e.to_string())?
        }
    };
    let resolved = resolve_report(&report, lang);
    match format {
        Format::Plain => write!(out, "{}", render_plain(student, &resolved)).map_err(io)?,
        Format::Structured => {
            let body = Structured { classification: class, report: resolved };
            writeln!(out, "{}", serde_json::to_string_pretty(&body).expect("reports serialize")).map_err(io)?;
        }
    }
    Ok(0)
}

fn stats(log: &Path, filter: StatFilter, format: Format, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let bytes = std::fs::read(log).map_err(|e| format!("{}: {e}", log.display()))?;
    let (report, warnings) = stats_from_log(&bytes, &filter).map_err(|e| format!("{}: {e}", log.display()))?;
    for w in warnings {
        writeln!(err, "warning: {}: {w}", log.display()).map_err(io)?;
    }
    match format {
        Format::Plain => write!(out, "{}", render_table(&report)).map_err(io)?,
        Format::Structured => {
            writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("reports serialize")).map_err(io)?
        }
    }
    Ok(0)
}

fn convert(
    file: Option<PathBuf>,
    formula: Option<String>,
    in_place: bool,
    output: Option<PathBuf>,
    out: &mut dyn Write,
) -> CmdResult {
    if let Some(latex) = formula {
        let ascii = convert_formula(&latex).map_err(|e| e.to_string())?;
        writeln!(out, "{ascii}").map_err(io)?;
        return Ok(0);
    }
    let path = file.expect("clap enforces a file");
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let converted = convert_document(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let target = if in_place { Some(path) } else { output };
    match target {
        Some(target) => std::fs::write(&target, converted).map_err(|e| format!("{}: {e}", target.display()))?,
        None => out.write_all(converted.as_bytes()).map_err(io)?,
    }
    Ok(0)
}

fn io(e: std::io::Error) -> String {
    e.to_string()
}
