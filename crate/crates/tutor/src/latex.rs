//! Converts LaTeX-authored formulas, such as `$B \rightarrow (D \wedge U)$`,
//! into the ASCII grammar used by exercise files.

use logic_tutor_core::formula;
use roxmltree::Document;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LatexError {
    #[error("unknown command `\\{0}`")]
    UnknownCommand(String),
    #[error("converted text `{text}` does not parse: {message}")]
    Unparsable { text: String, message: String },
    #[error("not well-formed XML: {0}")]
    Xml(String),
}

const COMMANDS: &[(&str, &str)] = &[
    ("rightarrow", "->"),
    ("to", "->"),
    ("Rightarrow", "->"),
    ("implies", "->"),
    ("leftrightarrow", "<->"),
    ("Leftrightarrow", "<->"),
    ("iff", "<->"),
    ("wedge", "&"),
    ("land", "&"),
    ("vee", "|"),
    ("lor", "|"),
    ("neg", "!"),
    ("lnot", "!"),
    ("oplus", "xor"),
    ("top", "true"),
    ("bot", "false"),
    ("left", ""),
    ("right", ""),
];

/// Converts one formula and normalises it through the parser.
pub fn convert_formula(latex: &str) -> Result<String, LatexError> {
    let mut out = String::new();
    let mut chars = latex.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '$' => {}
            '{' => out.push('('),
            '}' => out.push(')'),
            '\\' => {
                let mut name = String::new();
                while let Some(&n) = chars.peek() {
                    if !n.is_ascii_alphabetic() {
                        break;
                    }
                    name.push(n);
                    chars.next();
                }
                if name.is_empty() {
                    // Spacing commands such as `\,` and `\;`.
                    chars.next();
                    out.push(' ');
                    continue;
                }
                let (_, ascii) = COMMANDS
                    .iter()
                    .find(|(n, _)| *n == name)
                    .ok_or_else(|| LatexError::UnknownCommand(name.clone()))?;
                out.push(' ');
                out.push_str(ascii);
                out.push(' ');
            }
            other => out.push(other),
        }
    }
    let parsed = formula::parse(&out)
        .map_err(|e| LatexError::Unparsable { text: out.trim().to_string(), message: e.to_string() })?;
    Ok(parsed.to_string())
}

/// Rewrites every LaTeX `Solution` and `TargetFormula` in an exercise
/// document, leaving all other bytes untouched.
pub fn convert_document(xml: &str) -> Result<String, LatexError> {
    let doc = Document::parse(xml).map_err(|e| LatexError::Xml(e.to_string()))?;
    let mut edits = Vec::new();
    for node in doc.descendants().filter(|n| matches!(n.tag_name().name(), "Solution" | "TargetFormula")) {
        for text in node.children().filter(|n| n.is_text()) {
            let content = text.text().unwrap_or_default();
            if content.contains('$') || content.contains('\\') {
                edits.push((text.range(), escape(&convert_formula(content)?)));
            }
        }
    }
    let mut out = xml.to_string();
    for (range, replacement) in edits.into_iter().rev() {
        out.replace_range(range, &replacement);
    }
    Ok(out)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
