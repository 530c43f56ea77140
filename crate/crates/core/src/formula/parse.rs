//! Recursive-descent parser with precedence climbing.
//!
//! Connectives, tightest first: `!`, `&`, `|`, `xor`, `->`, `<->`. All binary
//! connectives nest to the right, so `B & D & U` is `B & (D & U)`. Unicode
//! aliases `¬ ∧ ∨ ⊕ → ↔` and the constants `true`/`false` (`⊤`/`⊥`) are
//! accepted. Offsets count characters, not bytes.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::{BinOp, Formula, Node, Span, VariableSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SyntaxErrorKind {
    EmptyInput,
    /// Input ended where a formula or `)` was still expected.
    UnexpectedEnd {
        expected: &'static str,
    },
    UnexpectedToken {
        found: String,
        expected: &'static str,
    },
    UnclosedParenthesis {
        opened_at: usize,
    },
    UnmatchedParenthesis,
    InvalidCharacter(char),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at offset {offset}: {kind}")]
pub struct SyntaxError {
    pub offset: usize,
    pub kind: SyntaxErrorKind,
}

impl SyntaxError {
    /// Short description of what the parser expected, for feedback messages.
    pub fn expectation(&self) -> String {
        match &self.kind {
            SyntaxErrorKind::EmptyInput => "a formula".to_string(),
            SyntaxErrorKind::UnexpectedEnd { expected } => (*expected).to_string(),
            SyntaxErrorKind::UnexpectedToken { expected, .. } => (*expected).to_string(),
            SyntaxErrorKind::UnclosedParenthesis { .. } => "`)`".to_string(),
            SyntaxErrorKind::UnmatchedParenthesis => "an operator or the end of input".to_string(),
            SyntaxErrorKind::InvalidCharacter(_) => "a variable, constant, `!` or `(`".to_string(),
        }
    }
}

impl fmt::Display for SyntaxErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SyntaxErrorKind::EmptyInput => f.write_str("empty input, expected a formula"),
            SyntaxErrorKind::UnexpectedEnd { expected } => {
                write!(f, "unexpected end of input, expected {expected}")
            }
            SyntaxErrorKind::UnexpectedToken { found, expected } => {
                write!(f, "unexpected `{found}`, expected {expected}")
            }
            SyntaxErrorKind::UnclosedParenthesis { opened_at } => {
                write!(f, "parenthesis opened at offset {opened_at} is never closed")
            }
            SyntaxErrorKind::UnmatchedParenthesis => f.write_str("unmatched `)`"),
            SyntaxErrorKind::InvalidCharacter(c) => write!(f, "invalid character `{c}`"),
        }
    }
}

/// Result of [`parse_with`]: the formula and every variable outside the allowed set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedFormula {
    pub formula: Formula,
    pub undeclared: Vec<String>,
}

pub fn parse(text: &str) -> Result<Formula, SyntaxError> {
    parse_source(text, false)
}

/// Like [`parse`], but `$Name` is lexed as a variable named `$Name`. Used for
/// rule patterns.
pub(crate) fn parse_with_metavariables(text: &str) -> Result<Formula, SyntaxError> {
    parse_source(text, true)
}

fn parse_source(text: &str, metavariables: bool) -> Result<Formula, SyntaxError> {
    let tokens = lex(text, metavariables)?;
    let mut parser = Parser { tokens, pos: 0 };
    if parser.peek().tok == Tok::Eof {
        return Err(SyntaxError { offset: parser.peek().span.start, kind: SyntaxErrorKind::EmptyInput });
    }
    let f = parser.formula(0)?;
    let next = parser.peek();
    match &next.tok {
        Tok::Eof => Ok(f),
        Tok::RParen => Err(SyntaxError { offset: next.span.start, kind: SyntaxErrorKind::UnmatchedParenthesis }),
        other => Err(SyntaxError {
            offset: next.span.start,
            kind: SyntaxErrorKind::UnexpectedToken {
                found: other.to_string(),
                expected: "an operator or the end of input",
            },
        }),
    }
}

/// Parses and records variables outside `allowed`. Undeclared variables are not
/// an error here; reporting them is up to the caller.
pub fn parse_with(text: &str, allowed: &VariableSet) -> Result<ParsedFormula, SyntaxError> {
    let formula = parse(text)?;
    let undeclared = formula.variables().iter().filter(|v| !allowed.contains(v)).map(String::from).collect();
    Ok(ParsedFormula { formula, undeclared })
}

/// `[A-Za-z][A-Za-z0-9_]*`, excluding the keywords `xor`, `true` and `false`.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !matches!(name, "xor" | "true" | "false")
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Not,
    Op(BinOp),
    LParen,
    RParen,
    Const(bool),
    Ident(String),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Not => f.write_str("!"),
            Tok::Op(op) => f.write_str(super::render::ascii_symbol(*op)),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
            Tok::Const(true) => f.write_str("true"),
            Tok::Const(false) => f.write_str("false"),
            Tok::Ident(name) => f.write_str(name),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: Span,
}

fn lex(text: &str, metavariables: bool) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let single = |tok| Some((tok, 1));
        let lexed = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '!' | '¬' => single(Tok::Not),
            '&' | '∧' => single(Tok::Op(BinOp::And)),
            '|' | '∨' => single(Tok::Op(BinOp::Or)),
            '⊕' => single(Tok::Op(BinOp::Xor)),
            '→' => single(Tok::Op(BinOp::Implies)),
            '↔' => single(Tok::Op(BinOp::Iff)),
            '⊤' => single(Tok::Const(true)),
            '⊥' => single(Tok::Const(false)),
            '(' => single(Tok::LParen),
            ')' => single(Tok::RParen),
            '-' if chars.get(i + 1) == Some(&'>') => Some((Tok::Op(BinOp::Implies), 2)),
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => Some((Tok::Op(BinOp::Iff), 3)),
            '$' if metavariables && chars.get(i + 1).is_some_and(char::is_ascii_alphabetic) => {
                let mut end = i + 2;
                while end < chars.len() && (chars[end].is_ascii_alphanumeric() || chars[end] == '_') {
                    end += 1;
                }
                Some((Tok::Ident(chars[i..end].iter().collect()), end - i))
            }
            c if c.is_ascii_alphabetic() => {
                let mut end = i + 1;
                while end < chars.len() && (chars[end].is_ascii_alphanumeric() || chars[end] == '_') {
                    end += 1;
                }
                let word: String = chars[i..end].iter().collect();
                let tok = match word.as_str() {
                    "xor" => Tok::Op(BinOp::Xor),
                    "true" => Tok::Const(true),
                    "false" => Tok::Const(false),
                    _ => Tok::Ident(word),
                };
                Some((tok, end - i))
            }
            _ => None,
        };
        let Some((tok, width)) = lexed else {
            return Err(SyntaxError { offset: start, kind: SyntaxErrorKind::InvalidCharacter(c) });
        };
        i += width;
        tokens.push(Token { tok, span: Span::new(start, i) });
    }
    tokens.push(Token { tok: Tok::Eof, span: Span::new(chars.len(), chars.len()) });
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let token = self.tokens[self.pos].clone();
        if token.tok != Tok::Eof {
            self.pos += 1;
        }
        token
    }

    fn formula(&mut self, min_prec: u8) -> Result<Formula, SyntaxError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op(op) if op.precedence() >= min_prec => op,
                _ => return Ok(lhs),
            };
            self.bump();
            // Same precedence on the right: every connective nests rightwards.
            let rhs = self.formula(op.precedence())?;
            let span = Span::new(lhs.span.unwrap().start, rhs.span.unwrap().end);
            lhs = Formula::binary(op, lhs, rhs).with_span(span);
        }
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        let token = self.bump();
        match token.tok {
            Tok::Not => {
                let inner = self.unary()?;
                let span = Span::new(token.span.start, inner.span.unwrap().end);
                Ok(Formula::not(inner).with_span(span))
            }
            Tok::Const(value) => Ok(Formula::constant(value).with_span(token.span)),
            Tok::Ident(name) => Ok(Formula::new(Node::Var(name)).with_span(token.span)),
            Tok::LParen => {
                let inner = self.formula(0)?;
                let close = self.bump();
                match close.tok {
                    Tok::RParen => {
                        // A parenthesised group spans its parentheses.
                        let mut inner = inner;
                        inner.span = Some(Span::new(token.span.start, close.span.end));
                        Ok(inner)
                    }
                    Tok::Eof => Err(SyntaxError {
                        offset: close.span.start,
                        kind: SyntaxErrorKind::UnclosedParenthesis { opened_at: token.span.start },
                    }),
                    other => Err(SyntaxError {
                        offset: close.span.start,
                        kind: SyntaxErrorKind::UnexpectedToken {
                            found: other.to_string(),
                            expected: "an operator or `)`",
                        },
                    }),
                }
            }
            Tok::Eof => Err(SyntaxError {
                offset: token.span.start,
                kind: SyntaxErrorKind::UnexpectedEnd { expected: "a formula" },
            }),
            other => Err(SyntaxError {
                offset: token.span.start,
                kind: SyntaxErrorKind::UnexpectedToken {
                    found: other.to_string(),
                    expected: "a variable, constant, `!` or `(`",
                },
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(name: &str) -> Formula {
        Formula::var(name)
    }

    #[test]
    fn parses_implication() {
        assert_eq!(parse("D -> B").unwrap(), Formula::implies(v("D"), v("B")));
    }

    #[test]
    fn conjunction_chains_nest_right() {
        let expected = Formula::not(Formula::and(v("B"), Formula::and(v("D"), v("U"))));
        assert_eq!(parse("!(B & D & U)").unwrap(), expected);
        assert_eq!(parse("¬(B ∧ D ∧ U)").unwrap(), expected);
    }

    #[test]
    fn precedence_levels() {
        let f = parse("A & B | C xor D -> E <-> F").unwrap();
        let expected = Formula::iff(
            Formula::implies(Formula::xor(Formula::or(Formula::and(v("A"), v("B")), v("C")), v("D")), v("E")),
            v("F"),
        );
        assert_eq!(f, expected);
        assert_eq!(parse("A -> B -> C").unwrap(), Formula::implies(v("A"), Formula::implies(v("B"), v("C"))));
        assert_eq!(parse("!A & B").unwrap(), Formula::and(Formula::not(v("A")), v("B")));
    }

    #[test]
    fn unicode_aliases() {
        assert_eq!(parse("A → B").unwrap(), parse("A -> B").unwrap());
        assert_eq!(parse("A ↔ B ⊕ C").unwrap(), parse("A <-> B xor C").unwrap());
        assert_eq!(parse("⊤ ∨ ⊥").unwrap(), parse("true | false").unwrap());
    }

    #[test]
    fn dangling_operator_reports_end_offset() {
        let err = parse("A -> ").unwrap_err();
        assert_eq!(err.offset, 5);
        assert!(matches!(err.kind, SyntaxErrorKind::UnexpectedEnd { .. }));
        assert_eq!(parse("D ->").unwrap_err().offset, 4);
    }

    #[test]
    fn other_syntax_errors() {
        assert_eq!(parse("").unwrap_err().kind, SyntaxErrorKind::EmptyInput);
        assert_eq!(parse("   ").unwrap_err().offset, 3);
        let err = parse("(A & B").unwrap_err();
        assert_eq!(err, SyntaxError { offset: 6, kind: SyntaxErrorKind::UnclosedParenthesis { opened_at: 0 } });
        assert_eq!(parse("A)").unwrap_err().kind, SyntaxErrorKind::UnmatchedParenthesis);
        assert_eq!(parse("B -> -> D").unwrap_err().offset, 5);
        assert_eq!(parse("A B").unwrap_err().offset, 2);
        assert_eq!(parse("A # B").unwrap_err().kind, SyntaxErrorKind::InvalidCharacter('#'));
        assert_eq!(parse("1A").unwrap_err().offset, 0);
    }

    #[test]
    fn offsets_count_characters() {
        let err = parse("¬A ∧ ").unwrap_err();
        assert_eq!(err.offset, 5);
        let f = parse("¬A ∧ B").unwrap();
        assert_eq!(f.span(), Some(Span::new(0, 6)));
    }

    #[test]
    fn spans_cover_parentheses_and_nest() {
        let text = "(D & U) -> !B";
        let f = parse(text).unwrap();
        assert_eq!(f.span(), Some(Span::new(0, 13)));
        assert_eq!(f.at(&[0]).unwrap().span(), Some(Span::new(0, 7)));
        assert_eq!(f.at(&[1]).unwrap().span(), Some(Span::new(11, 13)));
        for (path, node) in f.positions() {
            if let Some(parent) = path.split_last().map(|(_, p)| f.at(p).unwrap()) {
                assert!(parent.span().unwrap().contains(&node.span().unwrap()));
            }
        }
    }

    #[test]
    fn identifiers() {
        assert!(is_identifier("A1_b"));
        assert!(!is_identifier("1A"));
        assert!(!is_identifier("xor"));
        assert!(!is_identifier(""));
        assert_eq!(parse("db_1 & x2").unwrap().variables().names(), ["db_1", "x2"]);
    }

    #[test]
    fn records_undeclared_variables() {
        let allowed = VariableSet::from_names(["B", "D", "U"]);
        let parsed = parse_with("X -> (B & Y)", &allowed).unwrap();
        assert_eq!(parsed.undeclared, ["X", "Y"]);
    }
}
