use alloc::string::String;

use super::{BinOp, Formula, Node};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Style {
    #[default]
    Ascii,
    Unicode,
}

pub(super) fn ascii_symbol(op: BinOp) -> &'static str {
    match op {
        BinOp::And => "&",
        BinOp::Or => "|",
        BinOp::Xor => "xor",
        BinOp::Implies => "->",
        BinOp::Iff => "<->",
    }
}

fn unicode_symbol(op: BinOp) -> &'static str {
    match op {
        BinOp::And => "∧",
        BinOp::Or => "∨",
        BinOp::Xor => "⊕",
        BinOp::Implies => "→",
        BinOp::Iff => "↔",
    }
}

/// Renders with the fewest parentheses that still parse back to the same tree.
pub fn render(f: &Formula, style: Style) -> String {
    let mut out = String::new();
    write(f, style, &mut out);
    out
}

fn write(f: &Formula, style: Style, out: &mut String) {
    match f.node() {
        Node::Const(value) => out.push_str(match (style, value) {
            (Style::Ascii, true) => "true",
            (Style::Ascii, false) => "false",
            (Style::Unicode, true) => "⊤",
            (Style::Unicode, false) => "⊥",
        }),
        Node::Var(name) => out.push_str(name),
        Node::Not(inner) => {
            out.push_str(if style == Style::Ascii { "!" } else { "¬" });
            write_operand(inner, matches!(inner.node(), Node::Binary(..)), style, out);
        }
        Node::Binary(op, l, r) => {
            let prec = op.precedence();
            // Right nesting is implicit; a left child of equal precedence needs parentheses.
            write_operand(l, binary_prec(l).is_some_and(|p| p <= prec), style, out);
            out.push(' ');
            out.push_str(match style {
                Style::Ascii => ascii_symbol(*op),
                Style::Unicode => unicode_symbol(*op),
            });
            out.push(' ');
            write_operand(r, binary_prec(r).is_some_and(|p| p < prec), style, out);
        }
    }
}

fn binary_prec(f: &Formula) -> Option<u8> {
    match f.node() {
        Node::Binary(op, ..) => Some(op.precedence()),
        _ => None,
    }
}

fn write_operand(f: &Formula, parens: bool, style: Style, out: &mut String) {
    if parens {
        out.push('(');
        write(f, style, out);
        out.push(')');
    } else {
        write(f, style, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    #[test]
    fn single_connective() {
        let f = Formula::implies(Formula::var("D"), Formula::var("B"));
        assert_eq!(render(&f, Style::Unicode), "D → B");
        assert_eq!(render(&f, Style::Ascii), "D -> B");
    }

    #[test]
    fn right_chains_render_flat() {
        let f = Formula::not(Formula::and(Formula::var("B"), Formula::and(Formula::var("D"), Formula::var("U"))));
        let text = render(&f, Style::Ascii);
        assert_eq!(text, "!(B & D & U)");
        assert_eq!(parse(&text).unwrap(), f);
    }

    #[test]
    fn left_nesting_keeps_parentheses() {
        let f = parse("(A & B) & C").unwrap();
        assert_eq!(render(&f, Style::Ascii), "(A & B) & C");
        let g = parse("(A -> B) -> C").unwrap();
        assert_eq!(render(&g, Style::Ascii), "(A -> B) -> C");
        assert_eq!(render(&parse("A | B & C").unwrap(), Style::Ascii), "A | B & C");
        assert_eq!(render(&parse("(A | B) & C").unwrap(), Style::Ascii), "(A | B) & C");
        assert_eq!(render(&parse("!!A").unwrap(), Style::Unicode), "¬¬A");
        assert_eq!(render(&parse("!(A xor true)").unwrap(), Style::Ascii), "!(A xor true)");
    }
}
