//! Core logic for an interactive propositional-logic tutor.
//!
//! Everything in this crate is a pure function over immutable values and
//! compiles without `std`; only `alloc` is required. The companion `logic-tutor`
//! crate carries exercise files, sessions, logging, HTTP and the CLI.
//!
//! - [`formula`]: parsing, rendering, semantics, normal forms and clauses.
//! - [`pattern`]: formula patterns with metavariables and their matches.
//! - [`feedback`]: the cascading feedback generator and the reversion search.
//! - [`transform`]: step-by-step normal-form transformation tasks.
//! - [`resolution`]: resolution derivations, step checking and refutation search.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod feedback;
pub mod formula;
pub mod pattern;
pub mod resolution;
pub mod transform;

#[cfg(feature = "testing")]
pub mod testing;

pub use feedback::{FeedbackItem, FeedbackReport, ItemKind, Verdict};
pub use formula::{
    Assignment, BinOp, Clause, ClauseSet, Formula, FormulaError, Literal, Node, Path, Span, Style, SyntaxError,
    VariableSet,
};
