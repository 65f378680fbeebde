//! Front-end for the FSP subset: parsing, pretty-printing and elaboration into
//! concrete components and a control problem.

pub mod ast;
mod elaborate;
mod parser;
mod print;

pub use ast::SpecAst;
pub use elaborate::{
    elaborate, elaborate_components, elaborate_process, expand_labels, Bindings, Elaborated,
};
pub use parser::parse;
pub use print::print;

use crate::model::ProblemError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FspError {
    #[error("line {line}, column {col}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        line: usize,
        col: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("line {line}, column {col}: unsupported {what}")]
    Unsupported {
        line: usize,
        col: usize,
        what: String,
    },
    #[error("no definitions")]
    NoDefinitions,
    #[error("duplicate definition of `{0}`")]
    Duplicate(String),
    #[error("unknown reference to `{name}` in `{context}`")]
    UnknownReference { name: String, context: String },
    #[error("unbound constant `{0}`")]
    UnboundConstant(String),
    #[error("index {value} of `{name}` outside {lo}..{hi}")]
    IndexOutOfRange {
        name: String,
        value: i64,
        lo: i64,
        hi: i64,
    },
    #[error("negative index {value} in label `{label}`")]
    NegativeIndex { label: String, value: i64 },
    #[error("`{name}` expects {expected} argument(s), got {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("empty range {lo}..{hi}")]
    EmptyRange { lo: i64, hi: i64 },
    #[error("`{0}` is defined only in terms of itself")]
    UnguardedRecursion(String),
    #[error(
        "nondeterministic elaboration of `{process}`: two `{label}` transitions from `{state}`"
    )]
    Nondeterministic {
        process: String,
        state: String,
        label: String,
    },
    #[error("no target composite: add a `target` directive")]
    NoTarget,
    #[error("label `{0}` does not occur in any component alphabet")]
    UnknownLabel(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}
