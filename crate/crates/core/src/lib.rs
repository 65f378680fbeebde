//! Directed controller synthesis for systems given as a parallel composition
//! of deterministic labelled transition systems.
//!
//! The pipeline is: [`fsp::parse`] and [`fsp::elaborate`] a model, build a
//! [`ControlProblem`], then run [`engine::synthesize`] (on-the-fly, guided by
//! [`abstraction`]) or [`oracle::solve_monolithic`] (explicit product).

pub mod abstraction;
pub mod aut;
pub mod bench;
pub mod compose;
pub mod engine;
pub mod fsp;
pub mod label;
pub mod lts;
pub mod model;
pub mod oracle;

pub use label::{Label, LabelId, LabelSet};
pub use lts::{Lts, LtsBuilder, StateId};
pub use model::{CompositeState, ControlProblem, Model, ProblemError, StateClass};

#[cfg(test)]
mod fixtures;

/// Any failure surfaced to a user, with a stable diagnostic code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Fsp(#[from] fsp::FspError),
    #[error(transparent)]
    Aut(#[from] aut::AutError),
    #[error(transparent)]
    StateCap(#[from] compose::CapExceeded),
    #[error(transparent)]
    Synthesis(#[from] engine::SynthesisError),
    #[error(transparent)]
    Verify(#[from] oracle::VerifyError),
    #[error(transparent)]
    Bench(#[from] bench::BenchError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn code(&self) -> &'static str {
        use fsp::FspError as F;
        match self {
            Error::Fsp(
                F::Syntax { .. }
                | F::Unsupported { .. }
                | F::NoDefinitions
                | F::Duplicate(_)
                | F::UnknownReference { .. },
            ) => "E-PARSE",
            Error::Fsp(_) => "E-ELAB",
            Error::Aut(_) => "E-AUT",
            Error::StateCap(_) | Error::Synthesis(_) => "E-CAP",
            Error::Verify(_) => "E-VERIFY",
            Error::Bench(bench::BenchError::Fsp(_)) => "E-ELAB",
            Error::Bench(bench::BenchError::Csv(_) | bench::BenchError::Io(_)) => "E-IO",
            Error::Bench(_) => "E-USAGE",
            Error::Io { .. } => "E-IO",
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

#[cfg(test)]
mod error_tests {
    use super::*;

    #[test]
    fn codes() {
        assert_eq!(Error::from(fsp::parse("").unwrap_err()).code(), "E-PARSE");
        let e = fsp::FspError::UnboundConstant("N".into());
        assert_eq!(Error::from(e).code(), "E-ELAB");
        assert_eq!(Error::from(compose::CapExceeded { cap: 1 }).code(), "E-CAP");
        let io = std::io::Error::new(std::io::ErrorKind::NotFound, "gone");
        assert_eq!(Error::io("x.fsp", io).to_string(), "x.fsp: gone");
    }
}
