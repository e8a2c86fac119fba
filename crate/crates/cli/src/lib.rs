//! Session-file front end: a small line-oriented language for declaring
//! charts, fields, forms, structures, prequantization data, polarizations
//! and foliations, plus named checks over them. See the guide for the
//! grammar and the list of check kinds.

pub mod lexer;
pub mod parser;
pub mod runner;
pub mod session;

use lexer::Pos;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: unknown name `{name}`")]
    UnknownName { pos: Pos, name: String },
    #[error("{pos}: `{name}` is not a {kind}")]
    WrongKind { pos: Pos, name: String, kind: String },
    #[error("{pos}: reserved symbol `{name}`")]
    Reserved { pos: Pos, name: String },
    #[error("{pos}: chart mismatch: {msg}")]
    ChartMismatch { pos: Pos, msg: String },
}

impl ParseError {
    pub fn syntax(pos: Pos, msg: impl Into<String>) -> Self {
        ParseError::Syntax { pos, msg: msg.into() }
    }

    pub fn unknown(pos: Pos, name: &str) -> Self {
        ParseError::UnknownName { pos, name: name.to_string() }
    }

    pub fn unknown_kind(pos: Pos, name: &str, kind: &str) -> Self {
        ParseError::WrongKind { pos, name: name.to_string(), kind: kind.to_string() }
    }
}

pub use parser::parse_session;
pub use runner::{emit_json, emit_text, exit_code, run_checks, CheckReport, RunnerConfig, Status};
pub use session::Session;

/// The CLI chapter of the guide runs with this crate's doctests.
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
