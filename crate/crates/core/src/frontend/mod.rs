//! The `.emme` input language.
//!
//! ```text
//! var x = new SharedArrayBuffer();     // 8 bytes unless a size is given
//!
//! Thread t1 {
//!   x-I8[0] = 1;                       // unordered write
//!   atomic print(x-I16[0]);            // seq-cst read
//!   x-I8[1] += 2;                      // read-modify-write (always seq-cst)
//!   for (i in 0..$n) { tear x-I8[i] = i; }
//! }
//!
//! Thread t2 {
//!   if (x-I8[0] == 1) { x-I8[0] = 3; } else { x-I8[1] = 3; }
//! }
//! ```
//!
//! Indices are byte offsets into the block. `$name` parameters are
//! substituted textually before parsing, bounded loops are unrolled, and
//! both arms of an `if` become guarded events.

mod emit;
mod lexer;
mod parser;

use std::collections::BTreeMap;

use thiserror::Error;

pub use emit::emit_source;

use crate::program::{validate_program, Program, ValidationReport};

/// Deepest allowed nesting of `if`/`for` blocks.
pub const MAX_NESTING: usize = 4;
/// Most iterations a single `for` loop may unroll to.
pub const MAX_LOOP_ITERATIONS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrontendError {
    #[error("{line}:{col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("{line}:{col}: loop has no upper bound")]
    UnboundedLoop { line: usize, col: usize },
    #[error("{line}:{col}: loop runs more than {limit} iterations")]
    LoopTooLong {
        line: usize,
        col: usize,
        limit: usize,
    },
    #[error("{line}:{col}: blocks nested deeper than {limit}")]
    NestingTooDeep {
        line: usize,
        col: usize,
        limit: usize,
    },
    #[error("{line}:{col}: unknown block `{name}`")]
    UnknownBlock {
        name: String,
        line: usize,
        col: usize,
    },
    #[error("parameter `${0}` has no binding")]
    UnknownParameter(String),
    #[error("invalid program: {0}")]
    Invalid(ValidationReport),
}

impl FrontendError {
    pub(crate) fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Self {
        FrontendError::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }
}

/// Raw program text together with its parameter bindings.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceProgram {
    pub text: String,
    pub params: BTreeMap<String, i128>,
}

impl SourceProgram {
    pub fn new(text: impl Into<String>) -> Self {
        SourceProgram {
            text: text.into(),
            params: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, name: impl Into<String>, value: i128) -> Self {
        self.params.insert(name.into(), value);
        self
    }
}

/// Replaces every `$name` with its bound value.
pub fn expand_params(
    src: &SourceProgram,
    bindings: &BTreeMap<String, i128>,
) -> Result<SourceProgram, FrontendError> {
    let mut out = String::with_capacity(src.text.len());
    let mut rest = src.text.as_str();
    while let Some(at) = rest.find('$') {
        out.push_str(&rest[..at]);
        let after = &rest[at + 1..];
        let len = after
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(after.len());
        let name = &after[..len];
        let value = bindings
            .get(name)
            .ok_or_else(|| FrontendError::UnknownParameter(name.to_string()))?;
        out.push_str(&value.to_string());
        rest = &after[len..];
    }
    out.push_str(rest);
    Ok(SourceProgram {
        text: out,
        params: BTreeMap::new(),
    })
}

/// Parses, elaborates and validates a program.
pub fn parse(src: &SourceProgram) -> Result<Program, FrontendError> {
    let expanded = expand_params(src, &src.params)?;
    let program = parser::parse_text(&expanded.text)?;
    let report = validate_program(&program);
    if report.is_ok() {
        Ok(program)
    } else {
        Err(FrontendError::Invalid(report))
    }
}

/// Shorthand for [`parse`] on parameter-free text.
pub fn parse_str(text: &str) -> Result<Program, FrontendError> {
    parse(&SourceProgram::new(text))
}
