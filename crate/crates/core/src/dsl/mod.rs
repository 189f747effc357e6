//! Parenthesized language for NTCC programs.
//!
//! ```text
//! (declare-var S int -1 16 17)
//! (declare-var go int 0 100)
//! (defproc Sync (i)
//!   (par (when (and (v>= S[(- i 1)] -1) (v>= go i))
//!          (par (call Add i) (next (call Sync (+ i 1)))))
//!        (unless (and (v>= S[(- i 1)] -1) (v>= go i)) (call Sync i))))
//! ```
//!
//! The grammar is in `docs/grammar.md`.

mod ast;
mod elab;
mod sexp;

use std::fmt;

use thiserror::Error;

pub use ast::{
    AGuard, ALambda, AProc, ATell, ArithOp, Ex, ExKind, GuardKind, Item, ItemKind, ProcKind,
    SpecAst, TellKind,
};
pub use elab::{elaborate, from_process, from_program, lint, CELL_DEFAULT};
pub use sexp::{read_all, Sexp, SexpKind};

use crate::program::Program;

/// Source position. All spans compare equal so that trees built from
/// different texts can be compared structurally.
#[derive(Clone, Copy, Debug, Default, Eq)]
pub struct Span {
    /// Byte offsets.
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DslError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("{line}:{col}: unknown name `{name}`")]
    UnknownName { name: String, line: u32, col: u32 },
    #[error("{line}:{col}: `{name}` takes {expected} argument(s), got {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
        line: u32,
        col: u32,
    },
    #[error("{line}:{col}: {msg}")]
    Dimension { line: u32, col: u32, msg: String },
    #[error("{line}:{col}: {msg}")]
    Invalid { line: u32, col: u32, msg: String },
}

/// Parses a whole spec file.
pub fn parse(text: &str) -> Result<SpecAst, DslError> {
    ast::read_spec(&read_all(text)?)
}

/// Parses a single process, e.g. `(when (= x 1) (tell (= y 2)))`.
pub fn parse_process(text: &str) -> Result<AProc, DslError> {
    let forms = read_all(text)?;
    match forms.as_slice() {
        [one] => ast::read_proc(one),
        _ => Err(DslError::Syntax {
            line: 1,
            col: 1,
            msg: format!("expected one process, found {} forms", forms.len()),
        }),
    }
}

/// Pretty-prints a spec, one top-level form per paragraph.
pub fn print(ast: &SpecAst) -> String {
    let mut out = String::new();
    for (i, item) in ast.items.iter().enumerate() {
        let decl = matches!(item.kind, ItemKind::DeclareVar { .. });
        let prev_decl = i > 0 && matches!(ast.items[i - 1].kind, ItemKind::DeclareVar { .. });
        if i > 0 && !(decl && prev_decl) {
            out.push('\n');
        }
        out.push_str(&item.to_sexp().pretty(80));
        out.push('\n');
    }
    out
}

/// Spec text for a program built through the host API.
pub fn to_dsl(program: &Program) -> String {
    print(&from_program(program))
}

/// Parses and elaborates in one step.
pub fn load(text: &str, main_args: &[i64]) -> Result<Program, DslError> {
    elaborate(&parse(text)?, main_args)
}
