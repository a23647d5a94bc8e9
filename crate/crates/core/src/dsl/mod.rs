//! The `.ess` method description language.
//!
//! ```text
//! document     := (kernel | practice | method | role | togaf_phase)*
//! kernel       := "kernel" STRING "{" (area | alpha | competency | space_decl | workproduct)* "}"
//! area         := "area" IDENT "color" IDENT
//! alpha        := "alpha" NAME "area" IDENT "{" state+ "}"
//! state        := "state" NAME "{" ("check" STRING)+ "}"
//! competency   := "competency" NAME "area" IDENT ("levels" INT)?
//! space_decl   := "space" STRING "area" IDENT ("in" STRING)? ("goal" STRING)?
//! workproduct  := "workproduct" STRING "category" IDENT ("description" STRING)?
//! role         := "role" STRING "{" ("competency" NAME "@" INT)+ "}"
//! practice     := "practice" STRING "area" IDENT "{" practice_item* "}"
//! practice_item:= "goal" STRING | "input" STRING | "output" STRING | workproduct | space_block
//! space_block  := "space" STRING ("area" IDENT)? ("goal" STRING)? "{" (space_block | activity)* "}"
//! activity     := "activity" STRING ("requires" NAME "@" INT | "produces" STRING
//!                 | "role" STRING | "tag" IDENT)*
//! method       := "method" STRING "{" ("preamble" STRING)? ("cycle" STRING)+ ("concurrent" STRING)* "}"
//! togaf_phase  := "togaf_phase" IDENT STRING "{" "objective" STRING step* output* "}"
//! step         := "step" STRING ("goal" STRING)? "{" activity_spec* "}"
//! activity_spec:= "activity" STRING ("tag" IDENT | "feeds" STRING | "role" STRING)*
//!                 ("{" activity_spec+ "}")?
//! output       := "output" STRING "category" IDENT ("description" STRING)?
//! NAME         := IDENT | STRING
//! ```
//!
//! `#` starts a comment that runs to the end of the line. Strings are
//! double-quoted with `\"` as the only escape and may not span lines.
//! A `produces` or `feeds` string containing `": "` names a work product and
//! the part contributed to it, split at the first colon.

mod export;
mod lexer;
mod parser;
mod render;

use std::fmt;

use serde::Serialize;

use crate::diagnostic::{Severity, SourceSpan};

pub use export::{export_dot, export_json, Export, ExportError};
pub use parser::{parse, parse_files};
pub use render::{render_canonical, render_practice};

/// A syntax or structure problem found while parsing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    pub span: SourceSpan,
    pub message: String,
    /// What the parser was looking for, for syntax errors.
    pub expected: Option<String>,
}

impl ParseDiagnostic {
    pub fn error(span: SourceSpan, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            span,
            message: message.into(),
            expected: None,
        }
    }

    pub fn warning(span: SourceSpan, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            ..Self::error(span, message)
        }
    }

    pub fn expected(mut self, what: impl Into<String>) -> Self {
        self.expected = Some(what.into());
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.span, self.severity, self.message)?;
        if let Some(e) = &self.expected {
            write!(f, " (expected {e})")?;
        }
        Ok(())
    }
}

/// A successfully parsed document together with any warnings.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub document: crate::metamodel::ModelDocument,
    pub warnings: Vec<ParseDiagnostic>,
}
