//! Shared diagnostic plumbing: source spans, severities and rule identifiers.

use std::fmt;

use serde::Serialize;

/// A region of a source file. Lines and columns are 1-based; columns count
/// characters, not bytes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SourceSpan {
    pub file: String,
    pub start_line: usize,
    pub start_col: usize,
    pub end_line: usize,
    pub end_col: usize,
}

impl SourceSpan {
    pub fn new(
        file: impl Into<String>,
        start: (usize, usize),
        end: (usize, usize),
    ) -> Self {
        debug_assert!(start <= end);
        Self {
            file: file.into(),
            start_line: start.0,
            start_col: start.1,
            end_line: end.0,
            end_col: end.1,
        }
    }

    /// Span that covers both `self` and `other`. Both must be in the same file.
    pub fn to(&self, other: &SourceSpan) -> SourceSpan {
        let start = (self.start_line, self.start_col).min((other.start_line, other.start_col));
        let end = (self.end_line, self.end_col).max((other.end_line, other.end_col));
        SourceSpan::new(self.file.clone(), start, end)
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.start_line, self.start_col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Every rule the validator and the lint engine can report.
///
/// `V0xx` rules come from resolution and well-formedness checking, `L0xx`
/// rules are the TOGAF quality lints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RuleId {
    V001,
    V002,
    V010,
    V011,
    V012,
    V013,
    V014,
    V015,
    V016,
    L001,
    L002,
    L003,
    L004,
}

impl RuleId {
    pub const ALL: [RuleId; 13] = [
        RuleId::V001,
        RuleId::V002,
        RuleId::V010,
        RuleId::V011,
        RuleId::V012,
        RuleId::V013,
        RuleId::V014,
        RuleId::V015,
        RuleId::V016,
        RuleId::L001,
        RuleId::L002,
        RuleId::L003,
        RuleId::L004,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::V001 => "V001",
            RuleId::V002 => "V002",
            RuleId::V010 => "V010",
            RuleId::V011 => "V011",
            RuleId::V012 => "V012",
            RuleId::V013 => "V013",
            RuleId::V014 => "V014",
            RuleId::V015 => "V015",
            RuleId::V016 => "V016",
            RuleId::L001 => "L001",
            RuleId::L002 => "L002",
            RuleId::L003 => "L003",
            RuleId::L004 => "L004",
        }
    }

    pub fn parse(s: &str) -> Option<RuleId> {
        RuleId::ALL.into_iter().find(|r| r.as_str() == s)
    }

    pub fn is_lint(self) -> bool {
        self.as_str().starts_with('L')
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A finding produced by the validator or the lint engine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub rule: RuleId,
    pub severity: Severity,
    /// Id of the offending element, e.g. `practice.phase_a/space.define_scope`.
    pub path: String,
    pub message: String,
    pub span: Option<SourceSpan>,
}

impl Diagnostic {
    pub fn error(rule: RuleId, path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            rule,
            severity: Severity::Error,
            path: path.into(),
            message: message.into(),
            span: None,
        }
    }

    pub fn warning(rule: RuleId, path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            ..Self::error(rule, path, message)
        }
    }

    pub fn with_span(mut self, span: Option<SourceSpan>) -> Self {
        self.span = span;
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

/// Line-oriented report form: `RULE severity path: message (file:line:col)`.
impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}: {}", self.rule, self.severity, self.path, self.message)?;
        if let Some(span) = &self.span {
            write!(f, " ({span})")?;
        }
        Ok(())
    }
}
