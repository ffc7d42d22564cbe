use std::fmt;

use serde::Serialize;

/// Byte range into the source text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Span { start, end }
    }

    pub fn to(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }

    /// 1-based line and column of the start of the span.
    pub fn line_col(&self, src: &str) -> (usize, usize) {
        let upto = &src[..self.start.min(src.len())];
        let line = upto.matches('\n').count() + 1;
        let col = upto.rfind('\n').map_or(upto.len(), |nl| upto.len() - nl - 1) + 1;
        (line, col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Code {
    Syntax,
    UnresolvedIdentifier,
    UnknownCommand,
    KindMismatch,
    UndeclaredPopulation,
    DuplicateDeclaration,
    InvalidPValue,
    Unsupported,
    ModalHypothesis,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::Syntax => "E0001",
            Code::UnresolvedIdentifier => "E0002",
            Code::UnknownCommand => "E0003",
            Code::KindMismatch => "E0004",
            Code::UndeclaredPopulation => "E0005",
            Code::DuplicateDeclaration => "E0006",
            Code::InvalidPValue => "E0007",
            Code::Unsupported => "E0008",
            Code::ModalHypothesis => "E0009",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    pub span: Span,
    pub message: String,
}

impl Diagnostic {
    pub fn error(code: Code, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            span,
            message: message.into(),
        }
    }

    pub fn warning(code: Code, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            ..Diagnostic::error(code, span, message)
        }
    }

    /// `file:line:col: severity: code: message`
    pub fn headline(&self, file: &str, src: &str) -> String {
        let (line, col) = self.span.line_col(src);
        format!(
            "{file}:{line}:{col}: {}: {}: {}",
            self.severity,
            self.code.as_str(),
            self.message
        )
    }

    /// Headline followed by the offending line and a caret underline.
    pub fn render(&self, file: &str, src: &str) -> String {
        let (line, col) = self.span.line_col(src);
        let text = src.lines().nth(line - 1).unwrap_or("");
        let width = self.span.end.saturating_sub(self.span.start).max(1);
        let width = width.min(text.len().saturating_sub(col - 1).max(1));
        format!(
            "{}\n  {text}\n  {}{}",
            self.headline(file, src),
            " ".repeat(col - 1),
            "^".repeat(width)
        )
    }
}
