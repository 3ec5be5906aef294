//! Source spans and user-facing diagnostics.

use std::fmt;

use crate::polarity::SrVerdict;
use crate::syntax::Name;

/// A byte range in a source buffer together with the 1-based line and column
/// of its start.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub col: usize,
}

impl Span {
    pub fn new(src: &str, start: usize, end: usize) -> Span {
        let start = start.min(src.len());
        let end = end.clamp(start, src.len());
        let before = &src[..start];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        Span { start, end, line, col }
    }

    /// Smallest span covering both.
    pub fn join(self, other: Span) -> Span {
        if other.start < self.start {
            Span { end: self.end.max(other.end), ..other }
        } else {
            Span { end: self.end.max(other.end), ..self }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// Structured detail attached to some diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub enum Reason {
    /// A declared operation failed the signature restriction.
    Signature { op: Name, verdict: SrVerdict },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub span: Span,
    pub message: String,
    pub reason: Option<Box<Reason>>,
}

impl Diagnostic {
    pub fn error(span: Span, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, span, message: message.into(), reason: None }
    }

    pub fn with_reason(mut self, reason: Reason) -> Self {
        self.reason = Some(Box::new(reason));
        self
    }

    /// `file:line:col: error: message`
    pub fn render(&self, file: &str) -> String {
        format!("{file}:{}:{}: {self}", self.span.line, self.span.col)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: {}", self.message)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_and_column() {
        let src = "ab\ncd\nef";
        let s = Span::new(src, 4, 5);
        assert_eq!((s.line, s.col), (2, 2));
        let s = Span::new(src, 0, 1);
        assert_eq!((s.line, s.col), (1, 1));
        // Clamped into the buffer.
        let s = Span::new(src, 100, 200);
        assert_eq!((s.start, s.end), (src.len(), src.len()));
    }
}
