use std::fmt;

/// 1-based line and column (in characters).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagnosticKind {
    Syntax,
    Duplicate,
    Unresolved,
    Range,
    Semantic,
}

impl DiagnosticKind {
    pub fn label(self) -> &'static str {
        match self {
            DiagnosticKind::Syntax => "syntax error",
            DiagnosticKind::Duplicate => "duplicate declaration",
            DiagnosticKind::Unresolved => "unresolved reference",
            DiagnosticKind::Range => "range error",
            DiagnosticKind::Semantic => "invalid model",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub pos: Pos,
    pub message: String,
    /// Tokens that would have been accepted, for syntax errors.
    pub expected: Vec<String>,
}

impl Diagnostic {
    pub fn new(kind: DiagnosticKind, pos: Pos, message: String) -> Self {
        Diagnostic {
            kind,
            pos,
            message,
            expected: Vec::new(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.pos, self.kind.label(), self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostic {}

/// Render diagnostics one per line, prefixed with `source`.
pub fn render(source: &str, diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("{source}:{d}\n")).collect()
}
