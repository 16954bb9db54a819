use std::fmt;
use std::sync::Arc;

/// A region of source text. Positions are 1-based and the end is inclusive
/// of the last character of the region.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SourceSpan {
    pub file: Arc<str>,
    pub line_start: u32,
    pub col_start: u32,
    pub line_end: u32,
    pub col_end: u32,
}

impl SourceSpan {
    pub fn new(file: Arc<str>, start: (u32, u32), end: (u32, u32)) -> Self {
        debug_assert!(start.0 >= 1 && start.1 >= 1 && start <= end);
        SourceSpan {
            file,
            line_start: start.0,
            col_start: start.1,
            line_end: end.0,
            col_end: end.1,
        }
    }

    /// Span attached to nodes that do not come from any source file.
    pub fn builtin() -> Self {
        SourceSpan::new(Arc::from("<predefined>"), (1, 1), (1, 1))
    }

    /// Smallest span covering both `self` and `other`.
    pub fn to(&self, other: &SourceSpan) -> SourceSpan {
        let start = (self.line_start, self.col_start).min((other.line_start, other.col_start));
        let end = (self.line_end, self.col_end).max((other.line_end, other.col_end));
        SourceSpan::new(self.file.clone(), start, end)
    }

    pub fn start(&self) -> (u32, u32) {
        (self.line_start, self.col_start)
    }
}

/// Renders as `line:col-line:col`, without the file name.
impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}-{}:{}",
            self.line_start, self.col_start, self.line_end, self.col_end
        )
    }
}
