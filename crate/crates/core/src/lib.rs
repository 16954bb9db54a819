//! Semantic analysis for SPL, a small procedural language with
//! call-by-value and call-by-reference parameters, `int`, fixed-length
//! arrays and type synonyms.
//!
//! Name and type analysis are attribute equations over the syntax tree,
//! evaluated by the demand-driven engine in [`rag`]. [`oracle`] is a
//! separate symbol-table checker used to cross-check them.

pub mod analysis;
pub mod diagnostic;
pub mod names;
pub mod oracle;
pub mod rag;
pub mod span;
pub mod syntax;
pub mod types;

pub use analysis::{check_source, Analysis, CheckOutcome, Options};
pub use diagnostic::{Code, Diagnostic};
pub use span::SourceSpan;
