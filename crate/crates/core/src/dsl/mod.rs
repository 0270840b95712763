//! The `.hcm` model format: parsing, canonical serialization and query expressions.

mod diagnostic;
mod lexer;
mod parser;
mod printer;

pub use diagnostic::{Diagnostic, DiagnosticKind, Span};
pub use parser::{
    parse_contrast, parse_event, parse_formula, parse_model, parse_model_with_limits, FormulaAst, ModelDocument,
    NamedContext,
};
#[cfg(test)]
pub(crate) use parser::parse_spec;
pub use printer::{format_expr, serialize_model};

/// Words that cannot be used as identifiers or symbolic values.
pub fn keywords() -> &'static [&'static str] {
    lexer::KEYWORDS
}
