//! Lexer and recursive-descent parser for the mini-C subset.
//!
//! The grammar covers functions, `int`/`char`/`void` scalars, one level of
//! pointers, fixed-size arrays, the usual arithmetic, relational, logical and
//! unary operators, calls, indexing, `if`/`else`, `while`, `for`, `return` and
//! block-local declarations. There is no preprocessor: inputs are expected to
//! be pre-expanded.

mod ast;
mod dump;
mod lexer;
mod parser;

pub use ast::*;
pub use dump::dump_unit;
pub use lexer::{lex, LexError, Token, TokenKind, KEYWORDS};
pub use parser::{parse, ParseError};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("lex error: {0}")]
    Lex(#[from] LexError),
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
}

/// A parsed source file together with its token stream.
#[derive(Debug, Clone)]
pub struct SourceFile {
    pub path: String,
    pub text: String,
    pub tokens: Vec<Token>,
    pub unit: TranslationUnit,
}

impl SourceFile {
    pub fn parse(path: impl Into<String>, text: impl Into<String>) -> Result<Self, FrontendError> {
        let text = text.into();
        let tokens = lex(&text)?;
        let unit = parse(&tokens)?;
        Ok(SourceFile { path: path.into(), text, tokens, unit })
    }

    /// Raw source text of a statement, comments inside the span included.
    pub fn statement_text(&self, stmt: &Statement) -> &str {
        &self.text[stmt.span.start_byte..stmt.span.end_byte]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statement_ids_follow_source_order() {
        let src = "int f(int a) {\n int x = 1;\n while (x < a) {\n  if (x) x = x * 2; else x++;\n }\n for (;;) ;\n return x;\n}";
        let file = SourceFile::parse("t.c", src).unwrap();
        let f = &file.unit.functions[0];
        for (i, s) in f.statements.iter().enumerate() {
            assert_eq!(s.id.index(), i);
        }
        assert!(f.statements.windows(2).all(|w| w[0].locus < w[1].locus));
    }

    #[test]
    fn statement_text_includes_inner_comments() {
        let file = SourceFile::parse("t.c", "int f() { int x = /* one */ 1; return x; }").unwrap();
        let s = &file.unit.functions[0].statements[0];
        assert_eq!(file.statement_text(s), "int x = /* one */ 1;");
    }
}
