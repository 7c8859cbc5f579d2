use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reserved words of the mini-C subset.
pub const KEYWORDS: &[&str] = &["int", "char", "void", "if", "else", "while", "for", "return"];

const OPERATORS: &[&str] = &[
    "&&", "||", "==", "!=", "<=", ">=", "++", "--", "+=", "-=", "*=", "/=", "%=", "+", "-", "*",
    "/", "%", "=", "<", ">", "!", "&",
];

const PUNCTUATION: &[char] = &['(', ')', '{', '}', '[', ']', ';', ','];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Keyword,
    Identifier,
    Constant,
    Operator,
    Punctuation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// 1-based source line.
    pub line: u32,
    /// 1-based column, counted in characters.
    pub col: u32,
    /// Byte offset of the first character.
    pub offset: usize,
}

impl Token {
    pub fn end_offset(&self) -> usize {
        self.offset + self.text.len()
    }

    pub fn is(&self, text: &str) -> bool {
        self.text == text
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("{line}:{col}: unrecognized character {ch:?}")]
    UnexpectedChar { line: u32, col: u32, ch: char },
    #[error("{line}:{col}: unterminated {what}")]
    Unterminated { line: u32, col: u32, what: &'static str },
}

impl LexError {
    pub fn position(&self) -> (u32, u32) {
        match *self {
            LexError::UnexpectedChar { line, col, .. } | LexError::Unterminated { line, col, .. } => {
                (line, col)
            }
        }
    }
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }
}

/// Splits `source` into tokens using maximal munch. Comments and whitespace
/// produce no tokens.
pub fn lex(source: &str) -> Result<Vec<Token>, LexError> {
    let mut cur = Cursor { src: source, pos: 0, line: 1, col: 1 };
    let mut tokens = Vec::new();

    while let Some(c) = cur.peek() {
        let (line, col, start) = (cur.line, cur.col, cur.pos);

        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if cur.rest().starts_with("//") {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        if cur.rest().starts_with("/*") {
            cur.bump();
            cur.bump();
            loop {
                if cur.rest().starts_with("*/") {
                    cur.bump();
                    cur.bump();
                    break;
                }
                if cur.bump().is_none() {
                    return Err(LexError::Unterminated { line, col, what: "comment" });
                }
            }
            continue;
        }

        let kind = if c.is_ascii_alphabetic() || c == '_' {
            while matches!(cur.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                cur.bump();
            }
            if KEYWORDS.contains(&&source[start..cur.pos]) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            }
        } else if c.is_ascii_digit() {
            if c == '0' && matches!(cur.peek_at(1), Some('x' | 'X')) {
                cur.bump();
                cur.bump();
                if !matches!(cur.peek(), Some(c) if c.is_ascii_hexdigit()) {
                    return Err(LexError::Unterminated { line, col, what: "hex literal" });
                }
                while matches!(cur.peek(), Some(c) if c.is_ascii_hexdigit()) {
                    cur.bump();
                }
            } else {
                while matches!(cur.peek(), Some(c) if c.is_ascii_digit()) {
                    cur.bump();
                }
            }
            if let Some(c) = cur.peek() {
                if c.is_ascii_alphabetic() || c == '_' {
                    return Err(LexError::UnexpectedChar { line: cur.line, col: cur.col, ch: c });
                }
            }
            TokenKind::Constant
        } else if c == '\'' || c == '"' {
            lex_quoted(&mut cur, c, line, col)?;
            TokenKind::Constant
        } else if PUNCTUATION.contains(&c) {
            cur.bump();
            TokenKind::Punctuation
        } else if let Some(op) = OPERATORS.iter().find(|op| cur.rest().starts_with(**op)) {
            for _ in 0..op.len() {
                cur.bump();
            }
            TokenKind::Operator
        } else {
            return Err(LexError::UnexpectedChar { line, col, ch: c });
        };

        tokens.push(Token { kind, text: source[start..cur.pos].to_string(), line, col, offset: start });
    }
    Ok(tokens)
}

fn lex_quoted(cur: &mut Cursor<'_>, quote: char, line: u32, col: u32) -> Result<(), LexError> {
    let what = if quote == '\'' { "character literal" } else { "string literal" };
    cur.bump();
    let mut len = 0usize;
    loop {
        match cur.peek() {
            None | Some('\n') => return Err(LexError::Unterminated { line, col, what }),
            Some('\\') => {
                cur.bump();
                match cur.peek() {
                    None | Some('\n') => return Err(LexError::Unterminated { line, col, what }),
                    Some(_) => {
                        cur.bump();
                    }
                }
            }
            Some(c) if c == quote => {
                cur.bump();
                break;
            }
            Some(_) => {
                cur.bump();
            }
        }
        len += 1;
    }
    if quote == '\'' && len != 1 {
        return Err(LexError::Unterminated { line, col, what });
    }
    Ok(())
}
