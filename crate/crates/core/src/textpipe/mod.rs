//! Token pipeline: comment and special-character cleanup, identifier
//! abstraction, tokenization, length normalization and embedding.

mod word2vec;

pub use word2vec::{embed, train_word2vec, EmbeddingTable, Matrix, PipelineError, PAD, UNK};

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::context::{ContextDocument, Variant};
use crate::frontend::{lex, TokenKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub slice_len: usize,
    pub gadget_len: usize,
    pub embed_dim: usize,
    pub w2v_window: usize,
    pub w2v_epochs: usize,
    pub w2v_negatives: usize,
    pub w2v_min_count: usize,
    pub w2v_lr: f32,
    pub seed: u64,
    /// Function names left unabstracted.
    pub keep: Vec<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            slice_len: 700,
            gadget_len: 900,
            embed_dim: 64,
            w2v_window: 5,
            w2v_epochs: 10,
            w2v_negatives: 5,
            w2v_min_count: 1,
            w2v_lr: 0.025,
            seed: 0,
            keep: Vec::new(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.slice_len == 0 || self.gadget_len == 0 {
            return Err("sequence lengths must be at least 1".into());
        }
        if self.embed_dim == 0 {
            return Err("embed_dim must be at least 1".into());
        }
        if self.w2v_window == 0 {
            return Err("w2v_window must be at least 1".into());
        }
        Ok(())
    }

    pub fn length_for(&self, variant: Variant) -> usize {
        match variant {
            Variant::Slice => self.slice_len,
            Variant::Gadget => self.gadget_len,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
    /// Position of the warned statement's first token; `None` once truncated away.
    pub warn_index: Option<usize>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Removes comments and replaces tab, backslash and end-of-line characters
/// with spaces. Character and string literals are copied verbatim.
pub fn preprocess_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' | '\'' => {
                out.push(c);
                while let Some(d) = chars.next() {
                    out.push(d);
                    if d == '\\' {
                        if let Some(e) = chars.next() {
                            out.push(e);
                        }
                    } else if d == c {
                        break;
                    }
                }
            }
            '/' if chars.peek() == Some(&'/') => {
                for d in chars.by_ref() {
                    if d == '\n' {
                        break;
                    }
                }
                out.push(' ');
            }
            '/' if chars.peek() == Some(&'*') => {
                chars.next();
                let mut prev = '\0';
                for d in chars.by_ref() {
                    if prev == '*' && d == '/' {
                        break;
                    }
                    prev = d;
                }
                out.push(' ');
            }
            '\t' | '\\' | '\n' | '\r' => out.push(' '),
            _ => out.push(c),
        }
    }
    out.trim().to_string()
}

pub fn preprocess(doc: &ContextDocument) -> ContextDocument {
    map_text(doc, |_, t| preprocess_text(t))
}

fn map_text(doc: &ContextDocument, mut f: impl FnMut(usize, &str) -> String) -> ContextDocument {
    let mut out = doc.clone();
    for (i, s) in out.statements.iter_mut().enumerate() {
        s.text = f(i, &s.text);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Class {
    Func,
    Var,
    Literal,
}

impl Class {
    const ALL: [Class; 3] = [Class::Func, Class::Var, Class::Literal];

    fn prefix(self) -> &'static str {
        match self {
            Class::Func => "FUNC",
            Class::Var => "VAR",
            Class::Literal => "LITERAL",
        }
    }
}

/// `FUNC3` -> `(Func, 3)`.
fn parse_abstract(tok: &str) -> Option<(Class, u64)> {
    Class::ALL.into_iter().find_map(|c| {
        let digits = tok.strip_prefix(c.prefix())?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        Some((c, digits.parse().ok()?))
    })
}

/// Assigns `FUNCi`/`VARi`/`LITERALi` names in order of first occurrence.
/// Names already in abstract form are kept and their indices are never
/// handed out again, which makes the pass idempotent.
#[derive(Debug, Default)]
struct Abstractor {
    reserved: BTreeSet<(Class, u64)>,
    next: HashMap<Class, u64>,
    names: HashMap<(Class, String), String>,
}

impl Abstractor {
    fn name(&mut self, class: Class, text: &str) -> String {
        if let Some(n) = self.names.get(&(class, text.to_string())) {
            return n.clone();
        }
        let next = self.next.entry(class).or_insert(1);
        while self.reserved.contains(&(class, *next)) {
            *next += 1;
        }
        let n = format!("{}{}", class.prefix(), next);
        *next += 1;
        self.names.insert((class, text.to_string()), n.clone());
        n
    }
}

/// Replaces user identifiers and constants with numbered placeholders. The
/// numbering is scoped to one document. Spacing of the text is preserved.
pub fn abstract_identifiers(doc: &ContextDocument, keep: &[String]) -> ContextDocument {
    let lexed: Vec<_> = doc.statements.iter().map(|s| lex(&s.text).ok()).collect();
    let mut ab = Abstractor::default();
    for toks in lexed.iter().flatten() {
        for t in toks {
            if t.kind == TokenKind::Identifier {
                if let Some(r) = parse_abstract(&t.text) {
                    ab.reserved.insert(r);
                }
            }
        }
    }
    map_text(doc, |i, text| {
        let Some(toks) = &lexed[i] else {
            return text.to_string();
        };
        let mut out = String::with_capacity(text.len());
        let mut at = 0;
        for (j, t) in toks.iter().enumerate() {
            let class = match t.kind {
                TokenKind::Identifier if parse_abstract(&t.text).is_some() => continue,
                TokenKind::Identifier if toks.get(j + 1).is_some_and(|n| n.is("(")) => {
                    if keep.iter().any(|k| k == &t.text) {
                        continue;
                    }
                    Class::Func
                }
                TokenKind::Identifier => Class::Var,
                TokenKind::Constant => Class::Literal,
                _ => continue,
            };
            out.push_str(&text[at..t.offset]);
            out.push_str(&ab.name(class, &t.text));
            at = t.end_offset();
        }
        out.push_str(&text[at..]);
        out
    })
}

fn lexemes(text: &str) -> Vec<String> {
    match lex(text) {
        Ok(toks) => toks.into_iter().map(|t| t.text).collect(),
        Err(_) => text.split_whitespace().map(str::to_string).collect(),
    }
}

/// Concatenates the token streams of all statements in document order.
pub fn tokenize(doc: &ContextDocument) -> TokenSequence {
    let mut tokens = Vec::new();
    let mut warn_index = None;
    for (i, s) in doc.statements.iter().enumerate() {
        let toks = lexemes(&s.text);
        if i == doc.warned && !toks.is_empty() {
            warn_index = Some(tokens.len());
        }
        tokens.extend(toks);
    }
    TokenSequence { tokens, warn_index }
}

/// Pads with `<pad>` at the end, or drops `floor(excess/2)` tokens from the
/// head and the rest from the tail.
pub fn fit_length(seq: &TokenSequence, l: usize) -> TokenSequence {
    assert!(l >= 1, "sequence length must be at least 1");
    let n = seq.tokens.len();
    if n <= l {
        let mut tokens = seq.tokens.clone();
        tokens.resize(l, PAD.to_string());
        return TokenSequence { tokens, warn_index: seq.warn_index };
    }
    let head = (n - l) / 2;
    TokenSequence {
        tokens: seq.tokens[head..head + l].to_vec(),
        warn_index: seq.warn_index.and_then(|w| w.checked_sub(head)).filter(|&w| w < l),
    }
}

/// All text stages followed by [`fit_length`] at the variant's length.
pub fn process(doc: &ContextDocument, cfg: &PipelineConfig) -> TokenSequence {
    let doc = abstract_identifiers(&preprocess(doc), &cfg.keep);
    fit_length(&tokenize(&doc), cfg.length_for(doc.variant))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::{ContextStatement, Label, VulnKind, Warning};
    use crate::frontend::StatementId;

    fn doc(texts: &[&str]) -> ContextDocument {
        ContextDocument {
            variant: Variant::Slice,
            statements: texts
                .iter()
                .enumerate()
                .map(|(i, t)| ContextStatement {
                    function: "f".into(),
                    id: StatementId(i as u32),
                    line: i as u32 + 1,
                    text: t.to_string(),
                })
                .collect(),
            warned: 0,
            origin: Warning { project: "p".into(), file: "f.c".into(), line: 1, kind: VulnKind::Npd, label: Some(Label::Fp) },
        }
    }

    fn texts(d: &ContextDocument) -> Vec<&str> {
        d.statements.iter().map(|s| s.text.as_str()).collect()
    }

    fn seq(n: usize) -> TokenSequence {
        TokenSequence { tokens: (1..=n).map(|i| format!("t{i}")).collect(), warn_index: Some(0) }
    }

    #[test]
    fn preprocessing() {
        assert_eq!(preprocess_text("x = 1; /*c*/"), "x = 1;");
        assert_eq!(preprocess_text("a\tb"), "a b");
        assert_eq!(preprocess_text("y = a\\\nb; // trailing"), "y = a  b;");
        assert_eq!(preprocess_text("s = \"/* kept */\\t\";"), "s = \"/* kept */\\t\";");
        assert_eq!(preprocess_text("x = 1;"), "x = 1;");
        assert_eq!(preprocess_text("x = 2 /* a\nb */ + 1;"), "x = 2   + 1;");
    }

    #[test]
    fn abstraction_examples() {
        let d = abstract_identifiers(&doc(&["copy_data(u_in, u_out);"]), &[]);
        assert_eq!(texts(&d), ["FUNC1(VAR1, VAR2);"]);
        let d = abstract_identifiers(&doc(&["x = x + 1;"]), &[]);
        assert_eq!(texts(&d), ["VAR1 = VAR1 + LITERAL1;"]);
        let d = abstract_identifiers(&doc(&["if (x) return;"]), &[]);
        assert_eq!(texts(&d), ["if (VAR1) return;"]);
    }

    #[test]
    fn abstraction_spans_the_document() {
        let d = abstract_identifiers(&doc(&["int n = len(s);", "buf[n] = 'a';", "n = len(t) + 1;"]), &[]);
        assert_eq!(texts(&d), ["int VAR1 = FUNC1(VAR2);", "VAR3[VAR1] = LITERAL1;", "VAR1 = FUNC1(VAR4) + LITERAL2;"]);
    }

    #[test]
    fn abstraction_respects_reserved_and_keep() {
        let d = abstract_identifiers(&doc(&["VAR1 = x;"]), &[]);
        assert_eq!(texts(&d), ["VAR1 = VAR2;"]);
        let d = abstract_identifiers(&doc(&["p = malloc(n);"]), &["malloc".to_string()]);
        assert_eq!(texts(&d), ["VAR1 = malloc(VAR2);"]);
    }

    #[test]
    fn tokenization() {
        let s = tokenize(&doc(&["FUNC1(VAR1, VAR2);"]));
        assert_eq!(s.tokens, ["FUNC1", "(", "VAR1", ",", "VAR2", ")", ";"]);
        assert_eq!(s.warn_index, Some(0));
        assert!(tokenize(&doc(&[])).is_empty());
        let mut d = doc(&["a = 1;", "b;"]);
        d.warned = 1;
        let s = tokenize(&d);
        assert_eq!(s.tokens, ["a", "=", "1", ";", "b", ";"]);
        assert_eq!(s.warn_index, Some(4));
    }

    #[test]
    fn fitting() {
        let s = fit_length(&seq(3), 5);
        assert_eq!(s.tokens, ["t1", "t2", "t3", PAD, PAD]);
        assert_eq!(fit_length(&seq(4), 4), seq(4));
        let s = fit_length(&seq(10), 8);
        assert_eq!(s.tokens.first().unwrap(), "t2");
        assert_eq!(s.tokens.last().unwrap(), "t9");
        assert_eq!(s.warn_index, None);
        let s = fit_length(&seq(11), 8);
        assert_eq!(s.tokens.first().unwrap(), "t2");
        assert_eq!(s.tokens.last().unwrap(), "t9");
    }

    #[test]
    fn process_fits_variant_length() {
        let cfg = PipelineConfig { slice_len: 10, ..PipelineConfig::default() };
        let s = process(&doc(&["x = 1; // c", "y = x;"]), &cfg);
        assert_eq!(s.tokens, ["VAR1", "=", "LITERAL1", ";", "VAR2", "=", "VAR1", ";", PAD, PAD]);
        assert_eq!(s.warn_index, Some(0));
        let s = process(&doc(&["x = 1; // c", "y = x;"]), &PipelineConfig { slice_len: 4, ..cfg });
        assert_eq!(s.tokens, ["LITERAL1", ";", "VAR2", "="]);
        assert_eq!(s.warn_index, None);
    }
}
