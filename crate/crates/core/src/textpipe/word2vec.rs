use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{PipelineConfig, TokenSequence};

/// Padding lexeme; its embedding row is pinned to zero.
pub const PAD: &str = "<pad>";
/// Stand-in for tokens below the minimum count or unseen at training time.
pub const UNK: &str = "<unk>";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error("word2vec corpus has no tokens")]
    EmptyCorpus,
    #[error("malformed embedding table: {0}")]
    BadTable(String),
}

/// Row-major numeric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f32>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn row(&self, r: usize) -> &[f32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

/// Token vocabulary with one `dim`-wide vector per row. Row 0 is `<pad>`,
/// row 1 is `<unk>`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    vectors: Vec<f32>,
}

impl EmbeddingTable {
    pub fn from_parts(tokens: Vec<String>, dim: usize, vectors: Vec<f32>) -> Result<Self, PipelineError> {
        if tokens.len() < 2 || tokens[0] != PAD || tokens[1] != UNK {
            return Err(PipelineError::BadTable("first rows must be <pad> and <unk>".into()));
        }
        if dim == 0 || vectors.len() != tokens.len() * dim {
            return Err(PipelineError::BadTable(format!(
                "{} values for {} rows of width {dim}",
                vectors.len(),
                tokens.len()
            )));
        }
        if vectors[..dim].iter().any(|&v| v != 0.0) {
            return Err(PipelineError::BadTable("<pad> row is not zero".into()));
        }
        let index: HashMap<String, usize> = tokens.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        if index.len() != tokens.len() {
            return Err(PipelineError::BadTable("duplicate token".into()));
        }
        Ok(EmbeddingTable { tokens, index, dim, vectors })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn vectors(&self) -> &[f32] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Row of `token`, falling back to `<unk>`.
    pub fn row_of(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(1)
    }

    pub fn vector(&self, token: &str) -> &[f32] {
        let r = self.row_of(token);
        &self.vectors[r * self.dim..(r + 1) * self.dim]
    }

    /// One line per row: token followed by its components, printed so that
    /// [`parse_text`](Self::parse_text) restores them exactly.
    pub fn dump_text(&self) -> String {
        let mut out = String::new();
        for (i, t) in self.tokens.iter().enumerate() {
            out.push_str(t);
            for v in &self.vectors[i * self.dim..(i + 1) * self.dim] {
                out.push_str(&format!(" {v:?}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self, PipelineError> {
        let bad = |m: String| PipelineError::BadTable(m);
        let mut lines = text.lines().filter(|l| !l.is_empty()).peekable();
        let first = lines.peek().ok_or_else(|| bad("empty table".into()))?;
        let dim = first.split(' ').count() - 1;
        let (mut tokens, mut vectors) = (Vec::new(), Vec::new());
        for (no, line) in lines.enumerate() {
            let parts: Vec<&str> = line.split(' ').collect();
            if parts.len() < dim + 1 {
                return Err(bad(format!("line {}: expected {dim} components", no + 1)));
            }
            let split = parts.len() - dim;
            tokens.push(parts[..split].join(" "));
            for p in &parts[split..] {
                vectors.push(p.parse::<f32>().map_err(|e| bad(format!("line {}: {e}", no + 1)))?);
            }
        }
        Self::from_parts(tokens, dim, vectors)
    }
}

fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + (-x.clamp(-30.0, 30.0)).exp())
}

/// Skip-gram with negative sampling over every non-pad token of `corpus`.
/// The exported vector of a token is the sum of its input and output vectors.
///
/// Single-threaded so that the update order, and hence the table, depends
/// only on the corpus and `cfg.seed`.
pub fn train_word2vec(corpus: &[TokenSequence], cfg: &PipelineConfig) -> Result<EmbeddingTable, PipelineError> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for seq in corpus {
        for t in seq.tokens.iter().filter(|t| *t != PAD) {
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    if counts.is_empty() {
        return Err(PipelineError::EmptyCorpus);
    }
    let mut kept: Vec<(&str, usize)> =
        counts.iter().filter(|&(t, &c)| c >= cfg.w2v_min_count && *t != UNK).map(|(&t, &c)| (t, c)).collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));

    let mut tokens = vec![PAD.to_string(), UNK.to_string()];
    tokens.extend(kept.iter().map(|(t, _)| t.to_string()));
    let index: HashMap<&str, usize> = tokens.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let mut freq = vec![0usize; tokens.len()];
    let sentences: Vec<Vec<usize>> = corpus
        .iter()
        .map(|seq| {
            seq.tokens
                .iter()
                .filter(|t| *t != PAD)
                .map(|t| {
                    let id = index.get(t.as_str()).copied().unwrap_or(1);
                    freq[id] += 1;
                    id
                })
                .collect()
        })
        .collect();

    let mut cumulative = Vec::with_capacity(freq.len());
    let mut acc = 0.0f64;
    for &f in &freq {
        acc += (f as f64).powf(0.75);
        cumulative.push(acc);
    }

    let dim = cfg.embed_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut syn0 = vec![0.0f32; tokens.len() * dim];
    for v in &mut syn0[dim..] {
        *v = (rng.gen::<f32>() - 0.5) / dim as f32;
    }
    let mut syn1 = vec![0.0f32; tokens.len() * dim];
    let mut grad = vec![0.0f32; dim];

    let total = (cfg.w2v_epochs * freq.iter().sum::<usize>()).max(1) as f32;
    let mut done = 0usize;
    let w = cfg.w2v_window;
    for _ in 0..cfg.w2v_epochs {
        for sent in &sentences {
            for (i, &center) in sent.iter().enumerate() {
                let alpha = cfg.w2v_lr * (1.0 - done as f32 / total).max(1e-4);
                done += 1;
                for (j, &context) in sent.iter().enumerate().take(i + w + 1).skip(i.saturating_sub(w)) {
                    if j == i {
                        continue;
                    }
                    let input = &mut syn0[context * dim..(context + 1) * dim];
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    for n in 0..=cfg.w2v_negatives {
                        let (target, label) = if n == 0 {
                            (center, 1.0)
                        } else {
                            let r = rng.gen::<f64>() * acc;
                            let t = cumulative.partition_point(|&c| c <= r).min(freq.len() - 1);
                            if t == center {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let out = &mut syn1[target * dim..(target + 1) * dim];
                        let dot: f32 = input.iter().zip(out.iter()).map(|(a, b)| a * b).sum();
                        let g = (label - sigmoid(dot)) * alpha;
                        for k in 0..dim {
                            grad[k] += g * out[k];
                            out[k] += g * input[k];
                        }
                    }
                    for (v, g) in input.iter_mut().zip(&grad) {
                        *v += g;
                    }
                }
            }
        }
    }
    // Input plus output vectors, so tokens that co-occur end up close as well
    // as tokens that share contexts.
    for (v, o) in syn0.iter_mut().zip(&syn1) {
        *v += o;
    }
    syn0[..dim].iter_mut().for_each(|v| *v = 0.0);
    EmbeddingTable::from_parts(tokens, dim, syn0)
}

/// One row per token; unknown tokens take the `<unk>` row.
pub fn embed(seq: &TokenSequence, table: &EmbeddingTable) -> Matrix {
    let dim = table.dim();
    let mut m = Matrix::zeros(seq.tokens.len(), dim);
    for (r, t) in seq.tokens.iter().enumerate() {
        m.data[r * dim..(r + 1) * dim].copy_from_slice(table.vector(t));
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentence(tokens: &[&str]) -> TokenSequence {
        TokenSequence { tokens: tokens.iter().map(|t| t.to_string()).collect(), warn_index: None }
    }

    fn small() -> PipelineConfig {
        PipelineConfig { embed_dim: 8, w2v_epochs: 2, ..PipelineConfig::default() }
    }

    fn cos(a: &[f32], b: &[f32]) -> f32 {
        let dot: f32 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na: f32 = a.iter().map(|x| x * x).sum::<f32>().sqrt();
        let nb: f32 = b.iter().map(|x| x * x).sum::<f32>().sqrt();
        dot / (na * nb)
    }

    #[test]
    fn text_dump_round_trips_exactly() {
        let corpus = vec![sentence(&["a", "b", "\"x y\"", "a"]); 5];
        let t = train_word2vec(&corpus, &small()).unwrap();
        let back = EmbeddingTable::parse_text(&t.dump_text()).unwrap();
        assert_eq!(back, t);
        assert!(EmbeddingTable::parse_text("").is_err());
        assert!(EmbeddingTable::parse_text("<pad> 0.0\n<unk> x\n").is_err());
    }

    #[test]
    fn empty_corpus() {
        assert_eq!(train_word2vec(&[], &small()), Err(PipelineError::EmptyCorpus));
        assert_eq!(train_word2vec(&[sentence(&[PAD, PAD])], &small()), Err(PipelineError::EmptyCorpus));
    }

    #[test]
    fn rare_tokens_map_to_unk() {
        let cfg = PipelineConfig { w2v_min_count: 2, ..small() };
        let t = train_word2vec(&[sentence(&["a", "b", "a", "once", PAD])], &cfg).unwrap();
        assert!(t.contains("a") && !t.contains("b") && !t.contains("once"));
        assert_eq!(t.row_of("once"), 1);
        assert_eq!(t.vector("never-seen"), t.vector(UNK));
        assert!(t.vector(PAD).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn default_dimension_and_pad_row() {
        let cfg = PipelineConfig { w2v_epochs: 1, ..PipelineConfig::default() };
        let t = train_word2vec(&[sentence(&["VAR1", "=", "LITERAL1", ";"])], &cfg).unwrap();
        assert_eq!(t.dim(), 64);
        assert_eq!(t.vector("VAR1").len(), 64);
        assert!(t.vector(PAD).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn deterministic_under_seed() {
        let corpus = [sentence(&["a", "b", "c", "a", "d"]), sentence(&["c", "a", "b"])];
        let a = train_word2vec(&corpus, &small()).unwrap();
        let b = train_word2vec(&corpus, &small()).unwrap();
        let bits = |t: &EmbeddingTable| t.vectors().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(a.tokens(), b.tokens());
        assert_eq!(bits(&a), bits(&b));
        let c = train_word2vec(&corpus, &PipelineConfig { seed: 1, ..small() }).unwrap();
        assert_ne!(bits(&a), bits(&c));
    }

    #[test]
    fn adjacent_pair_is_closer_than_average() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let words: Vec<String> = (0..40).map(|i| format!("w{i}")).collect();
        let corpus: Vec<TokenSequence> = (0..200)
            .map(|_| {
                let mut s: Vec<String> = (0..12).map(|_| words[rng.gen_range(0..words.len())].clone()).collect();
                let at = rng.gen_range(0..=s.len());
                s.splice(at..at, ["A".to_string(), "B".to_string()]);
                TokenSequence { tokens: s, warn_index: None }
            })
            .collect();
        let cfg = PipelineConfig { embed_dim: 16, ..PipelineConfig::default() };
        let t = train_word2vec(&corpus, &cfg).unwrap();
        let pair = cos(t.vector("A"), t.vector("B"));
        let mean = words.iter().map(|w| cos(t.vector("A"), t.vector(w))).sum::<f32>() / words.len() as f32;
        assert!(pair > mean, "cos(A,B) = {pair}, mean cos(A,w) = {mean}");
    }

    #[test]
    fn embedding_rows() {
        let t = train_word2vec(&[sentence(&["x", "y", "z"])], &small()).unwrap();
        let m = embed(&sentence(&[PAD, PAD, PAD]), &t);
        assert_eq!((m.rows, m.cols), (3, 8));
        assert!(m.data.iter().all(|&v| v == 0.0));
        let a = embed(&sentence(&["x", "y", PAD]), &t);
        let b = embed(&sentence(&["y", "x", PAD]), &t);
        assert_eq!(a.row(0), b.row(1));
        assert_eq!(a.row(1), b.row(0));
        assert_eq!(a.row(0), t.vector("x"));
        assert_eq!(embed(&sentence(&["q"]), &t).row(0), t.vector(UNK));
    }

    #[test]
    fn table_parts_are_validated() {
        let ok = EmbeddingTable::from_parts(vec![PAD.into(), UNK.into()], 2, vec![0.0, 0.0, 1.0, 2.0]);
        assert!(ok.is_ok());
        assert!(EmbeddingTable::from_parts(vec![UNK.into(), PAD.into()], 2, vec![0.0; 4]).is_err());
        assert!(EmbeddingTable::from_parts(vec![PAD.into(), UNK.into()], 2, vec![0.0; 3]).is_err());
        assert!(EmbeddingTable::from_parts(vec![PAD.into(), UNK.into()], 1, vec![1.0, 0.0]).is_err());
    }
}
