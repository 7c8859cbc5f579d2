//! Corpus and warnings to model samples: context extraction, token pipeline,
//! one shared word2vec table, embedding.

use std::collections::BTreeMap;

use vulnrank_core::context::{AnalyzedFile, Warning};
use vulnrank_core::textpipe::{
    abstract_identifiers, embed, fit_length, preprocess, tokenize, train_word2vec, EmbeddingTable, PipelineConfig,
    TokenSequence,
};
use vulnrank_neural::{Sample, Tensor};

use crate::synth::Corpus;
use crate::EvalError;

/// Extracted, abstracted and tokenized contexts of a warning set. Sequences
/// are kept at their natural length so one dataset serves every length pair.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub warnings: Vec<Warning>,
    pub slices: Vec<TokenSequence>,
    pub gadgets: Vec<TokenSequence>,
    pub table: EmbeddingTable,
}

/// Parses every file referenced by `warnings` once.
pub fn analyze(corpus: &Corpus, warnings: &[Warning]) -> Result<BTreeMap<String, AnalyzedFile>, EvalError> {
    let mut files = BTreeMap::new();
    for w in warnings {
        if files.contains_key(&w.file) {
            continue;
        }
        let f = corpus.file(&w.file).ok_or_else(|| EvalError::MissingFile(w.file.clone()))?;
        let a = AnalyzedFile::parse(f.path.clone(), f.text.clone())
            .map_err(|e| EvalError::Frontend { file: f.path.clone(), message: e.to_string() })?;
        files.insert(w.file.clone(), a);
    }
    Ok(files)
}

/// Slice and gadget token sequences of every warning, unfitted.
pub fn token_sequences(
    corpus: &Corpus,
    warnings: &[Warning],
    keep: &[String],
) -> Result<(Vec<TokenSequence>, Vec<TokenSequence>), EvalError> {
    let files = analyze(corpus, warnings)?;
    let mut slices = Vec::with_capacity(warnings.len());
    let mut gadgets = Vec::with_capacity(warnings.len());
    for w in warnings {
        let a = &files[&w.file];
        let seq = |doc| tokenize(&abstract_identifiers(&preprocess(&doc), keep));
        slices.push(seq(a.extract_slice_context(w)?));
        gadgets.push(seq(a.extract_gadget(w)?));
    }
    Ok((slices, gadgets))
}

impl Dataset {
    /// Word2vec is trained on the union of slice and gadget sequences.
    pub fn build(corpus: &Corpus, warnings: &[Warning], cfg: &PipelineConfig) -> Result<Self, EvalError> {
        let (slices, gadgets) = token_sequences(corpus, warnings, &cfg.keep)?;
        let all: Vec<TokenSequence> = slices.iter().chain(&gadgets).cloned().collect();
        let table = train_word2vec(&all, cfg)?;
        Ok(Dataset { warnings: warnings.to_vec(), slices, gadgets, table })
    }

    /// Same, with an existing table (inference on new warnings).
    pub fn with_table(
        corpus: &Corpus,
        warnings: &[Warning],
        keep: &[String],
        table: EmbeddingTable,
    ) -> Result<Self, EvalError> {
        let (slices, gadgets) = token_sequences(corpus, warnings, keep)?;
        Ok(Dataset { warnings: warnings.to_vec(), slices, gadgets, table })
    }

    pub fn len(&self) -> usize {
        self.warnings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.warnings.is_empty()
    }

    /// TP flags; unlabeled warnings are an error.
    pub fn labels(&self) -> Result<Vec<bool>, EvalError> {
        self.warnings
            .iter()
            .enumerate()
            .map(|(i, w)| w.label.map(|l| l.is_tp()).ok_or(EvalError::Unlabeled(i)))
            .collect()
    }

    fn matrix(&self, seq: &TokenSequence, l: usize) -> Tensor<f32> {
        let m = embed(&fit_length(seq, l), &self.table);
        Tensor::new(vec![m.rows, m.cols], m.data).expect("embedding shape")
    }

    /// Samples at the given lengths. Unlabeled warnings get label 0.
    pub fn samples(&self, slice_len: usize, gadget_len: usize) -> Vec<Sample<f32>> {
        (0..self.len())
            .map(|i| Sample {
                slice: self.matrix(&self.slices[i], slice_len),
                gadget: self.matrix(&self.gadgets[i], gadget_len),
                label: self.warnings[i].label.is_some_and(|l| l.is_tp()) as usize,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_synthetic_corpus, SynthConfig};

    #[test]
    fn builds_samples_of_requested_shape() {
        let c = generate_synthetic_corpus(&SynthConfig { files: 20, ..SynthConfig::default() });
        let cfg = PipelineConfig { embed_dim: 8, w2v_epochs: 1, ..PipelineConfig::default() };
        let d = Dataset::build(&c, &c.warnings, &cfg).unwrap();
        let s = d.samples(30, 40);
        assert_eq!(s.len(), 20);
        assert_eq!(s[0].slice.shape(), &[30, 8]);
        assert_eq!(s[0].gadget.shape(), &[40, 8]);
        let tps = d.labels().unwrap().iter().filter(|&&b| b).count();
        assert_eq!(s.iter().filter(|s| s.label == 1).count(), tps);
        assert!(d.slices.iter().all(|q| q.warn_index.is_some()));
    }

    #[test]
    fn missing_file_is_reported() {
        let mut c = generate_synthetic_corpus(&SynthConfig { files: 2, ..SynthConfig::default() });
        let ws = c.warnings.clone();
        c.files.pop();
        let err = Dataset::build(&c, &ws, &PipelineConfig::default()).unwrap_err();
        assert!(matches!(err, EvalError::MissingFile(_)));
    }
}
