//! Model container: a magic line, the byte length of a JSON header, the
//! header itself, then every tensor as little-endian `f32`.
//!
//! ```text
//! VULNRANK-CHECKPOINT 1
//! <header bytes>
//! {"format_version":1,"config":{..},"vocab":[..],"tensors":[{"name":..,"shape":..,"offset":..,"len":..}]}
//! <payload>
//! ```
//! Offsets are byte offsets into the payload. The first tensor is the
//! embedding table, named `embedding`, with one row per vocabulary entry.

use std::path::Path;

use serde::{Deserialize, Serialize};
use vulnrank_core::textpipe::EmbeddingTable;
use vulnrank_neural::{RankModel, Tensor};

use crate::config::RunConfig;
use crate::CliError;

pub const MAGIC: &str = "VULNRANK-CHECKPOINT";
pub const FORMAT_VERSION: u32 = 1;
const EMBEDDING: &str = "embedding";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub format_version: u32,
    pub config: RunConfig,
    pub vocab: Vec<String>,
    pub tensors: Vec<TensorEntry>,
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub config: RunConfig,
    pub table: EmbeddingTable,
    pub model: RankModel<f32>,
}

fn bad(m: impl Into<String>) -> CliError {
    CliError::Input(format!("checkpoint: {}", m.into()))
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut tensors = vec![(EMBEDDING, vec![self.table.len(), self.table.dim()], self.table.vectors())];
        for (name, t) in self.model.names().iter().zip(self.model.params()) {
            tensors.push((name.as_str(), t.shape().to_vec(), t.data()));
        }
        let mut entries = Vec::with_capacity(tensors.len());
        let mut payload = Vec::new();
        for (name, shape, data) in tensors {
            entries.push(TensorEntry { name: name.to_string(), shape, offset: payload.len(), len: data.len() });
            payload.extend(data.iter().flat_map(|v| v.to_le_bytes()));
        }
        let header = Header {
            format_version: FORMAT_VERSION,
            config: self.config.clone(),
            vocab: self.table.tokens().to_vec(),
            tensors: entries,
        };
        let json = serde_json::to_string(&header).expect("header serializes");
        let mut out = format!("{MAGIC} {FORMAT_VERSION}\n{}\n{json}\n", json.len()).into_bytes();
        out.extend(payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CliError> {
        let mut rest = bytes;
        let mut line = || -> Result<&str, CliError> {
            let end = rest.iter().position(|&b| b == b'\n').ok_or_else(|| bad("truncated preamble"))?;
            let s = std::str::from_utf8(&rest[..end]).map_err(|_| bad("preamble is not UTF-8"))?;
            rest = &rest[end + 1..];
            Ok(s)
        };
        if line()? != format!("{MAGIC} {FORMAT_VERSION}") {
            return Err(bad("bad magic or unsupported version"));
        }
        let n: usize = line()?.parse().map_err(|_| bad("bad header length"))?;
        if rest.len() < n + 1 || rest[n] != b'\n' {
            return Err(bad("truncated header"));
        }
        let header: Header = serde_json::from_slice(&rest[..n]).map_err(|e| bad(e.to_string()))?;
        let payload = &rest[n + 1..];
        let mut expected = 0;
        let mut tensors = Vec::with_capacity(header.tensors.len());
        for e in &header.tensors {
            if e.offset != expected || e.shape.iter().product::<usize>() != e.len {
                return Err(bad(format!("tensor {} has inconsistent offset or shape", e.name)));
            }
            expected += e.len * 4;
            let raw = payload.get(e.offset..expected).ok_or_else(|| bad("payload too short"))?;
            let data: Vec<f32> = raw.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
            tensors.push((e.name.clone(), e.shape.clone(), data));
        }
        if payload.len() != expected {
            return Err(bad(format!("payload is {} bytes, tensors need {expected}", payload.len())));
        }
        let mut it = tensors.into_iter();
        let (name, shape, vectors) = it.next().ok_or_else(|| bad("no tensors"))?;
        if name != EMBEDDING || shape.len() != 2 || shape[0] != header.vocab.len() {
            return Err(bad("first tensor must be the embedding table"));
        }
        let table = EmbeddingTable::from_parts(header.vocab, shape[1], vectors).map_err(|e| bad(e.to_string()))?;
        let named = it
            .map(|(n, s, d)| Tensor::new(s, d).map(|t| (n, t)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| bad(e.to_string()))?;
        let model = RankModel::from_named(header.config.model(), named).map_err(|e| bad(e.to_string()))?;
        Ok(Checkpoint { config: header.config, table, model })
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        crate::io::write(path, self.to_bytes())
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::from_bytes(&crate::io::read_bytes(path)?).map_err(|e| match e {
            CliError::Input(m) => CliError::Input(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}
