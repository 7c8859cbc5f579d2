//! Program analysis and token pipeline for ranking static-analysis warnings.
//!
//! The crate turns mini-C sources into per-warning context documents (a
//! dependence-based program slice and a control-flow-ordered code gadget) and
//! then into fixed-length, abstracted token sequences ready for embedding.

pub mod context;
pub mod flowgraphs;
pub mod frontend;
pub mod textpipe;
