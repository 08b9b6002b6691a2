//! Code-as-trees language modeling toolkit.
//!
//! The pieces, bottom to top:
//!
//! * [`ast`] — rooted ordered trees, an invertible tree-to-sequence
//!   mapping with left/right marker tokens, and the BFS/DFS baseline
//!   flattenings that lose structure.
//! * [`textio`] — s-expression tree files and the whitespace-separated
//!   flat-sequence text format.
//! * [`frontend`] — a small two-dialect toy language parser, corpus
//!   records pairing comments with trees, and model-input assembly.
//! * [`vocab`] — word-level vocabulary with reserved special tokens and
//!   a dedicated id per tree-marker symbol.
//! * [`mask`] — attention-mask construction for the encoder, decoder,
//!   and encoder-decoder modes.
//! * [`model`] — an N-layer pre-norm transformer in f64 with hand-written
//!   backprop, mask-controlled attention, and mean pooling.
//! * [`objectives`] — construction and losses for the five pre-training
//!   objectives plus the language-balanced sampling distribution.
//! * [`trainer`] — the alternating training loop, Adam, checkpointing,
//!   and the finite-difference gradient audit.
//! * [`retrieval`] — embedding index, cosine search, MAP/MRR scoring.
//! * [`synthetic`] — generator for a two-dialect benchmark corpus with
//!   shared-comment semantic clusters.

pub mod ast;
pub mod frontend;
pub mod mask;
pub mod model;
pub mod objectives;
pub mod retrieval;
pub mod synthetic;
pub mod textio;
pub mod trainer;
pub mod vocab;

pub use ast::{AstTree, FlatToken, TokenKind};
pub use frontend::{CodeDocument, Mode, ModelInput};
pub use mask::AttentionMask;
pub use model::{ModelConfig, ModelParams};
pub use vocab::Vocabulary;
