//! Lexically constrained paraphrase generation.
//!
//! The crate is organised as a pipeline:
//!
//! - [`text`]: tokenization, evaluation normalization and byte-pair encoding.
//! - [`idf`]: document-frequency tables and the candidate pool of constraint tokens.
//! - [`constraints`]: constraint sets, morphology, coarse POS, PPDB lookups and the
//!   37 constraint-selection systems.
//! - [`scorer`]: the next-token scorer contract and a statistical reference scorer.
//! - [`decoder`]: beam search with positive, negative and positional constraints
//!   using bank-based dynamic beam allocation.
//! - [`eval`]: modified BLEU, rank correlation, annotation aggregation and the
//!   quality regression.
//! - [`pipeline`]: records, configuration and the end-to-end commands.
//! - [`toy`]: a deterministic synthetic bilingual world used by tests and demos.

pub mod constraints;
pub mod decoder;
pub mod error;
pub mod eval;
pub mod idf;
#[cfg(feature = "pipeline")]
pub mod pipeline;
pub mod scorer;
pub mod seed;
pub mod text;
pub mod toy;

pub use error::{Error, Result};
pub use text::TokenSeq;
