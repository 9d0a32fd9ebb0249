//! Multimodal word embeddings trained with skip-gram over visual pseudowords.
//!
//! A pseudoword replaces a word `w` in a context window with `u_w + M v_w`,
//! where `u_w` is the word's embedding, `v_w` a visual feature vector for the
//! concept and `M` a learned projection from the visual space into the
//! embedding space. Words without visual data use `v_w = 0`.
//!
//! The crate is organised as a pipeline:
//!
//! * [`corpus`]: vocabulary construction and (target, context) pair streaming.
//! * [`huffman`]: the coding tree behind the hierarchical softmax.
//! * [`visual`]: feature ingestion plus centroid and Gaussian-mixture visual
//!   representations.
//! * [`mapping`]: the visual-to-embedding matrix and its initializers.
//! * [`trainer`]: the skip-gram objective, gradients and the SGD loop.
//! * [`eval`]: cosine similarity, Spearman correlation, benchmarks and
//!   nearest neighbours.

pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod huffman;
pub mod mapping;
pub mod rng;
pub mod trainer;
pub mod visual;

mod util;

pub use error::{Error, Result};
