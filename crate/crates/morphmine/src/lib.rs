//! Unsupervised morpheme induction and morpheme-enriched embeddings.
//!
//! The library learns a prefix/suffix/root morpheme vocabulary from a word
//! list via transition-entropy boundaries, segments each word into the
//! fewest maximally-covering morphemes by dynamic programming with
//! maximum-likelihood tie-breaking and a global resegmentation pass, and
//! trains skip-gram embeddings where a word is represented by the sum of its
//! morpheme vectors.

pub mod candidates;
pub mod embed;
pub mod error;
pub mod eval;
pub mod pipeline;
pub mod segmenter;
pub mod trie;
pub mod vocab;

pub use error::{MorphError, Result};
