//! Proximity full-text search with additional multi-component-key indexes.
//!
//! Besides an ordinary word-level inverted index, the engine keeps `(w, v)`
//! and `(f, s, t)` indexes keyed by lemma pairs and triples, ordinary lists
//! carrying nearby stop lemmas (NSW records) and a document-level index.
//! Queries are dispatched by the frequency tiers of their lemmas.

pub mod codec;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod index;
pub mod lexicon;
pub mod query;
pub mod ranking;

pub use error::{Error, Result};
