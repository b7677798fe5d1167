//! RDFS deductive closure with inference-depth labels, vocabulary
//! normalization of knowledge graphs, and a memory network trained to
//! classify entailment queries over graphs with unseen vocabularies.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod manifest;
pub mod memnet;
pub mod normalize;
pub mod rdf;
pub mod rdfs;
pub mod seed;
pub mod tensor;

pub use error::*;
