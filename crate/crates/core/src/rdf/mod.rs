//! RDF terms, interning, indexed graphs and N-Triples I/O.

mod graph;
pub mod ntriples;
mod term;
pub mod vocab;

pub use graph::{Graph, Triple};
pub use ntriples::{
    parse_ntriples, parse_ntriples_reader, serialize_ntriples, write_ntriples, ParseOptions,
    ParseOutcome,
};
pub use term::{Term, TermId, TermTable};
pub use vocab::is_reserved;
