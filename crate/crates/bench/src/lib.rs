//! Fixtures shared by the benchmarks.

use rdfmem::dataset::{build_dataset, ontology_corpus, BuildConfig, CorruptionMode};
use rdfmem::memnet::{encode_dataset, EncodedKg};
use rdfmem::normalize::{build_vocab, Vocab};

/// Encoded typed-negative datasets over `count` ontology KGs.
pub fn encoded_ontologies(count: u64) -> (Vec<EncodedKg>, Vocab) {
    let cfg = BuildConfig {
        mode: CorruptionMode::Typed,
        ..BuildConfig::default()
    };
    let ds = build_dataset(&ontology_corpus(0, count), &cfg).expect("synthetic corpus builds");
    let vocab = build_vocab(cfg.n_generic);
    let kgs = encode_dataset(&ds, &vocab).expect("tokens are in the vocabulary");
    (kgs, vocab)
}
