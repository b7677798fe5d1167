//! Training and evaluation corpora: entailed positives, corrupted negatives,
//! synthetic knowledge graphs, padded batches and the on-disk layout.

mod build;
mod io;
mod sampling;
mod stats;
mod synth;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::normalize::{NormalizationMap, TokenTriple, NO, NO_INDEX, PAD, PAD_INDEX, YES, YES_INDEX};

pub use build::{build_dataset, build_kg_example, BuildConfig, CorruptionMode, KgInput};
pub use io::{dataset_hash, read_dataset, write_dataset};
pub use sampling::{negatives_random, negatives_typed, positives, sample_subgraph, TypedNegatives};
pub use stats::{dataset_stats, kg_stats, DatasetManifest, KgStats};
pub use synth::{gen_ontology_kg, gen_synthetic_chain_kg, ontology_corpus, ChainMix, ChainSpec, OntologySpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Yes,
    No,
    Pad,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Yes, Label::No, Label::Pad];

    /// Vocabulary index of the answer token.
    pub fn token_index(self) -> u32 {
        match self {
            Label::Yes => YES_INDEX,
            Label::No => NO_INDEX,
            Label::Pad => PAD_INDEX,
        }
    }

    pub fn from_token_index(i: u32) -> Option<Label> {
        match i {
            YES_INDEX => Some(Label::Yes),
            NO_INDEX => Some(Label::No),
            PAD_INDEX => Some(Label::Pad),
            _ => None,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Label::Yes => YES,
            Label::No => NO,
            Label::Pad => PAD,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Yes => "yes",
            Label::No => "no",
            Label::Pad => "pad",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "yes" => Ok(Label::Yes),
            "no" => Ok(Label::No),
            "pad" => Ok(Label::Pad),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

/// One query with its answer. Pad samples have an all-pad query; Yes samples carry a hop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    pub query: TokenTriple,
    pub label: Label,
    pub hop: Option<u32>,
}

impl Sample {
    pub fn yes(query: TokenTriple, hop: u32) -> Self {
        Sample {
            query,
            label: Label::Yes,
            hop: Some(hop),
        }
    }

    pub fn no(query: TokenTriple) -> Self {
        Sample {
            query,
            label: Label::No,
            hop: None,
        }
    }

    pub fn pad() -> Self {
        Sample {
            query: [PAD.to_string(), PAD.to_string(), PAD.to_string()],
            label: Label::Pad,
            hop: None,
        }
    }

    pub fn is_valid(&self) -> bool {
        let all_pad = self.query.iter().all(|t| t == PAD);
        (self.label == Label::Pad) == all_pad && (self.label != Label::Yes || self.hop.is_some())
    }
}

/// One knowledge graph: normalized base facts (the memory) and its queries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KgExample {
    pub kg_id: String,
    pub memory: Vec<TokenTriple>,
    pub samples: Vec<Sample>,
    pub map: NormalizationMap,
    /// Typed negatives that fell back to random corruption.
    pub typed_fallbacks: usize,
}

impl KgExample {
    pub fn count(&self, label: Label) -> usize {
        self.samples.iter().filter(|s| s.label == label).count()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dataset {
    /// Build parameters, persisted as `# key=value` lines of the manifest.
    pub meta: BTreeMap<String, String>,
    pub kgs: Vec<KgExample>,
}

impl Dataset {
    pub fn is_identity(&self) -> bool {
        self.meta.get("normalization").map(String::as_str) == Some("identity")
    }

    pub fn n_generic(&self) -> Option<usize> {
        self.meta.get("n_generic").and_then(|v| v.parse().ok())
    }

    pub fn sample_count(&self) -> usize {
        self.kgs.iter().map(|k| k.samples.len()).sum()
    }

    /// Every token used by memories and queries, in first-seen order.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.kgs.iter().flat_map(|kg| {
            kg.memory
                .iter()
                .chain(kg.samples.iter().map(|s| &s.query))
                .flat_map(|t| t.iter().map(String::as_str))
        })
    }
}

/// Splits one KG's samples into batches of exactly `batch_size`, padding the
/// last one with Pad samples.
pub fn batch(samples: &[Sample], batch_size: usize) -> Vec<Vec<Sample>> {
    assert!(batch_size >= 1, "batch_size must be positive");
    samples
        .chunks(batch_size)
        .map(|chunk| {
            let mut b = chunk.to_vec();
            b.resize(batch_size, Sample::pad());
            b
        })
        .collect()
}
