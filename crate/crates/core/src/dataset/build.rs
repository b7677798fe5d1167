use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rayon::prelude::*;

use super::sampling::{negatives_random, negatives_typed, positives, sample_subgraph};
use super::{Dataset, KgExample, Sample};
use crate::error::DatasetError;
use crate::normalize::{NormalizationMap, DEFAULT_N_GENERIC};
use crate::rdf::{Graph, TermTable, Triple};
use crate::rdfs::{entail, AxiomaticConfig, EntailOptions, DEFAULT_MAX_ROUNDS};
use crate::seed::{derive_seed, derived_rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorruptionMode {
    Random,
    Typed,
}

impl fmt::Display for CorruptionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorruptionMode::Random => "random",
            CorruptionMode::Typed => "typed",
        })
    }
}

impl FromStr for CorruptionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(CorruptionMode::Random),
            "typed" => Ok(CorruptionMode::Typed),
            other => Err(format!("unknown corruption mode {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BuildConfig {
    pub split: String,
    pub mode: CorruptionMode,
    /// Negatives per positive in random mode; typed mode is always 1:1.
    pub neg_ratio: f64,
    /// Memory capacity; larger graphs are subsampled to this many triples.
    pub capacity: usize,
    pub n_generic: usize,
    pub identity: bool,
    pub seed: u64,
    pub max_positives: Option<usize>,
    pub max_positives_per_hop: Option<usize>,
    /// Keep hop-1 (axiomatic) positives.
    pub keep_axiomatic: bool,
    pub max_rounds: u32,
    pub containers: Option<u32>,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            split: "train".into(),
            mode: CorruptionMode::Random,
            neg_ratio: 1.0,
            capacity: 1000,
            n_generic: DEFAULT_N_GENERIC,
            identity: false,
            seed: 0,
            max_positives: None,
            max_positives_per_hop: None,
            keep_axiomatic: true,
            max_rounds: DEFAULT_MAX_ROUNDS,
            containers: None,
        }
    }
}

fn opt(v: Option<impl ToString>) -> String {
    v.map_or_else(|| "none".to_string(), |v| v.to_string())
}

impl BuildConfig {
    pub fn to_meta(&self) -> BTreeMap<String, String> {
        [
            ("split", self.split.clone()),
            ("mode", self.mode.to_string()),
            ("neg_ratio", self.neg_ratio.to_string()),
            ("capacity", self.capacity.to_string()),
            ("n_generic", self.n_generic.to_string()),
            (
                "normalization",
                if self.identity { "identity" } else { "generic" }.to_string(),
            ),
            ("seed", self.seed.to_string()),
            ("max_positives", opt(self.max_positives)),
            ("max_positives_per_hop", opt(self.max_positives_per_hop)),
            ("keep_axiomatic", self.keep_axiomatic.to_string()),
            ("max_rounds", self.max_rounds.to_string()),
            ("containers", opt(self.containers)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

/// A raw knowledge graph with its own term table.
#[derive(Clone, Debug)]
pub struct KgInput {
    pub kg_id: String,
    pub graph: Graph,
    pub table: TermTable,
}

/// Uniformly keeps at most `cap` items, preserving their order.
fn cap_sorted<T: Copy>(items: Vec<T>, cap: Option<usize>, seed: u64) -> Vec<T> {
    match cap {
        Some(cap) if items.len() > cap => {
            let mut keep = index::sample(&mut crate::seed::rng(seed), items.len(), cap).into_vec();
            keep.sort_unstable();
            keep.into_iter().map(|i| items[i]).collect()
        }
        _ => items,
    }
}

/// Subsample, entail, pick positives and negatives, and normalize one KG.
pub fn build_kg_example(input: &KgInput, cfg: &BuildConfig) -> Result<KgExample, DatasetError> {
    let id = input.kg_id.as_str();
    let seed = |purpose: &str| derive_seed(cfg.seed, id, purpose);
    let mut table = input.table.clone();
    let base = sample_subgraph(&input.graph, cfg.capacity, seed("sample"));
    let res = entail(
        &base,
        &mut table,
        &EntailOptions {
            axioms: AxiomaticConfig {
                containers: cfg.containers,
            },
            max_rounds: cfg.max_rounds,
            record_derivations: false,
        },
    )?;

    let mut by_hop: BTreeMap<u32, Vec<Triple>> = BTreeMap::new();
    for (t, hop) in positives(&res) {
        if cfg.keep_axiomatic || hop != 1 {
            by_hop.entry(hop).or_default().push(t);
        }
    }
    let mut pos: Vec<(Triple, u32)> = Vec::new();
    for (hop, cell) in by_hop {
        let kept = cap_sorted(cell, cfg.max_positives_per_hop, seed(&format!("hop{hop}")));
        pos.extend(kept.into_iter().map(|t| (t, hop)));
    }
    let pos = cap_sorted(pos, cfg.max_positives, seed("positives"));

    let (neg, typed_fallbacks) = match cfg.mode {
        CorruptionMode::Typed => {
            let typed = negatives_typed(&base, &res, &table, pos.len(), seed("negatives"))?;
            (typed.triples, typed.fallbacks)
        }
        CorruptionMode::Random => {
            let count = (cfg.neg_ratio * pos.len() as f64).round() as usize;
            (negatives_random(&base, &res, &table, count, seed("negatives"))?, 0)
        }
    };

    let mut map = if cfg.identity {
        NormalizationMap::identity()
    } else {
        NormalizationMap::generic(cfg.n_generic, seed("map"))
    };
    let order = base
        .iter()
        .chain(pos.iter().map(|(t, _)| *t))
        .chain(neg.iter().copied())
        .flat_map(|t| t.resolve(&table));
    map.assign_all(order)?;

    let memory = base
        .iter()
        .map(|t| map.normalize_triple(&t, &table))
        .collect::<Result<Vec<_>, _>>()?;
    let mut samples = Vec::with_capacity(pos.len() + neg.len());
    for (t, hop) in &pos {
        samples.push(Sample::yes(map.normalize_triple(t, &table)?, *hop));
    }
    for t in &neg {
        samples.push(Sample::no(map.normalize_triple(t, &table)?));
    }
    samples.shuffle(&mut derived_rng(cfg.seed, id, "order"));

    Ok(KgExample {
        kg_id: input.kg_id.clone(),
        memory,
        samples,
        map,
        typed_fallbacks,
    })
}

/// Builds every KG independently (in parallel); output order follows `inputs`.
pub fn build_dataset(inputs: &[KgInput], cfg: &BuildConfig) -> Result<Dataset, DatasetError> {
    let ids: BTreeSet<&str> = inputs.iter().map(|k| k.kg_id.as_str()).collect();
    assert_eq!(ids.len(), inputs.len(), "duplicate kg_id");
    let kgs = inputs
        .par_iter()
        .map(|input| build_kg_example(input, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Dataset {
        meta: cfg.to_meta(),
        kgs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{gen_ontology_kg, Label, OntologySpec};
    use crate::normalize::{denormalize, build_vocab};
    use crate::rdfs::entail;

    fn input(seed: u64) -> KgInput {
        let mut table = TermTable::new();
        let ns = format!("http://kg{seed}.example/");
        let graph = gen_ontology_kg(&OntologySpec::new(ns), seed, &mut table);
        KgInput {
            kg_id: format!("o{seed}"),
            graph,
            table,
        }
    }

    #[test]
    fn labels_are_sound() {
        let inp = input(1);
        for mode in [CorruptionMode::Random, CorruptionMode::Typed] {
            let cfg = BuildConfig {
                mode,
                max_positives: Some(60),
                ..BuildConfig::default()
            };
            let ex = build_kg_example(&inp, &cfg).unwrap();
            let mut table = inp.table.clone();
            let res = entail(&inp.graph, &mut table, &EntailOptions::default()).unwrap();
            assert_eq!(ex.count(Label::Yes), 60);
            assert_eq!(ex.count(Label::No), 60);
            let memory: BTreeSet<_> = ex.memory.iter().collect();
            for s in &ex.samples {
                assert!(s.is_valid());
                let t = denormalize(&s.query, &ex.map, &mut table).unwrap();
                assert_eq!(res.entails(&t), s.label == Label::Yes);
                assert!(!memory.contains(&s.query));
                if s.label == Label::Yes {
                    assert_eq!(res.hop(&t), s.hop);
                }
            }
            let vocab = build_vocab(cfg.n_generic);
            assert!(ex.memory.iter().all(|t| vocab.encode(t).is_ok()));
        }
    }

    #[test]
    fn per_hop_caps_and_axiom_filter() {
        let cfg = BuildConfig {
            max_positives_per_hop: Some(3),
            keep_axiomatic: false,
            ..BuildConfig::default()
        };
        let ex = build_kg_example(&input(2), &cfg).unwrap();
        let mut per_hop: BTreeMap<u32, usize> = BTreeMap::new();
        for s in ex.samples.iter().filter(|s| s.label == Label::Yes) {
            *per_hop.entry(s.hop.unwrap()).or_default() += 1;
        }
        assert!(!per_hop.contains_key(&1));
        assert!(per_hop.values().all(|&n| n <= 3));
    }

    #[test]
    fn parallel_build_is_deterministic() {
        let inputs: Vec<KgInput> = (0..4).map(input).collect();
        let cfg = BuildConfig {
            max_positives: Some(20),
            mode: CorruptionMode::Typed,
            ..BuildConfig::default()
        };
        let a = build_dataset(&inputs, &cfg).unwrap();
        let b = build_dataset(&inputs, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.kgs.len(), 4);
    }

    #[test]
    fn overflow_propagates() {
        let cfg = BuildConfig {
            n_generic: 5,
            ..BuildConfig::default()
        };
        let err = build_kg_example(&input(3), &cfg).unwrap_err();
        assert!(matches!(err, DatasetError::Normalize(_)));
    }
}
