use std::collections::{BTreeSet, HashSet};

use rand::seq::{index, IndexedRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::DatasetError;
use crate::rdf::vocab::{rdf, rdfs};
use crate::rdf::{Graph, TermId, TermTable, Triple};
use crate::rdfs::EntailmentResult;
use crate::seed::rng;

/// Rejection-sampling budget per requested negative.
const ATTEMPTS_PER_NEGATIVE: usize = 100;

/// Uniform sample of `min(|g|, max_triples)` triples without replacement.
pub fn sample_subgraph(g: &Graph, max_triples: usize, seed: u64) -> Graph {
    if g.len() <= max_triples {
        return g.clone();
    }
    let all: Vec<Triple> = g.iter().collect();
    index::sample(&mut rng(seed), all.len(), max_triples)
        .into_iter()
        .map(|i| all[i])
        .collect()
}

/// Inferred triples (closure minus base) with their hops, in triple order.
pub fn positives(res: &EntailmentResult) -> Vec<(Triple, u32)> {
    res.inferred()
}

/// Term pools of a graph for position-respecting recombination.
struct Pools {
    subjects: Vec<TermId>,
    predicates: Vec<TermId>,
    objects: Vec<TermId>,
}

impl Pools {
    fn new(kg: &Graph, table: &TermTable) -> Self {
        let mut nodes = BTreeSet::new();
        let mut predicates = BTreeSet::new();
        for t in kg.iter() {
            nodes.insert(t.s);
            nodes.insert(t.o);
            predicates.insert(t.p);
        }
        let subjects = nodes
            .iter()
            .copied()
            .filter(|&id| !table.resolve(id).is_literal())
            .collect();
        Pools {
            subjects,
            predicates: predicates.into_iter().collect(),
            objects: nodes.into_iter().collect(),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Option<Triple> {
        Some(Triple::new(
            *self.subjects.choose(rng)?,
            *self.predicates.choose(rng)?,
            *self.objects.choose(rng)?,
        ))
    }
}

/// Recombines subjects, predicates and objects of `kg` (subjects and
/// objects share one node pool) until `count` non-entailed triples exist.
pub fn negatives_random(
    kg: &Graph,
    res: &EntailmentResult,
    table: &TermTable,
    count: usize,
    seed: u64,
) -> Result<Vec<Triple>, DatasetError> {
    let pools = Pools::new(kg, table);
    let mut rng = rng(seed);
    let mut chosen = Vec::with_capacity(count);
    let mut seen = HashSet::new();
    for _ in 0..ATTEMPTS_PER_NEGATIVE * count {
        if chosen.len() == count {
            break;
        }
        let Some(t) = pools.draw(&mut rng) else { break };
        if !res.entails(&t) && seen.insert(t) {
            chosen.push(t);
        }
    }
    if chosen.len() < count {
        return Err(DatasetError::InsufficientCandidates {
            found: chosen.len(),
            requested: count,
        });
    }
    Ok(chosen)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedNegatives {
    pub triples: Vec<Triple>,
    /// How many of `triples` came from the random fallback.
    pub fallbacks: usize,
}

/// Corrupts one uniformly chosen position of a closure triple with a term
/// sharing an `rdf:type` (other than `rdfs:Resource`) with the original.
/// Terms without such a type fall back to random recombination.
pub fn negatives_typed(
    kg: &Graph,
    res: &EntailmentResult,
    table: &TermTable,
    count: usize,
    seed: u64,
) -> Result<TypedNegatives, DatasetError> {
    let pools = Pools::new(kg, table);
    let valid: Vec<Triple> = res.closure.iter().collect();
    let ty = table.get_iri(rdf::TYPE);
    let resource = table.get_iri(rdfs::RESOURCE);
    let mut rng = rng(seed);
    let mut out = TypedNegatives {
        triples: Vec::with_capacity(count),
        fallbacks: 0,
    };
    let mut seen = HashSet::new();
    for _ in 0..ATTEMPTS_PER_NEGATIVE * count {
        if out.triples.len() == count {
            break;
        }
        let Some(&original) = valid.choose(&mut rng) else { break };
        let position = rng.random_range(0..3usize);
        let element = original.terms()[position];
        let types: Vec<TermId> = match ty {
            Some(ty) => res
                .closure
                .objects_of(element, ty)
                .filter(|&c| Some(c) != resource)
                .collect(),
            None => Vec::new(),
        };
        let replacement = types.choose(&mut rng).and_then(|&class| {
            let candidates: Vec<TermId> = res
                .closure
                .subjects_with(ty.expect("types imply rdf:type"), class)
                .filter(|&x| x != element && fits(position, x, table))
                .collect();
            candidates.choose(&mut rng).copied()
        });
        let (candidate, fallback) = match replacement {
            Some(x) => {
                let mut terms = original.terms();
                terms[position] = x;
                (Some(Triple::new(terms[0], terms[1], terms[2])), false)
            }
            None => (pools.draw(&mut rng), true),
        };
        let Some(t) = candidate else { continue };
        if !res.entails(&t) && seen.insert(t) {
            out.triples.push(t);
            out.fallbacks += fallback as usize;
        }
    }
    if out.triples.len() < count {
        return Err(DatasetError::InsufficientCandidates {
            found: out.triples.len(),
            requested: count,
        });
    }
    Ok(out)
}

fn fits(position: usize, term: TermId, table: &TermTable) -> bool {
    let t = table.resolve(term);
    match position {
        0 => !t.is_literal(),
        1 => t.is_iri(),
        _ => true,
    }
}
