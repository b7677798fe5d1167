use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::KgInput;
use crate::rdf::vocab::{rdf, rdfs};
use crate::rdf::{Graph, Term, TermId, TermTable, Triple};
use crate::seed::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainMix {
    Subclass,
    Subproperty,
    Both,
}

impl fmt::Display for ChainMix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChainMix::Subclass => "subclass",
            ChainMix::Subproperty => "subproperty",
            ChainMix::Both => "both",
        })
    }
}

impl FromStr for ChainMix {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "subclass" => Ok(ChainMix::Subclass),
            "subproperty" => Ok(ChainMix::Subproperty),
            "both" => Ok(ChainMix::Both),
            other => Err(format!("unknown chain mix {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainSpec {
    /// Deepest hop of the chain-end entailment, minus one.
    pub depth: u32,
    pub width: usize,
    pub mix: ChainMix,
    /// IRI prefix of every generated term.
    pub namespace: String,
}

/// Allocates distinct random local names under one namespace.
struct Namer<'a> {
    namespace: &'a str,
    used: HashSet<u32>,
}

impl<'a> Namer<'a> {
    fn new(namespace: &'a str) -> Self {
        Namer {
            namespace,
            used: HashSet::new(),
        }
    }

    fn fresh(&mut self, kind: &str, rng: &mut ChaCha8Rng, table: &mut TermTable) -> TermId {
        loop {
            let n: u32 = rng.random();
            if self.used.insert(n) {
                return table.intern(Term::iri(format!("{}{kind}{n:08x}", self.namespace)));
            }
        }
    }
}

/// Length (in edges) of each chain. Every semi-naive round doubles the
/// longest derived transitive step, so `2^(depth-1)` edges put the
/// entailment at the far end of the chain at hop `depth + 1`.
pub fn chain_length(depth: u32) -> usize {
    assert!((1..=24).contains(&depth), "depth must be in 1..=24");
    1usize << (depth - 1)
}

/// `width` independent rdfs:subClassOf and/or rdfs:subPropertyOf chains,
/// each seeded with an instance (rdfs9) or a statement (rdfs7) at its start.
pub fn gen_synthetic_chain_kg(spec: &ChainSpec, seed: u64, table: &mut TermTable) -> Graph {
    let len = chain_length(spec.depth);
    let mut rng = rng(seed);
    let mut names = Namer::new(&spec.namespace);
    let ty = table.intern_iri(rdf::TYPE);
    let sc = table.intern_iri(rdfs::SUB_CLASS_OF);
    let sp = table.intern_iri(rdfs::SUB_PROPERTY_OF);
    let mut g = Graph::new();
    for _ in 0..spec.width {
        if spec.mix != ChainMix::Subproperty {
            let classes: Vec<TermId> = (0..=len).map(|_| names.fresh("C", &mut rng, table)).collect();
            for w in classes.windows(2) {
                g.insert(Triple::new(w[0], sc, w[1]));
            }
            let x = names.fresh("i", &mut rng, table);
            g.insert(Triple::new(x, ty, classes[0]));
        }
        if spec.mix != ChainMix::Subclass {
            let props: Vec<TermId> = (0..=len).map(|_| names.fresh("p", &mut rng, table)).collect();
            for w in props.windows(2) {
                g.insert(Triple::new(w[0], sp, w[1]));
            }
            let a = names.fresh("i", &mut rng, table);
            let b = names.fresh("i", &mut rng, table);
            g.insert(Triple::new(a, props[0], b));
        }
    }
    g
}

/// Size ranges of a random small ontology with instance data.
#[derive(Clone, Debug, PartialEq)]
pub struct OntologySpec {
    pub classes: (usize, usize),
    pub properties: (usize, usize),
    pub instances: (usize, usize),
    pub assertions: (usize, usize),
    /// Probability that a generated triple is dropped.
    pub drop_fraction: f64,
    pub namespace: String,
}

impl OntologySpec {
    pub fn new(namespace: impl Into<String>) -> Self {
        OntologySpec {
            classes: (8, 16),
            properties: (4, 8),
            instances: (12, 30),
            assertions: (20, 60),
            drop_fraction: 0.1,
            namespace: namespace.into(),
        }
    }
}

/// Random class and property hierarchies with domains, ranges, typed
/// instances and property assertions, so that rdfs2/3/5/7/9/11 all fire.
/// Each triple is then dropped with probability `drop_fraction`.
pub fn gen_ontology_kg(spec: &OntologySpec, seed: u64, table: &mut TermTable) -> Graph {
    let mut rng = rng(seed);
    let mut names = Namer::new(&spec.namespace);
    let draw = |range: (usize, usize), rng: &mut ChaCha8Rng| rng.random_range(range.0..=range.1.max(range.0));
    let n_classes = draw(spec.classes, &mut rng).max(1);
    let n_props = draw(spec.properties, &mut rng).max(1);
    let n_instances = draw(spec.instances, &mut rng).max(1);
    let n_assertions = draw(spec.assertions, &mut rng);

    let ty = table.intern_iri(rdf::TYPE);
    let sc = table.intern_iri(rdfs::SUB_CLASS_OF);
    let sp = table.intern_iri(rdfs::SUB_PROPERTY_OF);
    let domain = table.intern_iri(rdfs::DOMAIN);
    let range = table.intern_iri(rdfs::RANGE);
    let class = table.intern_iri(rdfs::CLASS);
    let label = table.intern_iri(rdfs::LABEL);

    let classes: Vec<TermId> = (0..n_classes).map(|_| names.fresh("C", &mut rng, table)).collect();
    let props: Vec<TermId> = (0..n_props).map(|_| names.fresh("p", &mut rng, table)).collect();
    let instances: Vec<TermId> = (0..n_instances).map(|_| names.fresh("i", &mut rng, table)).collect();

    let mut triples = Vec::new();
    for (i, &c) in classes.iter().enumerate() {
        if i > 0 && rng.random_bool(0.85) {
            triples.push(Triple::new(c, sc, classes[rng.random_range(0..i)]));
        }
        if rng.random_bool(0.2) {
            triples.push(Triple::new(c, ty, class));
        }
    }
    let mut ranged = vec![false; n_props];
    for (i, &p) in props.iter().enumerate() {
        if i > 0 && rng.random_bool(0.35) {
            triples.push(Triple::new(p, sp, props[rng.random_range(0..i)]));
        }
        if rng.random_bool(0.5) {
            triples.push(Triple::new(p, domain, *classes.choose(&mut rng).expect("classes nonempty")));
        }
        if rng.random_bool(0.5) {
            triples.push(Triple::new(p, range, *classes.choose(&mut rng).expect("classes nonempty")));
            ranged[i] = true;
        }
    }
    for &x in &instances {
        if rng.random_bool(0.7) {
            triples.push(Triple::new(x, ty, *classes.choose(&mut rng).expect("classes nonempty")));
        }
        if rng.random_bool(0.1) {
            let lit = table.intern(Term::literal(format!("n{:06x}", rng.random::<u32>() & 0xff_ffff)));
            triples.push(Triple::new(x, label, lit));
        }
    }
    for _ in 0..n_assertions {
        let pi = rng.random_range(0..n_props);
        let s = *instances.choose(&mut rng).expect("instances nonempty");
        let o = if !ranged[pi] && rng.random_bool(0.1) {
            table.intern(Term::literal(format!("v{:06x}", rng.random::<u32>() & 0xff_ffff)))
        } else {
            *instances.choose(&mut rng).expect("instances nonempty")
        };
        triples.push(Triple::new(s, props[pi], o));
    }
    triples
        .into_iter()
        .filter(|_| !rng.random_bool(spec.drop_fraction))
        .collect()
}

/// Ontology KGs with ids `first..first + count`, each in its own namespace,
/// so no two KGs share a non-reserved term.
pub fn ontology_corpus(first: u64, count: u64) -> Vec<KgInput> {
    (first..first + count)
        .map(|i| {
            let mut table = TermTable::new();
            let graph = gen_ontology_kg(&OntologySpec::new(format!("http://kg{i}.example/")), i, &mut table);
            KgInput {
                kg_id: format!("{i:04}"),
                graph,
                table,
            }
        })
        .collect()
}
