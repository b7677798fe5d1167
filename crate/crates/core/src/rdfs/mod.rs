//! Forward-chaining RDFS reasoner with inference-depth ("hop") labels.
//!
//! The closure is computed in stages. Round 0 is the input graph, round 1
//! adds the axiomatic triples, and every later round adds the consequences
//! of one application of all rules to everything derived so far. The hop of
//! a triple is the round in which it first appears. Rounds after the first
//! rule round are evaluated semi-naively: a derivation must use at least one
//! premise produced by the previous round.

mod axioms;
mod rules;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{self, Write};

pub use axioms::{axiomatic_triples, AxiomaticConfig, FIXED_AXIOM_COUNT};
pub use rules::{apply_all, apply_rule, Derived, RdfsTerms, RuleContext, RuleId};

use crate::error::EntailError;
use crate::rdf::vocab::container_membership_index;
use crate::rdf::{Graph, TermTable, Triple};

pub const DEFAULT_MAX_ROUNDS: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub rule: RuleId,
    pub premises: [Option<Triple>; 2],
}

#[derive(Clone, Debug)]
pub struct EntailmentResult {
    pub base: Graph,
    pub closure: Graph,
    pub hop_of: HashMap<Triple, u32>,
    pub derivations: Option<HashMap<Triple, Derivation>>,
    /// Rounds executed, counting the axiom round.
    pub rounds: u32,
    /// Container-membership bound actually used for the axioms.
    pub containers: u32,
}

impl EntailmentResult {
    pub fn entails(&self, t: &Triple) -> bool {
        self.closure.contains(t)
    }

    pub fn hop(&self, t: &Triple) -> Option<u32> {
        self.hop_of.get(t).copied()
    }

    pub fn max_hop(&self) -> u32 {
        self.hop_of.values().copied().max().unwrap_or(0)
    }

    /// Closure partitioned by hop; each cell sorted by (s, p, o).
    pub fn hop_partition(&self) -> BTreeMap<u32, Vec<Triple>> {
        let mut cells: BTreeMap<u32, Vec<Triple>> = BTreeMap::new();
        for t in self.closure.iter() {
            cells.entry(self.hop_of[&t]).or_default().push(t);
        }
        cells
    }

    /// Inferred triples (closure minus base) with their hops, sorted by triple.
    pub fn inferred(&self) -> Vec<(Triple, u32)> {
        self.closure
            .iter()
            .filter(|t| !self.base.contains(t))
            .map(|t| (t, self.hop_of[&t]))
            .collect()
    }

    /// Writes `s<TAB>p<TAB>o<TAB>hop`, one line per closure triple.
    pub fn write_hops_tsv<W: Write>(&self, table: &TermTable, mut w: W) -> io::Result<()> {
        for t in self.closure.iter() {
            let [s, p, o] = t.resolve(table);
            writeln!(w, "{}\t{}\t{}\t{}", s, p, o, self.hop_of[&t])?;
        }
        Ok(())
    }
}

pub fn entails(res: &EntailmentResult, t: &Triple) -> bool {
    res.entails(t)
}

pub fn hop_partition(res: &EntailmentResult) -> BTreeMap<u32, Vec<Triple>> {
    res.hop_partition()
}

#[derive(Clone, Copy, Debug)]
pub struct EntailOptions {
    pub axioms: AxiomaticConfig,
    pub max_rounds: u32,
    pub record_derivations: bool,
}

impl Default for EntailOptions {
    fn default() -> Self {
        EntailOptions {
            axioms: AxiomaticConfig::default(),
            max_rounds: DEFAULT_MAX_ROUNDS,
            record_derivations: false,
        }
    }
}

/// Largest `rdf:_n` index among the terms of `g`, or 0.
pub fn max_container_index(g: &Graph, table: &TermTable) -> u32 {
    g.terms()
        .into_iter()
        .filter_map(|id| table.resolve(id).as_iri().and_then(container_membership_index))
        .max()
        .unwrap_or(0)
}

/// Triples produced by one application of any rule to `g`, minus `g` itself.
pub fn apply_rules_once(g: &Graph, table: &mut TermTable) -> BTreeSet<Triple> {
    let ctx = RuleContext::new(table);
    apply_all(g, None, &ctx)
        .into_iter()
        .flat_map(|(_, derived)| derived.into_iter().map(|d| d.triple))
        .collect()
}

pub fn entail_fixpoint(
    g: &Graph,
    table: &mut TermTable,
    cfg: AxiomaticConfig,
    max_rounds: u32,
) -> Result<EntailmentResult, EntailError> {
    entail(
        g,
        table,
        &EntailOptions {
            axioms: cfg,
            max_rounds,
            record_derivations: false,
        },
    )
}

pub fn entail(g: &Graph, table: &mut TermTable, opts: &EntailOptions) -> Result<EntailmentResult, EntailError> {
    assert!(opts.max_rounds >= 1, "max_rounds must be positive");
    let containers = opts
        .axioms
        .containers
        .unwrap_or_else(|| max_container_index(g, table));
    let axioms = axiomatic_triples(containers, table);
    let ctx = RuleContext::new(table);

    let mut closure = g.clone();
    let mut hop_of: HashMap<Triple, u32> = g.iter().map(|t| (t, 0)).collect();
    let mut derivations = opts.record_derivations.then(HashMap::new);

    for t in axioms.iter() {
        if closure.insert(t) {
            hop_of.insert(t, 1);
        }
    }

    // Nothing has been joined yet, so the first rule round sees everything as new.
    let mut delta: Option<Graph> = None;
    let mut round = 1;
    loop {
        let produced = apply_all(&closure, delta.as_ref(), &ctx);
        let mut next = Graph::new();
        for (rule, derived) in produced {
            for d in derived {
                if next.insert(d.triple) {
                    if let Some(map) = derivations.as_mut() {
                        map.insert(
                            d.triple,
                            Derivation {
                                rule,
                                premises: d.premises,
                            },
                        );
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        if round >= opts.max_rounds {
            // `next` is discarded; the partial closure keeps its exact hops.
            if let Some(map) = derivations.as_mut() {
                for t in next.iter() {
                    map.remove(&t);
                }
            }
            let partial = EntailmentResult {
                base: g.clone(),
                closure,
                hop_of,
                derivations,
                rounds: round,
                containers,
            };
            return Err(EntailError::Truncated {
                max_rounds: opts.max_rounds,
                partial: Box::new(partial),
            });
        }
        round += 1;
        for t in next.iter() {
            closure.insert(t);
            hop_of.insert(t, round);
        }
        delta = Some(next);
    }

    Ok(EntailmentResult {
        base: g.clone(),
        closure,
        hop_of,
        derivations,
        rounds: round,
        containers,
    })
}
