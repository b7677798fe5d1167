//! Independent oracles shared by the integration suites.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use rand::seq::IndexedRandom;
use rand::Rng;
use rdfmem::normalize::{build_vocab, normalize_graph, term_token, token_graph, TokenTriple};
use rdfmem::rdf::vocab::{container_membership_index, container_membership_iri, rdf, rdfs};
use rdfmem::rdf::{Graph, Term, TermId, TermTable, Triple};
use rdfmem::rdfs::{axiomatic_triples, entail, EntailOptions};
use rdfmem::seed::rng;

/// The 12 schema terms random graphs are drawn over.
pub const SCHEMA: [&str; 12] = [
    rdf::TYPE,
    rdf::PROPERTY,
    rdfs::SUB_CLASS_OF,
    rdfs::SUB_PROPERTY_OF,
    rdfs::DOMAIN,
    rdfs::RANGE,
    rdfs::CLASS,
    rdfs::RESOURCE,
    rdfs::LITERAL,
    rdfs::DATATYPE,
    rdfs::CONTAINER_MEMBERSHIP_PROPERTY,
    rdfs::MEMBER,
];

/// A random graph of at most `max_triples` triples over [`SCHEMA`], `rdf:_1`,
/// six user IRIs, one blank node and two literals.
pub fn random_graph(seed: u64, max_triples: usize, table: &mut TermTable) -> Graph {
    let mut r = rng(seed);
    let mut iris: Vec<TermId> = SCHEMA.iter().map(|i| table.intern_iri(i)).collect();
    iris.push(table.intern_iri(&container_membership_iri(1)));
    for i in 0..6 {
        iris.push(table.intern_iri(&format!("http://oracle.example/u{i}")));
    }
    let blank = table.intern(Term::blank("b0"));
    let literals = [
        table.intern(Term::literal("x")),
        table.intern(Term::typed_literal("1", "http://www.w3.org/2001/XMLSchema#integer")),
    ];
    let n = r.random_range(0..=max_triples);
    let mut g = Graph::new();
    for _ in 0..n {
        let s = if r.random_bool(0.1) { blank } else { *iris.choose(&mut r).unwrap() };
        let p = *iris.choose(&mut r).unwrap();
        let o = match r.random_range(0..10) {
            0 => *literals.choose(&mut r).unwrap(),
            1 => blank,
            _ => *iris.choose(&mut r).unwrap(),
        };
        g.insert(Triple::new(s, p, o));
    }
    g
}

struct Ids {
    ty: TermId,
    property: TermId,
    resource: TermId,
    class: TermId,
    literal: TermId,
    datatype: TermId,
    sc: TermId,
    sp: TermId,
    domain: TermId,
    range: TermId,
    cmp: TermId,
    member: TermId,
}

/// One naive application of every rule to `g`, by nested loops over all
/// triples. Written from the rule table, independently of the library.
pub fn naive_step(g: &HashSet<Triple>, table: &mut TermTable) -> HashSet<Triple> {
    let i = Ids {
        ty: table.intern_iri(rdf::TYPE),
        property: table.intern_iri(rdf::PROPERTY),
        resource: table.intern_iri(rdfs::RESOURCE),
        class: table.intern_iri(rdfs::CLASS),
        literal: table.intern_iri(rdfs::LITERAL),
        datatype: table.intern_iri(rdfs::DATATYPE),
        sc: table.intern_iri(rdfs::SUB_CLASS_OF),
        sp: table.intern_iri(rdfs::SUB_PROPERTY_OF),
        domain: table.intern_iri(rdfs::DOMAIN),
        range: table.intern_iri(rdfs::RANGE),
        cmp: table.intern_iri(rdfs::CONTAINER_MEMBERSHIP_PROPERTY),
        member: table.intern_iri(rdfs::MEMBER),
    };
    let is_lit = |t: TermId| table.resolve(t).is_literal();
    let is_iri = |t: TermId| table.resolve(t).is_iri();
    let mut out = HashSet::new();
    let mut emit = |s: TermId, p: TermId, o: TermId| {
        if !is_lit(s) && is_iri(p) {
            out.insert(Triple::new(s, p, o));
        }
    };
    for &a in g {
        // rdf1, rdfs4a, rdfs4b
        emit(a.p, i.ty, i.property);
        emit(a.s, i.ty, i.resource);
        emit(a.o, i.ty, i.resource);
        if a.p == i.ty {
            if a.o == i.property {
                emit(a.s, i.sp, a.s); // rdfs6
            }
            if a.o == i.class {
                emit(a.s, i.sc, i.resource); // rdfs8
                emit(a.s, i.sc, a.s); // rdfs10
            }
            if a.o == i.cmp {
                emit(a.s, i.sp, i.member); // rdfs12
            }
            if a.o == i.datatype {
                emit(a.s, i.sc, i.literal); // rdfs13
            }
        }
        for &b in g {
            if a.p == i.domain && b.p == a.s {
                emit(b.s, i.ty, a.o); // rdfs2
            }
            if a.p == i.range && b.p == a.s {
                emit(b.o, i.ty, a.o); // rdfs3
            }
            if a.p == i.sp && b.p == i.sp && a.o == b.s {
                emit(a.s, i.sp, b.o); // rdfs5
            }
            if a.p == i.sp && b.p == a.s {
                emit(b.s, a.o, b.o); // rdfs7
            }
            if a.p == i.sc && b.p == i.ty && b.o == a.s {
                emit(b.s, i.ty, a.o); // rdfs9
            }
            if a.p == i.sc && b.p == i.sc && a.o == b.s {
                emit(a.s, i.sc, b.o); // rdfs11
            }
        }
    }
    out
}

/// Staged naive closure with first-appearance rounds: base 0, axioms 1,
/// then one full re-application of the rules per round.
pub fn naive_closure(g: &Graph, table: &mut TermTable, containers: u32) -> HashMap<Triple, u32> {
    let mut hops: HashMap<Triple, u32> = g.iter().map(|t| (t, 0)).collect();
    for t in axiomatic_triples(containers, table).iter() {
        hops.entry(t).or_insert(1);
    }
    let mut round = 1;
    loop {
        round += 1;
        let current: HashSet<Triple> = hops.keys().copied().collect();
        let mut grew = false;
        for t in naive_step(&current, table) {
            if let std::collections::hash_map::Entry::Vacant(e) = hops.entry(t) {
                e.insert(round);
                grew = true;
            }
        }
        if !grew {
            return hops;
        }
    }
}

/// Random bijection of the non-reserved terms of `table` onto fresh terms of
/// the same kind. Reserved terms map to themselves.
pub struct Renaming {
    pub map: HashMap<TermId, Term>,
}

impl Renaming {
    pub fn random(table: &TermTable, seed: u64) -> Self {
        let mut r = rng(seed);
        let tag: u32 = r.random();
        let map = table
            .iter()
            .filter(|(_, t)| !rdfmem::rdf::is_reserved(t))
            .map(|(id, t)| {
                let fresh = match t {
                    Term::Iri(_) => Term::iri(format!("http://renamed.example/{tag:08x}/{}", id.0)),
                    Term::BlankNode(_) => Term::blank(format!("r{tag:08x}n{}", id.0)),
                    Term::Literal { .. } => Term::literal(format!("renamed {tag:08x} {}", id.0)),
                };
                (id, fresh)
            })
            .collect();
        Renaming { map }
    }

    pub fn term(&self, id: TermId, table: &TermTable) -> Term {
        self.map.get(&id).cloned().unwrap_or_else(|| table.resolve(id).clone())
    }

    pub fn triple(&self, t: &Triple, from: &TermTable, to: &mut TermTable) -> Triple {
        Triple::new(
            to.intern(self.term(t.s, from)),
            to.intern(self.term(t.p, from)),
            to.intern(self.term(t.o, from)),
        )
    }
}

/// closure(σ(g)) = σ(closure(g)), hops included, for a random σ.
pub fn renaming_equivariant(seed: u64) -> bool {
    let mut table = TermTable::new();
    let g = random_graph(seed, 30, &mut table);
    let res = entail(&g, &mut table, &EntailOptions::default()).unwrap();
    let sigma = Renaming::random(&table, seed ^ 0x5eed);
    let mut renamed_table = TermTable::new();
    let renamed: Graph = g.iter().map(|t| sigma.triple(&t, &table, &mut renamed_table)).collect();
    let renamed_res = entail(&renamed, &mut renamed_table, &EntailOptions::default()).unwrap();
    let mapped: HashMap<Triple, u32> = res
        .hop_of
        .iter()
        .map(|(t, &h)| (sigma.triple(t, &table, &mut renamed_table), h))
        .collect();
    renamed_res.hop_of == mapped
}

/// Graphs whose terms survive the token round trip: IRIs only, and no
/// container-membership properties (those become generic tokens).
pub fn iri_only(g: &Graph, table: &TermTable) -> Graph {
    g.iter()
        .filter(|t| {
            t.resolve(table)
                .iter()
                .all(|term| term.as_iri().is_some_and(|iri| container_membership_index(iri).is_none()))
        })
        .collect()
}

/// normalize(entail(g)) = entail(normalize(g)) at token level, hops included.
pub fn normalization_commutes(seed: u64) -> bool {
    let vocab = build_vocab(3000);
    let mut table = TermTable::new();
    let g = iri_only(&random_graph(seed, 30, &mut table), &table);
    let (tokens, map) = normalize_graph(&g, &table, &vocab, seed).unwrap();
    let res = entail(&g, &mut table, &EntailOptions::default()).unwrap();
    let left: HashMap<TokenTriple, u32> = res
        .hop_of
        .iter()
        .map(|(t, &h)| (map.normalize_triple(t, &table).unwrap(), h))
        .collect();
    let mut token_table = TermTable::new();
    let tg = token_graph(&tokens, &mut token_table);
    let token_res = entail(&tg, &mut token_table, &EntailOptions::default()).unwrap();
    let right: HashMap<TokenTriple, u32> = token_res
        .hop_of
        .iter()
        .map(|(t, &h)| (t.resolve(&token_table).map(|term| term_token(term).unwrap()), h))
        .collect();
    left == right
}
