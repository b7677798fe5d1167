mod common;

use std::collections::{HashMap, HashSet};

use common::{normalization_commutes, random_graph, renaming_equivariant};
use proptest::prelude::*;
use rdfmem::normalize::{build_vocab, denormalize, generic_token, normalize_graph, NormalizationMap};
use rdfmem::rdf::{is_reserved, Graph, TermTable, Triple};
use rdfmem::rdfs::{entail, EntailOptions};

#[test]
fn closure_is_equivariant_under_renaming() {
    for seed in 0..100 {
        assert!(renaming_equivariant(seed), "graph {seed}");
    }
}

#[test]
fn normalization_commutes_with_entailment() {
    for seed in 0..100 {
        assert!(normalization_commutes(seed), "graph {seed}");
    }
}

#[test]
fn first_assignment_is_uniform_over_generic_tokens() {
    // Chi-square goodness of fit with 9 degrees of freedom; 27.88 is the
    // 0.999 quantile. Seeds are fixed, so the outcome is deterministic.
    let n = 10;
    let trials = 5000;
    let mut counts = vec![0usize; n];
    let term = rdfmem::rdf::Term::iri("http://chi.example/x");
    for seed in 0..trials {
        let mut map = NormalizationMap::generic(n, seed);
        let tok = map.assign(&term).unwrap();
        let idx = (1..=n).find(|&i| generic_token(i) == tok).unwrap();
        counts[idx - 1] += 1;
    }
    let expected = trials as f64 / n as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    assert!(chi2 < 27.88, "chi-square {chi2} for counts {counts:?}");
}

#[test]
fn normalization_is_a_bijection_that_keeps_reserved_terms() {
    let vocab = build_vocab(3000);
    for seed in 0..50 {
        let mut table = TermTable::new();
        let g = random_graph(seed, 30, &mut table);
        let (tokens, map) = normalize_graph(&g, &table, &vocab, seed).unwrap();
        let mut seen: HashMap<String, rdfmem::rdf::Term> = HashMap::new();
        for (t, toks) in g.iter().zip(&tokens) {
            for (term, tok) in t.resolve(&table).into_iter().zip(toks) {
                if let Some(prev) = seen.insert(tok.clone(), term.clone()) {
                    assert_eq!(&prev, term, "token {tok} reused");
                }
                assert!(vocab.index_of(tok).is_some(), "token {tok} outside the vocabulary");
                if rdfmem::normalize::reserved_token(term).is_some() {
                    assert!(is_reserved(term));
                    assert_eq!(Some(tok.as_str()), rdfmem::normalize::reserved_token(term));
                }
            }
            let mut back_table = table.clone();
            assert_eq!(denormalize(toks, &map, &mut back_table).unwrap(), t);
        }
    }
}

fn iri() -> impl Strategy<Value = String> {
    "[a-z]{1,6}(/[A-Za-z0-9_]{0,6}){0,2}".prop_map(|p| format!("http://p.example/{p}"))
}

fn literal() -> impl Strategy<Value = rdfmem::rdf::Term> {
    let text = || proptest::string::string_regex("[ -~\\t\\n\\r\u{e9}\u{3b1}\u{1F600}\"\\\\]{0,12}").unwrap();
    prop_oneof![
        text().prop_map(rdfmem::rdf::Term::literal),
        (text(), "[a-z]{2}(-[A-Z]{2})?").prop_map(|(l, lang)| rdfmem::rdf::Term::lang_literal(l, lang)),
        (text(), iri()).prop_map(|(l, dt)| rdfmem::rdf::Term::typed_literal(l, dt)),
    ]
}

fn term() -> impl Strategy<Value = rdfmem::rdf::Term> {
    prop_oneof![
        3 => iri().prop_map(rdfmem::rdf::Term::iri),
        1 => "[a-z][a-z0-9]{0,5}".prop_map(rdfmem::rdf::Term::blank),
        2 => literal(),
    ]
}

fn graph_strategy() -> impl Strategy<Value = Vec<(rdfmem::rdf::Term, String, rdfmem::rdf::Term)>> {
    proptest::collection::vec(
        (
            term().prop_filter("subjects are not literals", |t| !t.is_literal()),
            iri(),
            term(),
        ),
        0..20,
    )
}

fn build(triples: &[(rdfmem::rdf::Term, String, rdfmem::rdf::Term)]) -> (Graph, TermTable) {
    let mut table = TermTable::new();
    let g = triples
        .iter()
        .map(|(s, p, o)| Triple::new(table.intern(s.clone()), table.intern_iri(p), table.intern(o.clone())))
        .collect();
    (g, table)
}

fn term_set(g: &Graph, table: &TermTable) -> HashSet<[rdfmem::rdf::Term; 3]> {
    g.iter().map(|t| t.resolve(table).map(Clone::clone)).collect()
}

proptest! {
    #[test]
    fn ntriples_round_trip(triples in graph_strategy()) {
        let (g, table) = build(&triples);
        let text = rdfmem::rdf::serialize_ntriples(&g, &table);
        let mut back_table = TermTable::new();
        let back = rdfmem::rdf::parse_ntriples(&text, &mut back_table, Default::default()).unwrap();
        prop_assert_eq!(term_set(&back.graph, &back_table), term_set(&g, &table));
        prop_assert_eq!(rdfmem::rdf::serialize_ntriples(&back.graph, &back_table), text);
    }

    #[test]
    fn normalization_round_trips_and_keeps_shape(triples in graph_strategy(), seed in any::<u64>()) {
        let (g, table) = build(&triples);
        let vocab = build_vocab(200);
        let (tokens, map) = normalize_graph(&g, &table, &vocab, seed).unwrap();
        prop_assert_eq!(tokens.len(), g.len());
        let distinct_terms: HashSet<_> = g.iter().flat_map(|t| t.terms()).collect();
        let distinct_tokens: HashSet<_> = tokens.iter().flatten().collect();
        prop_assert_eq!(distinct_terms.len(), distinct_tokens.len());
        let mut back_table = table.clone();
        for (t, toks) in g.iter().zip(&tokens) {
            prop_assert_eq!(denormalize(toks, &map, &mut back_table).unwrap(), t);
        }
    }

    #[test]
    fn entailment_never_shrinks_and_hops_are_staged(triples in graph_strategy()) {
        let (g, mut table) = build(&triples);
        let res = entail(&g, &mut table, &EntailOptions::default()).unwrap();
        prop_assert!(g.is_subset(&res.closure));
        for t in res.closure.iter() {
            let h = res.hop_of[&t];
            prop_assert_eq!(h == 0, g.contains(&t));
            prop_assert!(t.is_well_formed(&table));
        }
    }
}
