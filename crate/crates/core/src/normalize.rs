//! Vocabulary normalization: every term outside the fixed RDF/RDFS list is
//! renamed to a generic token `a_i`, with the assignment drawn from a seeded
//! random permutation. Reserved vocabulary keeps its own tokens.

use std::collections::HashMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::NormalizeError;
use crate::rdf::ntriples::parse_term;
use crate::rdf::vocab::{reserved_index, RESERVED};
use crate::rdf::{Graph, Term, TermId, TermTable, Triple};

pub const PAD: &str = "#pad";
pub const YES: &str = "#yes";
pub const NO: &str = "#no";
pub const SPECIALS: [&str; 3] = [PAD, YES, NO];

pub const PAD_INDEX: u32 = 0;
pub const YES_INDEX: u32 = 1;
pub const NO_INDEX: u32 = 2;

pub const DEFAULT_N_GENERIC: usize = 3000;

/// Prefix used when generic tokens must be turned back into IRIs.
pub const GENERIC_IRI_PREFIX: &str = "urn:rdfmem:generic:";

pub type TokenTriple = [String; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VocabKind {
    /// Specials, reserved tokens, then `a_1 ... a_n`.
    Generic { n_generic: usize },
    /// Specials, reserved tokens, then verbatim term tokens (baseline).
    Identity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TokenClass {
    Special,
    Reserved,
    Generic,
    Term,
}

impl fmt::Display for TokenClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TokenClass::Special => "special",
            TokenClass::Reserved => "reserved",
            TokenClass::Generic => "generic",
            TokenClass::Term => "term",
        })
    }
}

/// Token set shared by all knowledge graphs; token index is the embedding row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocab {
    kind: VocabKind,
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

pub fn generic_token(i: usize) -> String {
    format!("a_{i}")
}

pub fn build_vocab(n_generic: usize) -> Vocab {
    assert!(n_generic >= 1, "n_generic must be positive");
    Vocab::from_parts(
        VocabKind::Generic { n_generic },
        (1..=n_generic).map(generic_token),
    )
}

impl Vocab {
    fn from_parts(kind: VocabKind, rest: impl IntoIterator<Item = String>) -> Self {
        let mut tokens: Vec<String> = SPECIALS.iter().map(|s| s.to_string()).collect();
        tokens.extend(RESERVED.iter().map(|(tok, _)| tok.to_string()));
        tokens.extend(rest);
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect::<HashMap<_, _>>();
        assert_eq!(index.len(), tokens.len(), "duplicate vocabulary token");
        Vocab {
            kind,
            tokens,
            index,
        }
    }

    /// Corpus-wide vocabulary for the unnormalized baseline. Extra tokens are
    /// deduplicated and sorted; specials and reserved tokens are skipped.
    pub fn identity<I, S>(extra: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut terms: Vec<String> = extra
            .into_iter()
            .map(|s| s.as_ref().to_owned())
            .filter(|t| !SPECIALS.contains(&t.as_str()) && reserved_token_index(t).is_none())
            .collect();
        terms.sort();
        terms.dedup();
        Vocab::from_parts(VocabKind::Identity, terms)
    }

    pub fn kind(&self) -> VocabKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn n_generic(&self) -> usize {
        match self.kind {
            VocabKind::Generic { n_generic } => n_generic,
            VocabKind::Identity => 0,
        }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn token(&self, index: u32) -> &str {
        &self.tokens[index as usize]
    }

    pub fn index_of(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn class_of(&self, index: u32) -> TokenClass {
        let i = index as usize;
        if i < SPECIALS.len() {
            TokenClass::Special
        } else if i < SPECIALS.len() + RESERVED.len() {
            TokenClass::Reserved
        } else if matches!(self.kind, VocabKind::Generic { .. }) {
            TokenClass::Generic
        } else {
            TokenClass::Term
        }
    }

    pub fn encode(&self, triple: &TokenTriple) -> Result<[u32; 3], NormalizeError> {
        let mut out = [0u32; 3];
        for (slot, tok) in out.iter_mut().zip(triple) {
            *slot = self
                .index_of(tok)
                .ok_or_else(|| NormalizeError::UnknownToken(tok.clone()))?;
        }
        Ok(out)
    }
}

fn reserved_token_index(token: &str) -> Option<usize> {
    RESERVED.iter().position(|(tok, _)| *tok == token)
}

/// Token for a listed RDF/RDFS IRI.
pub fn reserved_token(term: &Term) -> Option<&'static str> {
    term.as_iri()
        .and_then(reserved_index)
        .map(|i| RESERVED[i].0)
}

/// Inverse of [`reserved_token`].
pub fn reserved_term(token: &str) -> Option<Term> {
    reserved_token_index(token).map(|i| Term::iri(RESERVED[i].1))
}

/// Renaming of one knowledge graph. Reserved vocabulary is never a key.
#[derive(Clone, Debug)]
pub struct NormalizationMap {
    forward: HashMap<Term, String>,
    inverse: HashMap<String, Term>,
    /// (token, term) in assignment order.
    entries: Vec<(String, Term)>,
    seed: u64,
    identity: bool,
    permutation: Vec<u32>,
}

/// Maps are equal when they hold the same assignments in the same order.
impl PartialEq for NormalizationMap {
    fn eq(&self, other: &Self) -> bool {
        self.identity == other.identity && self.entries == other.entries
    }
}

impl Eq for NormalizationMap {}

impl NormalizationMap {
    /// Empty map whose k-th assignment is the k-th element of a seeded
    /// uniform permutation of `a_1 ... a_n`.
    pub fn generic(n_generic: usize, seed: u64) -> Self {
        let mut permutation: Vec<u32> = (1..=n_generic as u32).collect();
        permutation.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        NormalizationMap {
            forward: HashMap::new(),
            inverse: HashMap::new(),
            entries: Vec::new(),
            seed,
            identity: false,
            permutation,
        }
    }

    /// Map that keeps every term verbatim (token = escaped N-Triples form).
    pub fn identity() -> Self {
        NormalizationMap {
            forward: HashMap::new(),
            inverse: HashMap::new(),
            entries: Vec::new(),
            seed: 0,
            identity: true,
            permutation: Vec::new(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn remaining(&self) -> usize {
        if self.identity {
            usize::MAX
        } else {
            self.permutation.len() - self.entries.len()
        }
    }

    pub fn entries(&self) -> &[(String, Term)] {
        &self.entries
    }

    /// Token of an already-mapped or reserved term.
    pub fn token_of(&self, term: &Term) -> Option<&str> {
        reserved_token(term).or_else(|| self.forward.get(term).map(String::as_str))
    }

    pub fn term_of(&self, token: &str) -> Option<Term> {
        reserved_term(token).or_else(|| self.inverse.get(token).cloned())
    }

    /// Token for `term`, assigning the next fresh one if needed.
    pub fn assign(&mut self, term: &Term) -> Result<String, NormalizeError> {
        if let Some(tok) = self.token_of(term) {
            return Ok(tok.to_owned());
        }
        let token = if self.identity {
            term.to_token()
        } else {
            let next = self.entries.len();
            let Some(&i) = self.permutation.get(next) else {
                return Err(NormalizeError::VocabularyOverflow {
                    needed: next + 1,
                    available: self.permutation.len(),
                });
            };
            generic_token(i as usize)
        };
        self.forward.insert(term.clone(), token.clone());
        self.inverse.insert(token.clone(), term.clone());
        self.entries.push((token.clone(), term.clone()));
        Ok(token)
    }

    /// Assigns tokens to every unmapped term of `terms` (in order), failing
    /// up front if the pool cannot hold them all.
    pub fn assign_all<'a>(&mut self, terms: impl IntoIterator<Item = &'a Term>) -> Result<(), NormalizeError> {
        let mut fresh: Vec<&Term> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for t in terms {
            if self.token_of(t).is_none() && seen.insert(t) {
                fresh.push(t);
            }
        }
        if fresh.len() > self.remaining() {
            return Err(NormalizeError::VocabularyOverflow {
                needed: self.entries.len() + fresh.len(),
                available: self.permutation.len(),
            });
        }
        for t in fresh {
            self.assign(t)?;
        }
        Ok(())
    }

    pub fn normalize_triple(&self, t: &Triple, table: &TermTable) -> Result<TokenTriple, NormalizeError> {
        let terms = t.resolve(table);
        let mut out: [String; 3] = Default::default();
        for (slot, term) in out.iter_mut().zip(terms) {
            *slot = self
                .token_of(term)
                .ok_or_else(|| NormalizeError::UnknownToken(term.to_ntriples()))?
                .to_owned();
        }
        Ok(out)
    }

    /// TSV lines `token<TAB>term` in assignment order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (tok, term) in &self.entries {
            out.push_str(tok);
            out.push('\t');
            out.push_str(&term.to_ntriples());
            out.push('\n');
        }
        out
    }

    /// Rebuilds a map from its TSV form. The result supports lookups and
    /// denormalization but cannot assign further generic tokens.
    pub fn from_tsv(text: &str, seed: u64, identity: bool) -> Result<Self, (usize, String)> {
        let mut map = if identity {
            NormalizationMap::identity()
        } else {
            NormalizationMap::generic(0, seed)
        };
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let (tok, term) = line
                .split_once('\t')
                .ok_or_else(|| (i + 1, "expected token<TAB>term".to_string()))?;
            let term = parse_term(term).map_err(|e| (i + 1, e))?;
            if map.inverse.contains_key(tok) || map.forward.contains_key(&term) {
                return Err((i + 1, format!("duplicate mapping for {tok}")));
            }
            map.forward.insert(term.clone(), tok.to_owned());
            map.inverse.insert(tok.to_owned(), term.clone());
            map.entries.push((tok.to_owned(), term));
        }
        Ok(map)
    }
}

/// Renames every distinct non-reserved term of `g` (in triple order) to a
/// distinct generic token of `vocab`, drawn by a permutation seeded by `seed`.
pub fn normalize_graph(
    g: &Graph,
    table: &TermTable,
    vocab: &Vocab,
    seed: u64,
) -> Result<(Vec<TokenTriple>, NormalizationMap), NormalizeError> {
    let mut map = match vocab.kind() {
        VocabKind::Generic { n_generic } => NormalizationMap::generic(n_generic, seed),
        VocabKind::Identity => NormalizationMap::identity(),
    };
    let ordered: Vec<&Term> = g
        .iter()
        .flat_map(|t| t.resolve(table))
        .collect();
    map.assign_all(ordered)?;
    let triples = g
        .iter()
        .map(|t| map.normalize_triple(&t, table))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((triples, map))
}

/// Renames with the identity map (unnormalized baseline).
pub fn identity_normalize(g: &Graph, table: &TermTable) -> (Vec<TokenTriple>, NormalizationMap) {
    let mut map = NormalizationMap::identity();
    let triples = g
        .iter()
        .map(|t| {
            let terms = t.resolve(table);
            let mut out: [String; 3] = Default::default();
            for (slot, term) in out.iter_mut().zip(terms) {
                *slot = map.assign(term).expect("identity assignment never overflows");
            }
            out
        })
        .collect();
    (triples, map)
}

pub fn denormalize_terms(tokens: &TokenTriple, map: &NormalizationMap) -> Result<[Term; 3], NormalizeError> {
    let resolve = |tok: &String| map.term_of(tok).ok_or_else(|| NormalizeError::UnknownToken(tok.clone()));
    Ok([resolve(&tokens[0])?, resolve(&tokens[1])?, resolve(&tokens[2])?])
}

/// Exact original triple; terms missing from `table` are interned.
pub fn denormalize(
    tokens: &TokenTriple,
    map: &NormalizationMap,
    table: &mut TermTable,
) -> Result<Triple, NormalizeError> {
    let [s, p, o] = denormalize_terms(tokens, map)?;
    Ok(Triple::new(table.intern(s), table.intern(p), table.intern(o)))
}

/// Term standing for a token in token-level reasoning: reserved tokens map
/// to their IRIs, anything else to an IRI under [`GENERIC_IRI_PREFIX`].
pub fn token_term(token: &str) -> Term {
    reserved_term(token).unwrap_or_else(|| Term::iri(format!("{GENERIC_IRI_PREFIX}{token}")))
}

/// Interns a token-level graph so it can be given to the reasoner.
pub fn token_graph(triples: &[TokenTriple], table: &mut TermTable) -> Graph {
    triples
        .iter()
        .map(|[s, p, o]| {
            let id = |tok: &str, table: &mut TermTable| -> TermId { table.intern(token_term(tok)) };
            Triple::new(id(s, table), id(p, table), id(o, table))
        })
        .collect()
}

/// Inverse of [`token_term`].
pub fn term_token(term: &Term) -> Option<String> {
    if let Some(tok) = reserved_token(term) {
        return Some(tok.to_owned());
    }
    term.as_iri()
        .and_then(|iri| iri.strip_prefix(GENERIC_IRI_PREFIX))
        .map(str::to_owned)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::vocab::rdfs;
    use crate::rdf::{parse_ntriples, ParseOptions};

    fn graph(text: &str) -> (Graph, TermTable) {
        let mut table = TermTable::new();
        let out = parse_ntriples(text, &mut table, ParseOptions::default()).unwrap();
        (out.graph, table)
    }

    #[test]
    fn vocab_sizes() {
        let v = build_vocab(3000);
        assert_eq!(RESERVED.len(), 30);
        assert_eq!(v.len(), 3033);
        assert_eq!(v.index_of(PAD), Some(PAD_INDEX));
        assert_eq!(v.index_of(YES), Some(YES_INDEX));
        assert_eq!(v.index_of(NO), Some(NO_INDEX));
        let one = build_vocab(1);
        assert_eq!(&one.tokens()[33..], &["a_1".to_string()]);
        assert_eq!(one.class_of(0), TokenClass::Special);
        assert_eq!(one.class_of(3), TokenClass::Reserved);
        assert_eq!(one.class_of(33), TokenClass::Generic);
    }

    #[test]
    fn reserved_terms_are_preserved() {
        let text = format!("<http://ex/A> <{}> <http://ex/B> .", rdfs::SUB_CLASS_OF);
        let (g, table) = graph(&text);
        let vocab = build_vocab(3000);
        let (triples, map) = normalize_graph(&g, &table, &vocab, 7).unwrap();
        let [s, p, o] = &triples[0];
        assert_eq!(p, "rdfs:subClassOf");
        assert!(s.starts_with("a_") && o.starts_with("a_"));
        assert_ne!(s, o);
        assert_eq!(map.len(), 2);
        assert!(map.entries().iter().all(|(_, t)| !crate::rdf::is_reserved(t)));
    }

    #[test]
    fn seeds_control_the_mapping() {
        let (g, table) = graph("<http://ex/a> <http://ex/p> <http://ex/b> .\n<http://ex/b> <http://ex/p> \"lit\" .");
        let vocab = build_vocab(3000);
        let (t1, m1) = normalize_graph(&g, &table, &vocab, 1).unwrap();
        let (t2, m2) = normalize_graph(&g, &table, &vocab, 1).unwrap();
        assert_eq!(t1, t2);
        assert_eq!(m1, m2);
        let (t3, _) = normalize_graph(&g, &table, &vocab, 2).unwrap();
        assert_ne!(t1, t3);
    }

    #[test]
    fn overflow_is_reported() {
        let (g, table) = graph("<http://ex/a> <http://ex/p> <http://ex/b> .");
        let err = normalize_graph(&g, &table, &build_vocab(2), 0).unwrap_err();
        assert_eq!(
            err,
            NormalizeError::VocabularyOverflow {
                needed: 3,
                available: 2
            }
        );
    }

    #[test]
    fn denormalize_round_trip() {
        let text = format!(
            "<http://ex/a> <http://ex/p> \"x y\"@en .\n_:b <{}> <http://ex/a> .",
            rdfs::SEE_ALSO
        );
        let (g, mut table) = graph(&text);
        let vocab = build_vocab(10);
        let (triples, map) = normalize_graph(&g, &table, &vocab, 3).unwrap();
        for (tok, t) in triples.iter().zip(g.iter()) {
            assert_eq!(denormalize(tok, &map, &mut table).unwrap(), t);
        }
        let reserved = denormalize_terms(
            &["rdfs:seeAlso".into(), "rdfs:seeAlso".into(), "rdfs:seeAlso".into()],
            &map,
        )
        .unwrap();
        assert_eq!(reserved[0], Term::iri(rdfs::SEE_ALSO));
        let missing = ["a_999".to_string(), "rdf:type".into(), "rdf:type".into()];
        assert_eq!(
            denormalize_terms(&missing, &map).unwrap_err(),
            NormalizeError::UnknownToken("a_999".into())
        );

        let reloaded = NormalizationMap::from_tsv(&map.to_tsv(), 3, false).unwrap();
        assert_eq!(reloaded.entries(), map.entries());
    }

    #[test]
    fn identity_keeps_terms_verbatim() {
        let (g, table) = graph("<http://ex/a> <http://ex/p> \"two words\" .");
        let (triples, map) = identity_normalize(&g, &table);
        assert_eq!(triples[0][0], "<http://ex/a>");
        assert_eq!(triples[0][2], "\"two\\u0020words\"");
        let vocab = Vocab::identity(map.entries().iter().map(|(t, _)| t.as_str()));
        assert_eq!(vocab.len(), 33 + 3);
        assert_eq!(vocab.class_of(35), TokenClass::Term);
        assert!(vocab.encode(&triples[0]).is_ok());
    }
}
