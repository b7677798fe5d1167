//! RDF and RDFS namespace vocabulary.

use super::Term;

pub const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS_NS: &str = "http://www.w3.org/2000/01/rdf-schema#";

pub mod rdf {
    pub const TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const PROPERTY: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#Property";
    pub const STATEMENT: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#Statement";
    pub const SUBJECT: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#subject";
    pub const PREDICATE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#predicate";
    pub const OBJECT: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#object";
    pub const FIRST: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#first";
    pub const REST: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#rest";
    pub const VALUE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#value";
    pub const NIL: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#nil";
    pub const LIST: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#List";
    pub const ALT: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#Alt";
    pub const BAG: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#Bag";
    pub const SEQ: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#Seq";
    pub const LANG_STRING: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";
}

pub mod rdfs {
    pub const RESOURCE: &str = "http://www.w3.org/2000/01/rdf-schema#Resource";
    pub const CLASS: &str = "http://www.w3.org/2000/01/rdf-schema#Class";
    pub const LITERAL: &str = "http://www.w3.org/2000/01/rdf-schema#Literal";
    pub const DATATYPE: &str = "http://www.w3.org/2000/01/rdf-schema#Datatype";
    pub const SUB_CLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
    pub const SUB_PROPERTY_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subPropertyOf";
    pub const DOMAIN: &str = "http://www.w3.org/2000/01/rdf-schema#domain";
    pub const RANGE: &str = "http://www.w3.org/2000/01/rdf-schema#range";
    pub const MEMBER: &str = "http://www.w3.org/2000/01/rdf-schema#member";
    pub const SEE_ALSO: &str = "http://www.w3.org/2000/01/rdf-schema#seeAlso";
    pub const IS_DEFINED_BY: &str = "http://www.w3.org/2000/01/rdf-schema#isDefinedBy";
    pub const COMMENT: &str = "http://www.w3.org/2000/01/rdf-schema#comment";
    pub const LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
    pub const CONTAINER: &str = "http://www.w3.org/2000/01/rdf-schema#Container";
    pub const CONTAINER_MEMBERSHIP_PROPERTY: &str =
        "http://www.w3.org/2000/01/rdf-schema#ContainerMembershipProperty";
}

/// The fixed, ordered RDF/RDFS vocabulary known to the reasoner and the
/// normalizer: every IRI used by the rules or the axiomatic triples, plus
/// `rdf:langString`. Each entry is (prefixed token, full IRI).
pub const RESERVED: [(&str, &str); 30] = [
    ("rdf:type", rdf::TYPE),
    ("rdf:Property", rdf::PROPERTY),
    ("rdf:Statement", rdf::STATEMENT),
    ("rdf:subject", rdf::SUBJECT),
    ("rdf:predicate", rdf::PREDICATE),
    ("rdf:object", rdf::OBJECT),
    ("rdf:first", rdf::FIRST),
    ("rdf:rest", rdf::REST),
    ("rdf:value", rdf::VALUE),
    ("rdf:nil", rdf::NIL),
    ("rdf:List", rdf::LIST),
    ("rdf:Alt", rdf::ALT),
    ("rdf:Bag", rdf::BAG),
    ("rdf:Seq", rdf::SEQ),
    ("rdf:langString", rdf::LANG_STRING),
    ("rdfs:Resource", rdfs::RESOURCE),
    ("rdfs:Class", rdfs::CLASS),
    ("rdfs:Literal", rdfs::LITERAL),
    ("rdfs:Datatype", rdfs::DATATYPE),
    ("rdfs:subClassOf", rdfs::SUB_CLASS_OF),
    ("rdfs:subPropertyOf", rdfs::SUB_PROPERTY_OF),
    ("rdfs:domain", rdfs::DOMAIN),
    ("rdfs:range", rdfs::RANGE),
    ("rdfs:member", rdfs::MEMBER),
    ("rdfs:seeAlso", rdfs::SEE_ALSO),
    ("rdfs:isDefinedBy", rdfs::IS_DEFINED_BY),
    ("rdfs:comment", rdfs::COMMENT),
    ("rdfs:label", rdfs::LABEL),
    ("rdfs:Container", rdfs::CONTAINER),
    ("rdfs:ContainerMembershipProperty", rdfs::CONTAINER_MEMBERSHIP_PROPERTY),
];

/// True iff `term` is an IRI in the RDF or RDFS namespace.
pub fn is_reserved(term: &Term) -> bool {
    match term {
        Term::Iri(iri) => iri.starts_with(RDF_NS) || iri.starts_with(RDFS_NS),
        _ => false,
    }
}

/// Index of `iri` in [`RESERVED`], if listed.
pub fn reserved_index(iri: &str) -> Option<usize> {
    RESERVED.iter().position(|(_, full)| *full == iri)
}

pub fn container_membership_iri(n: u32) -> String {
    format!("{RDF_NS}_{n}")
}

/// Parses `rdf:_n` (n >= 1) and returns n.
pub fn container_membership_index(iri: &str) -> Option<u32> {
    let rest = iri.strip_prefix(RDF_NS)?.strip_prefix('_')?;
    if rest.is_empty() || rest.starts_with('0') || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn reserved_examples() {
        assert!(is_reserved(&Term::iri(rdfs::SUB_CLASS_OF)));
        assert!(!is_reserved(&Term::iri("http://example.org/Person")));
        assert!(!is_reserved(&Term::literal("rdf:type")));
        assert!(!is_reserved(&Term::literal(rdf::TYPE)));
    }

    #[test]
    fn reserved_list_is_distinct_and_in_namespace() {
        let tokens: HashSet<_> = RESERVED.iter().map(|(t, _)| *t).collect();
        let iris: HashSet<_> = RESERVED.iter().map(|(_, i)| *i).collect();
        assert_eq!(tokens.len(), 30);
        assert_eq!(iris.len(), 30);
        for (tok, iri) in RESERVED {
            assert!(is_reserved(&Term::iri(iri)));
            let local = tok.split(':').nth(1).unwrap();
            assert!(iri.ends_with(local));
        }
    }

    #[test]
    fn container_indices() {
        assert_eq!(container_membership_index(&container_membership_iri(7)), Some(7));
        assert_eq!(container_membership_index(rdf::TYPE), None);
        assert_eq!(container_membership_index(&format!("{RDF_NS}_0")), None);
        assert_eq!(container_membership_index(&format!("{RDF_NS}_01")), None);
    }
}
