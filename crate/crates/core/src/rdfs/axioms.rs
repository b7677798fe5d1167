use crate::rdf::vocab::{container_membership_iri, rdf, rdfs};
use crate::rdf::{Graph, TermTable, Triple};

/// Controls how many container-membership properties (`rdf:_1 ... rdf:_N`)
/// contribute axiomatic triples. The full axiomatic set is infinite.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AxiomaticConfig {
    /// `None` means: the largest `rdf:_n` index occurring in the input graph, or 0.
    pub containers: Option<u32>,
}

impl AxiomaticConfig {
    pub fn fixed(n: u32) -> Self {
        AxiomaticConfig {
            containers: Some(n),
        }
    }
}

const RDF_AXIOMS: &[(&str, &str, &str)] = &[
    (rdf::TYPE, rdf::TYPE, rdf::PROPERTY),
    (rdf::SUBJECT, rdf::TYPE, rdf::PROPERTY),
    (rdf::PREDICATE, rdf::TYPE, rdf::PROPERTY),
    (rdf::OBJECT, rdf::TYPE, rdf::PROPERTY),
    (rdf::FIRST, rdf::TYPE, rdf::PROPERTY),
    (rdf::REST, rdf::TYPE, rdf::PROPERTY),
    (rdf::VALUE, rdf::TYPE, rdf::PROPERTY),
    (rdf::NIL, rdf::TYPE, rdf::LIST),
];

const RDFS_AXIOMS: &[(&str, &str, &str)] = &[
    (rdf::TYPE, rdfs::DOMAIN, rdfs::RESOURCE),
    (rdfs::DOMAIN, rdfs::DOMAIN, rdf::PROPERTY),
    (rdfs::RANGE, rdfs::DOMAIN, rdf::PROPERTY),
    (rdfs::SUB_PROPERTY_OF, rdfs::DOMAIN, rdf::PROPERTY),
    (rdfs::SUB_CLASS_OF, rdfs::DOMAIN, rdfs::CLASS),
    (rdf::SUBJECT, rdfs::DOMAIN, rdf::STATEMENT),
    (rdf::PREDICATE, rdfs::DOMAIN, rdf::STATEMENT),
    (rdf::OBJECT, rdfs::DOMAIN, rdf::STATEMENT),
    (rdfs::MEMBER, rdfs::DOMAIN, rdfs::RESOURCE),
    (rdf::FIRST, rdfs::DOMAIN, rdf::LIST),
    (rdf::REST, rdfs::DOMAIN, rdf::LIST),
    (rdfs::SEE_ALSO, rdfs::DOMAIN, rdfs::RESOURCE),
    (rdfs::IS_DEFINED_BY, rdfs::DOMAIN, rdfs::RESOURCE),
    (rdfs::COMMENT, rdfs::DOMAIN, rdfs::RESOURCE),
    (rdfs::LABEL, rdfs::DOMAIN, rdfs::RESOURCE),
    (rdf::VALUE, rdfs::DOMAIN, rdfs::RESOURCE),
    (rdf::TYPE, rdfs::RANGE, rdfs::CLASS),
    (rdfs::DOMAIN, rdfs::RANGE, rdfs::CLASS),
    (rdfs::RANGE, rdfs::RANGE, rdfs::CLASS),
    (rdfs::SUB_PROPERTY_OF, rdfs::RANGE, rdf::PROPERTY),
    (rdfs::SUB_CLASS_OF, rdfs::RANGE, rdfs::CLASS),
    (rdf::SUBJECT, rdfs::RANGE, rdfs::RESOURCE),
    (rdf::PREDICATE, rdfs::RANGE, rdfs::RESOURCE),
    (rdf::OBJECT, rdfs::RANGE, rdfs::RESOURCE),
    (rdfs::MEMBER, rdfs::RANGE, rdfs::RESOURCE),
    (rdf::FIRST, rdfs::RANGE, rdfs::RESOURCE),
    (rdf::REST, rdfs::RANGE, rdf::LIST),
    (rdfs::SEE_ALSO, rdfs::RANGE, rdfs::RESOURCE),
    (rdfs::IS_DEFINED_BY, rdfs::RANGE, rdfs::RESOURCE),
    (rdfs::COMMENT, rdfs::RANGE, rdfs::LITERAL),
    (rdfs::LABEL, rdfs::RANGE, rdfs::LITERAL),
    (rdf::VALUE, rdfs::RANGE, rdfs::RESOURCE),
    (rdf::ALT, rdfs::SUB_CLASS_OF, rdfs::CONTAINER),
    (rdf::BAG, rdfs::SUB_CLASS_OF, rdfs::CONTAINER),
    (rdf::SEQ, rdfs::SUB_CLASS_OF, rdfs::CONTAINER),
    (rdfs::CONTAINER_MEMBERSHIP_PROPERTY, rdfs::SUB_CLASS_OF, rdf::PROPERTY),
    (rdfs::IS_DEFINED_BY, rdfs::SUB_PROPERTY_OF, rdfs::SEE_ALSO),
    (rdfs::DATATYPE, rdfs::SUB_CLASS_OF, rdfs::CLASS),
];

/// Number of axiomatic triples that do not depend on container membership.
pub const FIXED_AXIOM_COUNT: usize = RDF_AXIOMS.len() + RDFS_AXIOMS.len();

/// RDF and RDFS axiomatic triples, with container-membership properties
/// truncated to `rdf:_1 ... rdf:_n`.
pub fn axiomatic_triples(n: u32, table: &mut TermTable) -> Graph {
    let mut g = Graph::new();
    for &(s, p, o) in RDF_AXIOMS.iter().chain(RDFS_AXIOMS) {
        g.insert(Triple::new(
            table.intern_iri(s),
            table.intern_iri(p),
            table.intern_iri(o),
        ));
    }
    let ty = table.intern_iri(rdf::TYPE);
    let property = table.intern_iri(rdf::PROPERTY);
    let cmp = table.intern_iri(rdfs::CONTAINER_MEMBERSHIP_PROPERTY);
    let domain = table.intern_iri(rdfs::DOMAIN);
    let range = table.intern_iri(rdfs::RANGE);
    let resource = table.intern_iri(rdfs::RESOURCE);
    for i in 1..=n {
        let member = table.intern_iri(&container_membership_iri(i));
        g.insert(Triple::new(member, ty, property));
        g.insert(Triple::new(member, ty, cmp));
        g.insert(Triple::new(member, domain, resource));
        g.insert(Triple::new(member, range, resource));
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    fn has(g: &Graph, table: &TermTable, s: &str, p: &str, o: &str) -> bool {
        match (table.get_iri(s), table.get_iri(p), table.get_iri(o)) {
            (Some(s), Some(p), Some(o)) => g.contains(&Triple::new(s, p, o)),
            _ => false,
        }
    }

    #[test]
    fn fixed_axioms() {
        let mut table = TermTable::new();
        let g = axiomatic_triples(0, &mut table);
        assert_eq!(g.len(), FIXED_AXIOM_COUNT);
        assert!(has(&g, &table, rdf::TYPE, rdf::TYPE, rdf::PROPERTY));
        assert!(has(&g, &table, rdfs::SUB_CLASS_OF, rdfs::DOMAIN, rdfs::CLASS));
        assert!(table.get_iri(&container_membership_iri(1)).is_none());
    }

    #[test]
    fn container_axioms_truncate() {
        let mut table = TermTable::new();
        let g = axiomatic_triples(2, &mut table);
        let one = container_membership_iri(1);
        let two = container_membership_iri(2);
        assert!(has(&g, &table, &one, rdf::TYPE, rdfs::CONTAINER_MEMBERSHIP_PROPERTY));
        assert!(has(&g, &table, &two, rdf::TYPE, rdfs::CONTAINER_MEMBERSHIP_PROPERTY));
        assert!(has(&g, &table, &two, rdfs::RANGE, rdfs::RESOURCE));
        assert!(table.get_iri(&container_membership_iri(3)).is_none());
        assert_eq!(g.len(), FIXED_AXIOM_COUNT + 8);
    }
}
