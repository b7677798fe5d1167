//! The RDFS entailment rules (rdf1, rdfs2 - rdfs13, minus the datatype rule
//! rdfs1) as joins over indexed graphs.

use std::collections::HashSet;
use std::fmt;

use rayon::prelude::*;

use crate::rdf::vocab::{rdf, rdfs};
use crate::rdf::{Graph, TermId, TermTable, Triple};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    Rdf1,
    Rdfs2,
    Rdfs3,
    Rdfs4a,
    Rdfs4b,
    Rdfs5,
    Rdfs6,
    Rdfs7,
    Rdfs8,
    Rdfs9,
    Rdfs10,
    Rdfs11,
    Rdfs12,
    Rdfs13,
}

impl RuleId {
    pub const ALL: [RuleId; 14] = [
        RuleId::Rdf1,
        RuleId::Rdfs2,
        RuleId::Rdfs3,
        RuleId::Rdfs4a,
        RuleId::Rdfs4b,
        RuleId::Rdfs5,
        RuleId::Rdfs6,
        RuleId::Rdfs7,
        RuleId::Rdfs8,
        RuleId::Rdfs9,
        RuleId::Rdfs10,
        RuleId::Rdfs11,
        RuleId::Rdfs12,
        RuleId::Rdfs13,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleId::Rdf1 => "rdf1",
            RuleId::Rdfs2 => "rdfs2",
            RuleId::Rdfs3 => "rdfs3",
            RuleId::Rdfs4a => "rdfs4a",
            RuleId::Rdfs4b => "rdfs4b",
            RuleId::Rdfs5 => "rdfs5",
            RuleId::Rdfs6 => "rdfs6",
            RuleId::Rdfs7 => "rdfs7",
            RuleId::Rdfs8 => "rdfs8",
            RuleId::Rdfs9 => "rdfs9",
            RuleId::Rdfs10 => "rdfs10",
            RuleId::Rdfs11 => "rdfs11",
            RuleId::Rdfs12 => "rdfs12",
            RuleId::Rdfs13 => "rdfs13",
        }
    }

    /// Body and head in W3C notation.
    pub fn pattern(self) -> &'static str {
        match self {
            RuleId::Rdf1 => "xxx aaa yyy => aaa rdf:type rdf:Property",
            RuleId::Rdfs2 => "aaa rdfs:domain xxx . yyy aaa zzz => yyy rdf:type xxx",
            RuleId::Rdfs3 => "aaa rdfs:range xxx . yyy aaa zzz => zzz rdf:type xxx",
            RuleId::Rdfs4a => "xxx aaa yyy => xxx rdf:type rdfs:Resource",
            RuleId::Rdfs4b => "xxx aaa yyy => yyy rdf:type rdfs:Resource",
            RuleId::Rdfs5 => {
                "xxx rdfs:subPropertyOf yyy . yyy rdfs:subPropertyOf zzz => xxx rdfs:subPropertyOf zzz"
            }
            RuleId::Rdfs6 => "xxx rdf:type rdf:Property => xxx rdfs:subPropertyOf xxx",
            RuleId::Rdfs7 => "aaa rdfs:subPropertyOf bbb . xxx aaa yyy => xxx bbb yyy",
            RuleId::Rdfs8 => "xxx rdf:type rdfs:Class => xxx rdfs:subClassOf rdfs:Resource",
            RuleId::Rdfs9 => "xxx rdfs:subClassOf yyy . zzz rdf:type xxx => zzz rdf:type yyy",
            RuleId::Rdfs10 => "xxx rdf:type rdfs:Class => xxx rdfs:subClassOf xxx",
            RuleId::Rdfs11 => {
                "xxx rdfs:subClassOf yyy . yyy rdfs:subClassOf zzz => xxx rdfs:subClassOf zzz"
            }
            RuleId::Rdfs12 => {
                "xxx rdf:type rdfs:ContainerMembershipProperty => xxx rdfs:subPropertyOf rdfs:member"
            }
            RuleId::Rdfs13 => "xxx rdf:type rdfs:Datatype => xxx rdfs:subClassOf rdfs:Literal",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Interned ids of the vocabulary the rules mention.
#[derive(Clone, Debug)]
pub struct RdfsTerms {
    pub ty: TermId,
    pub property: TermId,
    pub resource: TermId,
    pub class: TermId,
    pub literal: TermId,
    pub datatype: TermId,
    pub sub_class_of: TermId,
    pub sub_property_of: TermId,
    pub domain: TermId,
    pub range: TermId,
    pub member: TermId,
    pub container_membership_property: TermId,
}

impl RdfsTerms {
    pub fn intern(table: &mut TermTable) -> Self {
        RdfsTerms {
            ty: table.intern_iri(rdf::TYPE),
            property: table.intern_iri(rdf::PROPERTY),
            resource: table.intern_iri(rdfs::RESOURCE),
            class: table.intern_iri(rdfs::CLASS),
            literal: table.intern_iri(rdfs::LITERAL),
            datatype: table.intern_iri(rdfs::DATATYPE),
            sub_class_of: table.intern_iri(rdfs::SUB_CLASS_OF),
            sub_property_of: table.intern_iri(rdfs::SUB_PROPERTY_OF),
            domain: table.intern_iri(rdfs::DOMAIN),
            range: table.intern_iri(rdfs::RANGE),
            member: table.intern_iri(rdfs::MEMBER),
            container_membership_property: table.intern_iri(rdfs::CONTAINER_MEMBERSHIP_PROPERTY),
        }
    }
}

/// Everything a rule needs to know about terms: vocabulary ids and which
/// ids are literals or non-IRIs (neither may be a subject or predicate).
pub struct RuleContext {
    pub terms: RdfsTerms,
    literal: Vec<bool>,
    iri: Vec<bool>,
}

impl RuleContext {
    /// Interns the vocabulary; the table must not gain new terms afterwards.
    pub fn new(table: &mut TermTable) -> Self {
        let terms = RdfsTerms::intern(table);
        let literal = table.iter().map(|(_, t)| t.is_literal()).collect();
        let iri = table.iter().map(|(_, t)| t.is_iri()).collect();
        RuleContext {
            terms,
            literal,
            iri,
        }
    }

    fn can_be_subject(&self, id: TermId) -> bool {
        !self.literal[id.index()]
    }

    fn can_be_predicate(&self, id: TermId) -> bool {
        self.iri[id.index()]
    }
}

/// A derived triple with the premises of its first recorded derivation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Derived {
    pub triple: Triple,
    pub premises: [Option<Triple>; 2],
}

struct Sink<'a> {
    full: &'a Graph,
    seen: HashSet<Triple>,
    out: Vec<Derived>,
}

impl<'a> Sink<'a> {
    fn new(full: &'a Graph) -> Self {
        Sink {
            full,
            seen: HashSet::new(),
            out: Vec::new(),
        }
    }

    fn emit(&mut self, triple: Triple, first: Triple, second: Option<Triple>) {
        if !self.full.contains(&triple) && self.seen.insert(triple) {
            self.out.push(Derived {
                triple,
                premises: [Some(first), second],
            });
        }
    }
}

/// Applies one rule. With `delta = None` every premise may come from `full`;
/// otherwise at least one premise must come from `delta` (semi-naive step).
/// `delta` must be a subset of `full`. Only triples absent from `full` are
/// returned.
pub fn apply_rule(rule: RuleId, full: &Graph, delta: Option<&Graph>, ctx: &RuleContext) -> Vec<Derived> {
    let v = &ctx.terms;
    let mut sink = Sink::new(full);
    let new = delta.unwrap_or(full);
    match rule {
        RuleId::Rdf1 => {
            for t in new {
                sink.emit(Triple::new(t.p, v.ty, v.property), t, None);
            }
        }
        RuleId::Rdfs4a => {
            for t in new {
                sink.emit(Triple::new(t.s, v.ty, v.resource), t, None);
            }
        }
        RuleId::Rdfs4b => {
            for t in new {
                if ctx.can_be_subject(t.o) {
                    sink.emit(Triple::new(t.o, v.ty, v.resource), t, None);
                }
            }
        }
        RuleId::Rdfs6 => {
            for x in new.subjects_with(v.ty, v.property) {
                let premise = Triple::new(x, v.ty, v.property);
                sink.emit(Triple::new(x, v.sub_property_of, x), premise, None);
            }
        }
        RuleId::Rdfs8 | RuleId::Rdfs10 => {
            for x in new.subjects_with(v.ty, v.class) {
                let premise = Triple::new(x, v.ty, v.class);
                let head = if rule == RuleId::Rdfs8 {
                    Triple::new(x, v.sub_class_of, v.resource)
                } else {
                    Triple::new(x, v.sub_class_of, x)
                };
                sink.emit(head, premise, None);
            }
        }
        RuleId::Rdfs12 => {
            for x in new.subjects_with(v.ty, v.container_membership_property) {
                let premise = Triple::new(x, v.ty, v.container_membership_property);
                sink.emit(Triple::new(x, v.sub_property_of, v.member), premise, None);
            }
        }
        RuleId::Rdfs13 => {
            for x in new.subjects_with(v.ty, v.datatype) {
                let premise = Triple::new(x, v.ty, v.datatype);
                sink.emit(Triple::new(x, v.sub_class_of, v.literal), premise, None);
            }
        }
        RuleId::Rdfs2 | RuleId::Rdfs3 => {
            let schema = if rule == RuleId::Rdfs2 { v.domain } else { v.range };
            let head = |decl: Triple, stmt: Triple, sink: &mut Sink| {
                let target = if rule == RuleId::Rdfs2 { stmt.s } else { stmt.o };
                if ctx.can_be_subject(target) {
                    sink.emit(Triple::new(target, v.ty, decl.o), decl, Some(stmt));
                }
            };
            // New declaration, any statement.
            for (p, c) in new.pairs_with_predicate(schema) {
                let decl = Triple::new(p, schema, c);
                for (s, o) in full.pairs_with_predicate(p) {
                    head(decl, Triple::new(s, p, o), &mut sink);
                }
            }
            // New statement, old declaration (new ones were covered above).
            if let Some(delta) = delta {
                for stmt in delta {
                    for c in full.objects_of(stmt.p, schema) {
                        let decl = Triple::new(stmt.p, schema, c);
                        if !delta.contains(&decl) {
                            head(decl, stmt, &mut sink);
                        }
                    }
                }
            }
        }
        RuleId::Rdfs5 | RuleId::Rdfs11 => {
            let rel = if rule == RuleId::Rdfs5 {
                v.sub_property_of
            } else {
                v.sub_class_of
            };
            // New left link.
            for (x, y) in new.pairs_with_predicate(rel) {
                for z in full.objects_of(y, rel) {
                    sink.emit(
                        Triple::new(x, rel, z),
                        Triple::new(x, rel, y),
                        Some(Triple::new(y, rel, z)),
                    );
                }
            }
            // New right link, old left link.
            if let Some(delta) = delta {
                for (y, z) in delta.pairs_with_predicate(rel) {
                    for x in full.subjects_with(rel, y) {
                        let left = Triple::new(x, rel, y);
                        if !delta.contains(&left) {
                            sink.emit(Triple::new(x, rel, z), left, Some(Triple::new(y, rel, z)));
                        }
                    }
                }
            }
        }
        RuleId::Rdfs7 => {
            let sp = v.sub_property_of;
            for (a, b) in new.pairs_with_predicate(sp) {
                if !ctx.can_be_predicate(b) {
                    continue;
                }
                let decl = Triple::new(a, sp, b);
                for (x, y) in full.pairs_with_predicate(a) {
                    sink.emit(Triple::new(x, b, y), decl, Some(Triple::new(x, a, y)));
                }
            }
            if let Some(delta) = delta {
                for stmt in delta {
                    for b in full.objects_of(stmt.p, sp) {
                        let decl = Triple::new(stmt.p, sp, b);
                        if ctx.can_be_predicate(b) && !delta.contains(&decl) {
                            sink.emit(Triple::new(stmt.s, b, stmt.o), decl, Some(stmt));
                        }
                    }
                }
            }
        }
        RuleId::Rdfs9 => {
            let (sc, ty) = (v.sub_class_of, v.ty);
            for (c, d) in new.pairs_with_predicate(sc) {
                let decl = Triple::new(c, sc, d);
                for x in full.subjects_with(ty, c) {
                    sink.emit(Triple::new(x, ty, d), decl, Some(Triple::new(x, ty, c)));
                }
            }
            if let Some(delta) = delta {
                for (x, c) in delta.pairs_with_predicate(ty) {
                    let stmt = Triple::new(x, ty, c);
                    for d in full.objects_of(c, sc) {
                        let decl = Triple::new(c, sc, d);
                        if !delta.contains(&decl) {
                            sink.emit(Triple::new(x, ty, d), decl, Some(stmt));
                        }
                    }
                }
            }
        }
    }
    sink.out
}

/// One semi-naive round over all rules, evaluated concurrently per rule.
/// Results are returned in rule order, so the merge is deterministic.
pub fn apply_all(full: &Graph, delta: Option<&Graph>, ctx: &RuleContext) -> Vec<(RuleId, Vec<Derived>)> {
    RuleId::ALL
        .par_iter()
        .map(|&rule| (rule, apply_rule(rule, full, delta, ctx)))
        .collect()
}
