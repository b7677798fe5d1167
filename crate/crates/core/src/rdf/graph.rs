use std::collections::BTreeSet;
use std::ops::Bound;

use super::{Term, TermId, TermTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub s: TermId,
    pub p: TermId,
    pub o: TermId,
}

impl Triple {
    pub const fn new(s: TermId, p: TermId, o: TermId) -> Self {
        Triple { s, p, o }
    }

    /// Predicate is an IRI and subject is not a literal.
    pub fn is_well_formed(&self, table: &TermTable) -> bool {
        table.resolve(self.p).is_iri() && !table.resolve(self.s).is_literal()
    }

    pub fn terms(&self) -> [TermId; 3] {
        [self.s, self.p, self.o]
    }

    pub fn resolve<'t>(&self, table: &'t TermTable) -> [&'t Term; 3] {
        [
            table.resolve(self.s),
            table.resolve(self.p),
            table.resolve(self.o),
        ]
    }
}

type Key = (TermId, TermId, TermId);

const MIN: TermId = TermId(0);
const MAX: TermId = TermId(u32::MAX);

/// A set of triples with three sorted permutation indexes (spo, pos, osp),
/// which together serve every bound/unbound lookup pattern.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graph {
    spo: BTreeSet<Triple>,
    pos: BTreeSet<Key>,
    osp: BTreeSet<Key>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false if the triple was already present.
    pub fn insert(&mut self, t: Triple) -> bool {
        if !self.spo.insert(t) {
            return false;
        }
        self.pos.insert((t.p, t.o, t.s));
        self.osp.insert((t.o, t.s, t.p));
        true
    }

    pub fn remove(&mut self, t: &Triple) -> bool {
        if !self.spo.remove(t) {
            return false;
        }
        self.pos.remove(&(t.p, t.o, t.s));
        self.osp.remove(&(t.o, t.s, t.p));
        true
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.spo.contains(t)
    }

    pub fn len(&self) -> usize {
        self.spo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spo.is_empty()
    }

    /// All triples in ascending (s, p, o) order.
    pub fn iter(&self) -> impl Iterator<Item = Triple> + '_ {
        self.spo.iter().copied()
    }

    pub fn is_subset(&self, other: &Graph) -> bool {
        self.spo.is_subset(&other.spo)
    }

    /// Triples agreeing with every bound position, in ascending (s, p, o) order.
    pub fn matching(
        &self,
        s: Option<TermId>,
        p: Option<TermId>,
        o: Option<TermId>,
    ) -> Box<dyn Iterator<Item = Triple> + '_> {
        match (s, p, o) {
            (None, None, None) => Box::new(self.iter()),
            (Some(s), None, None) => Box::new(
                self.spo
                    .range(Triple::new(s, MIN, MIN)..=Triple::new(s, MAX, MAX))
                    .copied(),
            ),
            (Some(s), Some(p), None) => Box::new(
                self.spo
                    .range(Triple::new(s, p, MIN)..=Triple::new(s, p, MAX))
                    .copied(),
            ),
            (Some(s), Some(p), Some(o)) => {
                let t = Triple::new(s, p, o);
                Box::new(self.contains(&t).then_some(t).into_iter())
            }
            // The remaining patterns come from the secondary indexes, whose
            // natural order is not spo; collect and sort.
            (None, Some(p), o) => {
                let mut v: Vec<Triple> = self
                    .pos_range(p, o)
                    .map(|&(p, o, s)| Triple::new(s, p, o))
                    .collect();
                if o.is_none() {
                    v.sort_unstable();
                }
                Box::new(v.into_iter())
            }
            (s, None, Some(o)) => {
                let mut v: Vec<Triple> = self
                    .osp_range(o, s)
                    .map(|&(o, s, p)| Triple::new(s, p, o))
                    .collect();
                v.sort_unstable();
                Box::new(v.into_iter())
            }
        }
    }

    /// Subjects `s` with `(s, p, o)` in the graph, in index order.
    pub fn subjects_with(&self, p: TermId, o: TermId) -> impl Iterator<Item = TermId> + '_ {
        self.pos_range(p, Some(o)).map(|&(_, _, s)| s)
    }

    /// Objects `o` with `(s, p, o)` in the graph.
    pub fn objects_of(&self, s: TermId, p: TermId) -> impl Iterator<Item = TermId> + '_ {
        self.spo
            .range(Triple::new(s, p, MIN)..=Triple::new(s, p, MAX))
            .map(|t| t.o)
    }

    /// (subject, object) pairs for predicate `p`, in (o, s) order.
    pub fn pairs_with_predicate(&self, p: TermId) -> impl Iterator<Item = (TermId, TermId)> + '_ {
        self.pos_range(p, None).map(|&(_, o, s)| (s, o))
    }

    fn pos_range(&self, p: TermId, o: Option<TermId>) -> std::collections::btree_set::Range<'_, Key> {
        match o {
            Some(o) => self.pos.range((p, o, MIN)..=(p, o, MAX)),
            None => self.pos.range((p, MIN, MIN)..=(p, MAX, MAX)),
        }
    }

    fn osp_range(&self, o: TermId, s: Option<TermId>) -> std::collections::btree_set::Range<'_, Key> {
        match s {
            Some(s) => self.osp.range((o, s, MIN)..=(o, s, MAX)),
            None => self
                .osp
                .range((Bound::Included((o, MIN, MIN)), Bound::Included((o, MAX, MAX)))),
        }
    }

    /// Distinct terms occurring anywhere, ascending by id.
    pub fn terms(&self) -> BTreeSet<TermId> {
        let mut out = BTreeSet::new();
        for t in self.iter() {
            out.extend(t.terms());
        }
        out
    }
}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        let mut g = Graph::new();
        g.extend(iter);
        g
    }
}

impl Extend<Triple> for Graph {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        for t in iter {
            self.insert(t);
        }
    }
}

impl<'a> IntoIterator for &'a Graph {
    type Item = Triple;
    type IntoIter = std::iter::Copied<std::collections::btree_set::Iter<'a, Triple>>;

    fn into_iter(self) -> Self::IntoIter {
        self.spo.iter().copied()
    }
}
