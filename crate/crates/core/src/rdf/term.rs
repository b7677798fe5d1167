use std::collections::HashMap;
use std::fmt;

/// An RDF term. IRIs are always absolute; literals are compared lexically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(String),
    BlankNode(String),
    Literal {
        lexical: String,
        datatype: Option<String>,
        lang: Option<String>,
    },
}

impl Term {
    pub fn iri(iri: impl Into<String>) -> Self {
        Term::Iri(iri.into())
    }

    pub fn blank(label: impl Into<String>) -> Self {
        Term::BlankNode(label.into())
    }

    pub fn literal(lexical: impl Into<String>) -> Self {
        Term::Literal {
            lexical: lexical.into(),
            datatype: None,
            lang: None,
        }
    }

    pub fn typed_literal(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        Term::Literal {
            lexical: lexical.into(),
            datatype: Some(datatype.into()),
            lang: None,
        }
    }

    pub fn lang_literal(lexical: impl Into<String>, lang: impl Into<String>) -> Self {
        Term::Literal {
            lexical: lexical.into(),
            datatype: None,
            lang: Some(lang.into()),
        }
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal { .. })
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Term::BlankNode(_))
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(s) => Some(s),
            _ => None,
        }
    }

    /// Canonical N-Triples form of the term.
    pub fn to_ntriples(&self) -> String {
        let mut out = String::new();
        write_term(&mut out, self, false);
        out
    }

    /// N-Triples form with every whitespace character inside literals escaped,
    /// so the result can be used as a whitespace-delimited token.
    pub fn to_token(&self) -> String {
        let mut out = String::new();
        write_term(&mut out, self, true);
        out
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ntriples())
    }
}

fn write_term(out: &mut String, term: &Term, escape_ws: bool) {
    match term {
        Term::Iri(iri) => {
            out.push('<');
            out.push_str(iri);
            out.push('>');
        }
        Term::BlankNode(label) => {
            out.push_str("_:");
            out.push_str(label);
        }
        Term::Literal {
            lexical,
            datatype,
            lang,
        } => {
            out.push('"');
            for c in lexical.chars() {
                match c {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    '\n' => out.push_str("\\n"),
                    '\r' => out.push_str("\\r"),
                    '\t' => out.push_str("\\t"),
                    c if escape_ws && c.is_whitespace() => {
                        let cp = c as u32;
                        if cp <= 0xFFFF {
                            out.push_str(&format!("\\u{cp:04X}"));
                        } else {
                            out.push_str(&format!("\\U{cp:08X}"));
                        }
                    }
                    c => out.push(c),
                }
            }
            out.push('"');
            if let Some(lang) = lang {
                out.push('@');
                out.push_str(lang);
            } else if let Some(dt) = datatype {
                out.push_str("^^<");
                out.push_str(dt);
                out.push('>');
            }
        }
    }
}

/// Dense identifier assigned by interning order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(pub u32);

impl TermId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Bijective term interner. Ids are never reused or reassigned.
#[derive(Clone, Debug, Default)]
pub struct TermTable {
    terms: Vec<Term>,
    ids: HashMap<Term, TermId>,
}

impl TermTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, term: Term) -> TermId {
        if let Some(&id) = self.ids.get(&term) {
            return id;
        }
        let id = TermId(u32::try_from(self.terms.len()).expect("term table overflow"));
        self.terms.push(term.clone());
        self.ids.insert(term, id);
        id
    }

    pub fn intern_iri(&mut self, iri: &str) -> TermId {
        self.intern(Term::Iri(iri.to_owned()))
    }

    pub fn get(&self, term: &Term) -> Option<TermId> {
        self.ids.get(term).copied()
    }

    pub fn get_iri(&self, iri: &str) -> Option<TermId> {
        self.get(&Term::Iri(iri.to_owned()))
    }

    /// Panics if `id` was not produced by this table.
    pub fn resolve(&self, id: TermId) -> &Term {
        &self.terms[id.index()]
    }

    pub fn try_resolve(&self, id: TermId) -> Option<&Term> {
        self.terms.get(id.index())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (TermId, &Term)> {
        self.terms
            .iter()
            .enumerate()
            .map(|(i, t)| (TermId(i as u32), t))
    }
}
