//! Line-oriented N-Triples reader and canonical writer.

use std::io::{self, BufRead, Write};

use super::{Graph, Term, TermTable, Triple};
use crate::error::{MalformedLine, RdfError};

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Skip malformed lines instead of aborting.
    pub lenient: bool,
}

#[derive(Debug, Default)]
pub struct ParseOutcome {
    pub graph: Graph,
    /// Lines skipped in lenient mode.
    pub skipped: Vec<MalformedLine>,
    /// Well-formed statements read, including duplicates.
    pub statements: usize,
}

pub fn parse_ntriples(
    text: &str,
    table: &mut TermTable,
    opts: ParseOptions,
) -> Result<ParseOutcome, RdfError> {
    parse_ntriples_reader(text.as_bytes(), table, opts)
}

pub fn parse_ntriples_reader<R: BufRead>(
    reader: R,
    table: &mut TermTable,
    opts: ParseOptions,
) -> Result<ParseOutcome, RdfError> {
    let mut out = ParseOutcome::default();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        match parse_line(&line) {
            Ok(None) => {}
            Ok(Some([s, p, o])) => {
                let t = Triple::new(table.intern(s), table.intern(p), table.intern(o));
                out.graph.insert(t);
                out.statements += 1;
            }
            Err(reason) => {
                let bad = MalformedLine {
                    line: line_no,
                    reason,
                };
                if opts.lenient {
                    out.skipped.push(bad);
                } else {
                    return Err(RdfError::Malformed(bad));
                }
            }
        }
    }
    Ok(out)
}

/// Parses one line. `Ok(None)` for blank and comment lines.
pub fn parse_line(line: &str) -> Result<Option<[Term; 3]>, String> {
    let mut cur = Cursor::new(line);
    cur.skip_ws();
    if cur.at_end() || cur.peek() == Some('#') {
        return Ok(None);
    }
    let s = cur.term()?;
    if s.is_literal() {
        return Err("subject must be an IRI or blank node".into());
    }
    cur.skip_ws();
    let p = cur.term()?;
    if !p.is_iri() {
        return Err("predicate must be an IRI".into());
    }
    cur.skip_ws();
    let o = cur.term()?;
    cur.skip_ws();
    if cur.peek() != Some('.') {
        return Err("expected '.' terminating the statement".into());
    }
    cur.bump();
    cur.skip_ws();
    if !cur.at_end() && cur.peek() != Some('#') {
        return Err(format!("unexpected trailing content at column {}", cur.column()));
    }
    Ok(Some([s, p, o]))
}

/// Parses a single term in N-Triples syntax (also accepts token form).
pub fn parse_term(text: &str) -> Result<Term, String> {
    let mut cur = Cursor::new(text);
    let t = cur.term()?;
    if !cur.at_end() {
        return Err(format!("trailing content after term at column {}", cur.column()));
    }
    Ok(t)
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn column(&self) -> usize {
        self.src[..self.pos].chars().count() + 1
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t' | '\r')) {
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Result<Term, String> {
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iri()?)),
            Some('_') => self.blank(),
            Some('"') => self.literal(),
            Some(c) => Err(format!("unexpected character {c:?} at column {}", self.column())),
            None => Err("unexpected end of line".into()),
        }
    }

    fn iri(&mut self) -> Result<String, String> {
        let col = self.column();
        self.bump();
        let mut iri = String::new();
        loop {
            match self.bump() {
                None => return Err(format!("unterminated IRI starting at column {col}")),
                Some('>') => break,
                Some('\\') => iri.push(self.uchar()?),
                Some(c) if c <= ' ' || "<\"{}|^`".contains(c) => {
                    return Err(format!("invalid character {c:?} in IRI at column {col}"));
                }
                Some(c) => iri.push(c),
            }
        }
        if !is_absolute(&iri) {
            return Err(format!("IRI <{iri}> is not absolute"));
        }
        Ok(iri)
    }

    fn blank(&mut self) -> Result<Term, String> {
        let col = self.column();
        if !self.rest().starts_with("_:") {
            return Err(format!("malformed blank node at column {col}"));
        }
        self.pos += 2;
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '\u{B7}') {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        // A label may not end with '.'; give trailing dots back.
        while self.pos > start && self.src.as_bytes()[self.pos - 1] == b'.' {
            self.pos -= 1;
        }
        let label = &self.src[start..self.pos];
        if label.is_empty() || label.starts_with(['-', '.']) {
            return Err(format!("empty or invalid blank node label at column {col}"));
        }
        Ok(Term::BlankNode(label.to_owned()))
    }

    fn literal(&mut self) -> Result<Term, String> {
        let col = self.column();
        self.bump();
        let mut lexical = String::new();
        loop {
            match self.bump() {
                None => return Err(format!("unterminated literal starting at column {col}")),
                Some('"') => break,
                Some('\\') => {
                    let c = match self.peek() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        _ => {
                            lexical.push(self.uchar()?);
                            continue;
                        }
                    };
                    self.bump();
                    lexical.push(c);
                }
                Some('\n' | '\r') => return Err("raw line break inside literal".into()),
                Some(c) => lexical.push(c),
            }
        }
        match self.peek() {
            Some('@') => {
                self.bump();
                let start = self.pos;
                while let Some(c) = self.peek() {
                    if c.is_ascii_alphanumeric() || c == '-' {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let tag = &self.src[start..self.pos];
                let valid = !tag.is_empty()
                    && tag.split('-').enumerate().all(|(i, part)| {
                        !part.is_empty()
                            && (i > 0 || part.bytes().all(|b| b.is_ascii_alphabetic()))
                    });
                if !valid {
                    return Err(format!("invalid language tag {tag:?}"));
                }
                Ok(Term::lang_literal(lexical, tag))
            }
            Some('^') => {
                if !self.rest().starts_with("^^<") {
                    return Err(format!("malformed datatype at column {}", self.column()));
                }
                self.pos += 2;
                let dt = self.iri()?;
                Ok(Term::typed_literal(lexical, dt))
            }
            _ => Ok(Term::literal(lexical)),
        }
    }

    /// Reads the body of a `\u` / `\U` escape; the backslash is already consumed.
    fn uchar(&mut self) -> Result<char, String> {
        let width = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            other => return Err(format!("invalid escape sequence \\{}", other.unwrap_or(' '))),
        };
        let hex = self
            .rest()
            .get(..width)
            .filter(|h| h.bytes().all(|b| b.is_ascii_hexdigit()))
            .ok_or_else(|| "truncated unicode escape".to_string())?;
        self.pos += width;
        let cp = u32::from_str_radix(hex, 16).map_err(|e| e.to_string())?;
        char::from_u32(cp).ok_or_else(|| format!("invalid code point U+{cp:X}"))
    }
}

fn is_absolute(iri: &str) -> bool {
    let Some(colon) = iri.find(':') else {
        return false;
    };
    let scheme = &iri[..colon];
    let mut bytes = scheme.bytes();
    matches!(bytes.next(), Some(b) if b.is_ascii_alphabetic())
        && bytes.all(|b| b.is_ascii_alphanumeric() || matches!(b, b'+' | b'-' | b'.'))
}

/// One canonical line (without newline) for a triple.
pub fn triple_line(t: &Triple, table: &TermTable) -> String {
    let [s, p, o] = t.resolve(table);
    format!("{} {} {} .", s.to_ntriples(), p.to_ntriples(), o.to_ntriples())
}

/// Writes `g` in canonical form: one statement per line, sorted by (s, p, o) id.
pub fn write_ntriples<W: Write>(g: &Graph, table: &TermTable, mut w: W) -> io::Result<()> {
    for t in g.iter() {
        writeln!(w, "{}", triple_line(&t, table))?;
    }
    Ok(())
}

pub fn serialize_ntriples(g: &Graph, table: &TermTable) -> String {
    let mut buf = Vec::new();
    write_ntriples(g, table, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("terms are valid UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ParseOutcome, RdfError> {
        parse_ntriples(text, &mut TermTable::new(), ParseOptions::default())
    }

    #[test]
    fn single_statement() {
        let mut table = TermTable::new();
        let out = parse_ntriples(
            "<http://e/a> <http://e/b> <http://e/c> .",
            &mut table,
            ParseOptions::default(),
        )
        .unwrap();
        assert_eq!(out.graph.len(), 1);
        let t = out.graph.iter().next().unwrap();
        assert!(t.resolve(&table).iter().all(|term| term.is_iri()));
    }

    #[test]
    fn duplicates_collapse() {
        let out = parse("<http://e/a> <http://e/b> \"x\" .\n<http://e/a> <http://e/b> \"x\" .").unwrap();
        assert_eq!(out.graph.len(), 1);
        assert_eq!(out.statements, 2);
    }

    #[test]
    fn comments_and_blank_lines() {
        let out = parse("# comment\n\n<http://e/a> <http://e/b> <http://e/c> .").unwrap();
        assert_eq!(out.graph.len(), 1);
    }

    #[test]
    fn literal_forms_and_blank_nodes() {
        let mut table = TermTable::new();
        let text = concat!(
            "_:b1 <http://e/p> \"chat\"@fr .\n",
            "_:b1 <http://e/p> \"1\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n",
            "_:b1 <http://e/p> \"a\\\"b\\\\c\\u00e9\\n\" .\n",
            "<http://e/s><http://e/p>_:b2. # trailing comment\n",
        );
        let out = parse_ntriples(text, &mut table, ParseOptions::default()).unwrap();
        assert_eq!(out.graph.len(), 4);
        assert!(table.get(&Term::lang_literal("chat", "fr")).is_some());
        assert!(table.get(&Term::literal("a\"b\\c\u{e9}\n")).is_some());
        assert!(table.get(&Term::blank("b2")).is_some());
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let text = "<http://e/a> <http://e/b> <http://e/c> .\n<http://e/a> <http://e/b> <http://e/c>\n";
        match parse(text) {
            Err(RdfError::Malformed(m)) => assert_eq!(m.line, 2),
            other => panic!("expected malformed line, got {other:?}"),
        }
        for bad in [
            "\"lit\" <http://e/b> <http://e/c> .",
            "<http://e/a> \"p\" <http://e/c> .",
            "<http://e/a> _:p <http://e/c> .",
            "<relative> <http://e/b> <http://e/c> .",
            "<http://e/a> <http://e/b> \"x\"@ .",
            "<http://e/a> <http://e/b> <http://e/c> . junk",
            "<http://e/a b> <http://e/b> <http://e/c> .",
        ] {
            assert!(parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn lenient_mode_counts_skips() {
        let text = "garbage\n<http://e/a> <http://e/b> <http://e/c> .\nmore garbage .\n";
        let out = parse_ntriples(text, &mut TermTable::new(), ParseOptions { lenient: true }).unwrap();
        assert_eq!(out.graph.len(), 1);
        assert_eq!(out.skipped.len(), 2);
        assert_eq!(out.skipped[0].line, 1);
        assert_eq!(out.skipped[1].line, 3);
    }

    #[test]
    fn serialize_examples() {
        let table = TermTable::new();
        assert_eq!(serialize_ntriples(&Graph::new(), &table), "");
        let mut table = TermTable::new();
        let out = parse_ntriples(
            "<http://e/a> <http://e/b> \"x\ty\" .",
            &mut table,
            ParseOptions::default(),
        )
        .unwrap();
        let text = serialize_ntriples(&out.graph, &table);
        assert_eq!(text.lines().count(), 1);
        assert!(text.ends_with(" .\n"));
        assert_eq!(text, "<http://e/a> <http://e/b> \"x\\ty\" .\n");
    }

    #[test]
    fn token_form_parses_back() {
        let t = Term::lang_literal("two words", "en");
        assert_eq!(parse_term(&t.to_token()).unwrap(), t);
        assert_eq!(parse_term("<http://e/a>").unwrap(), Term::iri("http://e/a"));
        assert!(parse_term("<http://e/a> x").is_err());
    }
}
