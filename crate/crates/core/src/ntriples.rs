//! N-Triples reading and writing.
//!
//! Blank node labels are renamed `b0`, `b1`, ... in order of first
//! appearance. Output lines are sorted so equal graphs serialize to
//! identical bytes.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::graph::Graph;
use crate::term::{BlankNode, Iri, Literal, Term, Triple};
use crate::vocab::xsd;

/// A syntax error with its 1-based position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    InvalidUtf8,
    Syntax(String),
    UnknownPrefix(String),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: ", self.line, self.column)?;
        match &self.kind {
            ParseErrorKind::InvalidUtf8 => f.write_str("input is not valid UTF-8"),
            ParseErrorKind::Syntax(msg) => f.write_str(msg),
            ParseErrorKind::UnknownPrefix(p) => write!(f, "unknown prefix '{p}:'"),
        }
    }
}

/// Hands out fresh blank node labels. Sharing one allocator between several
/// documents keeps their blank nodes apart.
#[derive(Debug, Default)]
pub struct BlankNodeAllocator {
    next: u64,
}

impl BlankNodeAllocator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&mut self) -> BlankNode {
        let label = format!("b{}", self.next);
        self.next += 1;
        BlankNode::new(label.as_str())
    }
}

/// Per-document mapping from source labels to allocated ones.
pub(crate) struct BlankScope<'a> {
    alloc: &'a mut BlankNodeAllocator,
    seen: BTreeMap<String, BlankNode>,
}

impl<'a> BlankScope<'a> {
    pub(crate) fn new(alloc: &'a mut BlankNodeAllocator) -> Self {
        Self {
            alloc,
            seen: BTreeMap::new(),
        }
    }

    pub(crate) fn get(&mut self, label: &str) -> BlankNode {
        if let Some(b) = self.seen.get(label) {
            return b.clone();
        }
        let b = self.alloc.fresh();
        self.seen.insert(label.to_string(), b.clone());
        b
    }

    pub(crate) fn anonymous(&mut self) -> BlankNode {
        self.alloc.fresh()
    }
}

pub fn parse_ntriples(input: &[u8]) -> Result<Graph, ParseError> {
    parse_ntriples_with(input, &mut BlankNodeAllocator::new())
}

pub fn parse_ntriples_with(
    input: &[u8],
    alloc: &mut BlankNodeAllocator,
) -> Result<Graph, ParseError> {
    let text = core::str::from_utf8(input).map_err(|e| {
        let (line, column) = position(input, e.valid_up_to());
        ParseError {
            line,
            column,
            kind: ParseErrorKind::InvalidUtf8,
        }
    })?;
    let mut scope = BlankScope::new(alloc);
    let mut graph = Graph::new();
    for (idx, line) in text.lines().enumerate() {
        let mut cur = LineCursor {
            line: idx + 1,
            text: line,
            pos: 0,
        };
        cur.skip_ws();
        if cur.at_end() || cur.peek() == Some('#') {
            continue;
        }
        let subject = cur.term(&mut scope)?;
        if subject.is_literal() {
            return Err(cur.error("literal in subject position"));
        }
        cur.skip_ws();
        let predicate = match cur.term(&mut scope)? {
            Term::Iri(iri) => iri,
            _ => return Err(cur.error("predicate must be an IRI")),
        };
        cur.skip_ws();
        let object = cur.term(&mut scope)?;
        cur.skip_ws();
        if cur.peek() != Some('.') {
            return Err(cur.error("expected '.' at end of triple"));
        }
        cur.pos += 1;
        cur.skip_ws();
        if !cur.at_end() && cur.peek() != Some('#') {
            return Err(cur.error("unexpected content after '.'"));
        }
        graph.insert(Triple::new_unchecked(subject, predicate, object));
    }
    Ok(graph)
}

fn position(input: &[u8], offset: usize) -> (usize, usize) {
    let before = &input[..offset];
    let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
    let column = offset - before.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1) + 1;
    (line, column)
}

struct LineCursor<'a> {
    line: usize,
    text: &'a str,
    pos: usize,
}

impl LineCursor<'_> {
    fn error(&self, msg: &str) -> ParseError {
        ParseError {
            line: self.line,
            column: self.text[..self.pos.min(self.text.len())].chars().count() + 1,
            kind: ParseErrorKind::Syntax(msg.to_string()),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.text.len()
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t' | '\r')) {
            self.pos += 1;
        }
    }

    fn term(&mut self, scope: &mut BlankScope<'_>) -> Result<Term, ParseError> {
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iri()?)),
            Some('_') => {
                if !self.text[self.pos..].starts_with("_:") {
                    return Err(self.error("malformed blank node"));
                }
                self.pos += 2;
                let start = self.pos;
                while let Some(c) = self.peek() {
                    if c.is_alphanumeric() || matches!(c, '_' | '-' | '.') {
                        self.pos += c.len_utf8();
                    } else {
                        break;
                    }
                }
                // A trailing '.' terminates the statement, not the label.
                while self.pos > start && self.text[..self.pos].ends_with('.') {
                    self.pos -= 1;
                }
                if self.pos == start {
                    return Err(self.error("empty blank node label"));
                }
                Ok(Term::Blank(scope.get(&self.text[start..self.pos])))
            }
            Some('"') => self.literal(),
            Some(_) => Err(self.error("malformed term")),
            None => Err(self.error("unexpected end of line")),
        }
    }

    fn iri(&mut self) -> Result<Iri, ParseError> {
        self.pos += 1;
        let mut value = String::new();
        loop {
            match self.bump() {
                Some('>') => break,
                Some('\\') => value.push(self.unicode_escape()?),
                Some(c) if c == ' ' || c == '<' || c == '"' => {
                    return Err(self.error("invalid character in IRI"))
                }
                Some(c) => value.push(c),
                None => return Err(self.error("unterminated IRI")),
            }
        }
        Iri::new(&value).map_err(|_| self.error("IRI is not absolute"))
    }

    fn unicode_escape(&mut self) -> Result<char, ParseError> {
        let len = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(self.error("invalid escape in IRI")),
        };
        self.hex(len)
    }

    fn hex(&mut self, len: usize) -> Result<char, ParseError> {
        let digits = self
            .text
            .get(self.pos..self.pos + len)
            .ok_or_else(|| self.error("truncated escape"))?;
        let code = u32::from_str_radix(digits, 16).map_err(|_| self.error("invalid hex escape"))?;
        self.pos += len;
        char::from_u32(code).ok_or_else(|| self.error("invalid code point"))
    }

    fn literal(&mut self) -> Result<Term, ParseError> {
        self.pos += 1;
        let mut lexical = String::new();
        loop {
            match self.bump() {
                Some('"') => break,
                Some('\\') => {
                    let c = match self.bump() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') => self.hex(4)?,
                        Some('U') => self.hex(8)?,
                        _ => return Err(self.error("invalid escape in literal")),
                    };
                    lexical.push(c);
                }
                Some(c) => lexical.push(c),
                None => return Err(self.error("unterminated literal")),
            }
        }
        if self.peek() == Some('@') {
            self.pos += 1;
            let start = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                self.pos += 1;
            }
            if self.pos == start {
                return Err(self.error("empty language tag"));
            }
            let tag = &self.text[start..self.pos];
            return Ok(Term::Literal(Literal::lang(&lexical, tag)));
        }
        if self.text[self.pos..].starts_with("^^") {
            self.pos += 2;
            if self.peek() != Some('<') {
                return Err(self.error("expected datatype IRI"));
            }
            let dt = self.iri()?;
            return Ok(Term::Literal(Literal::typed(&lexical, dt)));
        }
        Ok(Term::Literal(Literal::typed(&lexical, xsd::string())))
    }
}

/// Serializes `g` as sorted N-Triples lines.
pub fn serialize_ntriples(g: &Graph) -> String {
    let mut lines: Vec<String> = g.iter().map(|t| t.to_string()).collect();
    lines.sort_unstable();
    let mut out = String::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
    for line in lines {
        out.push_str(&line);
        out.push('\n');
    }
    out
}
