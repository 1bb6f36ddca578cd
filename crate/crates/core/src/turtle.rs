//! A restricted Turtle reader.
//!
//! Supported: `@prefix`/`PREFIX`, `@base`/`BASE`, prefixed names, the `a`
//! keyword, `;` and `,` lists, quoted and numeric literals, booleans,
//! `_:label` blank nodes and one level of `[ ... ]` property lists in object
//! position. Collections and nested property lists are rejected.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::graph::Graph;
use crate::ntriples::{BlankNodeAllocator, BlankScope, ParseError, ParseErrorKind};
use crate::term::{Iri, Literal, Term, Triple};
use crate::vocab::{self, rdf, xsd};

/// Prefix table used by Turtle documents and expression text.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Prefixes {
    map: BTreeMap<String, String>,
}

impl Prefixes {
    pub fn new() -> Self {
        Self::default()
    }

    /// The well-known prefixes (rdf, rdfs, owl, xsd, qb, qb4o, map).
    pub fn with_defaults() -> Self {
        let mut p = Self::new();
        for (name, ns) in vocab::DEFAULT_PREFIXES {
            p.insert(name, ns);
        }
        p
    }

    pub fn insert(&mut self, prefix: &str, namespace: &str) {
        self.map.insert(prefix.to_string(), namespace.to_string());
    }

    pub fn get(&self, prefix: &str) -> Option<&str> {
        self.map.get(prefix).map(String::as_str)
    }

    pub fn expand(&self, prefix: &str, local: &str) -> Option<String> {
        self.get(prefix).map(|ns| {
            let mut s = String::with_capacity(ns.len() + local.len());
            s.push_str(ns);
            s.push_str(local);
            s
        })
    }

    /// Expands `prefix:local`, or returns `None` when the prefix is unknown.
    pub fn expand_pname(&self, pname: &str) -> Option<String> {
        let (prefix, local) = pname.split_once(':')?;
        self.expand(prefix, local)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

/// The triples of a document plus the prefixes it declared.
#[derive(Clone, Debug)]
pub struct TurtleDocument {
    pub graph: Graph,
    pub prefixes: Prefixes,
}

pub fn parse_turtle(input: &[u8]) -> Result<TurtleDocument, ParseError> {
    parse_turtle_with(input, &mut BlankNodeAllocator::new())
}

pub fn parse_turtle_with(
    input: &[u8],
    alloc: &mut BlankNodeAllocator,
) -> Result<TurtleDocument, ParseError> {
    let text = core::str::from_utf8(input).map_err(|e| ParseError {
        line: 1 + input[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count(),
        column: 1,
        kind: ParseErrorKind::InvalidUtf8,
    })?;
    let mut parser = Parser {
        text,
        pos: 0,
        prefixes: Prefixes::new(),
        base: None,
        scope: BlankScope::new(alloc),
        graph: Graph::new(),
    };
    parser.document()?;
    Ok(TurtleDocument {
        graph: parser.graph,
        prefixes: parser.prefixes,
    })
}

struct Parser<'a, 'b> {
    text: &'a str,
    pos: usize,
    prefixes: Prefixes,
    base: Option<String>,
    scope: BlankScope<'b>,
    graph: Graph,
}

impl Parser<'_, '_> {
    fn error_at(&self, pos: usize, kind: ParseErrorKind) -> ParseError {
        let before = &self.text[..pos.min(self.text.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        ParseError { line, column, kind }
    }

    fn error(&self, msg: &str) -> ParseError {
        self.error_at(self.pos, ParseErrorKind::Syntax(msg.to_string()))
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.text[self.pos..].chars().nth(n)
    }

    fn rest(&self) -> &str {
        &self.text[self.pos..]
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => self.pos += c.len_utf8(),
                Some('#') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&alloc::format!("expected '{c}'")))
        }
    }

    fn keyword(&mut self, word: &str) -> bool {
        let rest = self.rest();
        if rest.len() >= word.len()
            && rest[..word.len()].eq_ignore_ascii_case(word)
            && !rest[word.len()..]
                .chars()
                .next()
                .is_some_and(|c| is_name_char(c) || c == ':')
        {
            self.pos += word.len();
            true
        } else {
            false
        }
    }

    fn document(&mut self) -> Result<(), ParseError> {
        loop {
            self.skip_ws();
            if self.pos >= self.text.len() {
                return Ok(());
            }
            if self.rest().starts_with("@prefix") {
                self.pos += "@prefix".len();
                self.prefix_decl()?;
                self.expect('.')?;
            } else if self.rest().starts_with("@base") {
                self.pos += "@base".len();
                self.base_decl()?;
                self.expect('.')?;
            } else if self.keyword("PREFIX") {
                self.prefix_decl()?;
            } else if self.keyword("BASE") {
                self.base_decl()?;
            } else {
                self.triples()?;
                self.expect('.')?;
            }
        }
    }

    fn prefix_decl(&mut self) -> Result<(), ParseError> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if is_name_char(c)) {
            self.bump();
        }
        let name = self.text[start..self.pos].to_string();
        if self.peek() != Some(':') {
            return Err(self.error("expected ':' in prefix declaration"));
        }
        self.pos += 1;
        self.skip_ws();
        let ns = self.iri_ref()?;
        self.prefixes.insert(&name, ns.as_str());
        Ok(())
    }

    fn base_decl(&mut self) -> Result<(), ParseError> {
        self.skip_ws();
        let iri = self.iri_ref()?;
        self.base = Some(iri.as_str().to_string());
        Ok(())
    }

    fn triples(&mut self) -> Result<(), ParseError> {
        self.skip_ws();
        let subject = match self.peek() {
            Some('[') => return Err(self.error("blank node property list in subject position")),
            Some('(') => return Err(self.error("collections are not supported")),
            Some('"' | '\'') => return Err(self.error("literal in subject position")),
            Some(c) if c.is_ascii_digit() || c == '+' || c == '-' => {
                return Err(self.error("literal in subject position"))
            }
            _ => self.resource()?,
        };
        self.predicate_object_list(&subject, false)
    }

    fn predicate_object_list(&mut self, subject: &Term, nested: bool) -> Result<(), ParseError> {
        loop {
            self.skip_ws();
            let predicate = self.verb()?;
            loop {
                self.skip_ws();
                let object = self.object(nested)?;
                self.graph
                    .insert(Triple::new_unchecked(subject.clone(), predicate.clone(), object));
                self.skip_ws();
                if self.peek() == Some(',') {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            self.skip_ws();
            if self.peek() != Some(';') {
                return Ok(());
            }
            while self.peek() == Some(';') {
                self.pos += 1;
                self.skip_ws();
            }
            match self.peek() {
                Some('.') | Some(']') | None => return Ok(()),
                _ => {}
            }
        }
    }

    fn verb(&mut self) -> Result<Iri, ParseError> {
        if self.peek() == Some('a')
            && !self
                .peek_at(1)
                .is_some_and(|c| is_name_char(c) || c == ':')
        {
            self.pos += 1;
            return Ok(rdf::type_());
        }
        match self.resource()? {
            Term::Iri(iri) => Ok(iri),
            _ => Err(self.error("predicate must be an IRI")),
        }
    }

    fn object(&mut self, nested: bool) -> Result<Term, ParseError> {
        match self.peek() {
            Some('[') => {
                if nested {
                    return Err(self.error("nested blank node property lists are not supported"));
                }
                self.pos += 1;
                let node = Term::Blank(self.scope.anonymous());
                self.skip_ws();
                if self.peek() != Some(']') {
                    self.predicate_object_list(&node, true)?;
                }
                self.expect(']')?;
                Ok(node)
            }
            Some('(') => Err(self.error("collections are not supported")),
            Some('"' | '\'') => self.string_literal(),
            Some(c) if c.is_ascii_digit() || matches!(c, '+' | '-') => self.numeric_literal(),
            Some('.') if self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) => {
                self.numeric_literal()
            }
            _ => {
                if self.keyword("true") {
                    return Ok(Term::typed("true", xsd::boolean()));
                }
                if self.keyword("false") {
                    return Ok(Term::typed("false", xsd::boolean()));
                }
                self.resource()
            }
        }
    }

    /// IRI reference, prefixed name or blank node label.
    fn resource(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iri_ref()?)),
            Some('_') if self.peek_at(1) == Some(':') => {
                self.pos += 2;
                let label = self.local_name();
                if label.is_empty() {
                    return Err(self.error("empty blank node label"));
                }
                Ok(Term::Blank(self.scope.get(&label)))
            }
            Some(c) if is_name_char(c) || c == ':' => Ok(Term::Iri(self.prefixed_name()?)),
            Some(_) => Err(self.error("expected an IRI, prefixed name or blank node")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn iri_ref(&mut self) -> Result<Iri, ParseError> {
        if self.peek() != Some('<') {
            return Err(self.error("expected '<'"));
        }
        let start = self.pos;
        self.pos += 1;
        let mut value = String::new();
        loop {
            match self.bump() {
                Some('>') => break,
                Some('\\') => {
                    let len = match self.bump() {
                        Some('u') => 4,
                        Some('U') => 8,
                        _ => return Err(self.error("invalid escape in IRI")),
                    };
                    value.push(self.hex(len)?);
                }
                Some(c) if c.is_whitespace() || c == '<' || c == '"' => {
                    return Err(self.error("invalid character in IRI"))
                }
                Some(c) => value.push(c),
                None => return Err(self.error_at(start, ParseErrorKind::Syntax("unterminated IRI".into()))),
            }
        }
        if let Ok(iri) = Iri::new(&value) {
            return Ok(iri);
        }
        match &self.base {
            Some(base) => {
                let mut joined = base.clone();
                joined.push_str(&value);
                Ok(Iri::new_unchecked(joined.as_str()))
            }
            None => Err(self.error_at(start, ParseErrorKind::Syntax("relative IRI without @base".into()))),
        }
    }

    fn prefixed_name(&mut self) -> Result<Iri, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if is_name_char(c)) {
            self.bump();
        }
        // '.' may occur inside a prefix but not at its end.
        while self.text[start..self.pos].ends_with('.') {
            self.pos -= 1;
        }
        let prefix = self.text[start..self.pos].to_string();
        if self.peek() != Some(':') {
            return Err(self.error("expected a prefixed name"));
        }
        self.pos += 1;
        let local = self.local_name();
        match self.prefixes.expand(&prefix, &local) {
            Some(iri) => Ok(Iri::new_unchecked(iri.as_str())),
            None => Err(self.error_at(start, ParseErrorKind::UnknownPrefix(prefix))),
        }
    }

    fn local_name(&mut self) -> String {
        let mut out = String::new();
        loop {
            match self.peek() {
                Some('\\') => {
                    if let Some(c) = self.peek_at(1) {
                        if "_~.-!$&'()*+,;=/?#@%".contains(c) {
                            self.pos += 2;
                            out.push(c);
                            continue;
                        }
                    }
                    break;
                }
                Some('.') => {
                    // Dots are allowed inside local names, not at the end.
                    if self
                        .peek_at(1)
                        .is_some_and(|c| is_name_char(c) || c == ':' || c == '%')
                    {
                        self.pos += 1;
                        out.push('.');
                    } else {
                        break;
                    }
                }
                Some(c) if is_name_char(c) || c == ':' || c == '%' => {
                    self.pos += c.len_utf8();
                    out.push(c);
                }
                _ => break,
            }
        }
        out
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

    fn string_literal(&mut self) -> Result<Term, ParseError> {
        let start = self.pos;
        let quote = self.bump().unwrap_or('"');
        let long = self.peek() == Some(quote) && self.peek_at(1) == Some(quote);
        if long {
            self.pos += 2;
        }
        let mut lexical = String::new();
        loop {
            let Some(c) = self.bump() else {
                return Err(self.error_at(start, ParseErrorKind::Syntax("unterminated string".into())));
            };
            if c == quote {
                if !long {
                    break;
                }
                if self.peek() == Some(quote) && self.peek_at(1) == Some(quote) {
                    self.pos += 2;
                    break;
                }
                lexical.push(c);
                continue;
            }
            match c {
                '\\' => {
                    let e = match self.bump() {
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
                        _ => return Err(self.error("invalid escape in string")),
                    };
                    lexical.push(e);
                }
                '\n' | '\r' if !long => {
                    return Err(self.error("line break in short string"));
                }
                c => lexical.push(c),
            }
        }
        if self.peek() == Some('@') {
            self.pos += 1;
            let tag_start = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                self.pos += 1;
            }
            if self.pos == tag_start {
                return Err(self.error("empty language tag"));
            }
            let tag = self.text[tag_start..self.pos].to_string();
            return Ok(Term::Literal(Literal::lang(&lexical, &tag)));
        }
        if self.rest().starts_with("^^") {
            self.pos += 2;
            let dt = match self.resource()? {
                Term::Iri(iri) => iri,
                _ => return Err(self.error("datatype must be an IRI")),
            };
            return Ok(Term::Literal(Literal::typed(&lexical, dt)));
        }
        Ok(Term::Literal(Literal::string(&lexical)))
    }

    fn numeric_literal(&mut self) -> Result<Term, ParseError> {
        let start = self.pos;
        if matches!(self.peek(), Some('+' | '-')) {
            self.pos += 1;
        }
        let mut digits = 0;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
            digits += 1;
        }
        let mut datatype = xsd::integer();
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
                digits += 1;
            }
            datatype = xsd::decimal();
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some('+' | '-')) {
                self.pos += 1;
            }
            let exp_start = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
            if self.pos == exp_start {
                self.pos = save;
            } else {
                datatype = xsd::double();
            }
        }
        if digits == 0 {
            return Err(self.error_at(start, ParseErrorKind::Syntax("malformed number".into())));
        }
        let lexical = &self.text[start..self.pos];
        Ok(Term::Literal(Literal::typed(lexical, datatype)))
    }
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-' || c == '.' || c == '\u{b7}'
}

/// Splits `text` into its prefix declarations; useful for reading prefixes of
/// documents that were already parsed elsewhere.
pub fn declared_prefixes(doc: &TurtleDocument) -> Vec<(String, String)> {
    doc.prefixes
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}
