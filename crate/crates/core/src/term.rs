//! RDF terms and triples.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use core::fmt;

use crate::vocab::{rdf, xsd};

/// An absolute IRI.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(Arc<str>);

impl Iri {
    /// Builds an IRI, rejecting strings without a scheme.
    pub fn new(value: &str) -> Result<Self, TermError> {
        if is_absolute(value) {
            Ok(Self(Arc::from(value)))
        } else {
            Err(TermError::RelativeIri(value.to_string()))
        }
    }

    /// Builds an IRI without checking that it is absolute.
    pub fn new_unchecked(value: impl Into<Arc<str>>) -> Self {
        Self(value.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The text after the last `#` or `/`.
    pub fn local_name(&self) -> &str {
        last_segment(&self.0)
    }
}

impl fmt::Debug for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        write_iri_escaped(f, &self.0)?;
        f.write_str(">")
    }
}

/// Returns the portion of `s` after the last `#` or `/`.
pub fn last_segment(s: &str) -> &str {
    match s.rfind(['#', '/']) {
        Some(pos) => &s[pos + 1..],
        None => s,
    }
}

fn is_absolute(value: &str) -> bool {
    let Some(colon) = value.find(':') else {
        return false;
    };
    let scheme = &value[..colon];
    let mut chars = scheme.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
}

/// A blank node label, scoped to the document it was read from.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlankNode(Arc<str>);

impl BlankNode {
    pub fn new(label: impl Into<Arc<str>>) -> Self {
        Self(label.into())
    }

    pub fn label(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for BlankNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "_:{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Annotation {
    Datatype(Iri),
    Language(Arc<str>),
}

/// A literal: lexical form plus either a datatype or a language tag.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    lexical: Arc<str>,
    annotation: Annotation,
}

impl Literal {
    pub fn string(lexical: &str) -> Self {
        Self::typed(lexical, xsd::string())
    }

    pub fn typed(lexical: &str, datatype: Iri) -> Self {
        Self {
            lexical: Arc::from(lexical),
            annotation: Annotation::Datatype(datatype),
        }
    }

    pub fn lang(lexical: &str, tag: &str) -> Self {
        Self {
            lexical: Arc::from(lexical),
            annotation: Annotation::Language(Arc::from(tag.to_ascii_lowercase().as_str())),
        }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    /// The datatype; language-tagged literals report `rdf:langString`.
    pub fn datatype(&self) -> Iri {
        match &self.annotation {
            Annotation::Datatype(dt) => dt.clone(),
            Annotation::Language(_) => rdf::lang_string(),
        }
    }

    pub fn language(&self) -> Option<&str> {
        match &self.annotation {
            Annotation::Language(tag) => Some(tag),
            Annotation::Datatype(_) => None,
        }
    }

    /// True for `xsd:string` and language-tagged literals.
    pub fn is_string_like(&self) -> bool {
        match &self.annotation {
            Annotation::Language(_) => true,
            Annotation::Datatype(dt) => dt.as_str() == xsd::STRING,
        }
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("\"")?;
        write_literal_escaped(f, &self.lexical)?;
        f.write_str("\"")?;
        match &self.annotation {
            Annotation::Language(tag) => write!(f, "@{tag}"),
            // Simple literals are xsd:string and print without a datatype.
            Annotation::Datatype(dt) if dt.as_str() == xsd::STRING => Ok(()),
            Annotation::Datatype(dt) => write!(f, "^^{dt}"),
        }
    }
}

/// An RDF term.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(Iri),
    Blank(BlankNode),
    Literal(Literal),
}

impl Term {
    pub fn iri(value: &str) -> Self {
        Term::Iri(Iri::new_unchecked(value))
    }

    pub fn blank(label: &str) -> Self {
        Term::Blank(BlankNode::new(label))
    }

    pub fn string(lexical: &str) -> Self {
        Term::Literal(Literal::string(lexical))
    }

    pub fn typed(lexical: &str, datatype: Iri) -> Self {
        Term::Literal(Literal::typed(lexical, datatype))
    }

    pub fn integer(value: i64) -> Self {
        Term::Literal(Literal::typed(&value.to_string(), xsd::integer()))
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(lit) => Some(lit),
            _ => None,
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    /// Whether the term may appear in subject position.
    pub fn is_resource(&self) -> bool {
        !self.is_literal()
    }

    /// Lexical form for literals, IRI text for IRIs, label for blank nodes.
    pub fn value_str(&self) -> &str {
        match self {
            Term::Iri(iri) => iri.as_str(),
            Term::Blank(b) => b.label(),
            Term::Literal(lit) => lit.lexical(),
        }
    }

    /// The key used when a term seeds a generated IRI: the lexical form of a
    /// literal, or the last path/fragment segment of an IRI.
    pub fn iri_value(&self) -> String {
        match self {
            Term::Literal(lit) => lit.lexical().to_string(),
            Term::Iri(iri) => iri.local_name().to_string(),
            Term::Blank(b) => b.label().to_string(),
        }
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<Literal> for Term {
    fn from(lit: Literal) -> Self {
        Term::Literal(lit)
    }
}

impl From<BlankNode> for Term {
    fn from(b: BlankNode) -> Self {
        Term::Blank(b)
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => fmt::Display::fmt(iri, f),
            Term::Blank(b) => write!(f, "_:{}", b.label()),
            Term::Literal(lit) => fmt::Display::fmt(lit, f),
        }
    }
}

/// An RDF triple. Subjects are IRIs or blank nodes.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Iri,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Iri, object: Term) -> Result<Self, TermError> {
        if subject.is_literal() {
            return Err(TermError::LiteralSubject);
        }
        Ok(Self {
            subject,
            predicate,
            object,
        })
    }

    /// Caller guarantees the subject is not a literal.
    pub fn new_unchecked(subject: Term, predicate: Iri, object: Term) -> Self {
        debug_assert!(!subject.is_literal());
        Self {
            subject,
            predicate,
            object,
        }
    }
}

impl fmt::Debug for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TermError {
    RelativeIri(String),
    LiteralSubject,
}

impl fmt::Display for TermError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermError::RelativeIri(s) => write!(f, "IRI is not absolute: {s}"),
            TermError::LiteralSubject => f.write_str("literal in subject position"),
        }
    }
}

fn write_iri_escaped(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    for c in s.chars() {
        match c {
            '\u{0}'..='\u{20}' | '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\' => {
                write!(f, "\\u{:04X}", c as u32)?
            }
            _ => fmt::Write::write_char(f, c)?,
        }
    }
    Ok(())
}

fn write_literal_escaped(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\r' => f.write_str("\\r")?,
            '\t' => f.write_str("\\t")?,
            '\u{8}' => f.write_str("\\b")?,
            '\u{c}' => f.write_str("\\f")?,
            c if (c as u32) < 0x20 || c == '\u{7f}' => write!(f, "\\u{:04X}", c as u32)?,
            _ => fmt::Write::write_char(f, c)?,
        }
    }
    Ok(())
}
