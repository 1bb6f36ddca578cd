//! In-memory RDF graph with subject, predicate and object indexes.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::term::{Iri, Term, Triple};
use crate::vocab::rdf;

/// A set of triples.
#[derive(Clone, Default)]
pub struct Graph {
    spo: BTreeMap<Term, BTreeMap<Iri, BTreeSet<Term>>>,
    pos: BTreeMap<Iri, BTreeMap<Term, BTreeSet<Term>>>,
    osp: BTreeMap<Term, BTreeMap<Term, BTreeSet<Iri>>>,
    len: usize,
    label: Option<String>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Adds a triple; returns false if it was already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        let Triple {
            subject,
            predicate,
            object,
        } = triple;
        let fresh = self
            .spo
            .entry(subject.clone())
            .or_default()
            .entry(predicate.clone())
            .or_default()
            .insert(object.clone());
        if !fresh {
            return false;
        }
        self.pos
            .entry(predicate.clone())
            .or_default()
            .entry(object.clone())
            .or_default()
            .insert(subject.clone());
        self.osp
            .entry(object)
            .or_default()
            .entry(subject)
            .or_default()
            .insert(predicate);
        self.len += 1;
        true
    }

    pub fn remove(&mut self, triple: &Triple) -> bool {
        let Triple {
            subject: s,
            predicate: p,
            object: o,
        } = triple;
        let Some(by_p) = self.spo.get_mut(s) else {
            return false;
        };
        let Some(objects) = by_p.get_mut(p) else {
            return false;
        };
        if !objects.remove(o) {
            return false;
        }
        if objects.is_empty() {
            by_p.remove(p);
            if by_p.is_empty() {
                self.spo.remove(s);
            }
        }
        remove_nested(&mut self.pos, p, o, s);
        remove_nested(&mut self.osp, o, s, p);
        self.len -= 1;
        true
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.spo
            .get(&triple.subject)
            .and_then(|m| m.get(&triple.predicate))
            .is_some_and(|os| os.contains(&triple.object))
    }

    /// All triples in (subject, predicate, object) order.
    pub fn iter(&self) -> impl Iterator<Item = Triple> + '_ {
        self.spo.iter().flat_map(|(s, by_p)| {
            by_p.iter().flat_map(move |(p, os)| {
                os.iter()
                    .map(move |o| Triple::new_unchecked(s.clone(), p.clone(), o.clone()))
            })
        })
    }

    /// Triples matching the given positions; `None` is a wildcard.
    pub fn matches<'a>(
        &'a self,
        s: Option<&'a Term>,
        p: Option<&'a Iri>,
        o: Option<&'a Term>,
    ) -> Box<dyn Iterator<Item = Triple> + 'a> {
        match (s, p, o) {
            (Some(s), Some(p), Some(o)) => {
                let t = Triple::new_unchecked(s.clone(), p.clone(), o.clone());
                if self.contains(&t) {
                    Box::new(core::iter::once(t))
                } else {
                    Box::new(core::iter::empty())
                }
            }
            (Some(s), Some(p), None) => Box::new(
                self.spo
                    .get(s)
                    .and_then(|m| m.get(p))
                    .into_iter()
                    .flatten()
                    .map(move |o| Triple::new_unchecked(s.clone(), p.clone(), o.clone())),
            ),
            (Some(s), None, o) => Box::new(
                self.spo
                    .get(s)
                    .into_iter()
                    .flatten()
                    .flat_map(move |(p, os)| {
                        os.iter()
                            .filter(move |obj| o.is_none_or(|o| o == *obj))
                            .map(move |obj| Triple::new_unchecked(s.clone(), p.clone(), obj.clone()))
                    }),
            ),
            (None, Some(p), Some(o)) => Box::new(
                self.pos
                    .get(p)
                    .and_then(|m| m.get(o))
                    .into_iter()
                    .flatten()
                    .map(move |s| Triple::new_unchecked(s.clone(), p.clone(), o.clone())),
            ),
            (None, Some(p), None) => Box::new(
                self.pos.get(p).into_iter().flatten().flat_map(move |(o, ss)| {
                    ss.iter()
                        .map(move |s| Triple::new_unchecked(s.clone(), p.clone(), o.clone()))
                }),
            ),
            (None, None, Some(o)) => Box::new(
                self.osp.get(o).into_iter().flatten().flat_map(move |(s, ps)| {
                    ps.iter()
                        .map(move |p| Triple::new_unchecked(s.clone(), p.clone(), o.clone()))
                }),
            ),
            (None, None, None) => Box::new(self.iter()),
        }
    }

    /// Objects of `(s, p, ?)`.
    pub fn objects<'a>(&'a self, s: &Term, p: &Iri) -> impl Iterator<Item = &'a Term> + 'a {
        self.spo.get(s).and_then(|m| m.get(p)).into_iter().flatten()
    }

    /// First object of `(s, p, ?)` in term order.
    pub fn object(&self, s: &Term, p: &Iri) -> Option<&Term> {
        self.objects(s, p).next()
    }

    /// Subjects of `(?, p, o)`.
    pub fn subjects<'a>(&'a self, p: &Iri, o: &Term) -> impl Iterator<Item = &'a Term> + 'a {
        self.pos.get(p).and_then(|m| m.get(o)).into_iter().flatten()
    }

    /// `rdf:type` objects of `s`.
    pub fn types<'a>(&'a self, s: &Term) -> impl Iterator<Item = &'a Term> + 'a {
        let ty = rdf::type_();
        self.spo.get(s).and_then(move |m| m.get(&ty)).into_iter().flatten()
    }

    /// Instances of `class` via `rdf:type`.
    pub fn instances_of<'a>(&'a self, class: &Iri) -> impl Iterator<Item = &'a Term> + 'a {
        self.subjects(&rdf::type_(), &Term::Iri(class.clone()))
            .collect::<Vec<_>>()
            .into_iter()
    }

    pub fn has_type(&self, s: &Term, class: &str) -> bool {
        self.types(s).any(|t| t.as_iri().is_some_and(|i| i.as_str() == class))
    }

    /// Distinct subjects.
    pub fn subject_terms(&self) -> impl Iterator<Item = &Term> {
        self.spo.keys()
    }

    /// Distinct predicates.
    pub fn predicates(&self) -> impl Iterator<Item = &Iri> {
        self.pos.keys()
    }

    /// All triples with subject `s`.
    pub fn describe(&self, s: &Term) -> impl Iterator<Item = Triple> + '_ {
        let s = s.clone();
        self.spo
            .get(&s)
            .into_iter()
            .flat_map(move |by_p| {
                let s = s.clone();
                by_p.iter().flat_map(move |(p, os)| {
                    let s = s.clone();
                    os.iter()
                        .map(move |o| Triple::new_unchecked(s.clone(), p.clone(), o.clone()))
                })
            })
    }

    pub fn union(&self, other: &Graph) -> Graph {
        let (mut big, small) = if self.len >= other.len {
            (self.clone(), other)
        } else {
            (other.clone(), self)
        };
        big.label = self.label.clone();
        big.extend(small.iter());
        big
    }

    pub fn difference(&self, other: &Graph) -> Graph {
        let mut out = Graph::new();
        out.label = self.label.clone();
        out.extend(self.iter().filter(|t| !other.contains(t)));
        out
    }

    pub fn intersection(&self, other: &Graph) -> Graph {
        let mut out = Graph::new();
        out.extend(self.iter().filter(|t| other.contains(t)));
        out
    }

    /// Removes every triple of `other` from `self`.
    pub fn subtract(&mut self, other: &Graph) {
        for t in other.iter() {
            self.remove(&t);
        }
    }

    /// Keeps only triples whose subject is in `subjects`.
    pub fn restrict_subjects(&self, subjects: &BTreeSet<Term>) -> Graph {
        let mut out = Graph::new();
        for s in subjects {
            out.extend(self.describe(s));
        }
        out
    }
}

fn remove_nested<A: Ord, B: Ord, C: Ord>(
    index: &mut BTreeMap<A, BTreeMap<B, BTreeSet<C>>>,
    a: &A,
    b: &B,
    c: &C,
) {
    if let Some(by_b) = index.get_mut(a) {
        if let Some(cs) = by_b.get_mut(b) {
            cs.remove(c);
            if cs.is_empty() {
                by_b.remove(b);
            }
        }
        if by_b.is_empty() {
            index.remove(a);
        }
    }
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.len == other.len && self.spo == other.spo
    }
}

impl Eq for Graph {}

impl Extend<Triple> for Graph {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        for t in iter {
            self.insert(t);
        }
    }
}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        let mut g = Graph::new();
        g.extend(iter);
        g
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Graph {")?;
        for t in self.iter() {
            write!(f, "\n  {t}")?;
        }
        if !self.is_empty() {
            f.write_str("\n")?;
        }
        f.write_str("}")
    }
}
