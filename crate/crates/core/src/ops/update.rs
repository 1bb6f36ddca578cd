//! UpdateLevel: Type1, Type2 and Type3 slowly changing dimension updates.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::date::Clock;
use crate::graph::Graph;
use crate::mapping::{PropertyMapping, SourceValue};
use crate::schema::{TargetKind, TargetTBox, UpdateType};
use crate::term::{Iri, Literal, Term, Triple};
use crate::vocab::{qb4o, rdf};

use super::generate::{mapped_values, reference_type};
use super::iri::{generate_iri, update_iri, IriGraph, IriScheme};
use super::{referenced_properties, OpError};

pub struct UpdateParams<'a> {
    pub level: &'a Iri,
    pub ttbox: &'a TargetTBox,
    pub property_mappings: &'a [PropertyMapping],
    pub clock: &'a dyn Clock,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UpdateOutcome {
    /// `(tABox - deleted) ∪ inserted`.
    pub graph: Graph,
    /// Triples removed from the input target ABox; always a subset of it.
    pub deleted: Graph,
    /// Triples added that the input target ABox lacked.
    pub inserted: Graph,
}

pub const OPEN_END: &str = "9999-12-31";
pub const OPEN_START: &str = "0000-00-00";
pub const CURRENT: &str = "Current";
pub const EXPIRED: &str = "Expired";

/// The working target ABox with its delete and insert sets kept in step.
struct Delta {
    graph: Graph,
    deleted: Graph,
    inserted: Graph,
}

impl Delta {
    fn del(&mut self, t: Triple) {
        if self.graph.remove(&t) && !self.inserted.remove(&t) {
            self.deleted.insert(t);
        }
    }

    fn ins(&mut self, t: Triple) {
        if self.graph.insert(t.clone()) && !self.deleted.remove(&t) {
            self.inserted.insert(t);
        }
    }

    fn del_all(&mut self, s: &Term, p: &Iri) {
        let old: Vec<Triple> = self.graph.matches(Some(s), Some(p), None).collect();
        for t in old {
            self.del(t);
        }
    }

    fn set(&mut self, s: &Term, p: &Iri, v: Term) {
        self.del_all(s, p);
        self.ins(Triple::new_unchecked(s.clone(), p.clone(), v));
    }
}

/// The Type2 bookkeeping predicates under the warehouse prefix.
struct Versioning<'a> {
    from: Iri,
    to: Iri,
    status: Iri,
    clock: &'a dyn Clock,
}

impl Versioning<'_> {
    fn is_bookkeeping(&self, p: &Iri) -> bool {
        *p == self.from || *p == self.to || *p == self.status
    }

    fn today(&self) -> String {
        format!("{}", self.clock.today())
    }
}

/// `replace(target, old, new)` on lexical forms. The term kind of `target`
/// is kept; when `old` does not occur in it the new value replaces it whole.
fn replace(target: &Term, old: &Term, new: &Term) -> Term {
    let (t, o) = (target.value_str(), old.value_str());
    if o.is_empty() || !t.contains(o) {
        return new.clone();
    }
    let replaced = t.replace(o, new.value_str());
    match target {
        Term::Iri(_) => Term::Iri(Iri::new_unchecked(replaced.as_str())),
        Term::Literal(l) => match l.language() {
            Some(tag) => Term::Literal(Literal::lang(&replaced, tag)),
            None => Term::Literal(Literal::typed(&replaced, l.datatype())),
        },
        Term::Blank(_) => new.clone(),
    }
}

/// One target property change of one level member.
struct Change {
    property: Iri,
    values: Vec<Term>,
}

/// Applies source changes to a level. `updated` holds the changed source
/// triples (ChangedDataCapture with flag 1), `sabox` the source before the
/// change and `tabox` the current target.
pub fn update_level(
    p: &UpdateParams,
    updated: &Graph,
    sabox: &Graph,
    tabox: &Graph,
    ig: &mut IriGraph,
) -> Result<UpdateOutcome, OpError> {
    let scheme = IriScheme::new(p.ttbox);
    let prefix = p
        .ttbox
        .prefix
        .clone()
        .ok_or_else(|| OpError::Invalid(String::from("the target TBox has no warehouse prefix")))?;
    let versioning = Versioning {
        from: Iri::new_unchecked(format!("{prefix}/fromDate").as_str()),
        to: Iri::new_unchecked(format!("{prefix}/toDate").as_str()),
        status: Iri::new_unchecked(format!("{prefix}/status").as_str()),
        clock: p.clock,
    };

    // NewOldValues, grouped by source instance.
    let mut changed: BTreeMap<Term, BTreeMap<Iri, Vec<Term>>> = BTreeMap::new();
    for t in updated.iter() {
        if t.predicate == rdf::type_() {
            continue;
        }
        changed
            .entry(t.subject.clone())
            .or_default()
            .entry(t.predicate.clone())
            .or_default()
            .push(t.object.clone());
    }

    let mut delta = Delta {
        graph: tabox.clone(),
        deleted: Graph::new(),
        inserted: Graph::new(),
    };
    let mut type2: BTreeMap<Iri, Vec<Change>> = BTreeMap::new();
    let mut ignored = Vec::new();

    for (i, props) in &changed {
        let iri_i = match ig.lookup(i, p.level) {
            Some(found) => found.clone(),
            None => match i.as_iri() {
                Some(own) if tabox.object(i, &qb4o::member_of()).is_some() => own.clone(),
                // Not a member of the level yet: nothing to update.
                _ => continue,
            },
        };
        let subject = Term::Iri(iri_i.clone());
        let old_pairs: BTreeSet<(Iri, Term)> = sabox
            .describe(i)
            .map(|t| (t.predicate, t.object))
            .collect();
        let mut new_pairs: BTreeSet<(Iri, Term)> = old_pairs
            .iter()
            .filter(|(q, _)| !props.contains_key(q))
            .cloned()
            .collect();
        for (q, vs) in props {
            new_pairs.extend(vs.iter().map(|v| (q.clone(), v.clone())));
        }

        for q in props.keys() {
            let pms: Vec<&PropertyMapping> = p
                .property_mappings
                .iter()
                .filter(|pm| referenced_properties(&pm.expression()).contains(q))
                .collect();
            if pms.is_empty() {
                return Err(OpError::Unmapped(q.clone()));
            }
            for pm in pms {
                let tp = &pm.target_property;
                let reference = matches!(
                    p.ttbox.target_kind(tp),
                    Some(TargetKind::RollupProperty | TargetKind::ObjectProperty)
                );
                let current: Vec<Term> = delta.graph.objects(&subject, tp).cloned().collect();
                let fresh = mapped_values(pm, &new_pairs, &mut ignored);
                let values: Vec<Term> = match (&pm.source, current.as_slice()) {
                    // A plain copy keeps the target's shape: only the old
                    // source value inside the target value is replaced.
                    (SourceValue::Property(_), [tv]) if fresh.len() == 1 => {
                        let old = old_pairs.iter().find(|(r, _)| r == q).map(|(_, v)| v);
                        match old {
                            Some(ov) => alloc::vec![replace(tv, ov, &fresh[0])],
                            None => fresh,
                        }
                    }
                    _ => fresh,
                };
                let values = values
                    .into_iter()
                    .map(|v| {
                        if reference && v.is_literal() {
                            let ty = reference_type(p.ttbox, p.level, tp);
                            generate_iri(ig, Some(&v), Some(&v.iri_value()), &ty, &scheme).map(Term::Iri)
                        } else {
                            Ok(v)
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                match p.ttbox.update_type(tp) {
                    UpdateType::Type1 => {
                        delta.del_all(&subject, tp);
                        for v in values {
                            delta.ins(Triple::new_unchecked(subject.clone(), tp.clone(), v));
                        }
                    }
                    UpdateType::Type3 => {
                        let old_prop = Iri::new_unchecked(format!("{}_oldValue", tp.as_str()).as_str());
                        delta.del_all(&subject, tp);
                        delta.del_all(&subject, &old_prop);
                        for v in values {
                            delta.ins(Triple::new_unchecked(subject.clone(), tp.clone(), v));
                        }
                        for ov in current {
                            delta.ins(Triple::new_unchecked(subject.clone(), old_prop.clone(), ov));
                        }
                    }
                    UpdateType::Type2 => type2.entry(iri_i.clone()).or_default().push(Change {
                        property: tp.clone(),
                        values,
                    }),
                }
            }
        }
    }

    for (iri_i, changes) in type2 {
        let status = delta.graph.object(&Term::Iri(iri_i.clone()), &versioning.status).cloned();
        if status.is_some_and(|s| s.value_str() == EXPIRED) {
            return Err(OpError::NoCurrentVersion(iri_i));
        }
        let mut visited = BTreeSet::new();
        new_version(&iri_i, &changes, &versioning, &mut delta, ig, &mut visited);
    }

    Ok(UpdateOutcome {
        graph: delta.graph,
        deleted: delta.deleted,
        inserted: delta.inserted,
    })
}

/// Expires `iri_o` and creates its next version with `changes` applied,
/// then re-versions the current lower-level members that refer to it.
/// A version created today is changed in place instead.
fn new_version(
    iri_o: &Iri,
    changes: &[Change],
    v: &Versioning,
    delta: &mut Delta,
    ig: &mut IriGraph,
    visited: &mut BTreeSet<Iri>,
) -> Iri {
    if !visited.insert(iri_o.clone()) {
        return iri_o.clone();
    }
    let old = Term::Iri(iri_o.clone());
    let today = v.today();
    let from: Option<String> = delta.graph.object(&old, &v.from).map(|t| t.value_str().into());
    if from.as_deref() == Some(today.as_str()) {
        for c in changes {
            delta.del_all(&old, &c.property);
            for value in &c.values {
                delta.ins(Triple::new_unchecked(old.clone(), c.property.clone(), value.clone()));
            }
        }
        return iri_o.clone();
    }

    let iri_n = update_iri(iri_o, ig, v.clock);
    let new = Term::Iri(iri_n.clone());
    let changed: BTreeSet<&Iri> = changes.iter().map(|c| &c.property).collect();
    let kept: Vec<Triple> = delta
        .graph
        .describe(&old)
        .filter(|t| !changed.contains(&t.predicate) && !v.is_bookkeeping(&t.predicate))
        .collect();

    if from.is_none() {
        delta.ins(Triple::new_unchecked(old.clone(), v.from.clone(), Term::string(OPEN_START)));
    }
    let yesterday = format!("{}", v.clock.today().pred());
    delta.set(&old, &v.to, Term::string(&yesterday));
    delta.set(&old, &v.status, Term::string(EXPIRED));

    for t in kept {
        delta.ins(Triple::new_unchecked(new.clone(), t.predicate, t.object));
    }
    for c in changes {
        for value in &c.values {
            delta.ins(Triple::new_unchecked(new.clone(), c.property.clone(), value.clone()));
        }
    }
    delta.ins(Triple::new_unchecked(new.clone(), v.from.clone(), Term::string(&today)));
    delta.ins(Triple::new_unchecked(new.clone(), v.to.clone(), Term::string(OPEN_END)));
    delta.ins(Triple::new_unchecked(new.clone(), v.status.clone(), Term::string(CURRENT)));

    // Current level members that refer to the old version follow it.
    let lm = Term::Iri(qb4o::level_member());
    let mut associates: BTreeMap<Iri, Vec<Change>> = BTreeMap::new();
    for t in delta.graph.matches(None, None, Some(&old)) {
        let Some(child) = t.subject.as_iri() else { continue };
        let is_member = delta.graph.contains(&Triple::new_unchecked(t.subject.clone(), rdf::type_(), lm.clone()));
        let expired = delta
            .graph
            .object(&t.subject, &v.status)
            .is_some_and(|s| s.value_str() == EXPIRED);
        if !is_member || expired || *child == iri_n {
            continue;
        }
        let mut values: Vec<Term> = delta
            .graph
            .objects(&t.subject, &t.predicate)
            .filter(|o| **o != old)
            .cloned()
            .collect();
        values.push(new.clone());
        associates.entry(child.clone()).or_default().push(Change {
            property: t.predicate,
            values,
        });
    }
    for (child, changes) in associates {
        new_version(&child, &changes, v, delta, ig, visited);
    }
    iri_n
}
