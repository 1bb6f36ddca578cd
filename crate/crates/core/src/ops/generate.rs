//! LevelMemberGenerator and ObservationGenerator.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::graph::Graph;
use crate::mapping::{instances_with_properties, IriValueType, PropertyMapping, SourceValue};
use crate::query::EvalContext;
use crate::schema::{TargetKind, TargetTBox};
use crate::term::{Iri, Term, Triple};
use crate::vocab::{qb, qb4o, rdf};

use super::iri::{generate_iri, IriGraph, IriScheme};
use super::{referenced_properties, OpError, PairContext};

pub struct GeneratorParams<'a> {
    pub source_concept: &'a Iri,
    /// The level (LevelMemberGenerator) or dataset (ObservationGenerator).
    pub target_concept: &'a Iri,
    pub ttbox: &'a TargetTBox,
    pub iri_value: &'a IriValueType,
    pub property_mappings: &'a [PropertyMapping],
}

/// Properties read by the mappings and the IRI value.
fn read_properties(p: &GeneratorParams) -> BTreeSet<Iri> {
    let mut props = BTreeSet::new();
    for pm in p.property_mappings {
        props.extend(referenced_properties(&pm.expression()));
    }
    match p.iri_value {
        IriValueType::Property(q) => {
            props.insert(q.clone());
        }
        IriValueType::Expression(e) => props.extend(referenced_properties(e)),
        _ => {}
    }
    props
}

/// The IRI of the target instance created from source instance `i`.
fn instance_iri(
    p: &GeneratorParams,
    i: &Term,
    pairs: &BTreeSet<(Iri, Term)>,
    ig: &mut IriGraph,
    scheme: &IriScheme,
) -> Result<Iri, OpError> {
    let tc = p.target_concept;
    match p.iri_value {
        IriValueType::SameAsSourceIri => i
            .as_iri()
            .cloned()
            .ok_or_else(|| OpError::NullIriValue(format!("{i} is not an IRI"))),
        IriValueType::Property(q) => {
            let v = PairContext(pairs).property(q).map(|v| v.iri_value());
            generate_iri(ig, Some(i), v.as_deref(), tc, scheme)
        }
        IriValueType::Expression(e) => match e.eval(&PairContext(pairs)) {
            Ok(Term::Iri(iri)) => Ok(iri),
            Ok(v) => generate_iri(ig, Some(i), Some(&v.iri_value()), tc, scheme),
            Err(err) => Err(OpError::NullIriValue(format!("{i}: {err}"))),
        },
        IriValueType::Incremental => {
            if let Some(found) = ig.lookup(i, tc) {
                return Ok(found.clone());
            }
            let n = ig.next_counter(tc);
            generate_iri(ig, Some(i), Some(&format!("_{n:02}")), tc, scheme)
        }
    }
}

/// Values one property-mapping yields for an instance: every value of a
/// plain property, or the expression's single result.
pub(super) fn mapped_values(
    pm: &PropertyMapping,
    pairs: &BTreeSet<(Iri, Term)>,
    warnings: &mut Vec<String>,
) -> Vec<Term> {
    match &pm.source {
        SourceValue::Property(q) => pairs
            .iter()
            .filter(|(p, _)| p == q)
            .map(|(_, v)| v.clone())
            .collect(),
        SourceValue::Expression(e) => match e.eval(&PairContext(pairs)) {
            Ok(v) => alloc::vec![v],
            Err(err) => {
                warnings.push(format!("{}: {err}", pm.target_property));
                Vec::new()
            }
        },
    }
}

/// The type a rollup or object property value is minted under.
pub(super) fn reference_type(ttbox: &TargetTBox, level: &Iri, property: &Iri) -> Iri {
    if let Some(r) = ttbox.range(property) {
        return r;
    }
    ttbox
        .dimensions
        .values()
        .flat_map(|d| d.steps.iter())
        .find(|s| s.child == *level && s.rollup.as_ref() == Some(property))
        .map(|s| s.parent.clone())
        .unwrap_or_else(|| property.clone())
}

/// Creates the level members of the target level from the source
/// concept's instances in `sabox`.
pub fn level_member_generator(
    p: &GeneratorParams,
    sabox: &Graph,
    ig: &mut IriGraph,
) -> Result<(Graph, Vec<String>), OpError> {
    let scheme = IriScheme::new(p.ttbox);
    let level = p.target_concept;
    let mut out = Graph::new();
    let mut warnings = Vec::new();
    for (i, pairs) in instances_with_properties(p.source_concept, sabox, &read_properties(p)) {
        let lm = Term::Iri(instance_iri(p, &i, &pairs, ig, &scheme)?);
        out.insert(Triple::new_unchecked(lm.clone(), rdf::type_(), Term::Iri(qb4o::level_member())));
        out.insert(Triple::new_unchecked(lm.clone(), qb4o::member_of(), Term::Iri(level.clone())));
        for pm in p.property_mappings {
            let tp = &pm.target_property;
            let reference = matches!(
                p.ttbox.target_kind(tp),
                Some(TargetKind::RollupProperty | TargetKind::ObjectProperty)
            );
            for v in mapped_values(pm, &pairs, &mut warnings) {
                let object = if reference {
                    let ty = reference_type(p.ttbox, level, tp);
                    Term::Iri(generate_iri(ig, Some(&v), Some(&v.iri_value()), &ty, &scheme)?)
                } else {
                    v
                };
                out.insert(Triple::new_unchecked(lm.clone(), tp.clone(), object));
            }
        }
    }
    Ok((out, warnings))
}

/// Creates the observations of the target dataset from the source
/// concept's instances in `sabox`.
pub fn observation_generator(
    p: &GeneratorParams,
    sabox: &Graph,
    ig: &mut IriGraph,
) -> Result<(Graph, Vec<String>), OpError> {
    let scheme = IriScheme::new(p.ttbox);
    let ds = p.target_concept;
    let mut kinds = Vec::new();
    for pm in p.property_mappings {
        let tp = &pm.target_property;
        match p.ttbox.target_kind(tp) {
            Some(k @ (TargetKind::Level | TargetKind::MeasureProperty)) => kinds.push(k),
            _ => return Err(OpError::BadTargetKind(tp.clone())),
        }
    }
    let mut out = Graph::new();
    let mut warnings = Vec::new();
    for (i, pairs) in instances_with_properties(p.source_concept, sabox, &read_properties(p)) {
        let o = Term::Iri(instance_iri(p, &i, &pairs, ig, &scheme)?);
        out.insert(Triple::new_unchecked(o.clone(), rdf::type_(), Term::Iri(qb::observation())));
        out.insert(Triple::new_unchecked(o.clone(), qb::dataset(), Term::Iri(ds.clone())));
        for (pm, kind) in p.property_mappings.iter().zip(&kinds) {
            let tp = &pm.target_property;
            for v in mapped_values(pm, &pairs, &mut warnings) {
                let object = match kind {
                    TargetKind::Level => {
                        Term::Iri(generate_iri(ig, Some(&v), Some(&v.iri_value()), tp, &scheme)?)
                    }
                    _ => v,
                };
                out.insert(Triple::new_unchecked(o.clone(), tp.clone(), object));
            }
        }
    }
    Ok((out, warnings))
}
