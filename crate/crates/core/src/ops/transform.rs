//! GraphExtractor, TransformationOnLiteral and JoinTransformation.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::graph::Graph;
use crate::mapping::{
    tuples_to_triples, CommonPropertyPair, MappedInstances, PropertyMapping, Relation,
};
use crate::query::{
    execute_query, validate_expressions, Expression, OutputHeader, Pattern, Row, Substitution,
    TermPattern, TriplePattern, Variable,
};
use crate::schema::properties_of;
use crate::term::{Iri, Term};
use crate::vocab::rdf;

use super::{referenced_properties, OpError};

fn var(name: &str) -> TermPattern {
    TermPattern::var(name)
}

fn mapping_error(e: impl core::fmt::Display) -> OpError {
    OpError::Invalid(format!("{e}"))
}

/// The query and output template that extract the instances of `concept`
/// selected by `mapped`.
pub fn extraction_query(
    concept: &Iri,
    mapped: &MappedInstances,
) -> Result<(Pattern, Vec<TriplePattern>), OpError> {
    let mut q = Pattern::triple(var("i"), rdf::type_(), Term::Iri(concept.clone()))
        .and(Pattern::triple(var("i"), var("p"), var("v")));
    if let MappedInstances::Filter(cond) = mapped {
        for (k, p) in referenced_properties(cond).into_iter().enumerate() {
            q = q.opt(Pattern::triple(var("i"), p, var(&format!("f{k}"))));
        }
        let cond = validate_expressions(core::slice::from_ref(cond), &q, Substitution::PropertiesToVariables)
            .map_err(mapping_error)?
            .remove(0);
        q = q.filter(cond);
    }
    let out = TriplePattern::new(var("i"), var("p"), var("v"));
    Ok((q, alloc::vec![out]))
}

/// Instantiates `output` with every solution of `q` over `g`, keeping only
/// well-formed triples.
pub fn graph_extractor(q: &Pattern, g: &Graph, output: &[TriplePattern]) -> Graph {
    let mut out = Graph::new();
    for mu in q.evaluate(g) {
        for tp in output {
            if let Some(t) = tp.instantiate(&mu) {
                out.insert(t);
            }
        }
    }
    out
}

pub struct TransformParams<'a> {
    pub source_concept: &'a Iri,
    pub target_concept: &'a Iri,
    pub stbox: &'a Graph,
    pub property_mappings: &'a [PropertyMapping],
}

/// Header and conversion shared by both transformations: `?i` plus one
/// column per property-mapping, in variable form.
fn project_and_convert(
    q: &Pattern,
    instance: &str,
    data: &Graph,
    pms: &[PropertyMapping],
    extra: &[&str],
) -> Result<(BTreeSet<Row>, Vec<Expression>, Vec<String>), OpError> {
    let exps: Vec<Expression> = pms.iter().map(PropertyMapping::expression).collect();
    let vexps = validate_expressions(&exps, q, Substitution::PropertiesToVariables).map_err(mapping_error)?;
    let mut header = OutputHeader::variables(core::iter::once(instance).chain(extra.iter().copied()));
    for (k, e) in vexps.iter().enumerate() {
        header = header.column(&format!("c{k}"), e.clone());
    }
    if vexps.iter().any(Expression::has_aggregate) {
        header = header.grouped_by(Variable::new(instance));
    }
    let res = execute_query(q, data, &header).map_err(mapping_error)?;
    Ok((res.rows, vexps, res.warnings))
}

/// Transforms the instances of the source concept through the
/// property-mapping expressions into instances of the target concept.
pub fn transformation_on_literal(
    p: &TransformParams,
    sabox: &Graph,
) -> Result<(Graph, Vec<String>), OpError> {
    let universe = properties_of(p.stbox);
    let mut props = BTreeSet::new();
    for pm in p.property_mappings {
        for prop in referenced_properties(&pm.expression()) {
            if !universe.contains(&prop) {
                return Err(OpError::UnknownProperty(prop));
            }
            props.insert(prop);
        }
    }
    let mut q = Pattern::triple(var("i"), rdf::type_(), Term::Iri(p.source_concept.clone()));
    for (k, prop) in props.into_iter().enumerate() {
        q = q.opt(Pattern::triple(var("i"), prop, var(&format!("v{k}"))));
    }
    let (rows, vexps, warnings) =
        project_and_convert(&q, "i", sabox, p.property_mappings, &[])?;
    let g = tuples_to_triples(&rows, p.target_concept, &q, p.property_mappings, &vexps)
        .map_err(mapping_error)?;
    Ok((g, warnings))
}

pub struct JoinParams<'a> {
    pub source_concept: &'a Iri,
    pub target_concept: &'a Iri,
    pub stbox: &'a Graph,
    pub ttbox: &'a Graph,
    pub relation: Relation,
    pub common: &'a [CommonPropertyPair],
    pub property_mappings: &'a [PropertyMapping],
}

/// Joins the target concept's instances in `tabox` with the source
/// concept's in `sabox` on the common properties. The result replaces the
/// target concept's instances in `tabox`.
pub fn join_transformation(
    p: &JoinParams,
    sabox: &Graph,
    tabox: &Graph,
) -> Result<(Graph, Vec<String>), OpError> {
    if !p.relation.is_join() || p.common.is_empty() {
        return Err(OpError::Invalid(format!(
            "join of {} and {} needs a join relation and common properties",
            p.source_concept, p.target_concept
        )));
    }
    let s_props = properties_of(p.stbox);
    let t_props = properties_of(p.ttbox);
    for cp in p.common {
        if !s_props.contains(&cp.source) {
            return Err(OpError::UnknownCommonProperty(cp.source.clone()));
        }
        if !t_props.contains(&cp.target) {
            return Err(OpError::UnknownCommonProperty(cp.target.clone()));
        }
    }
    let mut t_side = BTreeSet::new();
    let mut s_side = BTreeSet::new();
    for pm in p.property_mappings {
        for prop in referenced_properties(&pm.expression()) {
            if t_props.contains(&prop) {
                t_side.insert(prop);
            } else if s_props.contains(&prop) {
                s_side.insert(prop);
            } else {
                return Err(OpError::UnknownProperty(prop));
            }
        }
    }

    let mut t = Pattern::triple(var("i"), rdf::type_(), Term::Iri(p.target_concept.clone()));
    for (k, prop) in t_side.into_iter().enumerate() {
        t = t.opt(Pattern::triple(var("i"), prop, var(&format!("t{k}"))));
    }
    let mut s = Pattern::triple(var("j"), rdf::type_(), Term::Iri(p.source_concept.clone()));
    for (k, prop) in s_side.into_iter().enumerate() {
        s = s.opt(Pattern::triple(var("j"), prop, var(&format!("s{k}"))));
    }
    let mut link: Option<Pattern> = None;
    for (k, cp) in p.common.iter().enumerate() {
        let com = format!("com{k}");
        let pair = Pattern::triple(var("i"), cp.target.clone(), var(&com))
            .and(Pattern::triple(var("j"), cp.source.clone(), var(&com)));
        link = Some(match link {
            None => pair,
            Some(l) => l.and(pair),
        });
    }
    let link = link.expect("common properties are nonempty");
    let q = match p.relation {
        Relation::RightOuterJoin => t.opt(s.and(link)),
        Relation::LeftOuterJoin => s.opt(t.and(link)),
        _ => t.and(s).and(link),
    };

    let tc_instances: BTreeSet<Term> = tabox
        .subjects(&rdf::type_(), &Term::Iri(p.target_concept.clone()))
        .cloned()
        .collect();
    let sc_instances: BTreeSet<Term> = sabox
        .subjects(&rdf::type_(), &Term::Iri(p.source_concept.clone()))
        .cloned()
        .collect();
    let data = tabox
        .restrict_subjects(&tc_instances)
        .union(&sabox.restrict_subjects(&sc_instances));

    let (rows, vexps, warnings) =
        project_and_convert(&q, "i", &data, p.property_mappings, &["j"])?;
    // Rows are (i, j, c0, ..); a left outer join falls back to the source
    // instance when no target instance matched.
    let rows: BTreeSet<Row> = rows
        .into_iter()
        .filter_map(|mut row| {
            let j = row.remove(1);
            if row[0].is_none() && p.relation == Relation::LeftOuterJoin {
                row[0] = j;
            }
            row[0].as_ref()?;
            Some(row)
        })
        .collect();
    let joined = tuples_to_triples(&rows, p.target_concept, &q, p.property_mappings, &vexps)
        .map_err(mapping_error)?;
    let mut out = tabox.clone();
    out.subtract(&tabox.restrict_subjects(&tc_instances));
    Ok((out.union(&joined), warnings))
}
