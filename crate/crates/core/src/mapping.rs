//! Source-to-target mappings in the S2TMAP vocabulary.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::diag::Diagnostic;
use crate::graph::Graph;
use crate::operation::Operation;
use crate::query::{
    get_properties_from_expressions, parse_expression, validate_expressions, Expression, Pattern,
    Row, Substitution,
};
use crate::schema::property_universe_of;
use crate::term::{Iri, Term, Triple};
use crate::turtle::Prefixes;
use crate::vocab::{map, owl, qb, qb4o, rdf, rdfs, rdf_member};

// Spellings found in hand-written mapping files, read as synonyms.
const IRI_TYPE_ALT: &str = "http://extbi.lab.aau.dk/ontology/s2tmap/TargetInstanceIRIType";
const IRI_VALUE_ALT: &str = "http://extbi.lab.aau.dk/ontology/s2tmap/targetInstanceIRIvalue";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Relation {
    Equivalence,
    Subsumption,
    Supersumption,
    NaturalJoin,
    LeftOuterJoin,
    RightOuterJoin,
}

impl Relation {
    pub fn from_iri(iri: &str) -> Option<Self> {
        match iri {
            owl::EQUIVALENT_CLASS => return Some(Relation::Equivalence),
            rdfs::SUB_CLASS_OF => return Some(Relation::Subsumption),
            _ => {}
        }
        let local = iri.strip_prefix(map::NS)?;
        [
            ("supersumption", Relation::Supersumption),
            ("join", Relation::NaturalJoin),
            ("leftOuterjoin", Relation::LeftOuterJoin),
            ("rightOuterjoin", Relation::RightOuterJoin),
        ]
        .into_iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(local))
        .map(|(_, r)| r)
    }

    pub fn iri(self) -> Iri {
        match self {
            Relation::Equivalence => owl::equivalent_class(),
            Relation::Subsumption => rdfs::sub_class_of(),
            Relation::Supersumption => map::supersumption(),
            Relation::NaturalJoin => map::join(),
            Relation::LeftOuterJoin => map::left_outer_join(),
            Relation::RightOuterJoin => map::right_outer_join(),
        }
    }

    pub fn is_join(self) -> bool {
        matches!(
            self,
            Relation::NaturalJoin | Relation::LeftOuterJoin | Relation::RightOuterJoin
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MappedInstances {
    All,
    Filter(Expression),
}

/// How target instance IRIs are derived.
#[derive(Clone, Debug, PartialEq)]
pub enum IriValueType {
    SameAsSourceIri,
    Property(Iri),
    Expression(Expression),
    Incremental,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CommonPropertyPair {
    pub source: Iri,
    pub target: Iri,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SourceValue {
    Property(Iri),
    Expression(Expression),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyMapping {
    pub id: Term,
    pub concept_mapping: Term,
    pub target_property: Iri,
    pub source: SourceValue,
}

impl PropertyMapping {
    /// The source side as an expression in property form.
    pub fn expression(&self) -> Expression {
        match &self.source {
            SourceValue::Property(p) => Expression::Property(p.clone()),
            SourceValue::Expression(e) => e.clone(),
        }
    }
}

/// `return(exp, pms)`: the target property whose source expression is `exp`.
pub fn target_of<'a>(exp: &Expression, pms: &'a [PropertyMapping]) -> Option<&'a Iri> {
    pms.iter()
        .find(|pm| pm.expression() == *exp)
        .map(|pm| &pm.target_property)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapDataset {
    pub id: Term,
    pub source_tbox: Option<String>,
    pub target_tbox: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConceptMapping {
    pub id: Term,
    pub map_dataset: Option<Term>,
    pub source_concept: Iri,
    pub target_concept: Iri,
    pub source_location: String,
    pub target_location: String,
    pub relation: Relation,
    pub mapped_instances: MappedInstances,
    pub iri_value: IriValueType,
    pub common_properties: Vec<CommonPropertyPair>,
    pub operations: Vec<Operation>,
    pub property_mappings: Vec<PropertyMapping>,
}

impl ConceptMapping {
    pub fn expressions(&self) -> Vec<Expression> {
        self.property_mappings
            .iter()
            .map(PropertyMapping::expression)
            .collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MappingFile {
    pub datasets: BTreeMap<Term, MapDataset>,
    /// Keyed, and therefore ordered, by concept-mapping identifier.
    pub concept_mappings: BTreeMap<Term, ConceptMapping>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MappingError {
    MissingField { subject: String, field: &'static str },
    Ambiguous { subject: String, field: &'static str },
    UnknownRelation { subject: String, iri: String },
    UnknownOperation { subject: String, name: String },
    UnknownIriValueType { subject: String, iri: String },
    BrokenSequence { subject: String, reason: String },
    BadExpression { subject: String, text: String, reason: String },
    UnknownConceptMapping { subject: String, target: String },
}

impl fmt::Display for MappingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MappingError::MissingField { subject, field } => {
                write!(f, "{subject}: missing {field}")
            }
            MappingError::Ambiguous { subject, field } => {
                write!(f, "{subject}: more than one {field}")
            }
            MappingError::UnknownRelation { subject, iri } => {
                write!(f, "{subject}: unknown relation {iri}")
            }
            MappingError::UnknownOperation { subject, name } => {
                write!(f, "{subject}: unknown operation {name}")
            }
            MappingError::UnknownIriValueType { subject, iri } => {
                write!(f, "{subject}: unknown target instance IRI type {iri}")
            }
            MappingError::BrokenSequence { subject, reason } => {
                write!(f, "{subject}: operation sequence {reason}")
            }
            MappingError::BadExpression {
                subject,
                text,
                reason,
            } => write!(f, "{subject}: cannot parse expression {text:?}: {reason}"),
            MappingError::UnknownConceptMapping { subject, target } => {
                write!(f, "{subject}: concept-mapping {target} is not declared")
            }
        }
    }
}

struct Reader<'a> {
    g: &'a Graph,
    prefixes: &'a Prefixes,
}

impl Reader<'_> {
    fn values(&self, s: &Term, preds: &[&str]) -> BTreeSet<Term> {
        preds
            .iter()
            .flat_map(|p| self.g.objects(s, &Iri::new_unchecked(*p)).cloned())
            .collect()
    }

    fn optional(&self, s: &Term, preds: &[&str], field: &'static str) -> Result<Option<Term>, MappingError> {
        let mut vals = self.values(s, preds).into_iter();
        match (vals.next(), vals.next()) {
            (v, None) => Ok(v),
            _ => Err(MappingError::Ambiguous {
                subject: s.to_string(),
                field,
            }),
        }
    }

    fn required(&self, s: &Term, preds: &[&str], field: &'static str) -> Result<Term, MappingError> {
        self.optional(s, preds, field)?
            .ok_or(MappingError::MissingField {
                subject: s.to_string(),
                field,
            })
    }

    fn required_iri(&self, s: &Term, preds: &[&str], field: &'static str) -> Result<Iri, MappingError> {
        match self.required(s, preds, field)? {
            Term::Iri(i) => Ok(i),
            _ => Err(MappingError::MissingField {
                subject: s.to_string(),
                field,
            }),
        }
    }

    fn expression(&self, s: &Term, text: &str) -> Result<Expression, MappingError> {
        parse_expression(text, self.prefixes).map_err(|e| MappingError::BadExpression {
            subject: s.to_string(),
            text: text.to_string(),
            reason: e.to_string(),
        })
    }

    /// An IRI object is a property; a literal is expression text.
    fn source_value(&self, s: &Term, v: Term) -> Result<SourceValue, MappingError> {
        match v {
            Term::Iri(i) => Ok(SourceValue::Property(i)),
            Term::Literal(l) => match self.expression(s, l.lexical())? {
                Expression::Property(p) => Ok(SourceValue::Property(p)),
                e => Ok(SourceValue::Expression(e)),
            },
            Term::Blank(_) => Err(MappingError::MissingField {
                subject: s.to_string(),
                field: "source value",
            }),
        }
    }

    fn sequence(&self, cm: &Term, node: &Term) -> Result<Vec<Operation>, MappingError> {
        let broken = |reason: String| MappingError::BrokenSequence {
            subject: cm.to_string(),
            reason,
        };
        let mut members: BTreeMap<usize, Vec<Term>> = BTreeMap::new();
        let member_prefix = format!("{}_", rdf::NS);
        for t in self.g.matches(Some(node), None, None) {
            if let Some(n) = t.predicate.as_str().strip_prefix(member_prefix.as_str()) {
                let n: usize = n
                    .parse()
                    .map_err(|_| broken(format!("has member {}", t.predicate)))?;
                members.entry(n).or_default().push(t.object);
            }
        }
        if members.is_empty() {
            return Err(broken("is empty".into()));
        }
        let mut ops = Vec::new();
        for (expected, (n, objs)) in (1..).zip(members) {
            if n != expected {
                return Err(broken(format!("skips rdf:_{expected}")));
            }
            if objs.len() != 1 {
                return Err(broken(format!("has {} entries at rdf:_{n}", objs.len())));
            }
            let name = match &objs[0] {
                Term::Iri(i) => i.local_name().to_string(),
                other => other.value_str().to_string(),
            };
            ops.push(Operation::from_name(&name).ok_or(MappingError::UnknownOperation {
                subject: cm.to_string(),
                name,
            })?);
        }
        Ok(ops)
    }

    fn location(&self, s: &Term, pred: &str, field: &'static str) -> Result<String, MappingError> {
        Ok(self.required(s, &[pred], field)?.value_str().to_string())
    }

    fn concept_mapping(&self, id: &Term) -> Result<ConceptMapping, MappingError> {
        let source_concept = self.required_iri(id, &[map::SOURCE_CONCEPT], "map:sourceConcept")?;
        let target_concept = self.required_iri(id, &[map::TARGET_CONCEPT], "map:targetConcept")?;
        let rel = self.required(id, &[map::RELATION], "map:relation")?;
        let relation = Relation::from_iri(rel.value_str()).ok_or(MappingError::UnknownRelation {
            subject: id.to_string(),
            iri: rel.value_str().to_string(),
        })?;
        let mapped_instances = match self.optional(id, &[map::MAPPED_INSTANCE], "map:mappedInstance")? {
            None => MappedInstances::All,
            Some(t) if t.value_str().trim().eq_ignore_ascii_case("all") => MappedInstances::All,
            Some(t) => MappedInstances::Filter(self.expression(id, t.value_str())?),
        };
        let iri_type = self.optional(
            id,
            &[
                map::TARGET_INSTANCE_IRI_UNIQUE_VALUE_TYPE,
                map::TARGET_INSTANCE_IRI_VALUE_TYPE,
                IRI_TYPE_ALT,
            ],
            "target instance IRI type",
        )?;
        let iri_value_of = |field| {
            self.required(id, &[map::TARGET_INSTANCE_IRI_VALUE, IRI_VALUE_ALT], field)
        };
        let iri_value = match iri_type.as_ref().map(Term::value_str) {
            None | Some(map::SAME_AS_SOURCE_IRI) => IriValueType::SameAsSourceIri,
            Some(map::INCREMENTAL) => IriValueType::Incremental,
            Some(map::PROPERTY) => match iri_value_of("map:targetInstanceIRIValue")? {
                Term::Iri(p) => IriValueType::Property(p),
                t => match self.source_value(id, t)? {
                    SourceValue::Property(p) => IriValueType::Property(p),
                    SourceValue::Expression(e) => IriValueType::Expression(e),
                },
            },
            Some(map::EXPRESSION) => match iri_value_of("map:targetInstanceIRIValue")? {
                Term::Iri(p) => IriValueType::Property(p),
                t => IriValueType::Expression(self.expression(id, t.value_str())?),
            },
            Some(other) => {
                return Err(MappingError::UnknownIriValueType {
                    subject: id.to_string(),
                    iri: other.to_string(),
                })
            }
        };
        let mut common_properties = Vec::new();
        for node in self.values(id, &[map::COMMON_PROPERTY]) {
            common_properties.push(CommonPropertyPair {
                source: self.required_iri(
                    &node,
                    &[map::SOURCE_COMMON_PROPERTY, map::COMMON_SOURCE_PROPERTY],
                    "map:sourceCommonProperty",
                )?,
                target: self.required_iri(
                    &node,
                    &[map::TARGET_COMMON_PROPERTY, map::COMMON_TARGET_PROPERTY],
                    "map:targetCommonProperty",
                )?,
            });
        }
        common_properties.sort();
        let seq = self.required(id, &[map::OPERATION], "map:operation")?;
        let operations = self.sequence(id, &seq)?;
        Ok(ConceptMapping {
            id: id.clone(),
            map_dataset: self.optional(id, &[map::MAP_DATASET], "map:mapDataset")?,
            source_location: self.location(id, map::SOURCE_LOCATION, "map:sourceLocation")?,
            target_location: self.location(id, map::TARGET_LOCATION, "map:targetLocation")?,
            source_concept,
            target_concept,
            relation,
            mapped_instances,
            iri_value,
            common_properties,
            operations,
            property_mappings: Vec::new(),
        })
    }

    fn property_mapping(&self, id: &Term) -> Result<PropertyMapping, MappingError> {
        let concept_mapping = self.required(id, &[map::CONCEPT_MAPPING], "map:conceptMapping")?;
        let target_property = self.required_iri(id, &[map::TARGET_PROPERTY], "map:targetProperty")?;
        let kind = self.optional(
            id,
            &[map::SOURCE_TYPE_4_TARGET_PROPERTY_VALUE],
            "map:sourceType4TargetPropertyValue",
        )?;
        let value = self.required(
            id,
            &[map::SOURCE_4_TARGET_PROPERTY_VALUE],
            "map:source4TargetPropertyValue",
        )?;
        let source = match (kind.as_ref().map(Term::value_str), value) {
            (Some(map::EXPRESSION), Term::Literal(l)) => {
                SourceValue::Expression(self.expression(id, l.lexical())?)
            }
            (_, v) => self.source_value(id, v)?,
        };
        Ok(PropertyMapping {
            id: id.clone(),
            concept_mapping,
            target_property,
            source,
        })
    }
}

/// Decodes an S2TMAP graph. `prefixes` resolve prefixed names inside
/// expression literals.
pub fn parse_mapping(g: &Graph, prefixes: &Prefixes) -> Result<MappingFile, MappingError> {
    let r = Reader { g, prefixes };
    let ty = rdf::type_();
    let typed = |class: Iri| -> BTreeSet<Term> { g.subjects(&ty, &Term::Iri(class)).cloned().collect() };

    let mut out = MappingFile::default();
    for id in typed(map::dataset()) {
        let ds = MapDataset {
            id: id.clone(),
            source_tbox: r
                .optional(&id, &[map::SOURCE_TBOX], "map:sourceTBox")?
                .map(|t| t.value_str().to_string()),
            target_tbox: r
                .optional(&id, &[map::TARGET_TBOX], "map:targetTBox")?
                .map(|t| t.value_str().to_string()),
        };
        out.datasets.insert(id, ds);
    }
    for id in typed(map::concept_mapping_class()) {
        let cm = r.concept_mapping(&id)?;
        out.concept_mappings.insert(id, cm);
    }
    let mut pm_ids = typed(map::property_mapping_class());
    pm_ids.extend(
        g.matches(None, Some(&map::concept_mapping()), None)
            .map(|t| t.subject),
    );
    for id in pm_ids {
        let pm = r.property_mapping(&id)?;
        match out.concept_mappings.get_mut(&pm.concept_mapping) {
            Some(cm) => cm.property_mappings.push(pm),
            None => {
                return Err(MappingError::UnknownConceptMapping {
                    subject: id.to_string(),
                    target: pm.concept_mapping.to_string(),
                })
            }
        }
    }
    Ok(out)
}

impl MappingFile {
    /// Concept-mappings whose target concept is `x`, in identifier order.
    pub fn targeting(&self, x: &Iri) -> Vec<&ConceptMapping> {
        self.concept_mappings
            .values()
            .filter(|cm| cm.target_concept == *x)
            .collect()
    }

    pub fn mentions(&self, x: &Iri) -> bool {
        self.concept_mappings
            .values()
            .any(|cm| cm.target_concept == *x || cm.source_concept == *x)
    }

    pub fn dataset_of(&self, cm: &ConceptMapping) -> Option<&MapDataset> {
        cm.map_dataset.as_ref().and_then(|d| self.datasets.get(d))
    }

    /// Some cycle over `(concept, location)` nodes, if any.
    pub fn find_cycle(&self) -> Option<Vec<&ConceptMapping>> {
        type Node<'a> = (&'a Iri, &'a str);
        let mut out_edges: BTreeMap<Node, Vec<&ConceptMapping>> = BTreeMap::new();
        for cm in self.concept_mappings.values() {
            out_edges
                .entry((&cm.source_concept, cm.source_location.as_str()))
                .or_default()
                .push(cm);
        }
        fn dfs<'a>(
            n: Node<'a>,
            out_edges: &BTreeMap<Node<'a>, Vec<&'a ConceptMapping>>,
            state: &mut BTreeMap<Node<'a>, u8>,
            path: &mut Vec<&'a ConceptMapping>,
        ) -> Option<Vec<&'a ConceptMapping>> {
            state.insert(n, 1);
            for cm in out_edges.get(&n).into_iter().flatten() {
                let m = (&cm.target_concept, cm.target_location.as_str());
                path.push(cm);
                match state.get(&m).copied().unwrap_or(0) {
                    1 => {
                        let start = path
                            .iter()
                            .position(|c| (&c.source_concept, c.source_location.as_str()) == m)
                            .unwrap_or(0);
                        return Some(path[start..].to_vec());
                    }
                    0 => {
                        if let Some(c) = dfs(m, out_edges, state, path) {
                            return Some(c);
                        }
                    }
                    _ => {}
                }
                path.pop();
            }
            state.insert(n, 2);
            None
        }
        let mut state = BTreeMap::new();
        let starts: Vec<Node> = out_edges.keys().copied().collect();
        for n in starts {
            if state.get(&n).copied().unwrap_or(0) == 0 {
                let mut path = Vec::new();
                if let Some(c) = dfs(n, &out_edges, &mut state, &mut path) {
                    return Some(c);
                }
            }
        }
        None
    }

    /// Serializes the model back to S2TMAP triples.
    pub fn to_graph(&self) -> Graph {
        let mut g = Graph::new();
        let ty = rdf::type_();
        let mut add = |s: &Term, p: Iri, o: Term| {
            g.insert(Triple::new_unchecked(s.clone(), p, o));
        };
        for ds in self.datasets.values() {
            add(&ds.id, ty.clone(), Term::Iri(map::dataset()));
            if let Some(s) = &ds.source_tbox {
                add(&ds.id, map::source_tbox(), Term::string(s));
            }
            if let Some(t) = &ds.target_tbox {
                add(&ds.id, map::target_tbox(), Term::string(t));
            }
        }
        let mut n = 0usize;
        let mut fresh = |kind: &str| {
            n += 1;
            Term::blank(&format!("{kind}{n}"))
        };
        for cm in self.concept_mappings.values() {
            let id = &cm.id;
            add(id, ty.clone(), Term::Iri(map::concept_mapping_class()));
            if let Some(d) = &cm.map_dataset {
                add(id, map::map_dataset(), d.clone());
            }
            add(id, map::source_concept(), Term::Iri(cm.source_concept.clone()));
            add(id, map::target_concept(), Term::Iri(cm.target_concept.clone()));
            add(id, map::source_location(), Term::string(&cm.source_location));
            add(id, map::target_location(), Term::string(&cm.target_location));
            add(id, map::relation(), Term::Iri(cm.relation.iri()));
            let mapped = match &cm.mapped_instances {
                MappedInstances::All => "All".to_string(),
                MappedInstances::Filter(e) => e.to_string(),
            };
            add(id, map::mapped_instance(), Term::string(&mapped));
            let (kind, value) = match &cm.iri_value {
                IriValueType::SameAsSourceIri => (map::same_as_source_iri(), None),
                IriValueType::Incremental => (map::incremental(), None),
                IriValueType::Property(p) => (map::property(), Some(Term::Iri(p.clone()))),
                IriValueType::Expression(e) => (map::expression(), Some(Term::string(&e.to_string()))),
            };
            add(id, map::target_instance_iri_value_type(), Term::Iri(kind));
            if let Some(v) = value {
                add(id, map::target_instance_iri_value(), v);
            }
            let seq = fresh("opSeq");
            add(id, map::operation(), seq.clone());
            add(&seq, ty.clone(), Term::Iri(rdf::seq()));
            for (i, op) in cm.operations.iter().enumerate() {
                add(&seq, rdf_member(i + 1), Term::Iri(op.iri()));
            }
            for cp in &cm.common_properties {
                let node = fresh("cp");
                add(id, map::common_property(), node.clone());
                add(&node, map::source_common_property(), Term::Iri(cp.source.clone()));
                add(&node, map::target_common_property(), Term::Iri(cp.target.clone()));
            }
            for pm in &cm.property_mappings {
                add(&pm.id, ty.clone(), Term::Iri(map::property_mapping_class()));
                add(&pm.id, map::concept_mapping(), pm.concept_mapping.clone());
                add(&pm.id, map::target_property(), Term::Iri(pm.target_property.clone()));
                let (kind, value) = match &pm.source {
                    SourceValue::Property(p) => (map::property(), Term::Iri(p.clone())),
                    SourceValue::Expression(e) => (map::expression(), Term::string(&e.to_string())),
                };
                add(&pm.id, map::source_type4_target_property_value(), Term::Iri(kind));
                add(&pm.id, map::source4_target_property_value(), value);
            }
        }
        g
    }
}

/// Structural checks on a mapping file. `tboxes` are the TBoxes whose
/// properties target properties must come from; an empty slice skips that
/// check.
pub fn validate_mapping(m: &MappingFile, tboxes: &[&Graph]) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if let Some(cycle) = m.find_cycle() {
        let ids: Vec<String> = cycle.iter().map(|c| c.id.to_string()).collect();
        out.push(Diagnostic::new(
            cycle[0].id.to_string(),
            format!("concept-mappings form a cycle: {}", ids.join(" -> ")),
        ));
    }
    let sources: BTreeSet<&Iri> = m.concept_mappings.values().map(|c| &c.source_concept).collect();
    let mut targeted: BTreeMap<&Iri, Vec<&ConceptMapping>> = BTreeMap::new();
    for cm in m.concept_mappings.values() {
        targeted.entry(&cm.target_concept).or_default().push(cm);
    }
    for (c, cms) in &targeted {
        if cms.len() > 1 && sources.contains(c) {
            out.push(Diagnostic::new(
                c.as_str(),
                format!("intermediate concept is the target of {} concept-mappings", cms.len()),
            ));
        }
    }
    let universe: BTreeSet<Iri> = tboxes.iter().flat_map(|g| property_universe_of(g)).collect();
    for cm in m.concept_mappings.values() {
        let id = cm.id.to_string();
        if cm.relation.is_join() && cm.common_properties.is_empty() {
            out.push(Diagnostic::new(id.as_str(), "join concept-mapping has no common properties"));
        }
        if !cm.relation.is_join() && !cm.common_properties.is_empty() {
            out.push(Diagnostic::new(
                id.as_str(),
                "common properties on a concept-mapping that is not a join",
            ));
        }
        if cm.operations.is_empty() {
            out.push(Diagnostic::new(id.as_str(), "empty operation sequence"));
        }
        if !tboxes.is_empty() {
            for pm in &cm.property_mappings {
                if !universe.contains(&pm.target_property) {
                    out.push(Diagnostic::new(
                        pm.id.to_string(),
                        format!("target property {} is not in the target TBox", pm.target_property),
                    ));
                }
            }
        }
    }
    out
}

/// Instance IRI to its `(property, value)` pairs.
pub type InstanceMap = BTreeMap<Term, BTreeSet<(Iri, Term)>>;

/// Subjects that belong to `concept` through `rdf:type`, `qb4o:memberOf` or
/// `qb:dataSet`.
pub fn instances_of(concept: &Iri, abox: &Graph) -> BTreeSet<Term> {
    let c = Term::Iri(concept.clone());
    [rdf::type_(), qb4o::member_of(), qb::dataset()]
        .iter()
        .flat_map(|p| abox.subjects(p, &c).cloned().collect::<Vec<_>>())
        .collect()
}

/// Instances of `concept` with their values for `properties`.
pub fn instances_with_properties(concept: &Iri, abox: &Graph, properties: &BTreeSet<Iri>) -> InstanceMap {
    instances_of(concept, abox)
        .into_iter()
        .map(|i| {
            let pairs = abox
                .describe(&i)
                .filter(|t| properties.contains(&t.predicate))
                .map(|t| (t.predicate, t.object))
                .collect();
            (i, pairs)
        })
        .collect()
}

/// The instances of `sc` with the pairs the property-mappings read.
pub fn mapped_source_instances(
    sc: &Iri,
    stbox: &Graph,
    sabox: &Graph,
    pms: &[PropertyMapping],
) -> InstanceMap {
    let exps: Vec<Expression> = pms.iter().map(PropertyMapping::expression).collect();
    let props = get_properties_from_expressions(&property_universe_of(stbox), &exps);
    instances_with_properties(sc, sabox, &props)
}

/// Turns projected rows `(i, exp_1, .., exp_n)` into triples of `tc`.
/// `exps` are the header expressions in variable form over `q`.
pub fn tuples_to_triples(
    rows: &BTreeSet<Row>,
    tc: &Iri,
    q: &Pattern,
    pms: &[PropertyMapping],
    exps: &[Expression],
) -> Result<Graph, MappingError> {
    let as_props = validate_expressions(exps, q, Substitution::VariablesToProperties).map_err(|e| {
        MappingError::BadExpression {
            subject: tc.to_string(),
            text: String::new(),
            reason: e.to_string(),
        }
    })?;
    let predicates: Vec<Iri> = as_props
        .iter()
        .map(|e| {
            target_of(e, pms).cloned().ok_or_else(|| MappingError::MissingField {
                subject: format!("{tc} column {e}"),
                field: "property-mapping",
            })
        })
        .collect::<Result<_, _>>()?;
    let mut g = Graph::new();
    let class = Term::Iri(tc.clone());
    for row in rows {
        let Some(Some(i)) = row.first() else { continue };
        if i.is_literal() {
            continue;
        }
        g.insert(Triple::new_unchecked(i.clone(), rdf::type_(), class.clone()));
        for (p, v) in predicates.iter().zip(&row[1..]) {
            if let Some(v) = v {
                g.insert(Triple::new_unchecked(i.clone(), p.clone(), v.clone()));
            }
        }
    }
    Ok(g)
}
