//! QB4OLAP target schemas: loading, validation, and TBox extraction from an
//! ABox.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::diag::Diagnostic;
use crate::graph::Graph;
use crate::term::{Iri, Term, Triple};
use crate::vocab::{owl, qb, qb4o, rdf, rdfs};

/// `qb:Dataset`, the spelling some hand-written TBoxes use for `qb:DataSet`.
const QB_DATASET_ALT: &str = "http://purl.org/linked-data/cube#Dataset";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UpdateType {
    Type1,
    Type2,
    Type3,
}

impl UpdateType {
    pub fn iri(self) -> Iri {
        match self {
            UpdateType::Type1 => qb4o::type1(),
            UpdateType::Type2 => qb4o::type2(),
            UpdateType::Type3 => qb4o::type3(),
        }
    }

    pub fn from_iri(iri: &str) -> Option<Self> {
        match iri {
            qb4o::TYPE1 => Some(UpdateType::Type1),
            qb4o::TYPE2 => Some(UpdateType::Type2),
            qb4o::TYPE3 => Some(UpdateType::Type3),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Cardinality {
    OneToOne,
    OneToMany,
    ManyToOne,
    ManyToMany,
}

impl Cardinality {
    const ALL: [(Cardinality, &'static str); 4] = [
        (Cardinality::OneToOne, qb4o::ONE_TO_ONE),
        (Cardinality::OneToMany, qb4o::ONE_TO_MANY),
        (Cardinality::ManyToOne, qb4o::MANY_TO_ONE),
        (Cardinality::ManyToMany, qb4o::MANY_TO_MANY),
    ];

    pub fn iri(self) -> Iri {
        let (_, s) = Self::ALL.iter().find(|(c, _)| *c == self).unwrap();
        Iri::new_unchecked(*s)
    }

    pub fn from_iri(iri: &str) -> Option<Self> {
        Self::ALL.iter().find(|(_, s)| *s == iri).map(|(c, _)| *c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum AggregateFunction {
    Sum,
    Avg,
    Max,
    Min,
    Count,
}

impl AggregateFunction {
    const ALL: [(AggregateFunction, &'static str); 5] = [
        (AggregateFunction::Sum, qb4o::SUM),
        (AggregateFunction::Avg, qb4o::AVG),
        (AggregateFunction::Max, qb4o::MAX),
        (AggregateFunction::Min, qb4o::MIN),
        (AggregateFunction::Count, qb4o::COUNT),
    ];

    pub fn iri(self) -> Iri {
        let (_, s) = Self::ALL.iter().find(|(a, _)| *a == self).unwrap();
        Iri::new_unchecked(*s)
    }

    pub fn from_iri(iri: &str) -> Option<Self> {
        Self::ALL.iter().find(|(_, s)| *s == iri).map(|(a, _)| *a)
    }
}

/// A child-to-parent step of a hierarchy.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct HierarchyStep {
    pub hierarchy: Iri,
    pub child: Iri,
    pub parent: Iri,
    pub rollup: Option<Iri>,
    pub cardinality: Option<Cardinality>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionSchema {
    pub name: Iri,
    /// Hierarchy IRI to its declared levels.
    pub hierarchies: BTreeMap<Iri, BTreeSet<Iri>>,
    pub steps: BTreeSet<HierarchyStep>,
}

impl DimensionSchema {
    /// Every level mentioned by a hierarchy or a step.
    pub fn levels(&self) -> BTreeSet<Iri> {
        let mut out: BTreeSet<Iri> = self.hierarchies.values().flatten().cloned().collect();
        for s in &self.steps {
            out.insert(s.child.clone());
            out.insert(s.parent.clone());
        }
        out
    }

    /// Child-to-parent edges of the level order.
    pub fn edges(&self) -> BTreeSet<(Iri, Iri)> {
        self.steps
            .iter()
            .map(|s| (s.child.clone(), s.parent.clone()))
            .collect()
    }

    /// Levels that are never a child.
    pub fn top_levels(&self) -> BTreeSet<Iri> {
        let children: BTreeSet<Iri> = self.steps.iter().map(|s| s.child.clone()).collect();
        self.levels()
            .into_iter()
            .filter(|l| !children.contains(l))
            .collect()
    }

    /// Rollup properties keyed by `(child, parent)`.
    pub fn rollups(&self) -> BTreeMap<(Iri, Iri), Iri> {
        self.steps
            .iter()
            .filter_map(|s| {
                s.rollup
                    .clone()
                    .map(|r| ((s.child.clone(), s.parent.clone()), r))
            })
            .collect()
    }

    /// Some cycle of the level order, as a list of levels, if any.
    pub fn find_cycle(&self) -> Option<Vec<Iri>> {
        let edges = self.edges();
        let mut adj: BTreeMap<&Iri, Vec<&Iri>> = BTreeMap::new();
        for (c, p) in &edges {
            adj.entry(c).or_default().push(p);
        }
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state: BTreeMap<&Iri, u8> = BTreeMap::new();
        let mut stack: Vec<&Iri> = Vec::new();
        fn visit<'a>(
            n: &'a Iri,
            adj: &BTreeMap<&'a Iri, Vec<&'a Iri>>,
            state: &mut BTreeMap<&'a Iri, u8>,
            stack: &mut Vec<&'a Iri>,
        ) -> Option<Vec<Iri>> {
            state.insert(n, 1);
            stack.push(n);
            for &m in adj.get(n).map(Vec::as_slice).unwrap_or(&[]) {
                match state.get(m).copied().unwrap_or(0) {
                    1 => {
                        let start = stack.iter().position(|x| *x == m).unwrap();
                        return Some(stack[start..].iter().map(|i| (*i).clone()).collect());
                    }
                    0 => {
                        if let Some(c) = visit(m, adj, state, stack) {
                            return Some(c);
                        }
                    }
                    _ => {}
                }
            }
            stack.pop();
            state.insert(n, 2);
            None
        }
        let nodes: Vec<&Iri> = adj.keys().copied().collect();
        for n in nodes {
            if state.get(n).copied().unwrap_or(0) == 0 {
                if let Some(c) = visit(n, &adj, &mut state, &mut stack) {
                    return Some(c);
                }
            }
        }
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelSchema {
    pub name: Iri,
    pub attributes: BTreeSet<Iri>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubeSchema {
    /// The data structure definition.
    pub name: Iri,
    /// QB datasets using this structure.
    pub datasets: BTreeSet<Iri>,
    pub bottom_levels: BTreeSet<Iri>,
    pub measures: BTreeMap<Iri, BTreeSet<AggregateFunction>>,
}

/// What a target IRI is, as far as the ETL operations care.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetKind {
    Level,
    LevelAttribute,
    RollupProperty,
    MeasureProperty,
    Dataset,
    ObjectProperty,
    DatatypeProperty,
    Dimension,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LoadError {
    DanglingStep { step: String, reason: String },
    UndeclaredLevel { level: Iri, referenced_by: String },
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::DanglingStep { step, reason } => {
                write!(f, "hierarchy step {step}: {reason}")
            }
            LoadError::UndeclaredLevel {
                level,
                referenced_by,
            } => write!(f, "level {level} referenced by {referenced_by} is not declared"),
        }
    }
}

/// A QB4OLAP target TBox.
#[derive(Clone, Debug, Default)]
pub struct TargetTBox {
    pub graph: Graph,
    /// Warehouse namespace, without a trailing `/` or `#`.
    pub prefix: Option<String>,
    pub dimensions: BTreeMap<Iri, DimensionSchema>,
    pub cubes: BTreeMap<Iri, CubeSchema>,
    pub levels: BTreeMap<Iri, LevelSchema>,
    pub update_types: BTreeMap<Iri, UpdateType>,
    /// Non-fatal findings from loading.
    pub warnings: Vec<Diagnostic>,
}

impl TargetTBox {
    /// Builds the structured model from a QB4OLAP graph.
    pub fn load(g: &Graph) -> Result<Self, LoadError> {
        let type_ = rdf::type_();
        let typed = |class: &str| -> BTreeSet<Iri> {
            g.subjects(&type_, &Term::iri(class))
                .filter_map(|t| t.as_iri().cloned())
                .collect()
        };
        let iri_objects = |s: &Term, p: &Iri| -> BTreeSet<Iri> {
            g.objects(s, p).filter_map(|t| t.as_iri().cloned()).collect()
        };
        let mut warnings = Vec::new();

        // Levels and their attributes.
        let declared_levels = typed(qb4o::LEVEL_PROPERTY);
        let mut levels: BTreeMap<Iri, LevelSchema> = declared_levels
            .iter()
            .map(|l| {
                let s = Term::Iri(l.clone());
                let mut attributes = iri_objects(&s, &qb4o::has_attribute());
                attributes.extend(
                    g.subjects(&qb4o::in_level(), &s)
                        .filter_map(|t| t.as_iri().cloned()),
                );
                (
                    l.clone(),
                    LevelSchema {
                        name: l.clone(),
                        attributes,
                    },
                )
            })
            .collect();

        let mut attributes = typed(qb4o::LEVEL_ATTRIBUTE);
        for l in levels.values() {
            attributes.extend(l.attributes.iter().cloned());
        }
        let mut update_types = BTreeMap::new();
        for a in &attributes {
            let ut = g
                .object(&Term::Iri(a.clone()), &qb4o::update_type())
                .and_then(|t| t.as_iri())
                .and_then(|i| UpdateType::from_iri(i.as_str()));
            let ut = ut.unwrap_or_else(|| {
                warnings.push(Diagnostic::new(
                    a.as_str(),
                    "level attribute has no qb4o:updateType; using Type1",
                ));
                UpdateType::Type1
            });
            update_types.insert(a.clone(), ut);
        }

        // Hierarchies and the dimensions that own them.
        let hierarchies = typed(qb4o::HIERARCHY);
        let mut dimensions: BTreeMap<Iri, DimensionSchema> = typed(qb::DIMENSION_PROPERTY)
            .into_iter()
            .map(|d| {
                (
                    d.clone(),
                    DimensionSchema {
                        name: d,
                        hierarchies: BTreeMap::new(),
                        steps: BTreeSet::new(),
                    },
                )
            })
            .collect();
        let mut owner: BTreeMap<Iri, BTreeSet<Iri>> = BTreeMap::new();
        for d in dimensions.keys() {
            for h in iri_objects(&Term::Iri(d.clone()), &qb4o::has_hierarchy()) {
                owner.entry(h).or_default().insert(d.clone());
            }
        }
        for h in &hierarchies {
            for d in iri_objects(&Term::Iri(h.clone()), &qb4o::in_dimension()) {
                owner.entry(h.clone()).or_default().insert(d);
            }
        }
        for h in &hierarchies {
            let hl = iri_objects(&Term::Iri(h.clone()), &qb4o::has_level());
            for l in &hl {
                if !levels.contains_key(l) {
                    return Err(LoadError::UndeclaredLevel {
                        level: l.clone(),
                        referenced_by: h.as_str().to_string(),
                    });
                }
            }
            let dims = owner.get(h).cloned().unwrap_or_default();
            if dims.is_empty() {
                warnings.push(Diagnostic::new(h.as_str(), "hierarchy belongs to no dimension"));
            }
            for d in dims {
                let dim = dimensions.entry(d.clone()).or_insert_with(|| DimensionSchema {
                    name: d.clone(),
                    hierarchies: BTreeMap::new(),
                    steps: BTreeSet::new(),
                });
                dim.hierarchies.insert(h.clone(), hl.clone());
            }
        }

        // Hierarchy steps.
        let step_nodes: Vec<Term> = g
            .subjects(&type_, &Term::iri(qb4o::HIERARCHY_STEP))
            .cloned()
            .collect();
        for node in step_nodes {
            let name = node.to_string();
            let single = |p: Iri, what: &str| -> Result<Iri, LoadError> {
                let vals = iri_objects(&node, &p);
                match vals.len() {
                    1 => Ok(vals.into_iter().next().unwrap()),
                    0 => Err(LoadError::DanglingStep {
                        step: name.clone(),
                        reason: format!("missing {what}"),
                    }),
                    _ => Err(LoadError::DanglingStep {
                        step: name.clone(),
                        reason: format!("more than one {what}"),
                    }),
                }
            };
            let hierarchy = single(qb4o::in_hierarchy(), "qb4o:inHierarchy")?;
            let child = single(qb4o::child_level(), "qb4o:childLevel")?;
            let parent = single(qb4o::parent_level(), "qb4o:parentLevel")?;
            if !hierarchies.contains(&hierarchy) {
                return Err(LoadError::DanglingStep {
                    step: name,
                    reason: format!("hierarchy {hierarchy} is not declared"),
                });
            }
            for l in [&child, &parent] {
                if !levels.contains_key(l) {
                    return Err(LoadError::UndeclaredLevel {
                        level: l.clone(),
                        referenced_by: name.clone(),
                    });
                }
            }
            let rollup = g
                .object(&node, &qb4o::rollup())
                .and_then(|t| t.as_iri())
                .cloned();
            let cardinality = g
                .object(&node, &qb4o::pc_cardinality())
                .and_then(|t| t.as_iri())
                .and_then(|i| Cardinality::from_iri(i.as_str()));
            let step = HierarchyStep {
                hierarchy: hierarchy.clone(),
                child,
                parent,
                rollup,
                cardinality,
            };
            for d in owner.get(&hierarchy).into_iter().flatten() {
                if let Some(dim) = dimensions.get_mut(d) {
                    dim.steps.insert(step.clone());
                }
            }
        }

        // Cubes.
        let mut cubes = BTreeMap::new();
        for dsd in typed(qb::DATA_STRUCTURE_DEFINITION) {
            let s = Term::Iri(dsd.clone());
            let mut bottom_levels = BTreeSet::new();
            let mut measures = BTreeMap::new();
            for comp in g.objects(&s, &qb::component()) {
                bottom_levels.extend(iri_objects(comp, &qb4o::level()));
                for m in iri_objects(comp, &qb::measure()) {
                    let aggs: BTreeSet<AggregateFunction> = g
                        .objects(comp, &qb4o::aggregate_function())
                        .filter_map(|t| t.as_iri())
                        .filter_map(|i| AggregateFunction::from_iri(i.as_str()))
                        .collect();
                    measures
                        .entry(m)
                        .or_insert_with(BTreeSet::new)
                        .extend(aggs);
                }
            }
            for l in &bottom_levels {
                levels.entry(l.clone()).or_insert_with(|| {
                    warnings.push(Diagnostic::new(
                        l.as_str(),
                        "cube component level is not typed qb4o:LevelProperty",
                    ));
                    LevelSchema {
                        name: l.clone(),
                        attributes: BTreeSet::new(),
                    }
                });
            }
            let datasets = g
                .subjects(&qb::structure(), &s)
                .filter_map(|t| t.as_iri().cloned())
                .collect();
            cubes.insert(
                dsd.clone(),
                CubeSchema {
                    name: dsd,
                    datasets,
                    bottom_levels,
                    measures,
                },
            );
        }

        let mut t = TargetTBox {
            graph: g.clone(),
            prefix: None,
            dimensions,
            cubes,
            levels,
            update_types,
            warnings,
        };
        t.prefix = t.guess_prefix();
        Ok(t)
    }

    pub fn with_prefix(mut self, prefix: &str) -> Self {
        self.prefix = Some(prefix.trim_end_matches(['/', '#']).to_string());
        self
    }

    /// The `owl:Ontology` IRI if declared, else the namespace shared by most
    /// levels and datasets.
    fn guess_prefix(&self) -> Option<String> {
        if let Some(o) = self
            .graph
            .subjects(&rdf::type_(), &Term::iri(owl::ONTOLOGY))
            .find_map(|t| t.as_iri())
        {
            return Some(o.as_str().trim_end_matches(['/', '#']).to_string());
        }
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        let datasets = self.cubes.values().flat_map(|c| c.datasets.iter());
        for i in self.levels.keys().chain(datasets) {
            let s = i.as_str();
            let ns = match s.rfind(['/', '#']) {
                Some(pos) => &s[..pos],
                None => continue,
            };
            *counts.entry(ns).or_default() += 1;
        }
        // Ties go to the lexicographically smallest namespace.
        counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(ns, _)| ns.to_string())
    }

    /// C(T).
    pub fn concepts(&self) -> BTreeSet<Iri> {
        concepts_of(&self.graph)
    }

    /// P(T).
    pub fn properties(&self) -> BTreeSet<Iri> {
        properties_of(&self.graph)
    }

    /// Properties a mapping may target: P(T) plus levels and dimensions,
    /// which observations use as predicates.
    pub fn property_universe(&self) -> BTreeSet<Iri> {
        property_universe_of(&self.graph)
    }

    pub fn is_level(&self, x: &Iri) -> bool {
        self.levels.contains_key(x)
    }

    /// The first `rdfs:range` IRI of `x`.
    pub fn range(&self, x: &Iri) -> Option<Iri> {
        self.graph
            .object(&Term::Iri(x.clone()), &rdfs::range())
            .and_then(|t| t.as_iri())
            .cloned()
    }

    pub fn target_kind(&self, x: &Iri) -> Option<TargetKind> {
        let s = Term::Iri(x.clone());
        let is = |c: &str| self.graph.has_type(&s, c);
        if self.levels.contains_key(x) {
            Some(TargetKind::Level)
        } else if is(qb4o::LEVEL_ATTRIBUTE) || self.update_types.contains_key(x) {
            Some(TargetKind::LevelAttribute)
        } else if is(qb4o::ROLLUP_PROPERTY) {
            Some(TargetKind::RollupProperty)
        } else if is(qb::MEASURE_PROPERTY) || self.cubes.values().any(|c| c.measures.contains_key(x)) {
            Some(TargetKind::MeasureProperty)
        } else if is(qb::DATA_SET) || is(QB_DATASET_ALT) {
            Some(TargetKind::Dataset)
        } else if is(qb::DIMENSION_PROPERTY) {
            Some(TargetKind::Dimension)
        } else if is(owl::OBJECT_PROPERTY) {
            Some(TargetKind::ObjectProperty)
        } else if is(owl::DATATYPE_PROPERTY) || is(rdf::PROPERTY) {
            Some(TargetKind::DatatypeProperty)
        } else {
            None
        }
    }

    /// Update type of a level attribute; `Type1` when undeclared.
    pub fn update_type(&self, attribute: &Iri) -> UpdateType {
        self.update_types
            .get(attribute)
            .copied()
            .unwrap_or(UpdateType::Type1)
    }

    /// Dimensions whose levels include `level`.
    pub fn dimensions_of(&self, level: &Iri) -> BTreeSet<Iri> {
        self.dimensions
            .values()
            .filter(|d| d.levels().contains(level))
            .map(|d| d.name.clone())
            .collect()
    }

    /// Checks the dimension and cube invariants. Empty iff all hold.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        for d in self.dimensions.values() {
            let name = d.name.as_str();
            if let Some(cycle) = d.find_cycle() {
                let path: Vec<&str> = cycle.iter().map(Iri::as_str).collect();
                out.push(Diagnostic::new(
                    name,
                    format!("cyclic level order: {}", path.join(" -> ")),
                ));
                continue;
            }
            let tops = d.top_levels();
            let all: Vec<&Iri> = tops
                .iter()
                .filter(|l| self.levels.get(*l).is_none_or(|s| s.attributes.is_empty()))
                .collect();
            if tops.len() != 1 || all.len() != 1 {
                out.push(Diagnostic::new(
                    name,
                    format!(
                        "expected exactly one top level without attributes (All), found {}",
                        tops.len()
                    ),
                ));
            }
            for s in &d.steps {
                if let Some(hl) = d.hierarchies.get(&s.hierarchy) {
                    for l in [&s.child, &s.parent] {
                        if !hl.is_empty() && !hl.contains(l) && !tops.contains(l) {
                            out.push(Diagnostic::new(
                                s.hierarchy.as_str(),
                                format!("step level {l} is not a level of the hierarchy"),
                            ));
                        }
                    }
                }
                if let Some(r) = &s.rollup {
                    if !self.graph.has_type(&Term::Iri(r.clone()), qb4o::ROLLUP_PROPERTY) {
                        out.push(Diagnostic::new(
                            r.as_str(),
                            "rollup is not typed qb4o:RollupProperty",
                        ));
                    }
                }
            }
        }
        for c in self.cubes.values() {
            let name = c.name.as_str();
            let mut seen: BTreeMap<Iri, Iri> = BTreeMap::new();
            for l in &c.bottom_levels {
                let dims = self.dimensions_of(l);
                if dims.is_empty() {
                    out.push(Diagnostic::new(
                        name,
                        format!("bottom level {l} belongs to no dimension"),
                    ));
                }
                for d in dims {
                    if let Some(other) = seen.insert(d.clone(), l.clone()) {
                        out.push(Diagnostic::new(
                            name,
                            format!("bottom levels {other} and {l} share dimension {d}"),
                        ));
                    }
                }
            }
            for (m, aggs) in &c.measures {
                if aggs.is_empty() {
                    out.push(Diagnostic::new(
                        m.as_str(),
                        "measure has no aggregate function",
                    ));
                }
            }
        }
        out
    }

    /// Serializes the structured model back to QB4OLAP triples.
    pub fn to_graph(&self) -> Graph {
        let mut g = Graph::new();
        let iri = |i: &Iri| Term::Iri(i.clone());
        let mut add = |s: Term, p: Iri, o: Term| {
            g.insert(Triple::new_unchecked(s, p, o));
        };
        let ty = rdf::type_();
        for l in self.levels.values() {
            add(iri(&l.name), ty.clone(), Term::iri(qb4o::LEVEL_PROPERTY));
            for a in &l.attributes {
                add(iri(&l.name), qb4o::has_attribute(), iri(a));
            }
        }
        for (a, ut) in &self.update_types {
            add(iri(a), ty.clone(), Term::iri(qb4o::LEVEL_ATTRIBUTE));
            add(iri(a), qb4o::update_type(), Term::Iri(ut.iri()));
        }
        let mut n = 0usize;
        for d in self.dimensions.values() {
            add(iri(&d.name), ty.clone(), Term::iri(qb::DIMENSION_PROPERTY));
            for (h, hl) in &d.hierarchies {
                add(iri(h), ty.clone(), Term::iri(qb4o::HIERARCHY));
                add(iri(&d.name), qb4o::has_hierarchy(), iri(h));
                for l in hl {
                    add(iri(h), qb4o::has_level(), iri(l));
                }
            }
            for s in &d.steps {
                let node = Term::blank(&format!("step{n}"));
                n += 1;
                add(node.clone(), ty.clone(), Term::iri(qb4o::HIERARCHY_STEP));
                add(node.clone(), qb4o::in_hierarchy(), iri(&s.hierarchy));
                add(node.clone(), qb4o::child_level(), iri(&s.child));
                add(node.clone(), qb4o::parent_level(), iri(&s.parent));
                if let Some(r) = &s.rollup {
                    add(iri(r), ty.clone(), Term::iri(qb4o::ROLLUP_PROPERTY));
                    add(node.clone(), qb4o::rollup(), iri(r));
                }
                if let Some(c) = s.cardinality {
                    add(node.clone(), qb4o::pc_cardinality(), Term::Iri(c.iri()));
                }
            }
        }
        for c in self.cubes.values() {
            add(iri(&c.name), ty.clone(), Term::iri(qb::DATA_STRUCTURE_DEFINITION));
            for ds in &c.datasets {
                add(iri(ds), ty.clone(), Term::iri(qb::DATA_SET));
                add(iri(ds), qb::structure(), iri(&c.name));
            }
            for l in &c.bottom_levels {
                let node = Term::blank(&format!("comp{n}"));
                n += 1;
                add(iri(&c.name), qb::component(), node.clone());
                add(node, qb4o::level(), iri(l));
            }
            for (m, aggs) in &c.measures {
                let node = Term::blank(&format!("comp{n}"));
                n += 1;
                add(iri(m), ty.clone(), Term::iri(qb::MEASURE_PROPERTY));
                add(iri(&c.name), qb::component(), node.clone());
                add(node.clone(), qb::measure(), iri(m));
                for a in aggs {
                    add(node.clone(), qb4o::aggregate_function(), Term::Iri(a.iri()));
                }
            }
        }
        if let Some(p) = &self.prefix {
            add(Term::iri(p), ty, Term::iri(owl::ONTOLOGY));
        }
        g
    }

    /// Structural equality, ignoring the source graph and warnings.
    pub fn same_model(&self, other: &TargetTBox) -> bool {
        self.prefix == other.prefix
            && self.dimensions == other.dimensions
            && self.cubes == other.cubes
            && self.levels == other.levels
            && self.update_types == other.update_types
    }
}

const CONCEPT_TYPES: [&str; 9] = [
    rdfs::CLASS,
    owl::CLASS,
    qb::DATA_STRUCTURE_DEFINITION,
    qb::DATA_SET,
    QB_DATASET_ALT,
    qb::DIMENSION_PROPERTY,
    qb4o::LEVEL_PROPERTY,
    qb4o::HIERARCHY,
    qb4o::HIERARCHY_STEP,
];

const PROPERTY_TYPES: [&str; 6] = [
    rdf::PROPERTY,
    owl::OBJECT_PROPERTY,
    owl::DATATYPE_PROPERTY,
    qb4o::LEVEL_ATTRIBUTE,
    qb::MEASURE_PROPERTY,
    qb4o::ROLLUP_PROPERTY,
];

fn typed_with(g: &Graph, classes: &[&str]) -> BTreeSet<Iri> {
    let ty = rdf::type_();
    classes
        .iter()
        .flat_map(|c| {
            g.subjects(&ty, &Term::iri(c))
                .filter_map(|t| t.as_iri().cloned())
                .collect::<Vec<_>>()
        })
        .collect()
}

/// C(T) of any TBox graph.
pub fn concepts_of(g: &Graph) -> BTreeSet<Iri> {
    typed_with(g, &CONCEPT_TYPES)
}

/// P(T) of any TBox graph.
pub fn properties_of(g: &Graph) -> BTreeSet<Iri> {
    typed_with(g, &PROPERTY_TYPES)
}

/// P(T) plus level and dimension properties.
pub fn property_universe_of(g: &Graph) -> BTreeSet<Iri> {
    let mut out = properties_of(g);
    out.extend(typed_with(g, &[qb4o::LEVEL_PROPERTY, qb::DIMENSION_PROPERTY]));
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtractError {
    EmptyABox,
}

impl fmt::Display for ExtractError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtractError::EmptyABox => f.write_str("cannot extract a TBox from an empty ABox"),
        }
    }
}

/// Result of `extract_tbox`.
#[derive(Clone, Debug)]
pub struct ExtractedTBox {
    pub tbox: Graph,
    pub diagnostics: Vec<Diagnostic>,
}

/// Derives classes, a taxonomy, properties, domains and ranges from an ABox.
pub fn extract_tbox(abox: &Graph) -> Result<ExtractedTBox, ExtractError> {
    if abox.is_empty() {
        return Err(ExtractError::EmptyABox);
    }
    let ty = rdf::type_();
    let mut out = Graph::new();
    let mut diagnostics = Vec::new();
    let add = |g: &mut Graph, s: Term, p: Iri, o: Term| {
        g.insert(Triple::new_unchecked(s, p, o));
    };

    let mut instances: BTreeMap<Term, BTreeSet<Term>> = BTreeMap::new();
    for t in abox.matches(None, Some(&ty), None) {
        if t.object.is_resource() {
            instances.entry(t.object).or_default().insert(t.subject);
        }
    }
    for c in instances.keys() {
        add(&mut out, c.clone(), ty.clone(), Term::iri(owl::CLASS));
    }
    let classes: Vec<&Term> = instances.keys().collect();
    for (i, a) in classes.iter().enumerate() {
        for b in &classes[i + 1..] {
            let ia = &instances[*a];
            let ib = &instances[*b];
            if ia == ib {
                add(&mut out, (*a).clone(), owl::equivalent_class(), (*b).clone());
                add(&mut out, (*b).clone(), owl::equivalent_class(), (*a).clone());
            } else if ia.is_subset(ib) {
                add(&mut out, (*a).clone(), rdfs::sub_class_of(), (*b).clone());
            } else if ib.is_subset(ia) {
                add(&mut out, (*b).clone(), rdfs::sub_class_of(), (*a).clone());
            } else if ia.is_disjoint(ib) {
                add(&mut out, (*a).clone(), owl::disjoint_with(), (*b).clone());
                add(&mut out, (*b).clone(), owl::disjoint_with(), (*a).clone());
            }
        }
    }

    let predicates: Vec<Iri> = abox.predicates().filter(|p| **p != ty).cloned().collect();
    for p in predicates {
        let mut resources = false;
        let mut literals = false;
        let mut domain = BTreeSet::new();
        let mut range = BTreeSet::new();
        let mut datatypes = BTreeSet::new();
        for t in abox.matches(None, Some(&p), None) {
            domain.extend(abox.types(&t.subject).cloned());
            match &t.object {
                Term::Literal(l) => {
                    literals = true;
                    datatypes.insert(Term::Iri(l.datatype()));
                }
                o => {
                    resources = true;
                    range.extend(abox.types(o).cloned());
                }
            }
        }
        let subject = Term::Iri(p.clone());
        let kind = if resources {
            if literals {
                diagnostics.push(Diagnostic::new(
                    p.as_str(),
                    "objects mix resources and literals; classified as object property",
                ));
            }
            owl::OBJECT_PROPERTY
        } else {
            range = datatypes;
            owl::DATATYPE_PROPERTY
        };
        add(&mut out, subject.clone(), ty.clone(), Term::iri(kind));
        for d in domain {
            add(&mut out, subject.clone(), rdfs::domain(), d);
        }
        for r in range {
            add(&mut out, subject.clone(), rdfs::range(), r);
        }
    }
    Ok(ExtractedTBox {
        tbox: out,
        diagnostics,
    })
}
