//! Property tests for the invariants the operations promise.

use std::collections::{BTreeMap, BTreeSet};

use proptest::collection::{btree_set, vec};
use proptest::prelude::*;
use semetl_core::date::FixedClock;
use semetl_core::iso::isomorphic;
use semetl_core::mapping::{IriValueType, PropertyMapping, SourceValue};
use semetl_core::ntriples::{parse_ntriples, serialize_ntriples};
use semetl_core::operation::Operation;
use semetl_core::ops::{
    changed_data_capture, generate_iri, level_member_generator, materialize_inference, update_iri,
    GeneratorParams, IriGraph, IriScheme,
};
use semetl_core::plan::{parse_plans, write_plans, FlowPlan, OpInvocation, Param};
use semetl_core::schema::TargetTBox;
use semetl_core::term::Literal;
use semetl_core::turtle::parse_turtle;
use semetl_core::vocab::{owl, qb4o, rdf, rdfs, xsd};
use semetl_core::{Date, Graph, Iri, Term, Triple};

fn iri_term() -> impl Strategy<Value = Term> {
    "[a-e]{1,2}".prop_map(|s| Term::iri(&format!("http://e/{s}")))
}

fn predicate() -> impl Strategy<Value = Iri> {
    "[pq][0-2]".prop_map(|s| Iri::new_unchecked(format!("http://e/{s}").as_str()))
}

fn subject() -> impl Strategy<Value = Term> {
    prop_oneof![3 => iri_term(), 1 => "[a-c][0-9]".prop_map(|l| Term::blank(&l))]
}

fn literal() -> impl Strategy<Value = Term> {
    prop_oneof![
        any::<String>().prop_map(|s| Term::string(&s)),
        "[ -~\t\n\r\"\\\\]{0,8}".prop_map(|s| Term::string(&s)),
        ("[ -~]{0,6}", "[a-z]{2}(-[A-Z]{2})?").prop_map(|(s, tag)| Term::Literal(Literal::lang(&s, &tag))),
        any::<i64>().prop_map(Term::integer),
        "[0-9]{1,3}\\.[0-9]{1,2}".prop_map(|s| Term::typed(&s, xsd::decimal())),
    ]
}

fn object() -> impl Strategy<Value = Term> {
    prop_oneof![subject(), literal()]
}

fn graph(max: usize) -> impl Strategy<Value = Graph> {
    vec((subject(), predicate(), object()), 0..max)
        .prop_map(|ts| ts.into_iter().map(|(s, p, o)| Triple::new_unchecked(s, p, o)).collect())
}

proptest! {
    #[test]
    fn ntriples_round_trip(g in graph(40)) {
        // Blank nodes are relabeled on parsing, so compare up to isomorphism.
        let text = serialize_ntriples(&g);
        let parsed = parse_ntriples(text.as_bytes()).unwrap();
        prop_assert!(isomorphic(&parsed, &g), "{}", text);
        // N-Triples is a subset of Turtle.
        prop_assert!(isomorphic(&parse_turtle(text.as_bytes()).unwrap().graph, &g), "{}", text);
        prop_assert_eq!(parse_ntriples(text.as_bytes()).unwrap(), parsed);
    }

    #[test]
    fn set_laws(a in graph(20), b in graph(20), c in graph(20)) {
        prop_assert_eq!(a.union(&b), b.union(&a));
        prop_assert_eq!(a.union(&b).union(&c), a.union(&b.union(&c)));
        prop_assert_eq!(a.union(&a), a.clone());
        prop_assert_eq!(a.difference(&b).len() + a.intersection(&b).len(), a.len());
    }

    #[test]
    fn cdc_partition(old in graph(25), new in graph(25), typed in btree_set(subject(), 0..6)) {
        let mut new = new;
        for s in typed {
            new.insert(Triple::new_unchecked(s, rdf::type_(), Term::iri("http://e/C")));
        }
        let ins = changed_data_capture(&old, &new, 0);
        let changed = changed_data_capture(&old, &new, 1);
        prop_assert!(ins.intersection(&changed).is_empty());
        prop_assert!(ins.iter().all(|t| new.contains(&t)));
        prop_assert!(changed.iter().all(|t| new.contains(&t) && !old.contains(&t)));
        prop_assert!(changed_data_capture(&new, &new, 0).is_empty());
        prop_assert!(changed_data_capture(&new, &new, 1).is_empty());
    }

    #[test]
    fn inference_is_monotone_and_idempotent(abox in schema_graph(), tbox in schema_graph()) {
        let closed = materialize_inference(&abox, &tbox);
        prop_assert!(abox.iter().all(|t| closed.contains(&t)));
        prop_assert_eq!(&materialize_inference(&closed, &tbox), &closed);
        let bigger = materialize_inference(&abox.union(&tbox), &Graph::new());
        prop_assert!(closed.iter().all(|t| bigger.contains(&t)));
    }

    #[test]
    fn generated_iris_are_unique(keys in vec(("[a-f]", "[a-c ]{0,3}"), 1..40)) {
        let ttbox = TargetTBox::load(&parse_turtle(TBOX.as_bytes()).unwrap().graph).unwrap();
        let scheme = IriScheme::new(&ttbox);
        let level = Iri::new_unchecked("http://extbi.lab.aau.dk/ontology/sdw/Team");
        let mut ig = IriGraph::new();
        let mut issued: BTreeMap<Term, Iri> = BTreeMap::new();
        for (source, value) in keys {
            let source = Term::iri(&format!("http://src/{source}"));
            match generate_iri(&mut ig, Some(&source), Some(&value), &level, &scheme) {
                Ok(iri) => {
                    if let Some(before) = issued.get(&source) {
                        prop_assert_eq!(before, &iri);
                    }
                    issued.insert(source, iri);
                }
                // Only blank values fail, and only for unseen sources.
                Err(_) => prop_assert!(value.trim().is_empty() && !issued.contains_key(&source)),
            }
        }
        let distinct: BTreeSet<&Iri> = issued.values().collect();
        prop_assert_eq!(distinct.len(), issued.len());
    }

    #[test]
    fn versions_keep_lineage(days in vec(0i64..5, 1..6)) {
        let mut ig = IriGraph::new();
        let ttbox = TargetTBox::load(&parse_turtle(TBOX.as_bytes()).unwrap().graph).unwrap();
        let scheme = IriScheme::new(&ttbox);
        let level = Iri::new_unchecked("http://extbi.lab.aau.dk/ontology/sdw/Team");
        let source = Term::iri("http://src/a");
        let root = generate_iri(&mut ig, Some(&source), Some("a"), &level, &scheme).unwrap();
        let mut current = root.clone();
        let mut day = Date::new(2020, 1, 1).unwrap();
        for step in days {
            day = day.add_days(step);
            let next = update_iri(&current, &mut ig, &FixedClock(day));
            prop_assert_eq!(ig.lineage_root(&next), root.clone());
            prop_assert_eq!(ig.lookup(&source, &level), Some(&next));
            current = next;
        }
    }

    #[test]
    fn level_members_are_typed(rows in vec(("[0-9]{1,2}", "[A-Z][a-z]{0,4}", "[a-z ]{0,4}"), 0..30)) {
        let ttbox = TargetTBox::load(&parse_turtle(TBOX.as_bytes()).unwrap().graph).unwrap();
        let level = Iri::new_unchecked("http://extbi.lab.aau.dk/ontology/sdw/Team");
        let src = |l: &str| Iri::new_unchecked(format!("http://src/{l}").as_str());
        let mut sabox = Graph::new();
        for (i, (id, name, unit)) in rows.iter().enumerate() {
            let s = Term::iri(&format!("http://src/Team#{i}"));
            sabox.insert(Triple::new_unchecked(s.clone(), rdf::type_(), Term::Iri(src("Team"))));
            sabox.insert(Triple::new_unchecked(s.clone(), src("id"), Term::string(id)));
            sabox.insert(Triple::new_unchecked(s.clone(), src("name"), Term::string(name)));
            sabox.insert(Triple::new_unchecked(s, src("unit"), Term::string(unit)));
        }
        let pm = |t: &str, s: &str| PropertyMapping {
            id: Term::iri(&format!("http://m/{t}")),
            concept_mapping: Term::iri("http://m/cm"),
            target_property: Iri::new_unchecked(format!("http://extbi.lab.aau.dk/ontology/sdw/{t}").as_str()),
            source: SourceValue::Property(src(s)),
        };
        let pms = [pm("teamName", "name"), pm("inUnit", "unit")];
        let iri_value = IriValueType::Property(src("id"));
        let params = GeneratorParams {
            source_concept: &src("Team"),
            target_concept: &level,
            ttbox: &ttbox,
            iri_value: &iri_value,
            property_mappings: &pms,
        };
        let mut ig = IriGraph::new();
        let (out, _) = match level_member_generator(&params, &sabox, &mut ig) {
            Ok(r) => r,
            Err(e) => {
                // Blank unit values cannot name a parent member.
                prop_assert!(rows.iter().any(|r| r.2.trim().is_empty()), "{}", e);
                return Ok(());
            }
        };
        let members: BTreeSet<Term> = out.subject_terms().cloned().collect();
        prop_assert_eq!(members.len(), rows.len());
        for m in &members {
            prop_assert!(out.contains(&Triple::new_unchecked(m.clone(), rdf::type_(), Term::Iri(qb4o::level_member()))));
            prop_assert!(out.contains(&Triple::new_unchecked(m.clone(), qb4o::member_of(), Term::Iri(level.clone()))));
        }
        // Rerunning with the same IRI graph reuses every IRI.
        let (again, _) = level_member_generator(&params, &sabox, &mut ig).unwrap();
        prop_assert_eq!(again, out);
    }

    #[test]
    fn plans_round_trip(steps in vec((0usize..12, vec(("[a-z]{1,6}", param()), 0..4)), 0..6), flow in ".{0,10}") {
        let mut invocations = vec![OpInvocation::new(Operation::StartOp)
            .with("target", Param::Term(Term::iri("http://e/T")))
            .with("flow", Param::Text(flow.clone()))
            .with("workspace", Param::Text("ws".into()))];
        for (op, params) in steps {
            let op = Operation::ALL[op];
            if op == Operation::StartOp {
                continue;
            }
            let mut inv = OpInvocation::new(op);
            for (k, v) in params {
                inv = inv.with(&k, v);
            }
            invocations.push(inv);
        }
        let plan = FlowPlan {
            target: Iri::new_unchecked("http://e/T"),
            flow_id: flow,
            workspace: "ws".into(),
            steps: invocations,
        };
        let text = write_plans(std::slice::from_ref(&plan));
        prop_assert_eq!(parse_plans(&text).unwrap(), vec![plan]);
    }
}

fn param() -> impl Strategy<Value = Param> {
    prop_oneof![
        iri_term().prop_map(Param::Term),
        "[a-z][0-9]".prop_map(|l| Param::Term(Term::blank(&l))),
        any::<String>().prop_map(Param::Text),
    ]
}

/// Small graphs over the schema vocabulary the inference rules read.
fn schema_graph() -> impl Strategy<Value = Graph> {
    let resource = prop_oneof![
        "[a-d]".prop_map(|s| Term::iri(&format!("http://e/{s}"))),
        Just(Term::blank("k")),
    ];
    let pred = prop_oneof![
        Just(rdf::type_()),
        Just(rdfs::sub_class_of()),
        Just(rdfs::sub_property_of()),
        Just(rdfs::domain()),
        Just(rdfs::range()),
        Just(owl::same_as()),
        "[a-d]".prop_map(|s| Iri::new_unchecked(format!("http://e/{s}").as_str())),
    ];
    let obj = prop_oneof![4 => resource.clone(), 1 => Just(Term::string("v"))];
    vec((resource, pred, obj), 0..15)
        .prop_map(|ts| ts.into_iter().map(|(s, p, o)| Triple::new_unchecked(s, p, o)).collect())
}

const TBOX: &str = r#"
@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
@prefix qb: <http://purl.org/linked-data/cube#> .
@prefix qb4o: <http://purl.org/qb4olap/cubes#> .
@prefix sdw: <http://extbi.lab.aau.dk/ontology/sdw/> .
sdw: rdf:type owl:Ontology .
sdw:Org rdf:type qb:DimensionProperty ; qb4o:hasHierarchy sdw:OrgHierarchy .
sdw:OrgHierarchy rdf:type qb4o:Hierarchy ; qb4o:inDimension sdw:Org ; qb4o:hasLevel sdw:Team, sdw:Unit .
_:s1 rdf:type qb4o:HierarchyStep ; qb4o:inHierarchy sdw:OrgHierarchy ;
  qb4o:childLevel sdw:Team ; qb4o:parentLevel sdw:Unit ; qb4o:rollup sdw:inUnit .
sdw:Team rdf:type qb4o:LevelProperty ; qb4o:hasAttribute sdw:teamName .
sdw:Unit rdf:type qb4o:LevelProperty .
sdw:teamName rdf:type qb4o:LevelAttribute ; qb4o:updateType qb4o:Type2 .
sdw:inUnit rdf:type qb4o:RollupProperty .
"#;
