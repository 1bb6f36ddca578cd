//! Slowly changing dimension updates: the Listing 9 blocks, then random
//! Type2 batches over a three-level hierarchy.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;

use rand::seq::{IteratorRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semetl::LoadedMapping;
use semetl_core::mapping::{PropertyMapping, SourceValue};
use semetl_core::ops::{changed_data_capture, generate_iri, update_level, IriGraph, IriScheme, UpdateParams};
use semetl_core::schema::TargetTBox;
use semetl_core::vocab::{qb4o, rdf};
use semetl_core::{Date, FixedClock, Graph, Iri, Term, Triple};

use crate::common::*;
use crate::Outcome;

pub fn suite() -> Outcome {
    listing9()?;
    let (versions, batches) = random_type2_batches()?;
    Ok(format!("Type1/2/3 blocks match; {batches} random batches produced {versions} versions"))
}

fn listing9() -> Result<(), String> {
    let loaded = LoadedMapping::load(&fixtures().join("mapping.ttl")).map_err(|e| e.to_string())?;
    let cm = loaded
        .mapping
        .targeting(&iri(SDW, "Recipient"))
        .into_iter()
        .find(|c| c.source_concept == iri(SUB, "Recipient"))
        .ok_or("no concept-mapping from sub:Recipient to sdw:Recipient")?;
    let tbox_text = fs::read_to_string(fixtures().join("subsidyMDTBox.ttl")).map_err(|e| e.to_string())?;
    let declared = "sdw:name rdf:type qb4o:LevelAttribute ; qb4o:updateType qb4o:Type1";
    ensure!(tbox_text.contains(declared), "the target TBox no longer declares sdw:name as Type1");

    let old = read(&fixtures().join("listing8_old.ttl"));
    let new = read(&fixtures().join("listing8_new.ttl"));
    let updated = changed_data_capture(&old, &new, 1);
    let mut sabox = old.clone();
    sabox.extend(
        ttl(r#"@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .
@prefix sub: <http://extbi.lab.aau.dk/ontology/subsidy/> .
<http://extbi.lab.aau.dk/ontology/subsidy/Recipient#762921> rdf:type sub:Recipient ;
   sub:name "R. Nielsen" ; sub:cityId "Lokken" ;
   sub:companyId <http://extbi.lab.aau.dk/ontology/business/Company#10165164> ."#)
        .iter(),
    );
    let tabox = read(&fixtures().join("listing9_before.ttl"));
    let clock = FixedClock(Date::new(2017, 9, 26).unwrap());
    let level = iri(SDW, "Recipient");

    for ty in ["Type1", "Type2", "Type3"] {
        let text = tbox_text.replace(declared, &declared.replace("Type1", ty));
        let ttbox = TargetTBox::load(&ttl(&text)).map_err(|e| format!("{ty}: {e}"))?;
        let scheme = IriScheme::new(&ttbox);
        let mut ig = IriGraph::new();
        for id in ["291894", "762921"] {
            let source = Term::iri(&format!("{SUB}Recipient#{id}"));
            generate_iri(&mut ig, Some(&source), Some(id), &level, &scheme).map_err(|e| e.to_string())?;
        }
        let params = UpdateParams {
            level: &level,
            ttbox: &ttbox,
            property_mappings: &cm.property_mappings,
            clock: &clock,
        };
        let outcome = update_level(&params, &updated, &sabox, &tabox, &mut ig).map_err(|e| format!("{ty}: {e}"))?;
        let expected = golden(&format!("listing9_{}.ttl", ty.to_lowercase()));
        ensure!(
            outcome.graph == expected,
            "{ty}: missing {:?}, unexpected {:?}",
            expected.difference(&outcome.graph).iter().collect::<Vec<_>>(),
            outcome.graph.difference(&expected).iter().collect::<Vec<_>>()
        );
        ensure!(
            tabox.difference(&outcome.deleted).union(&outcome.inserted) == outcome.graph,
            "{ty}: deleted and inserted sets do not account for the result"
        );
    }
    Ok(())
}

const HIERARCHY: &str = r#"
@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
@prefix qb: <http://purl.org/linked-data/cube#> .
@prefix qb4o: <http://purl.org/qb4olap/cubes#> .
@prefix sdw: <http://extbi.lab.aau.dk/ontology/sdw/> .
sdw: rdf:type owl:Ontology .
sdw:Org rdf:type qb:DimensionProperty ; qb4o:hasHierarchy sdw:OrgHierarchy .
sdw:OrgHierarchy rdf:type qb4o:Hierarchy ; qb4o:inDimension sdw:Org ;
  qb4o:hasLevel sdw:Team, sdw:Unit, sdw:Division .
_:s1 rdf:type qb4o:HierarchyStep ; qb4o:inHierarchy sdw:OrgHierarchy ;
  qb4o:childLevel sdw:Team ; qb4o:parentLevel sdw:Unit ; qb4o:rollup sdw:inUnit .
_:s2 rdf:type qb4o:HierarchyStep ; qb4o:inHierarchy sdw:OrgHierarchy ;
  qb4o:childLevel sdw:Unit ; qb4o:parentLevel sdw:Division ; qb4o:rollup sdw:inDivision .
sdw:Team rdf:type qb4o:LevelProperty ; qb4o:hasAttribute sdw:teamName .
sdw:Unit rdf:type qb4o:LevelProperty ; qb4o:hasAttribute sdw:unitName .
sdw:Division rdf:type qb4o:LevelProperty ; qb4o:hasAttribute sdw:divisionName .
sdw:teamName rdf:type qb4o:LevelAttribute ; qb4o:updateType qb4o:Type2 .
sdw:unitName rdf:type qb4o:LevelAttribute ; qb4o:updateType qb4o:Type2 .
sdw:divisionName rdf:type qb4o:LevelAttribute ; qb4o:updateType qb4o:Type2 .
sdw:inUnit rdf:type qb4o:RollupProperty .
sdw:inDivision rdf:type qb4o:RollupProperty .
"#;

/// Level, its attribute, its rollup to the parent and the member count.
const LEVELS: [(&str, &str, Option<&str>, usize); 3] = [
    ("Team", "teamName", Some("inUnit"), 8),
    ("Unit", "unitName", Some("inDivision"), 4),
    ("Division", "divisionName", None, 2),
];

fn source(level: &str, n: usize) -> Term {
    Term::iri(&format!("http://src/{level}#{n}"))
}

fn source_name() -> Iri {
    Iri::new_unchecked("http://src/name")
}

/// Runs the batches and checks the invariants after each one. Returns the
/// number of member versions at the end and the batch count.
fn random_type2_batches() -> Result<(usize, usize), String> {
    let ttbox = TargetTBox::load(&ttl(HIERARCHY)).map_err(|e| e.to_string())?;
    let scheme = IriScheme::new(&ttbox);
    let mut ig = IriGraph::new();
    let mut sabox = Graph::new();
    let mut tabox = Graph::new();
    let ty = rdf::type_();
    let lm = Term::Iri(qb4o::level_member());

    // Build the initial members bottom-up; member n of a level rolls up to
    // member n / 2 of the next.
    for (li, (level, attr, rollup, count)) in LEVELS.iter().enumerate() {
        for n in 0..*count {
            let src = source(level, n);
            let id = format!("m{n}");
            let member = Term::Iri(
                generate_iri(&mut ig, Some(&src), Some(&id), &iri(SDW, level), &scheme).map_err(|e| e.to_string())?,
            );
            let value = Term::string(&format!("{level} {n}"));
            sabox.insert(Triple::new_unchecked(src.clone(), source_name(), value.clone()));
            tabox.insert(Triple::new_unchecked(member.clone(), ty.clone(), lm.clone()));
            tabox.insert(Triple::new_unchecked(member.clone(), qb4o::member_of(), Term::Iri(iri(SDW, level))));
            tabox.insert(Triple::new_unchecked(member.clone(), iri(SDW, attr), value));
            if let Some(r) = rollup {
                let parent = format!("{SDW}{}#m{}", LEVELS[li + 1].0, n / 2);
                tabox.insert(Triple::new_unchecked(member, iri(SDW, r), Term::iri(&parent)));
            }
        }
    }

    let pms: Vec<Vec<PropertyMapping>> = LEVELS
        .iter()
        .map(|(level, attr, _, _)| {
            vec![PropertyMapping {
                id: Term::iri(&format!("http://m/{attr}")),
                concept_mapping: Term::iri(&format!("http://m/{level}")),
                target_property: iri(SDW, attr),
                source: SourceValue::Property(source_name()),
            }]
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut day = Date::new(2020, 1, 1).unwrap();
    const BATCHES: usize = 100;
    for batch in 0..BATCHES {
        // Most batches run on a new day; the rest revise today's versions.
        if rng.gen_bool(0.75) {
            day = day.succ();
        }
        let clock = FixedClock(day);
        let k = rng.gen_range(1..=3);
        let mut levels: Vec<usize> = (0..LEVELS.len()).choose_multiple(&mut rng, k);
        levels.shuffle(&mut rng);
        for li in levels {
            let (level, _, _, count) = LEVELS[li];
            let level_iri = iri(SDW, level);
            let mut updated = Graph::new();
            let k = rng.gen_range(1..=3.min(count));
            for n in (0..count).choose_multiple(&mut rng, k) {
                let value = Term::string(&format!("{level} {n} b{batch}"));
                updated.insert(Triple::new_unchecked(source(level, n), source_name(), value));
            }
            let params = UpdateParams {
                level: &level_iri,
                ttbox: &ttbox,
                property_mappings: &pms[li],
                clock: &clock,
            };
            let outcome = update_level(&params, &updated, &sabox, &tabox, &mut ig)
                .map_err(|e| format!("batch {batch}, {level}: {e}"))?;
            ensure!(
                outcome.deleted.iter().all(|t| tabox.contains(&t)),
                "batch {batch}: deleted a triple the store lacked"
            );
            ensure!(
                tabox.difference(&outcome.deleted).union(&outcome.inserted) == outcome.graph,
                "batch {batch}: deleted and inserted sets do not account for the result"
            );
            tabox = outcome.graph;
            // The source now holds the new values, as after a CDC run.
            for t in updated.iter() {
                let stale: Vec<Triple> = sabox.matches(Some(&t.subject), Some(&t.predicate), None).collect();
                for s in stale {
                    sabox.remove(&s);
                }
                sabox.insert(t);
            }
        }
        check_type2_invariants(&tabox, &sabox, &ig).map_err(|e| format!("after batch {batch}: {e}"))?;
    }
    let versions = tabox.matches(None, Some(&qb4o::member_of()), None).count();
    Ok((versions, BATCHES))
}

struct Version {
    iri: Iri,
    from: Option<String>,
    to: Option<String>,
    status: Option<String>,
}

fn check_type2_invariants(tabox: &Graph, sabox: &Graph, ig: &IriGraph) -> Result<(), String> {
    let lit = |s: &Term, p: &str| tabox.object(s, &iri(SDW, p)).map(|t| t.value_str().to_string());
    let mut lineages: BTreeMap<Iri, Vec<Version>> = BTreeMap::new();
    for t in tabox.matches(None, Some(&qb4o::member_of()), None) {
        let Some(m) = t.subject.as_iri() else { continue };
        lineages.entry(ig.lineage_root(m)).or_default().push(Version {
            iri: m.clone(),
            from: lit(&t.subject, "fromDate"),
            to: lit(&t.subject, "toDate"),
            status: lit(&t.subject, "status"),
        });
    }
    ensure!(
        lineages.len() == LEVELS.iter().map(|l| l.3).sum::<usize>(),
        "{} lineages, expected one per source member",
        lineages.len()
    );
    let mut current: BTreeSet<Iri> = BTreeSet::new();
    let mut expired: BTreeSet<Iri> = BTreeSet::new();
    for (root, versions) in &mut lineages {
        if let [only] = versions.as_slice() {
            ensure!(
                only.status.is_none() || only.status.as_deref() == Some("Current"),
                "{root} has a single version with status {:?}",
                only.status
            );
            current.insert(only.iri.clone());
            continue;
        }
        let currents = versions.iter().filter(|v| v.status.as_deref() == Some("Current")).count();
        ensure!(currents == 1, "lineage {root} has {currents} current versions");
        let mut spans = Vec::new();
        for v in versions.iter() {
            let (Some(from), Some(to)) = (&v.from, &v.to) else {
                return Err(format!("{} lacks a validity interval", v.iri));
            };
            ensure!(from <= to, "{} is valid from {from} to {to}", v.iri);
            let is_current = v.status.as_deref() == Some("Current");
            ensure!((to == "9999-12-31") == is_current, "{} has toDate {to} and status {:?}", v.iri, v.status);
            if is_current {
                current.insert(v.iri.clone());
            } else {
                ensure!(v.status.as_deref() == Some("Expired"), "{} has status {:?}", v.iri, v.status);
                expired.insert(v.iri.clone());
            }
            spans.push((from.clone(), to.clone(), is_current));
        }
        spans.sort();
        for w in spans.windows(2) {
            ensure!(w[0].1 < w[1].0, "lineage {root} has overlapping intervals {:?} and {:?}", w[0], w[1]);
        }
        ensure!(spans.last().is_some_and(|s| s.2), "lineage {root}: the current version is not the latest");
    }

    for (li, (level, attr, rollup, count)) in LEVELS.iter().enumerate() {
        for n in 0..*count {
            let src = source(level, n);
            let root = iri(SDW, &format!("{level}#m{n}"));
            let Some(now) = ig.lookup(&src, &iri(SDW, level)) else {
                return Err(format!("{src} has no IRI"));
            };
            ensure!(current.contains(now), "{src} resolves to {now}, which is not current");
            ensure!(ig.lineage_root(now) == root, "{now} is not in the lineage of {root}");
            let subject = Term::Iri(now.clone());
            let expected = sabox.object(&src, &source_name());
            ensure!(
                tabox.object(&subject, &iri(SDW, attr)) == expected,
                "{now} has {attr} {:?}, source has {expected:?}",
                tabox.object(&subject, &iri(SDW, attr))
            );
            // Propagation: a current member refers to the current version
            // of its original parent's lineage.
            if let Some(r) = rollup {
                let parent_root = iri(SDW, &format!("{}#m{}", LEVELS[li + 1].0, n / 2));
                let parents: Vec<&Term> = tabox.objects(&subject, &iri(SDW, r)).collect();
                ensure!(parents.len() == 1, "{now} has {} {r} links", parents.len());
                let parent = parents[0].as_iri().ok_or_else(|| format!("{now} rolls up to a literal"))?;
                ensure!(current.contains(parent), "{now} refers to {parent}, which is not current");
                ensure!(ig.lineage_root(parent) == parent_root, "{now} refers to {parent} outside {parent_root}");
            }
        }
    }
    // Every expired parent version is referenced only by expired members.
    for t in tabox.iter() {
        if let (Some(s), Some(o)) = (t.subject.as_iri(), t.object.as_iri()) {
            if expired.contains(o) && current.contains(s) {
                return Err(format!("current {s} still refers to expired {o}"));
            }
        }
    }
    Ok(())
}
