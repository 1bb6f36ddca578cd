//! Criteria over the worked example: golden outputs, the generated flow
//! and run-to-run determinism.

use std::fs;
use std::time::Instant;

use semetl::{LoadedMapping, Store};
use semetl_core::iso::isomorphic;
use semetl_core::plan::write_plans;
use semetl_core::vocab::{qb, qb4o};
use semetl_core::Term;

use crate::common::*;
use crate::Outcome;

pub fn end_to_end() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();
    run_listing_flows(dir.path());
    let elapsed = start.elapsed();

    let joined = read(&dir.path().join("ws/Recipient_RecipientMD/1.nt"));
    ensure!(
        isomorphic(&instances(&joined, &iri(SUB, "Recipient")), &golden("listing5.ttl")),
        "joined recipients differ from listing 5"
    );
    let mut store = Store::open(dir.path().join("sdw")).map_err(|e| e.to_string())?;
    let data = store.data().map_err(|e| e.to_string())?.clone();
    ensure!(
        isomorphic(&instances(&data, &qb4o::level_member()), &golden("listing6.ttl")),
        "level members differ from listing 6"
    );
    ensure!(
        isomorphic(&instances(&data, &qb::observation()), &golden("listing7.nt")),
        "observations differ from listing 7"
    );
    // Generated IRIs are the ones the IRI graph recorded for their sources.
    let ig = store.iri_graph();
    let pairs = [
        (format!("{SUB}Recipient#291894"), "Recipient", "Recipient#291894"),
        ("Vemb".to_string(), "City", "City#Vemb"),
        ("25/5/2010".to_string(), "Day", "Day#25/5/2010"),
    ];
    for (source, ty, expected) in &pairs {
        let key = if source.starts_with("http") { Term::iri(source) } else { Term::string(source) };
        let found = ig.lookup(&key, &iri(SDW, ty));
        ensure!(
            found == Some(&iri(SDW, expected)),
            "IRI graph maps {key} to {found:?}, expected {SDW}{expected}"
        );
    }
    ensure!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    Ok(format!("{} store triples, both flows in {:.2} s", data.len(), elapsed.as_secs_f64()))
}

/// The Recipient flow for a mapping with absolute source paths; intermediate
/// files land in the workspace.
const EXPECTED_PLAN: &str = concat!(
    "StartOp target=<http://extbi.lab.aau.dk/ontology/sdw/Recipient> flow=\"Recipient_RecipientMD\" workspace=\"/map/ws\"\n",
    "JoinTransformation cm=<http://extbi.lab.aau.dk/ontology/s2map/example#Recipient_Company> ",
    "source=<http://extbi.lab.aau.dk/ontology/business/Company> target=<http://extbi.lab.aau.dk/ontology/subsidy/Recipient> ",
    "stbox=\"/map/businessTBox.ttl\" ttbox=\"/map/subsidyTBox.ttl\" input=\"/map/dbd.nt\" tabox=\"/map/subsidy.nt\" ",
    "output=\"/map/ws/Recipient_RecipientMD/1.nt\"\n",
    "LevelMemberGenerator cm=<http://extbi.lab.aau.dk/ontology/s2map/example#Recipient_RecipientMD> ",
    "source=<http://extbi.lab.aau.dk/ontology/subsidy/Recipient> target=<http://extbi.lab.aau.dk/ontology/sdw/Recipient> ",
    "stbox=\"/map/subsidyTBox.ttl\" ttbox=\"/map/subsidyMDTBox.ttl\" input=\"/map/ws/Recipient_RecipientMD/1.nt\" ",
    "output=\"/map/ws/Recipient_RecipientMD/2.nt\"\n",
    "Loader input=\"/map/ws/Recipient_RecipientMD/2.nt\" store=\"/map/sdw\"\n",
);

pub fn flow_generation() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let text = fs::read_to_string(fixtures().join("mapping.ttl")).map_err(|e| e.to_string())?;
    let text = text
        .replace("\"dbd.ttl\"", "\"/map/dbd.nt\"")
        .replace("\"subsidy.ttl\"", "\"/map/subsidy.nt\"")
        .replace("\"businessTBox.ttl\"", "\"/map/businessTBox.ttl\"")
        .replace("\"subsidyTBox.ttl\"", "\"/map/subsidyTBox.ttl\"")
        .replace("\"subsidyMDTBox.ttl\"", "\"/map/subsidyMDTBox.ttl\"")
        .replace("\"sdw\"", "\"/map/sdw\"");
    let path = dir.path().join("mapping.ttl");
    fs::write(&path, text).map_err(|e| e.to_string())?;
    let loaded = LoadedMapping::load(&path).map_err(|e| e.to_string())?;
    let plans = loaded
        .plans(&iri(SDW, "Recipient"), "/map/ws".as_ref())
        .map_err(|e| e.to_string())?;
    let got = write_plans(&plans);
    ensure!(got == EXPECTED_PLAN, "plan differs:\n{got}");

    // The bindings the operations read, beyond the printed parameters.
    let m = &loaded.mapping;
    let jt = &m.concept_mappings[&Term::iri("http://extbi.lab.aau.dk/ontology/s2map/example#Recipient_Company")];
    let bus = "http://extbi.lab.aau.dk/ontology/business/";
    let mut pairs: Vec<(String, String)> = jt
        .common_properties
        .iter()
        .map(|c| (c.source.as_str().to_string(), c.target.as_str().to_string()))
        .collect();
    pairs.sort();
    let expected = vec![
        (format!("{bus}officialAddress"), format!("{SUB}address")),
        (format!("{bus}ownerName"), format!("{SUB}name")),
    ];
    ensure!(pairs == expected, "join common properties are {pairs:?}");
    let lmg = &m.concept_mappings[&Term::iri("http://extbi.lab.aau.dk/ontology/s2map/example#Recipient_RecipientMD")];
    ensure!(
        lmg.iri_value == semetl_core::mapping::IriValueType::Property(iri(SUB, "recipientID")),
        "level member IRIs come from {:?}",
        lmg.iri_value
    );
    Ok(format!("{} steps match", plans[0].steps.len()))
}

pub fn determinism() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    run_listing_flows(a.path());
    run_listing_flows(b.path());
    let mut files = 0;
    for entry in fs::read_dir(a.path().join("sdw")).map_err(|e| e.to_string())? {
        let name = entry.map_err(|e| e.to_string())?.file_name();
        let x = fs::read(a.path().join("sdw").join(&name)).map_err(|e| e.to_string())?;
        let y = fs::read(b.path().join("sdw").join(&name)).map_err(|e| e.to_string())?;
        ensure!(x == y, "{} differs between runs", name.to_string_lossy());
        files += 1;
    }
    ensure!(files == 3, "expected 3 store files, found {files}");
    Ok(format!("{files} store files identical"))
}
