//! Fixture helpers shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use semetl::{run_target, EtlRunReport, LoadedMapping, RunConfig};
use semetl_core::turtle::parse_turtle;
use semetl_core::vocab::rdf;
use semetl_core::{Date, Graph, Iri, Term};

pub const SDW: &str = "http://extbi.lab.aau.dk/ontology/sdw/";
pub const SUB: &str = "http://extbi.lab.aau.dk/ontology/subsidy/";

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// Copies the fixture files (not the goldens) into `dir`, since runs
/// write next to the mapping file.
pub fn copy_fixtures(dir: &Path) {
    for entry in fs::read_dir(fixtures()).unwrap() {
        let entry = entry.unwrap();
        if entry.file_type().unwrap().is_file() {
            fs::copy(entry.path(), dir.join(entry.file_name())).unwrap();
        }
    }
}

pub fn read(path: &Path) -> Graph {
    semetl::io::read_graph(path).unwrap()
}

pub fn golden(name: &str) -> Graph {
    read(&fixtures().join("golden").join(name))
}

pub fn ttl(text: &str) -> Graph {
    parse_turtle(text.as_bytes()).unwrap().graph
}

pub fn iri(ns: &str, local: &str) -> Iri {
    Iri::new_unchecked(format!("{ns}{local}").as_str())
}

/// The description of every instance of `class` in `g`.
pub fn instances(g: &Graph, class: &Iri) -> Graph {
    let subjects = g.subjects(&rdf::type_(), &Term::Iri(class.clone())).cloned().collect();
    g.restrict_subjects(&subjects)
}

pub fn config(dir: &Path) -> RunConfig {
    RunConfig {
        mapping: Some(dir.join("mapping.ttl")),
        workspace: dir.join("ws"),
        clock: Some(Date::new(2017, 9, 26).unwrap()),
        ..RunConfig::default()
    }
}

/// Runs the Recipient flow, then the SubsidyMD flow, in a fixture copy.
pub fn run_listing_flows(dir: &Path) -> Vec<EtlRunReport> {
    copy_fixtures(dir);
    let cfg = config(dir);
    let loaded = LoadedMapping::load(&dir.join("mapping.ttl")).unwrap();
    let mut reports = Vec::new();
    for target in ["Recipient", "SubsidyMD"] {
        reports.extend(run_target(&iri(SDW, target), &loaded, &cfg).unwrap());
    }
    reports
}
