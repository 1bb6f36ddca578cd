//! LevelMemberGenerator wall time at two input sizes.

use std::time::{Duration, Instant};

use semetl::LoadedMapping;
use semetl_core::ops::{level_member_generator, GeneratorParams, IriGraph};
use semetl_core::schema::TargetTBox;
use semetl_core::vocab::rdf;
use semetl_core::{Graph, Term, Triple};

use crate::common::*;
use crate::Outcome;

/// Five triples per recipient.
fn recipients(triples: usize) -> Graph {
    let mut g = Graph::new();
    let p = |local: &str| iri(SUB, local);
    for n in 0..triples / 5 {
        let s = Term::iri(&format!("{SUB}Recipient#{n}"));
        let company = Term::iri(&format!("http://extbi.lab.aau.dk/ontology/business/Company#{n}"));
        g.insert(Triple::new_unchecked(s.clone(), rdf::type_(), Term::Iri(p("Recipient"))));
        g.insert(Triple::new_unchecked(s.clone(), p("recipientID"), Term::string(&n.to_string())));
        g.insert(Triple::new_unchecked(s.clone(), p("name"), Term::string(&format!("Recipient {n}"))));
        g.insert(Triple::new_unchecked(s.clone(), p("cityId"), Term::string(&format!("City{}", n % 97))));
        g.insert(Triple::new_unchecked(s, p("companyId"), company));
    }
    g
}

pub fn level_member_scaling() -> Outcome {
    let loaded = LoadedMapping::load(&fixtures().join("mapping.ttl")).map_err(|e| e.to_string())?;
    let cm = loaded
        .mapping
        .targeting(&iri(SDW, "Recipient"))
        .into_iter()
        .find(|c| c.source_concept == iri(SUB, "Recipient"))
        .ok_or("no concept-mapping from sub:Recipient to sdw:Recipient")?;
    let ttbox = TargetTBox::load(&read(&fixtures().join("subsidyMDTBox.ttl"))).map_err(|e| e.to_string())?;
    let params = GeneratorParams {
        source_concept: &cm.source_concept,
        target_concept: &cm.target_concept,
        ttbox: &ttbox,
        iri_value: &cm.iri_value,
        property_mappings: &cm.property_mappings,
    };

    let median = |sabox: &Graph| -> Result<(Duration, usize), String> {
        let mut times = Vec::new();
        let mut size = 0;
        for _ in 0..3 {
            let mut ig = IriGraph::new();
            let start = Instant::now();
            let (out, _) = level_member_generator(&params, sabox, &mut ig).map_err(|e| e.to_string())?;
            times.push(start.elapsed());
            size = out.len();
        }
        times.sort();
        Ok((times[1], size))
    };
    let small = recipients(100_000);
    let large = recipients(200_000);
    let (t_small, n_small) = median(&small)?;
    let (t_large, n_large) = median(&large)?;
    ensure!(n_large == 2 * n_small, "outputs of {n_small} and {n_large} triples");
    let ratio = t_large.as_secs_f64() / t_small.as_secs_f64();
    ensure!(ratio <= 2.5, "200k took {t_large:?}, 100k took {t_small:?}: ratio {ratio:.2}");
    Ok(format!(
        "100k in {:.2} s, 200k in {:.2} s, ratio {ratio:.2}",
        t_small.as_secs_f64(),
        t_large.as_secs_f64()
    ))
}
