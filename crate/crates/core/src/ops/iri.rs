//! The IRI graph and warehouse IRI generation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::date::Clock;
use crate::graph::Graph;
use crate::schema::TargetTBox;
use crate::term::{Iri, Term, Triple};
use crate::vocab::{owl, prov};

use super::OpError;

/// Provenance of generated IRIs: which source term each warehouse IRI came
/// from, plus the incremental counters and version lineage.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IriGraph {
    /// `(source term, target type)` to the current warehouse IRI.
    map: BTreeMap<(Term, Iri), Iri>,
    /// Every IRI ever handed out, with the key it was generated for.
    issued: BTreeMap<Iri, (Term, Iri)>,
    /// Target construct to the last counter drawn.
    counters: BTreeMap<Iri, u64>,
    /// Version IRI to the version it replaced.
    revisions: BTreeMap<Iri, Iri>,
}

impl IriGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn lookup(&self, source: &Term, t_type: &Iri) -> Option<&Iri> {
        self.map.get(&(source.clone(), t_type.clone()))
    }

    /// Source keys whose current IRI is `iri`.
    pub fn sources_of(&self, iri: &Iri) -> Vec<(Term, Iri)> {
        self.map
            .iter()
            .filter(|(_, v)| *v == iri)
            .map(|(k, _)| k.clone())
            .collect()
    }

    pub fn counters(&self) -> &BTreeMap<Iri, u64> {
        &self.counters
    }

    pub fn set_counter(&mut self, construct: Iri, value: u64) {
        self.counters.insert(construct, value);
    }

    /// Draws the next incremental counter for `construct`.
    pub fn next_counter(&mut self, construct: &Iri) -> u64 {
        let c = self.counters.entry(construct.clone()).or_insert(0);
        *c += 1;
        *c
    }

    /// The first version of the lineage `iri` belongs to.
    pub fn lineage_root(&self, iri: &Iri) -> Iri {
        let mut cur = iri;
        let mut guard = 0;
        while let Some(prev) = self.revisions.get(cur) {
            cur = prev;
            guard += 1;
            if guard > self.revisions.len() {
                break;
            }
        }
        cur.clone()
    }

    pub fn previous_version(&self, iri: &Iri) -> Option<&Iri> {
        self.revisions.get(iri)
    }

    fn record(&mut self, source: Term, t_type: Iri, iri: Iri) {
        self.issued.insert(iri.clone(), (source.clone(), t_type.clone()));
        self.map.insert((source, t_type), iri);
    }

    /// Serializes the mappings as `owl:sameAs`, `prov:type` and
    /// `prov:wasRevisionOf` triples. Counters are kept separately.
    pub fn to_graph(&self) -> Graph {
        let mut g = Graph::new();
        for ((source, t_type), iri) in &self.map {
            let s = Term::Iri(iri.clone());
            g.insert(Triple::new_unchecked(s.clone(), owl::same_as(), source.clone()));
            g.insert(Triple::new_unchecked(s, prov::type_(), Term::Iri(t_type.clone())));
        }
        for (new, old) in &self.revisions {
            g.insert(Triple::new_unchecked(
                Term::Iri(new.clone()),
                prov::was_revision_of(),
                Term::Iri(old.clone()),
            ));
        }
        g
    }

    /// Inverse of `to_graph`.
    pub fn from_graph(g: &Graph) -> Result<Self, OpError> {
        let mut ig = IriGraph::new();
        for t in g.matches(None, Some(&owl::same_as()), None) {
            let Some(iri) = t.subject.as_iri() else {
                return Err(OpError::Invalid(format!("IRI graph subject {} is not an IRI", t.subject)));
            };
            let t_type = g
                .object(&t.subject, &prov::type_())
                .and_then(Term::as_iri)
                .ok_or_else(|| OpError::Invalid(format!("IRI graph entry {iri} has no prov:type")))?;
            ig.record(t.object.clone(), t_type.clone(), iri.clone());
        }
        for t in g.matches(None, Some(&prov::was_revision_of()), None) {
            if let (Some(new), Some(old)) = (t.subject.as_iri(), t.object.as_iri()) {
                ig.revisions.insert(new.clone(), old.clone());
                ig.issued.entry(old.clone()).or_insert_with(|| (Term::Iri(old.clone()), old.clone()));
            }
        }
        Ok(ig)
    }

    /// `counters.tsv` content: construct IRI, tab, last counter.
    pub fn counters_tsv(&self) -> String {
        let mut out = String::new();
        for (c, n) in &self.counters {
            out.push_str(c.as_str());
            out.push('\t');
            out.push_str(&n.to_string());
            out.push('\n');
        }
        out
    }

    pub fn load_counters_tsv(&mut self, text: &str) -> Result<(), OpError> {
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = || OpError::Invalid(format!("counters line {}: {line:?}", n + 1));
            let (iri, count) = line.split_once('\t').ok_or_else(bad)?;
            let count: u64 = count.trim().parse().map_err(|_| bad())?;
            self.counters.insert(Iri::new(iri).map_err(|_| bad())?, count);
        }
        Ok(())
    }
}

/// Makes a value safe as an IRI fragment: spaces become `_`, and characters
/// outside the unreserved set (plus `/`) are percent-encoded.
pub fn validate(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for b in value.trim().bytes() {
        match b {
            b' ' => out.push('_'),
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'.' | b'_' | b'~' | b'/' => {
                out.push(b as char)
            }
            _ => out.push_str(&format!("%{b:02X}")),
        }
    }
    out
}

/// Data needed to mint IRIs for one target TBox: `C(T) ∪ P(T)` and the
/// warehouse prefix.
#[derive(Clone, Debug)]
pub struct IriScheme {
    constructs: BTreeSet<Iri>,
    prefix: String,
}

impl IriScheme {
    pub fn new(ttbox: &TargetTBox) -> Self {
        let mut constructs = ttbox.concepts();
        constructs.extend(ttbox.properties());
        Self {
            constructs,
            prefix: ttbox.prefix.clone().unwrap_or_default(),
        }
    }

    pub fn is_construct(&self, x: &Iri) -> bool {
        self.constructs.contains(x)
    }
}

/// Looks up `source` for `t_type`, or mints and records a new IRI from
/// `value`. Distinct sources never share an IRI: a clash gets `_2`, `_3`, ...
pub fn generate_iri(
    ig: &mut IriGraph,
    source: Option<&Term>,
    value: Option<&str>,
    t_type: &Iri,
    scheme: &IriScheme,
) -> Result<Iri, OpError> {
    if let Some(found) = source.and_then(|s| ig.lookup(s, t_type)) {
        return Ok(found.clone());
    }
    let value = value
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .ok_or_else(|| OpError::NullIriValue(source.map(Term::to_string).unwrap_or_default()))?;
    let base = if scheme.is_construct(t_type) {
        t_type.as_str()
    } else {
        scheme.prefix.as_str()
    };
    let stem = format!("{base}#{}", validate(value));
    let key = source.cloned();
    let mut candidate = stem.clone();
    let mut n = 1;
    loop {
        let iri = Iri::new_unchecked(candidate.as_str());
        match ig.issued.get(&iri) {
            None => break,
            // Without a source the same value maps to the same IRI.
            Some((s, t)) if key.is_none() && t == t_type && s == &Term::Iri(iri.clone()) => break,
            Some(_) => {
                n += 1;
                candidate = format!("{stem}_{n}");
            }
        }
    }
    let iri = Iri::new_unchecked(candidate.as_str());
    let key = key.unwrap_or_else(|| Term::Iri(iri.clone()));
    ig.record(key, t_type.clone(), iri.clone());
    Ok(iri)
}

/// The IRI of the next version of `iri`: its lineage root plus today's date.
/// Keys that resolved to `iri` now resolve to the new version.
pub fn update_iri(iri: &Iri, ig: &mut IriGraph, clock: &dyn Clock) -> Iri {
    let root = ig.lineage_root(iri);
    let new = Iri::new_unchecked(format!("{}_{}", root.as_str(), clock.today().underscored()).as_str());
    if new == *iri {
        return new;
    }
    for key in ig.sources_of(iri) {
        ig.map.insert(key, new.clone());
    }
    let origin = ig
        .issued
        .get(iri)
        .cloned()
        .unwrap_or_else(|| (Term::Iri(iri.clone()), iri.clone()));
    ig.issued.insert(new.clone(), origin);
    ig.revisions.insert(new.clone(), iri.clone());
    new
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::date::{Date, FixedClock};

    const SDW: &str = "http://extbi.lab.aau.dk/ontology/sdw/";

    fn scheme() -> IriScheme {
        IriScheme {
            constructs: [Iri::new_unchecked(format!("{SDW}Recipient").as_str())]
                .into_iter()
                .collect(),
            prefix: "http://extbi.lab.aau.dk/ontology/sdw".into(),
        }
    }

    fn recipient() -> Iri {
        Iri::new_unchecked(format!("{SDW}Recipient").as_str())
    }

    #[test]
    fn construct_and_prefix_cases() {
        let mut ig = IriGraph::new();
        let s = Term::iri("http://extbi.lab.aau.dk/ontology/subsidy/Recipient#291894");
        let a = generate_iri(&mut ig, Some(&s), Some("291894"), &recipient(), &scheme()).unwrap();
        assert_eq!(a.as_str(), "http://extbi.lab.aau.dk/ontology/sdw/Recipient#291894");
        // Lookup hit ignores the value and leaves the graph alone.
        let before = ig.clone();
        let b = generate_iri(&mut ig, Some(&s), None, &recipient(), &scheme()).unwrap();
        assert_eq!(a, b);
        assert_eq!(ig, before);
        let other = Iri::new_unchecked("http://e/NotInTBox");
        let c = generate_iri(&mut ig, Some(&Term::string("Vemb")), Some("Vemb"), &other, &scheme()).unwrap();
        assert_eq!(c.as_str(), "http://extbi.lab.aau.dk/ontology/sdw#Vemb");
        assert!(generate_iri(&mut ig, Some(&Term::string("x")), None, &other, &scheme()).is_err());
    }

    #[test]
    fn clashes_get_suffixes() {
        let mut ig = IriGraph::new();
        let a = generate_iri(&mut ig, Some(&Term::iri("http://a/1")), Some("k"), &recipient(), &scheme()).unwrap();
        let b = generate_iri(&mut ig, Some(&Term::iri("http://b/1")), Some("k"), &recipient(), &scheme()).unwrap();
        assert_ne!(a, b);
        assert!(b.as_str().ends_with("#k_2"));
    }

    #[test]
    fn validate_encodes() {
        assert_eq!(validate("Kim Jonni"), "Kim_Jonni");
        assert_eq!(validate("25/5/2010"), "25/5/2010");
        assert_eq!(validate("a#b?c"), "a%23b%3Fc");
        assert_eq!(validate("Løkken"), "L%C3%B8kken");
    }

    #[test]
    fn versions_and_round_trip() {
        let mut ig = IriGraph::new();
        let s = Term::iri("http://s/291894");
        let v0 = generate_iri(&mut ig, Some(&s), Some("291894"), &recipient(), &scheme()).unwrap();
        let clock = FixedClock(Date::new(2017, 9, 26).unwrap());
        let v1 = update_iri(&v0, &mut ig, &clock);
        assert_eq!(v1.as_str(), format!("{}_2017_09_26", v0.as_str()));
        assert_eq!(update_iri(&v1, &mut ig, &clock), v1);
        assert_eq!(ig.lookup(&s, &recipient()), Some(&v1));
        let later = FixedClock(Date::new(2017, 9, 27).unwrap());
        let v2 = update_iri(&v1, &mut ig, &later);
        assert_eq!(v2.as_str(), format!("{}_2017_09_27", v0.as_str()));
        assert_eq!(ig.lineage_root(&v2), v0);

        let c = Iri::new_unchecked("http://e/DS");
        assert_eq!(ig.next_counter(&c), 1);
        assert_eq!(ig.next_counter(&c), 2);
        let mut back = IriGraph::from_graph(&ig.to_graph()).unwrap();
        back.load_counters_tsv(&ig.counters_tsv()).unwrap();
        assert_eq!(back.lookup(&s, &recipient()), Some(&v2));
        assert_eq!(back.lineage_root(&v2), v0);
        assert_eq!(back.counters(), ig.counters());
        let company = Iri::new_unchecked(format!("{SDW}Company#21875597").as_str());
        let d = FixedClock(Date::new(2019, 2, 11).unwrap());
        assert_eq!(
            update_iri(&company, &mut ig, &d).as_str(),
            "http://extbi.lab.aau.dk/ontology/sdw/Company#21875597_2019_02_11"
        );
    }
}
