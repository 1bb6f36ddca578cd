//! ExternalLinking against a local copy of an external knowledge base.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::graph::Graph;
use crate::term::{Term, Triple};
use crate::vocab::owl;

use super::OpError;

/// Lowercased whitespace tokens of a resource's literal objects.
pub fn semantic_bag(g: &Graph, r: &Term) -> BTreeSet<String> {
    g.describe(r)
        .filter_map(|t| t.object.as_literal().map(|l| l.lexical().to_lowercase()))
        .flat_map(|s| s.split_whitespace().map(String::from).collect::<Vec<_>>())
        .collect()
}

pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Adds `owl:sameAs` links from the subjects of `sabox` to the external
/// resources whose bags are more similar than `threshold`. Only the `k`
/// external resources sharing the most tokens are compared.
pub fn external_linking(
    sabox: &Graph,
    external: &Graph,
    k: usize,
    threshold: f64,
) -> Result<Graph, OpError> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(OpError::Threshold(format!("{threshold}")));
    }
    let mut index: BTreeMap<String, BTreeSet<&Term>> = BTreeMap::new();
    let mut bags: BTreeMap<&Term, BTreeSet<String>> = BTreeMap::new();
    for ex in external.subject_terms() {
        let bag = semantic_bag(external, ex);
        for tok in &bag {
            index.entry(tok.clone()).or_default().insert(ex);
        }
        bags.insert(ex, bag);
    }
    let mut out = sabox.clone();
    for r in sabox.subject_terms() {
        let bag = semantic_bag(sabox, r);
        let mut shared: BTreeMap<&Term, usize> = BTreeMap::new();
        for tok in &bag {
            for ex in index.get(tok).into_iter().flatten() {
                *shared.entry(ex).or_default() += 1;
            }
        }
        let mut ranked: Vec<(&Term, usize)> = shared.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        for (ex, _) in ranked.into_iter().take(k) {
            if jaccard(&bag, &bags[ex]) > threshold {
                out.insert(Triple::new_unchecked(r.clone(), owl::same_as(), ex.clone()));
            }
        }
    }
    Ok(out)
}
