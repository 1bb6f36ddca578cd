//! Graph isomorphism modulo blank-node labels.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::graph::Graph;
use crate::term::{BlankNode, Term, Triple};

/// True if some bijection between the blank nodes of `a` and `b` maps `a`
/// onto `b`.
pub fn isomorphic(a: &Graph, b: &Graph) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let (ground_a, blank_a) = split(a);
    let (ground_b, blank_b) = split(b);
    if ground_a != ground_b || blank_a.len() != blank_b.len() {
        return false;
    }
    let nodes_a = blank_nodes(&blank_a);
    let nodes_b = blank_nodes(&blank_b);
    if nodes_a.len() != nodes_b.len() {
        return false;
    }
    let sig_a = signatures(&blank_a, &nodes_a);
    let sig_b = signatures(&blank_b, &nodes_b);
    let mut hist_a: Vec<_> = sig_a.values().cloned().collect();
    let mut hist_b: Vec<_> = sig_b.values().cloned().collect();
    hist_a.sort();
    hist_b.sort();
    if hist_a != hist_b {
        return false;
    }
    let target: BTreeSet<Triple> = blank_b.into_iter().collect();
    let order: Vec<BlankNode> = nodes_a.into_iter().collect();
    let mut search = Search {
        order: &order,
        sig_a: &sig_a,
        sig_b: &sig_b,
        source: &blank_a,
        target: &target,
        mapping: BTreeMap::new(),
        used: BTreeSet::new(),
    };
    search.run(0)
}

fn split(g: &Graph) -> (BTreeSet<Triple>, Vec<Triple>) {
    let mut ground = BTreeSet::new();
    let mut blank = Vec::new();
    for t in g.iter() {
        if matches!(t.subject, Term::Blank(_)) || matches!(t.object, Term::Blank(_)) {
            blank.push(t);
        } else {
            ground.insert(t);
        }
    }
    (ground, blank)
}

fn blank_nodes(triples: &[Triple]) -> BTreeSet<BlankNode> {
    let mut out = BTreeSet::new();
    for t in triples {
        if let Term::Blank(b) = &t.subject {
            out.insert(b.clone());
        }
        if let Term::Blank(b) = &t.object {
            out.insert(b.clone());
        }
    }
    out
}

/// A label-independent description of each blank node's neighbourhood, used
/// to prune candidate pairs.
type Signature = Vec<(u8, Option<Term>, alloc::string::String)>;

fn signatures(triples: &[Triple], nodes: &BTreeSet<BlankNode>) -> BTreeMap<BlankNode, Signature> {
    let mut sig: BTreeMap<BlankNode, Signature> =
        nodes.iter().map(|n| (n.clone(), Vec::new())).collect();
    for t in triples {
        let p = alloc::string::String::from(t.predicate.as_str());
        let erase = |term: &Term| match term {
            Term::Blank(_) => None,
            other => Some(other.clone()),
        };
        if let Term::Blank(b) = &t.subject {
            if let Some(s) = sig.get_mut(b) {
                s.push((0, erase(&t.object), p.clone()));
            }
        }
        if let Term::Blank(b) = &t.object {
            if let Some(s) = sig.get_mut(b) {
                s.push((1, erase(&t.subject), p.clone()));
            }
        }
    }
    for s in sig.values_mut() {
        s.sort();
    }
    sig
}

struct Search<'a> {
    order: &'a [BlankNode],
    sig_a: &'a BTreeMap<BlankNode, Signature>,
    sig_b: &'a BTreeMap<BlankNode, Signature>,
    source: &'a [Triple],
    target: &'a BTreeSet<Triple>,
    mapping: BTreeMap<BlankNode, BlankNode>,
    used: BTreeSet<BlankNode>,
}

impl Search<'_> {
    fn run(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            return self.source.iter().all(|t| self.target.contains(&self.apply(t)));
        }
        let node = &self.order[depth];
        let want = &self.sig_a[node];
        let candidates: Vec<BlankNode> = self
            .sig_b
            .iter()
            .filter(|(b, s)| *s == want && !self.used.contains(*b))
            .map(|(b, _)| b.clone())
            .collect();
        for cand in candidates {
            self.mapping.insert(node.clone(), cand.clone());
            self.used.insert(cand.clone());
            if self.consistent(node) && self.run(depth + 1) {
                return true;
            }
            self.mapping.remove(node);
            self.used.remove(&cand);
        }
        false
    }

    /// Checks every triple whose blank nodes are all mapped and that mentions
    /// the node just assigned.
    fn consistent(&self, node: &BlankNode) -> bool {
        self.source.iter().all(|t| {
            let mentions = matches!(&t.subject, Term::Blank(b) if b == node)
                || matches!(&t.object, Term::Blank(b) if b == node);
            if !mentions || !self.fully_mapped(t) {
                return true;
            }
            self.target.contains(&self.apply(t))
        })
    }

    fn fully_mapped(&self, t: &Triple) -> bool {
        let ok = |term: &Term| match term {
            Term::Blank(b) => self.mapping.contains_key(b),
            _ => true,
        };
        ok(&t.subject) && ok(&t.object)
    }

    fn apply(&self, t: &Triple) -> Triple {
        let map = |term: &Term| match term {
            Term::Blank(b) => Term::Blank(self.mapping.get(b).cloned().unwrap_or_else(|| b.clone())),
            other => other.clone(),
        };
        Triple::new_unchecked(map(&t.subject), t.predicate.clone(), map(&t.object))
    }
}
