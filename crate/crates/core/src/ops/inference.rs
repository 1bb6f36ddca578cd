//! MaterializeInference over a small RDFS/OWL rule subset.

use alloc::vec::Vec;

use crate::graph::Graph;
use crate::term::{Term, Triple};
use crate::vocab::{owl, rdf, rdfs};

/// Conclusions of every rule instance that uses `t` as one premise, the
/// others drawn from `g`.
fn derive(t: &Triple, g: &Graph) -> Vec<Triple> {
    let (sc, sp, ty) = (rdfs::sub_class_of(), rdfs::sub_property_of(), rdf::type_());
    let (dom, rng, same) = (rdfs::domain(), rdfs::range(), owl::same_as());
    let mut out = Vec::new();
    let mut push = |s: &Term, p: &crate::term::Iri, o: &Term| {
        if let Ok(t) = Triple::new(s.clone(), p.clone(), o.clone()) {
            out.push(t);
        }
    };
    let (s, p, o) = (&t.subject, &t.predicate, &t.object);
    let p_term = Term::Iri(p.clone());

    if *p == sc {
        for c in g.objects(o, &sc) {
            push(s, &sc, c);
        }
        for x in g.subjects(&sc, s) {
            push(x, &sc, o);
        }
        for x in g.subjects(&ty, s) {
            push(x, &ty, o);
        }
    }
    if *p == ty {
        for b in g.objects(o, &sc) {
            push(s, &ty, b);
        }
    }
    if *p == sp {
        if let Some(from) = s.as_iri() {
            for m in g.matches(None, Some(from), None) {
                if let Some(to) = o.as_iri() {
                    push(&m.subject, to, &m.object);
                }
            }
        }
    }
    if *p == dom {
        if let Some(prop) = s.as_iri() {
            for m in g.matches(None, Some(prop), None) {
                push(&m.subject, &ty, o);
            }
        }
    }
    if *p == rng {
        if let Some(prop) = s.as_iri() {
            for m in g.matches(None, Some(prop), None) {
                if m.object.is_resource() {
                    push(&m.object, &ty, o);
                }
            }
        }
    }
    if *p == same {
        push(o, &same, s);
        for w in g.objects(o, &same) {
            push(s, &same, w);
        }
        for w in g.subjects(&same, s) {
            push(w, &same, o);
        }
        for m in g.matches(Some(s), None, None) {
            push(o, &m.predicate, &m.object);
        }
    }

    // `t` as the instance premise of the schema and sameAs rules.
    for q in g.objects(&p_term, &sp) {
        if let Some(q) = q.as_iri() {
            push(s, q, o);
        }
    }
    for c in g.objects(&p_term, &dom) {
        push(s, &ty, c);
    }
    if o.is_resource() {
        for c in g.objects(&p_term, &rng) {
            push(o, &ty, c);
        }
    }
    for z in g.objects(s, &same) {
        push(z, p, o);
    }
    out
}

/// Closes `abox ∪ tbox` under the rules and returns `abox` with every
/// inferred triple. Triples only asserted in `tbox` are left out.
pub fn materialize_inference(abox: &Graph, tbox: &Graph) -> Graph {
    let mut g = abox.union(tbox);
    let mut delta: Vec<Triple> = g.iter().collect();
    while !delta.is_empty() {
        let mut next = Vec::new();
        for t in &delta {
            for c in derive(t, &g) {
                if !g.contains(&c) {
                    next.push(c);
                }
            }
        }
        next.retain(|t| g.insert(t.clone()));
        delta = next;
    }
    g.subtract(&tbox.difference(abox));
    g
}
