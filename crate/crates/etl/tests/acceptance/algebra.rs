//! Randomized criteria, each checked against a brute-force oracle written
//! independently of the library's evaluation strategy.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semetl_core::ops::{changed_data_capture, materialize_inference};
use semetl_core::query::{
    execute_query, BinaryOp, Expression, Function, OutputHeader, Pattern, TermPattern, Variable,
};
use semetl_core::schema::extract_tbox;
use semetl_core::vocab::{owl, rdf, rdfs, xsd};
use semetl_core::{Graph, Iri, Term, Triple};

use crate::Outcome;

fn t(s: &Term, p: &Iri, o: &Term) -> Option<Triple> {
    Triple::new(s.clone(), p.clone(), o.clone()).ok()
}

fn q(local: &str) -> Term {
    Term::iri(&format!("http://q/{local}"))
}

// Query algebra.

/// A filter condition; converted to an `Expression` for the library and
/// evaluated directly by the oracle.
#[derive(Clone, Debug)]
enum Cond {
    Bound(&'static str),
    IsIri(&'static str),
    Eq(Operand, Operand),
    Ne(Operand, Operand),
    Not(Box<Cond>),
    And(Box<Cond>, Box<Cond>),
    Or(Box<Cond>, Box<Cond>),
}

#[derive(Clone, Debug)]
enum Operand {
    Var(&'static str),
    Const(Term),
}

impl Operand {
    fn expr(&self) -> Expression {
        match self {
            Operand::Var(v) => Expression::var(v),
            Operand::Const(t) => Expression::Constant(t.clone()),
        }
    }

    fn value<'a>(&'a self, mu: &'a BTreeMap<&'static str, Term>) -> Option<&'a Term> {
        match self {
            Operand::Var(v) => mu.get(v),
            Operand::Const(t) => Some(t),
        }
    }
}

impl Cond {
    fn expr(&self) -> Expression {
        let call = |f, v: &str| Expression::Call(f, vec![Expression::var(v)]);
        let bin = |op, a: Expression, b: Expression| Expression::Binary(op, Box::new(a), Box::new(b));
        match self {
            Cond::Bound(v) => call(Function::Bound, v),
            Cond::IsIri(v) => call(Function::IsIri, v),
            Cond::Eq(a, b) => bin(BinaryOp::Eq, a.expr(), b.expr()),
            Cond::Ne(a, b) => bin(BinaryOp::Ne, a.expr(), b.expr()),
            Cond::Not(c) => Expression::Not(Box::new(c.expr())),
            Cond::And(a, b) => bin(BinaryOp::And, a.expr(), b.expr()),
            Cond::Or(a, b) => bin(BinaryOp::Or, a.expr(), b.expr()),
        }
    }

    /// Three-valued: `None` is an evaluation error.
    fn holds(&self, mu: &BTreeMap<&'static str, Term>) -> Option<bool> {
        match self {
            Cond::Bound(v) => Some(mu.contains_key(v)),
            Cond::IsIri(v) => mu.get(v).map(|t| matches!(t, Term::Iri(_))),
            Cond::Eq(a, b) => Some(a.value(mu)? == b.value(mu)?),
            Cond::Ne(a, b) => Some(a.value(mu)? != b.value(mu)?),
            Cond::Not(c) => c.holds(mu).map(|b| !b),
            Cond::And(a, b) => match (a.holds(mu), b.holds(mu)) {
                (Some(false), _) | (_, Some(false)) => Some(false),
                (Some(true), Some(true)) => Some(true),
                _ => None,
            },
            Cond::Or(a, b) => match (a.holds(mu), b.holds(mu)) {
                (Some(true), _) | (_, Some(true)) => Some(true),
                (Some(false), Some(false)) => Some(false),
                _ => None,
            },
        }
    }
}

#[derive(Clone, Debug)]
enum Pat {
    Triple([Operand; 3]),
    And(Box<Pat>, Box<Pat>),
    Opt(Box<Pat>, Box<Pat>),
    Union(Box<Pat>, Box<Pat>),
    Filter(Box<Pat>, Cond),
}

type Mu = BTreeMap<&'static str, Term>;

const VARS: [&str; 4] = ["x", "y", "z", "w"];

impl Pat {
    fn pattern(&self) -> Pattern {
        let pos = |o: &Operand| match o {
            Operand::Var(v) => TermPattern::var(v),
            Operand::Const(t) => TermPattern::Term(t.clone()),
        };
        match self {
            Pat::Triple([s, p, o]) => Pattern::triple(pos(s), pos(p), pos(o)),
            Pat::And(a, b) => a.pattern().and(b.pattern()),
            Pat::Opt(a, b) => a.pattern().opt(b.pattern()),
            Pat::Union(a, b) => a.pattern().union(b.pattern()),
            Pat::Filter(p, c) => p.pattern().filter(c.expr()),
        }
    }

    fn depth(&self) -> usize {
        match self {
            Pat::Triple(_) => 0,
            Pat::And(a, b) | Pat::Opt(a, b) | Pat::Union(a, b) => 1 + a.depth().max(b.depth()),
            Pat::Filter(p, _) => 1 + p.depth(),
        }
    }

    /// Every solution, by definition: triple patterns try every assignment
    /// of their variables to terms of the graph.
    fn solutions(&self, g: &[Triple], domain: &[Term]) -> Vec<Mu> {
        match self {
            Pat::Triple(ops) => {
                let mut vars: Vec<&'static str> = ops
                    .iter()
                    .filter_map(|o| match o {
                        Operand::Var(v) => Some(*v),
                        Operand::Const(_) => None,
                    })
                    .collect();
                vars.sort();
                vars.dedup();
                let mut out = Vec::new();
                let total = domain.len().pow(vars.len() as u32);
                for mut code in 0..total {
                    let mut mu = Mu::new();
                    for v in &vars {
                        mu.insert(*v, domain[code % domain.len()].clone());
                        code /= domain.len();
                    }
                    let [s, p, o] = ops;
                    let (s, p, o) = (s.value(&mu).unwrap(), p.value(&mu).unwrap(), o.value(&mu).unwrap());
                    let Term::Iri(p) = p else { continue };
                    if let Some(triple) = t(s, p, o) {
                        if g.contains(&triple) {
                            out.push(mu);
                        }
                    }
                }
                out
            }
            Pat::And(a, b) => {
                let (l, r) = (a.solutions(g, domain), b.solutions(g, domain));
                let mut out = Vec::new();
                for m1 in &l {
                    for m2 in &r {
                        if compatible(m1, m2) {
                            out.push(union(m1, m2));
                        }
                    }
                }
                out
            }
            Pat::Opt(a, b) => {
                let (l, r) = (a.solutions(g, domain), b.solutions(g, domain));
                let mut out = Vec::new();
                for m1 in &l {
                    let mut any = false;
                    for m2 in &r {
                        if compatible(m1, m2) {
                            any = true;
                            out.push(union(m1, m2));
                        }
                    }
                    if !any {
                        out.push(m1.clone());
                    }
                }
                out
            }
            Pat::Union(a, b) => {
                let mut out = a.solutions(g, domain);
                out.extend(b.solutions(g, domain));
                out
            }
            Pat::Filter(p, c) => p
                .solutions(g, domain)
                .into_iter()
                .filter(|mu| c.holds(mu) == Some(true))
                .collect(),
        }
    }
}

fn compatible(a: &Mu, b: &Mu) -> bool {
    a.iter().all(|(k, v)| b.get(k).is_none_or(|w| w == v))
}

fn union(a: &Mu, b: &Mu) -> Mu {
    let mut out = a.clone();
    out.extend(b.iter().map(|(k, v)| (*k, v.clone())));
    out
}

struct QueryGen {
    rng: ChaCha8Rng,
    subjects: Vec<Term>,
    predicates: Vec<Term>,
    objects: Vec<Term>,
}

impl QueryGen {
    fn new(seed: u64) -> Self {
        let subjects: Vec<Term> = ["a", "b", "c", "d"].iter().map(|s| q(s)).chain([Term::blank("n1")]).collect();
        let predicates = vec![q("p"), q("r")];
        let mut objects = subjects.clone();
        objects.extend([Term::string("alpha"), Term::string("beta"), q("p")]);
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            subjects,
            predicates,
            objects,
        }
    }

    fn pick(&mut self, pool: &[Term]) -> Term {
        pool.choose(&mut self.rng).unwrap().clone()
    }

    fn graph(&mut self) -> Graph {
        let n = self.rng.gen_range(0..=30);
        let mut g = Graph::new();
        for _ in 0..n {
            let (s, p, o) = (self.pick(&self.subjects.clone()), self.pick(&self.predicates.clone()), self.pick(&self.objects.clone()));
            let Term::Iri(p) = p else { unreachable!() };
            g.insert(Triple::new_unchecked(s, p, o));
        }
        g
    }

    fn var(&mut self) -> &'static str {
        VARS.choose(&mut self.rng).copied().unwrap()
    }

    fn operand(&mut self, pool: &[Term], var_odds: f64) -> Operand {
        if self.rng.gen_bool(var_odds) {
            Operand::Var(self.var())
        } else if self.rng.gen_bool(0.1) {
            // A term the graph never contains.
            Operand::Const(q("absent"))
        } else {
            Operand::Const(self.pick(pool))
        }
    }

    fn pattern(&mut self, depth: usize) -> Pat {
        if depth == 0 || self.rng.gen_bool(0.3) {
            let (s, p, o) = (self.subjects.clone(), self.predicates.clone(), self.objects.clone());
            return Pat::Triple([self.operand(&s, 0.7), self.operand(&p, 0.2), self.operand(&o, 0.6)]);
        }
        let a = Box::new(self.pattern(depth - 1));
        match self.rng.gen_range(0..4) {
            0 => Pat::And(a, Box::new(self.pattern(depth - 1))),
            1 => Pat::Opt(a, Box::new(self.pattern(depth - 1))),
            2 => Pat::Union(a, Box::new(self.pattern(depth - 1))),
            _ => Pat::Filter(a, self.cond(2)),
        }
    }

    fn cond(&mut self, depth: usize) -> Cond {
        if depth == 0 || self.rng.gen_bool(0.5) {
            let objects = self.objects.clone();
            return match self.rng.gen_range(0..4) {
                0 => Cond::Bound(self.var()),
                1 => Cond::IsIri(self.var()),
                2 => Cond::Eq(Operand::Var(self.var()), self.operand(&objects, 0.4)),
                _ => Cond::Ne(Operand::Var(self.var()), self.operand(&objects, 0.4)),
            };
        }
        match self.rng.gen_range(0..3) {
            0 => Cond::Not(Box::new(self.cond(depth - 1))),
            1 => Cond::And(Box::new(self.cond(depth - 1)), Box::new(self.cond(depth - 1))),
            _ => Cond::Or(Box::new(self.cond(depth - 1)), Box::new(self.cond(depth - 1))),
        }
    }
}

pub fn query_oracle() -> Outcome {
    let start = Instant::now();
    let mut gen = QueryGen::new(7);
    let mut nonempty = 0;
    let mut deepest = 0;
    for case in 0..1000 {
        let g = gen.graph();
        let pat = gen.pattern(3);
        deepest = deepest.max(pat.depth());
        let pattern = pat.pattern();
        let vars: Vec<Variable> = pattern.variables().into_iter().collect();
        let header = OutputHeader::variables(vars.iter().map(Variable::name));
        let got = execute_query(&pattern, &g, &header)
            .map_err(|e| format!("case {case}: {e}"))?
            .rows;

        let triples: Vec<Triple> = g.iter().collect();
        let mut domain: Vec<Term> = Vec::new();
        for tr in &triples {
            for term in [tr.subject.clone(), Term::Iri(tr.predicate.clone()), tr.object.clone()] {
                if !domain.contains(&term) {
                    domain.push(term);
                }
            }
        }
        let expected: BTreeSet<Vec<Option<Term>>> = pat
            .solutions(&triples, &domain)
            .iter()
            .map(|mu| vars.iter().map(|v| mu.get(v.name()).cloned()).collect())
            .collect();
        ensure!(
            got == expected,
            "case {case}: {pattern} over {} triples gave {} rows, oracle {}",
            g.len(),
            got.len(),
            expected.len()
        );
        if !expected.is_empty() {
            nonempty += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 60.0, "took {secs:.1} s");
    ensure!(deepest == 3, "no pattern reached depth 3");
    Ok(format!("1000 cases agree, {nonempty} with solutions"))
}

// Changed data capture.

fn random_description(rng: &mut ChaCha8Rng, g: &mut Vec<Triple>, subject: &Term) {
    if rng.gen_bool(0.8) {
        g.push(Triple::new_unchecked(subject.clone(), rdf::type_(), q("C")));
    }
    for _ in 0..rng.gen_range(0..4) {
        let p = Iri::new_unchecked(format!("http://q/p{}", rng.gen_range(0..3)).as_str());
        let o = Term::string(&format!("v{}", rng.gen_range(0..4)));
        g.push(Triple::new_unchecked(subject.clone(), p, o));
    }
}

pub fn cdc_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut changed_total = 0;
    for case in 0..200 {
        let mut old = Vec::new();
        let mut new = Vec::new();
        for i in 0..rng.gen_range(0..8) {
            let s = q(&format!("s{i}"));
            match rng.gen_range(0..4) {
                0 => random_description(&mut rng, &mut old, &s),
                1 => random_description(&mut rng, &mut new, &s),
                2 => {
                    random_description(&mut rng, &mut old, &s);
                    random_description(&mut rng, &mut new, &s);
                }
                _ => {
                    random_description(&mut rng, &mut old, &s);
                    let same: Vec<Triple> = old.iter().filter(|t| t.subject == s).cloned().collect();
                    new.extend(same);
                }
            }
        }
        let old_g: Graph = old.iter().cloned().collect();
        let new_g: Graph = new.iter().cloned().collect();

        let typed = |ts: &[Triple]| -> Vec<Term> {
            ts.iter().filter(|t| t.predicate == rdf::type_()).map(|t| t.subject.clone()).collect()
        };
        let old_typed = typed(&old);
        let ins: Vec<Term> = typed(&new).into_iter().filter(|s| !old_typed.contains(s)).collect();
        let ins_des: BTreeSet<Triple> = new.iter().filter(|t| ins.contains(&t.subject)).cloned().collect();
        let changed: BTreeSet<Triple> = new
            .iter()
            .filter(|t| !ins_des.contains(t) && !old.contains(t))
            .cloned()
            .collect();

        let flag0: BTreeSet<Triple> = changed_data_capture(&old_g, &new_g, 0).iter().collect();
        let flag1: BTreeSet<Triple> = changed_data_capture(&old_g, &new_g, 1).iter().collect();
        ensure!(flag0 == ins_des, "case {case}: flag 0 gave {} triples, oracle {}", flag0.len(), ins_des.len());
        ensure!(flag1 == changed, "case {case}: flag 1 gave {} triples, oracle {}", flag1.len(), changed.len());
        ensure!(flag0.is_disjoint(&flag1), "case {case}: outputs overlap");
        ensure!(
            flag0.iter().chain(&flag1).all(|t| new_g.contains(t)),
            "case {case}: output triple outside the new graph"
        );
        changed_total += changed.len();
    }
    Ok(format!("200 pairs agree, {changed_total} changed triples in total"))
}

// TBox extraction.

struct Synthetic {
    abox: Graph,
    expected: Graph,
}

fn synthetic_abox(rng: &mut ChaCha8Rng) -> Synthetic {
    let n = rng.gen_range(4..=8);
    let classes: Vec<Term> = (0..n).map(|i| q(&format!("C{i}"))).collect();
    // A forest of subclasses; some classes are declared equal to an
    // earlier one instead of getting their own instances.
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut alias: Vec<Option<usize>> = vec![None; n];
    for i in 1..n {
        match rng.gen_range(0..4) {
            0 => {}
            1 => alias[i] = Some(rng.gen_range(0..i)),
            _ => parent[i] = Some(rng.gen_range(0..i)),
        }
    }
    let mut members: Vec<BTreeSet<Term>> = vec![BTreeSet::new(); n];
    let mut next = 0;
    for i in 0..n {
        if alias[i].is_some() {
            continue;
        }
        for _ in 0..rng.gen_range(1..=3) {
            let x = q(&format!("x{next}"));
            next += 1;
            let mut c = Some(i);
            while let Some(k) = c {
                members[k].insert(x.clone());
                c = parent[k];
            }
        }
    }
    for i in 0..n {
        if let Some(j) = alias[i] {
            members[i] = members[j].clone();
        }
    }

    let ty = rdf::type_();
    let mut abox = Graph::new();
    let mut types: BTreeMap<Term, BTreeSet<Term>> = BTreeMap::new();
    for (i, ms) in members.iter().enumerate() {
        for x in ms {
            abox.insert(Triple::new_unchecked(x.clone(), ty.clone(), classes[i].clone()));
            types.entry(x.clone()).or_default().insert(classes[i].clone());
        }
    }

    let mut expected = Graph::new();
    let add = |g: &mut Graph, s: &Term, p: Iri, o: Term| {
        g.insert(Triple::new_unchecked(s.clone(), p, o));
    };
    for c in &classes {
        add(&mut expected, c, ty.clone(), Term::iri(owl::CLASS));
    }
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let (ma, mb) = (&members[a], &members[b]);
            if ma == mb {
                add(&mut expected, &classes[a], owl::equivalent_class(), classes[b].clone());
            } else if ma.is_subset(mb) {
                add(&mut expected, &classes[a], rdfs::sub_class_of(), classes[b].clone());
            } else if ma.is_disjoint(mb) {
                add(&mut expected, &classes[a], owl::disjoint_with(), classes[b].clone());
            }
        }
    }

    // Properties: kind, domain class and range class or datatype are the
    // generation parameters.
    let datatypes = [xsd::string(), xsd::integer()];
    for k in 0..rng.gen_range(1..=4) {
        let p = Iri::new_unchecked(format!("http://q/prop{k}").as_str());
        let pt = Term::Iri(p.clone());
        let d = rng.gen_range(0..n);
        let subjects: Vec<Term> = members[d].iter().cloned().collect();
        let used: Vec<&Term> = subjects.iter().filter(|_| rng.gen_bool(0.7)).collect();
        let used = if used.is_empty() { vec![&subjects[0]] } else { used };
        let mut domain = BTreeSet::new();
        let mut range = BTreeSet::new();
        let object_property = rng.gen_bool(0.5);
        let r = rng.gen_range(0..n);
        let dt = datatypes.choose(rng).unwrap().clone();
        for s in used {
            domain.extend(types[s].iter().cloned());
            let o = if object_property {
                let os: Vec<&Term> = members[r].iter().collect();
                let o = (*os.choose(rng).unwrap()).clone();
                range.extend(types[&o].iter().cloned());
                o
            } else {
                range.insert(Term::Iri(dt.clone()));
                if dt == xsd::string() {
                    Term::string(&format!("s{}", rng.gen_range(0..5)))
                } else {
                    Term::integer(rng.gen_range(0..5))
                }
            };
            abox.insert(Triple::new_unchecked(s.clone(), p.clone(), o));
        }
        let kind = if object_property { owl::OBJECT_PROPERTY } else { owl::DATATYPE_PROPERTY };
        add(&mut expected, &pt, ty.clone(), Term::iri(kind));
        for c in domain {
            add(&mut expected, &pt, rdfs::domain(), c);
        }
        for c in range {
            add(&mut expected, &pt, rdfs::range(), c);
        }
    }
    Synthetic { abox, expected }
}

pub fn tbox_extraction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut edges = 0;
    for case in 0..50 {
        let s = synthetic_abox(&mut rng);
        let got = extract_tbox(&s.abox).map_err(|e| format!("case {case}: {e}"))?;
        let missing = s.expected.difference(&got.tbox);
        let extra = got.tbox.difference(&s.expected);
        ensure!(
            missing.is_empty() && extra.is_empty(),
            "case {case}: missing {:?}, unexpected {:?}",
            missing.iter().collect::<Vec<_>>(),
            extra.iter().collect::<Vec<_>>()
        );
        ensure!(got.diagnostics.is_empty(), "case {case}: diagnostics {:?}", got.diagnostics);
        for tr in got.tbox.matches(None, Some(&rdfs::sub_class_of()), None) {
            let mirrored = Triple::new_unchecked(tr.subject.clone(), owl::disjoint_with(), tr.object.clone());
            ensure!(!got.tbox.contains(&mirrored), "case {case}: {tr} is also disjoint");
        }
        edges += got.tbox.len();
    }
    Ok(format!("50 ABoxes, {edges} TBox triples recovered exactly"))
}

// Inference.

/// Applies every rule to every pair of triples until nothing changes.
fn naive_closure(abox: &Graph, tbox: &Graph) -> Graph {
    let (sc, sp, ty) = (rdfs::sub_class_of(), rdfs::sub_property_of(), rdf::type_());
    let (dom, rng, same) = (rdfs::domain(), rdfs::range(), owl::same_as());
    let mut all: BTreeSet<Triple> = abox.iter().chain(tbox.iter()).collect();
    loop {
        let current: Vec<Triple> = all.iter().cloned().collect();
        let mut derived = Vec::new();
        for a in &current {
            if a.predicate == same {
                derived.extend(t(&a.object, &same, &a.subject));
            }
            for b in &current {
                if a.predicate == sc && b.predicate == sc && a.object == b.subject {
                    derived.extend(t(&a.subject, &sc, &b.object));
                }
                if a.predicate == ty && b.predicate == sc && a.object == b.subject {
                    derived.extend(t(&a.subject, &ty, &b.object));
                }
                if a.predicate == sp && a.subject == Term::Iri(b.predicate.clone()) {
                    if let Term::Iri(q) = &a.object {
                        derived.extend(t(&b.subject, q, &b.object));
                    }
                }
                if a.predicate == dom && a.subject == Term::Iri(b.predicate.clone()) {
                    derived.extend(t(&b.subject, &ty, &a.object));
                }
                if a.predicate == rng && a.subject == Term::Iri(b.predicate.clone()) && !b.object.is_literal() {
                    derived.extend(t(&b.object, &ty, &a.object));
                }
                if a.predicate == same && b.predicate == same && a.object == b.subject {
                    derived.extend(t(&a.subject, &same, &b.object));
                }
                if a.predicate == same && b.subject == a.subject {
                    derived.extend(t(&a.object, &b.predicate, &b.object));
                }
            }
        }
        let before = all.len();
        all.extend(derived);
        if all.len() == before {
            break;
        }
    }
    let tbox_only = tbox.difference(abox);
    all.into_iter().filter(|x| !tbox_only.contains(x)).collect()
}

fn random_inference_input(rng: &mut ChaCha8Rng) -> (Graph, Graph) {
    let resources: Vec<Term> = ["a", "b", "c", "d", "p", "r"].iter().map(|s| q(s)).chain([Term::blank("k")]).collect();
    let predicates = [
        rdf::type_(),
        rdfs::sub_class_of(),
        rdfs::sub_property_of(),
        rdfs::domain(),
        rdfs::range(),
        owl::same_as(),
        Iri::new_unchecked("http://q/p"),
        Iri::new_unchecked("http://q/r"),
    ];
    let (mut abox, mut tbox) = (Graph::new(), Graph::new());
    for _ in 0..20 {
        let s = resources.choose(rng).unwrap().clone();
        let p = predicates.choose(rng).unwrap().clone();
        let o = if rng.gen_bool(0.15) { Term::string("lit") } else { resources.choose(rng).unwrap().clone() };
        let triple = Triple::new_unchecked(s, p, o);
        if rng.gen_bool(0.3) {
            tbox.insert(triple);
        } else {
            abox.insert(triple);
        }
    }
    (abox, tbox)
}

pub fn inference_closure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut inferred = 0;
    for case in 0..200 {
        let (abox, tbox) = random_inference_input(&mut rng);
        let got = materialize_inference(&abox, &tbox);
        let expected = naive_closure(&abox, &tbox);
        ensure!(
            got == expected,
            "case {case}: {} triples, naive {}; missing {:?}, unexpected {:?}",
            got.len(),
            expected.len(),
            expected.difference(&got).iter().collect::<Vec<_>>(),
            got.difference(&expected).iter().collect::<Vec<_>>()
        );
        ensure!(abox.iter().all(|x| got.contains(&x)), "case {case}: an asserted triple was dropped");
        ensure!(materialize_inference(&got, &tbox) == got, "case {case}: not idempotent");
        let whole = abox.union(&tbox);
        let closed = materialize_inference(&whole, &Graph::new());
        ensure!(
            materialize_inference(&closed, &Graph::new()) == closed,
            "case {case}: closure of the closure grew"
        );
        inferred += got.len() - abox.len();
    }
    Ok(format!("200 inputs agree, {inferred} triples inferred in total"))
}
