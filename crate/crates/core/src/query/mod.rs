//! Graph pattern algebra (triple patterns, AND, OPT, UNION, FILTER) with set
//! semantics, plus projection through expression headers.

mod expr;
mod parse;
mod validate;

pub use expr::{
    AggregateFn, BinaryOp, CastType, EvalContext, EvalError, Expression, Function, Numeric,
};
pub use parse::{parse_expression, ExpressionParseError};
pub use validate::{
    get_properties_from_expressions, validate_expressions, Substitution, ValidateError,
};

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::graph::Graph;
use crate::term::{Iri, Term, Triple};

/// A query variable, stored without its leading `?`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable(Arc<str>);

impl Variable {
    pub fn new(name: &str) -> Self {
        Self(Arc::from(name.strip_prefix('?').unwrap_or(name)))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

/// One position of a triple pattern.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum TermPattern {
    Term(Term),
    Var(Variable),
}

impl TermPattern {
    pub fn var(name: &str) -> Self {
        TermPattern::Var(Variable::new(name))
    }

    pub fn iri(value: &str) -> Self {
        TermPattern::Term(Term::iri(value))
    }

    fn resolve<'a>(&'a self, mu: &'a Binding) -> Option<&'a Term> {
        match self {
            TermPattern::Term(t) => Some(t),
            TermPattern::Var(v) => mu.get(v),
        }
    }
}

impl From<Term> for TermPattern {
    fn from(t: Term) -> Self {
        TermPattern::Term(t)
    }
}

impl From<Iri> for TermPattern {
    fn from(i: Iri) -> Self {
        TermPattern::Term(Term::Iri(i))
    }
}

impl From<Variable> for TermPattern {
    fn from(v: Variable) -> Self {
        TermPattern::Var(v)
    }
}

impl fmt::Display for TermPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermPattern::Term(t) => fmt::Display::fmt(t, f),
            TermPattern::Var(v) => fmt::Display::fmt(v, f),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TriplePattern {
    pub subject: TermPattern,
    pub predicate: TermPattern,
    pub object: TermPattern,
}

impl TriplePattern {
    pub fn new(
        subject: impl Into<TermPattern>,
        predicate: impl Into<TermPattern>,
        object: impl Into<TermPattern>,
    ) -> Self {
        Self {
            subject: subject.into(),
            predicate: predicate.into(),
            object: object.into(),
        }
    }

    fn positions(&self) -> [&TermPattern; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    /// Instantiates the pattern under `mu`; `None` if a variable is unbound
    /// or the result is not a well-formed triple.
    pub fn instantiate(&self, mu: &Binding) -> Option<Triple> {
        let s = self.subject.resolve(mu)?;
        let p = self.predicate.resolve(mu)?.as_iri()?;
        let o = self.object.resolve(mu)?;
        if s.is_literal() {
            return None;
        }
        Some(Triple::new_unchecked(s.clone(), p.clone(), o.clone()))
    }

    /// All solutions of this pattern compatible with `mu`, merged with it.
    fn extend(&self, g: &Graph, mu: &Binding, out: &mut impl FnMut(Binding)) {
        let s = self.subject.resolve(mu);
        let p_term = self.predicate.resolve(mu);
        let p = match p_term {
            Some(t) => match t.as_iri() {
                Some(i) => Some(i),
                None => return,
            },
            None => None,
        };
        let o = self.object.resolve(mu);
        if s.is_some_and(Term::is_literal) {
            return;
        }
        for t in g.matches(s, p, o) {
            let mut m = mu.clone();
            let pred = Term::Iri(t.predicate.clone());
            if bind(&mut m, &self.subject, &t.subject)
                && bind(&mut m, &self.predicate, &pred)
                && bind(&mut m, &self.object, &t.object)
            {
                out(m);
            }
        }
    }
}

fn bind(mu: &mut Binding, pos: &TermPattern, value: &Term) -> bool {
    match pos {
        TermPattern::Term(t) => t == value,
        TermPattern::Var(v) => match mu.get(v) {
            Some(existing) => existing == value,
            None => {
                mu.insert(v.clone(), value.clone());
                true
            }
        },
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {} {})", self.subject, self.predicate, self.object)
    }
}

/// A recursive graph pattern.
#[derive(Clone, Debug, PartialEq)]
pub enum Pattern {
    Triple(TriplePattern),
    And(Box<Pattern>, Box<Pattern>),
    Opt(Box<Pattern>, Box<Pattern>),
    Union(Box<Pattern>, Box<Pattern>),
    Filter(Box<Pattern>, Expression),
}

/// A partial map from variables to terms.
pub type Binding = BTreeMap<Variable, Term>;

/// Solutions under set semantics.
pub type Solutions = BTreeSet<Binding>;

impl Pattern {
    pub fn triple(
        s: impl Into<TermPattern>,
        p: impl Into<TermPattern>,
        o: impl Into<TermPattern>,
    ) -> Self {
        Pattern::Triple(TriplePattern::new(s, p, o))
    }

    pub fn and(self, other: Pattern) -> Self {
        Pattern::And(Box::new(self), Box::new(other))
    }

    pub fn opt(self, other: Pattern) -> Self {
        Pattern::Opt(Box::new(self), Box::new(other))
    }

    pub fn union(self, other: Pattern) -> Self {
        Pattern::Union(Box::new(self), Box::new(other))
    }

    pub fn filter(self, condition: Expression) -> Self {
        Pattern::Filter(Box::new(self), condition)
    }

    /// var(Q).
    pub fn variables(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut BTreeSet<Variable>) {
        match self {
            Pattern::Triple(tp) => {
                for pos in tp.positions() {
                    if let TermPattern::Var(v) = pos {
                        out.insert(v.clone());
                    }
                }
            }
            Pattern::And(a, b) | Pattern::Opt(a, b) | Pattern::Union(a, b) => {
                a.collect_variables(out);
                b.collect_variables(out);
            }
            Pattern::Filter(p, _) => p.collect_variables(out),
        }
    }

    /// Triple patterns in pre-order.
    pub fn triple_patterns(&self) -> Vec<&TriplePattern> {
        let mut out = Vec::new();
        self.collect_triple_patterns(&mut out);
        out
    }

    fn collect_triple_patterns<'a>(&'a self, out: &mut Vec<&'a TriplePattern>) {
        match self {
            Pattern::Triple(tp) => out.push(tp),
            Pattern::And(a, b) | Pattern::Opt(a, b) | Pattern::Union(a, b) => {
                a.collect_triple_patterns(out);
                b.collect_triple_patterns(out);
            }
            Pattern::Filter(p, _) => p.collect_triple_patterns(out),
        }
    }

    /// Evaluates the pattern over `g`.
    pub fn evaluate(&self, g: &Graph) -> Solutions {
        match self {
            Pattern::Triple(tp) => {
                let mut out = Solutions::new();
                tp.extend(g, &Binding::new(), &mut |m| {
                    out.insert(m);
                });
                out
            }
            Pattern::And(a, b) => {
                let left = a.evaluate(g);
                join(g, left, b, false)
            }
            Pattern::Opt(a, b) => {
                let left = a.evaluate(g);
                join(g, left, b, true)
            }
            Pattern::Union(a, b) => {
                let mut left = a.evaluate(g);
                left.extend(b.evaluate(g));
                left
            }
            Pattern::Filter(p, cond) => p
                .evaluate(g)
                .into_iter()
                .filter(|mu| cond.eval(mu).and_then(|t| expr::effective_boolean(&t)) == Ok(true))
                .collect(),
        }
    }
}

/// Natural join (or left outer join when `optional`) of `left` with the
/// solutions of `right`.
fn join(g: &Graph, left: Solutions, right: &Pattern, optional: bool) -> Solutions {
    let mut out = Solutions::new();
    if let Pattern::Triple(tp) = right {
        for mu in left {
            let mut found = false;
            tp.extend(g, &mu, &mut |m| {
                found = true;
                out.insert(m);
            });
            if optional && !found {
                out.insert(mu);
            }
        }
        return out;
    }

    let right = right.evaluate(g);
    let key_vars: Vec<Variable> = always_bound(&left)
        .intersection(&always_bound(&right))
        .cloned()
        .collect();
    let mut index: BTreeMap<Vec<&Term>, Vec<&Binding>> = BTreeMap::new();
    for mu in &right {
        let key = key_vars.iter().map(|v| &mu[v]).collect();
        index.entry(key).or_default().push(mu);
    }
    for mu in &left {
        let key: Vec<&Term> = key_vars.iter().map(|v| &mu[v]).collect();
        let mut found = false;
        if let Some(candidates) = index.get(&key) {
            for other in candidates {
                if compatible(mu, other) {
                    found = true;
                    out.insert(merge(mu, other));
                }
            }
        }
        if optional && !found {
            out.insert(mu.clone());
        }
    }
    out
}

/// Variables bound in every solution.
fn always_bound(solutions: &Solutions) -> BTreeSet<Variable> {
    let mut iter = solutions.iter();
    let Some(first) = iter.next() else {
        return BTreeSet::new();
    };
    let mut vars: BTreeSet<Variable> = first.keys().cloned().collect();
    for mu in iter {
        vars.retain(|v| mu.contains_key(v));
        if vars.is_empty() {
            break;
        }
    }
    vars
}

/// μ1 and μ2 agree on every shared variable.
pub fn compatible(a: &Binding, b: &Binding) -> bool {
    let (small, big) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small
        .iter()
        .all(|(k, v)| big.get(k).is_none_or(|w| w == v))
}

pub fn merge(a: &Binding, b: &Binding) -> Binding {
    let mut out = a.clone();
    for (k, v) in b {
        out.entry(k.clone()).or_insert_with(|| v.clone());
    }
    out
}

/// The projection list of a query.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OutputHeader {
    pub columns: Vec<(String, Expression)>,
    /// When set, aggregates are evaluated per distinct value of this variable.
    pub group_by: Option<Variable>,
}

impl OutputHeader {
    pub fn new() -> Self {
        Self::default()
    }

    /// A header projecting the given variables under their own names.
    pub fn variables<'a>(names: impl IntoIterator<Item = &'a str>) -> Self {
        let columns = names
            .into_iter()
            .map(|n| {
                let v = Variable::new(n);
                (v.name().to_string(), Expression::Variable(v))
            })
            .collect();
        Self {
            columns,
            group_by: None,
        }
    }

    pub fn column(mut self, alias: &str, e: Expression) -> Self {
        self.columns.push((alias.to_string(), e));
        self
    }

    pub fn grouped_by(mut self, v: Variable) -> Self {
        self.group_by = Some(v);
        self
    }
}

/// A projected row; `None` marks an unbound or failed cell.
pub type Row = Vec<Option<Term>>;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct QueryResult {
    pub rows: BTreeSet<Row>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QueryError {
    UnknownVariable(Variable),
}

impl fmt::Display for QueryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryError::UnknownVariable(v) => {
                write!(f, "header variable {v} does not occur in the pattern")
            }
        }
    }
}

/// Evaluates `q` over `g` and projects every solution through `header`.
pub fn execute_query(
    q: &Pattern,
    g: &Graph,
    header: &OutputHeader,
) -> Result<QueryResult, QueryError> {
    let vars = q.variables();
    for (_, e) in &header.columns {
        if let Some(v) = e.variables().into_iter().find(|v| !vars.contains(v)) {
            return Err(QueryError::UnknownVariable(v));
        }
    }
    if let Some(v) = &header.group_by {
        if !vars.contains(v) {
            return Err(QueryError::UnknownVariable(v.clone()));
        }
    }
    Ok(project(q.evaluate(g), header))
}

/// Projects already-computed solutions through `header`.
pub fn project(solutions: Solutions, header: &OutputHeader) -> QueryResult {
    let mut result = QueryResult::default();
    let warn = |alias: &str, err: EvalError, result: &mut QueryResult| {
        if result.warnings.len() < 100 {
            result.warnings.push(alloc::format!("column {alias}: {err}"));
        }
    };
    match &header.group_by {
        None => {
            for mu in &solutions {
                let mut row = Vec::with_capacity(header.columns.len());
                for (alias, e) in &header.columns {
                    match e.eval(mu) {
                        Ok(t) => row.push(Some(t)),
                        Err(EvalError::Unbound(_)) => row.push(None),
                        Err(err) => {
                            warn(alias, err, &mut result);
                            row.push(None);
                        }
                    }
                }
                result.rows.insert(row);
            }
        }
        Some(key) => {
            let mut groups: BTreeMap<Option<&Term>, Vec<&Binding>> = BTreeMap::new();
            for mu in &solutions {
                groups.entry(mu.get(key)).or_default().push(mu);
            }
            for members in groups.values() {
                let ctxs: Vec<&dyn EvalContext> =
                    members.iter().map(|m| *m as &dyn EvalContext).collect();
                let mut row = Vec::with_capacity(header.columns.len());
                for (alias, e) in &header.columns {
                    match e.eval_group(&ctxs) {
                        Ok(t) => row.push(Some(t)),
                        Err(EvalError::Unbound(_)) => row.push(None),
                        Err(err) => {
                            warn(alias, err, &mut result);
                            row.push(None);
                        }
                    }
                }
                result.rows.insert(row);
            }
        }
    }
    result
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Triple(tp) => fmt::Display::fmt(tp, f),
            Pattern::And(a, b) => write!(f, "({a} AND {b})"),
            Pattern::Opt(a, b) => write!(f, "({a} OPT {b})"),
            Pattern::Union(a, b) => write!(f, "({a} UNION {b})"),
            Pattern::Filter(p, e) => write!(f, "({p} FILTER {e})"),
        }
    }
}
