//! Expression AST and evaluator.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use super::{Binding, Variable};
use crate::date::Date;
use crate::term::{Iri, Literal, Term};
use crate::vocab::xsd;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Eq => "=",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::And => "&&",
            BinaryOp::Or => "||",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Function {
    Concat,
    Str,
    StrAfter,
    StrBefore,
    Replace,
    UCase,
    LCase,
    Substr,
    Day,
    Month,
    Year,
    Iri,
    Bound,
    IsIri,
    IsBlank,
    IsLiteral,
}

impl Function {
    pub const ALL: [Function; 16] = [
        Function::Concat,
        Function::Str,
        Function::StrAfter,
        Function::StrBefore,
        Function::Replace,
        Function::UCase,
        Function::LCase,
        Function::Substr,
        Function::Day,
        Function::Month,
        Function::Year,
        Function::Iri,
        Function::Bound,
        Function::IsIri,
        Function::IsBlank,
        Function::IsLiteral,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Function::Concat => "CONCAT",
            Function::Str => "STR",
            Function::StrAfter => "STRAFTER",
            Function::StrBefore => "STRBEFORE",
            Function::Replace => "REPLACE",
            Function::UCase => "UCASE",
            Function::LCase => "LCASE",
            Function::Substr => "SUBSTR",
            Function::Day => "DAY",
            Function::Month => "MONTH",
            Function::Year => "YEAR",
            Function::Iri => "IRI",
            Function::Bound => "BOUND",
            Function::IsIri => "isIRI",
            Function::IsBlank => "isBlank",
            Function::IsLiteral => "isLiteral",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        if name.eq_ignore_ascii_case("URI") || name.eq_ignore_ascii_case("isURI") {
            return Some(if name.len() == 3 { Function::Iri } else { Function::IsIri });
        }
        Self::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(name))
    }

    fn arity(self) -> (usize, usize) {
        match self {
            Function::Concat => (0, usize::MAX),
            Function::StrAfter | Function::StrBefore => (2, 2),
            Function::Replace => (3, 3),
            Function::Substr => (2, 3),
            _ => (1, 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CastType {
    Integer,
    Double,
    String,
}

impl CastType {
    pub fn iri(self) -> &'static str {
        match self {
            CastType::Integer => xsd::INTEGER,
            CastType::Double => xsd::DOUBLE,
            CastType::String => xsd::STRING,
        }
    }

    pub fn from_iri(iri: &str) -> Option<Self> {
        [CastType::Integer, CastType::Double, CastType::String]
            .into_iter()
            .find(|c| c.iri() == iri)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum AggregateFn {
    Sum,
    Avg,
    Max,
    Min,
    Count,
}

impl AggregateFn {
    pub fn name(self) -> &'static str {
        match self {
            AggregateFn::Sum => "SUM",
            AggregateFn::Avg => "AVG",
            AggregateFn::Max => "MAX",
            AggregateFn::Min => "MIN",
            AggregateFn::Count => "COUNT",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            AggregateFn::Sum,
            AggregateFn::Avg,
            AggregateFn::Max,
            AggregateFn::Min,
            AggregateFn::Count,
        ]
        .into_iter()
        .find(|a| a.name().eq_ignore_ascii_case(name))
    }
}

/// An expression over variables, property IRIs and constants.
#[derive(Clone, Debug, PartialEq)]
pub enum Expression {
    Variable(Variable),
    /// A source property; resolved through `EvalContext::property`.
    Property(Iri),
    Constant(Term),
    Not(Box<Expression>),
    Negate(Box<Expression>),
    Binary(BinaryOp, Box<Expression>, Box<Expression>),
    In {
        expr: Box<Expression>,
        list: Vec<Expression>,
        negated: bool,
    },
    Call(Function, Vec<Expression>),
    Cast(CastType, Box<Expression>),
    /// `None` argument means `COUNT(*)`.
    Aggregate(AggregateFn, Option<Box<Expression>>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalError {
    Unbound(String),
    Type(String),
    Cast(String),
    DivisionByZero,
    Overflow,
    AggregateOutsideGroup,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::Unbound(what) => write!(f, "{what} is unbound"),
            EvalError::Type(msg) => write!(f, "type error: {msg}"),
            EvalError::Cast(msg) => write!(f, "cast failed: {msg}"),
            EvalError::DivisionByZero => f.write_str("division by zero"),
            EvalError::Overflow => f.write_str("integer overflow"),
            EvalError::AggregateOutsideGroup => f.write_str("aggregate used without grouping"),
        }
    }
}

/// Supplies values for variables and property references.
pub trait EvalContext {
    fn variable(&self, v: &Variable) -> Option<Term>;

    fn property(&self, _p: &Iri) -> Option<Term> {
        None
    }
}

impl EvalContext for Binding {
    fn variable(&self, v: &Variable) -> Option<Term> {
        self.get(v).cloned()
    }
}

/// A numeric value with its promotion class.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Numeric {
    Int(i64),
    Dec(f64),
    Dbl(f64),
}

impl Numeric {
    pub fn from_term(t: &Term) -> Option<Self> {
        let lit = t.as_literal()?;
        let lex = lit.lexical().trim();
        match numeric_kind(lit.datatype().as_str())? {
            0 => lex.strip_prefix('+').unwrap_or(lex).parse().ok().map(Numeric::Int),
            1 => parse_float(lex).map(Numeric::Dec),
            _ => parse_float(lex).map(Numeric::Dbl),
        }
    }

    fn as_f64(self) -> f64 {
        match self {
            Numeric::Int(i) => i as f64,
            Numeric::Dec(f) | Numeric::Dbl(f) => f,
        }
    }

    fn rank(self) -> u8 {
        match self {
            Numeric::Int(_) => 0,
            Numeric::Dec(_) => 1,
            Numeric::Dbl(_) => 2,
        }
    }

    pub fn to_term(self) -> Term {
        match self {
            Numeric::Int(i) => Term::integer(i),
            Numeric::Dec(f) => Term::typed(&format_decimal(f), xsd::decimal()),
            Numeric::Dbl(f) => Term::typed(&format_double(f), xsd::double()),
        }
    }

    fn compare(self, other: Numeric) -> Option<Ordering> {
        match (self, other) {
            (Numeric::Int(a), Numeric::Int(b)) => Some(a.cmp(&b)),
            (a, b) => a.as_f64().partial_cmp(&b.as_f64()),
        }
    }

    fn arith(self, op: BinaryOp, other: Numeric) -> Result<Numeric, EvalError> {
        let rank = self.rank().max(other.rank());
        if rank == 0 && op != BinaryOp::Div {
            let (Numeric::Int(a), Numeric::Int(b)) = (self, other) else {
                unreachable!()
            };
            let r = match op {
                BinaryOp::Add => a.checked_add(b),
                BinaryOp::Sub => a.checked_sub(b),
                BinaryOp::Mul => a.checked_mul(b),
                _ => unreachable!(),
            };
            return r.map(Numeric::Int).ok_or(EvalError::Overflow);
        }
        let (a, b) = (self.as_f64(), other.as_f64());
        let r = match op {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => {
                if b == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                a / b
            }
            _ => unreachable!(),
        };
        Ok(if rank == 2 { Numeric::Dbl(r) } else { Numeric::Dec(r) })
    }
}

/// 0 = integer family, 1 = decimal, 2 = floating point.
fn numeric_kind(datatype: &str) -> Option<u8> {
    let local = datatype.strip_prefix(xsd::NS)?;
    match local {
        "integer" | "int" | "long" | "short" | "byte" | "nonNegativeInteger"
        | "positiveInteger" | "negativeInteger" | "nonPositiveInteger" | "unsignedInt"
        | "unsignedLong" | "unsignedShort" | "unsignedByte" => Some(0),
        "decimal" => Some(1),
        "double" | "float" => Some(2),
        _ => None,
    }
}

fn parse_float(s: &str) -> Option<f64> {
    match s {
        "INF" | "+INF" => Some(f64::INFINITY),
        "-INF" => Some(f64::NEG_INFINITY),
        "NaN" => Some(f64::NAN),
        _ => s.parse().ok(),
    }
}

fn format_decimal(f: f64) -> String {
    let s = format!("{f}");
    if s.contains('.') || !f.is_finite() {
        s
    } else {
        format!("{s}.0")
    }
}

fn format_double(f: f64) -> String {
    if f.is_nan() {
        "NaN".into()
    } else if f.is_infinite() {
        if f > 0.0 { "INF".into() } else { "-INF".into() }
    } else {
        format!("{f:E}")
    }
}

fn boolean(b: bool) -> Term {
    Term::typed(if b { "true" } else { "false" }, xsd::boolean())
}

fn string(s: &str) -> Term {
    Term::string(s)
}

/// SPARQL effective boolean value.
pub(crate) fn effective_boolean(t: &Term) -> Result<bool, EvalError> {
    let Some(lit) = t.as_literal() else {
        return Err(EvalError::Type(format!("no boolean value for {t}")));
    };
    if lit.datatype().as_str() == xsd::BOOLEAN {
        return match lit.lexical() {
            "true" | "1" => Ok(true),
            "false" | "0" => Ok(false),
            other => Err(EvalError::Type(format!("invalid boolean {other:?}"))),
        };
    }
    if let Some(n) = Numeric::from_term(t) {
        return Ok(match n {
            Numeric::Int(i) => i != 0,
            Numeric::Dec(f) | Numeric::Dbl(f) => f != 0.0 && !f.is_nan(),
        });
    }
    if lit.is_string_like() {
        return Ok(!lit.lexical().is_empty());
    }
    Err(EvalError::Type(format!("no boolean value for {t}")))
}

fn lexical(t: &Term, what: &str) -> Result<String, EvalError> {
    match t {
        Term::Literal(lit) => Ok(lit.lexical().to_string()),
        _ => Err(EvalError::Type(format!("{what} expects a literal, got {t}"))),
    }
}

fn date_of(t: &Term) -> Result<Date, EvalError> {
    let lex = lexical(t, "date function")?;
    Date::parse(&lex).map_err(|_| EvalError::Type(format!("not a date: {lex:?}")))
}

/// Orders two terms for comparisons; numerics by value, strings and dates
/// lexically, anything else only for (in)equality.
fn compare_terms(a: &Term, b: &Term) -> Result<Ordering, EvalError> {
    if let (Some(x), Some(y)) = (Numeric::from_term(a), Numeric::from_term(b)) {
        return x
            .compare(y)
            .ok_or_else(|| EvalError::Type("NaN comparison".into()));
    }
    match (a, b) {
        (Term::Literal(x), Term::Literal(y)) if x.datatype() == y.datatype() => {
            Ok(x.lexical().cmp(y.lexical()))
        }
        _ => Err(EvalError::Type(format!("cannot order {a} and {b}"))),
    }
}

fn terms_equal(a: &Term, b: &Term) -> Result<bool, EvalError> {
    if let (Some(x), Some(y)) = (Numeric::from_term(a), Numeric::from_term(b)) {
        return Ok(x.compare(y) == Some(Ordering::Equal));
    }
    Ok(a == b)
}

enum Scope<'a> {
    Single(&'a dyn EvalContext),
    Group(&'a [&'a dyn EvalContext]),
}

impl Scope<'_> {
    fn row(&self) -> Option<&dyn EvalContext> {
        match self {
            Scope::Single(c) => Some(*c),
            Scope::Group(rows) => rows.first().copied(),
        }
    }
}

impl Expression {
    pub fn var(name: &str) -> Self {
        Expression::Variable(Variable::new(name))
    }

    pub fn property(iri: &str) -> Self {
        Expression::Property(Iri::new_unchecked(iri))
    }

    pub fn call(f: Function, args: Vec<Expression>) -> Self {
        Expression::Call(f, args)
    }

    /// Evaluates against a single row.
    pub fn eval(&self, ctx: &dyn EvalContext) -> Result<Term, EvalError> {
        self.eval_in(&Scope::Single(ctx))
    }

    /// Evaluates against a group of rows; aggregates range over the group,
    /// everything else reads the first row.
    pub fn eval_group(&self, rows: &[&dyn EvalContext]) -> Result<Term, EvalError> {
        self.eval_in(&Scope::Group(rows))
    }

    fn eval_in(&self, scope: &Scope<'_>) -> Result<Term, EvalError> {
        match self {
            Expression::Variable(v) => scope
                .row()
                .and_then(|c| c.variable(v))
                .ok_or_else(|| EvalError::Unbound(v.to_string())),
            Expression::Property(p) => scope
                .row()
                .and_then(|c| c.property(p))
                .ok_or_else(|| EvalError::Unbound(p.to_string())),
            Expression::Constant(t) => Ok(t.clone()),
            Expression::Not(e) => Ok(boolean(!effective_boolean(&e.eval_in(scope)?)?)),
            Expression::Negate(e) => {
                let t = e.eval_in(scope)?;
                let n = Numeric::from_term(&t)
                    .ok_or_else(|| EvalError::Type(format!("cannot negate {t}")))?;
                Ok(match n {
                    Numeric::Int(i) => Numeric::Int(i.checked_neg().ok_or(EvalError::Overflow)?),
                    Numeric::Dec(f) => Numeric::Dec(-f),
                    Numeric::Dbl(f) => Numeric::Dbl(-f),
                }
                .to_term())
            }
            Expression::Binary(op, a, b) => self.eval_binary(*op, a, b, scope),
            Expression::In {
                expr,
                list,
                negated,
            } => {
                let value = expr.eval_in(scope)?;
                let mut found = false;
                let mut error = None;
                for item in list {
                    match item.eval_in(scope).and_then(|t| terms_equal(&value, &t)) {
                        Ok(true) => {
                            found = true;
                            break;
                        }
                        Ok(false) => {}
                        Err(e) => error = Some(e),
                    }
                }
                if !found {
                    if let Some(e) = error {
                        return Err(e);
                    }
                }
                Ok(boolean(found != *negated))
            }
            Expression::Call(f, args) => self.eval_call(*f, args, scope),
            Expression::Cast(ty, e) => cast(*ty, &e.eval_in(scope)?),
            Expression::Aggregate(agg, arg) => match scope {
                Scope::Single(_) => Err(EvalError::AggregateOutsideGroup),
                Scope::Group(rows) => aggregate(*agg, arg.as_deref(), rows),
            },
        }
    }

    fn eval_binary(
        &self,
        op: BinaryOp,
        a: &Expression,
        b: &Expression,
        scope: &Scope<'_>,
    ) -> Result<Term, EvalError> {
        match op {
            BinaryOp::And | BinaryOp::Or => {
                // Error-tolerant three-valued logic.
                let x = a.eval_in(scope).and_then(|t| effective_boolean(&t));
                let y = b.eval_in(scope).and_then(|t| effective_boolean(&t));
                let short = op == BinaryOp::Or;
                match (x, y) {
                    (Ok(v), _) | (_, Ok(v)) if v == short => Ok(boolean(short)),
                    (Ok(_), Ok(_)) => Ok(boolean(!short)),
                    (Err(e), _) | (_, Err(e)) => Err(e),
                }
            }
            BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul | BinaryOp::Div => {
                let x = a.eval_in(scope)?;
                let y = b.eval_in(scope)?;
                let (Some(nx), Some(ny)) = (Numeric::from_term(&x), Numeric::from_term(&y)) else {
                    return Err(EvalError::Type(format!(
                        "arithmetic on non-numeric operands {x} {} {y}",
                        op.symbol()
                    )));
                };
                Ok(nx.arith(op, ny)?.to_term())
            }
            BinaryOp::Eq => Ok(boolean(terms_equal(&a.eval_in(scope)?, &b.eval_in(scope)?)?)),
            BinaryOp::Ne => Ok(boolean(!terms_equal(&a.eval_in(scope)?, &b.eval_in(scope)?)?)),
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => {
                let ord = compare_terms(&a.eval_in(scope)?, &b.eval_in(scope)?)?;
                Ok(boolean(match op {
                    BinaryOp::Lt => ord == Ordering::Less,
                    BinaryOp::Le => ord != Ordering::Greater,
                    BinaryOp::Gt => ord == Ordering::Greater,
                    _ => ord != Ordering::Less,
                }))
            }
        }
    }

    fn eval_call(
        &self,
        f: Function,
        args: &[Expression],
        scope: &Scope<'_>,
    ) -> Result<Term, EvalError> {
        let (min, max) = f.arity();
        if args.len() < min || args.len() > max {
            return Err(EvalError::Type(format!(
                "{} takes {} argument(s), got {}",
                f.name(),
                min,
                args.len()
            )));
        }
        if f == Function::Bound {
            return Ok(boolean(match &args[0] {
                Expression::Variable(v) => scope.row().and_then(|c| c.variable(v)).is_some(),
                Expression::Property(p) => scope.row().and_then(|c| c.property(p)).is_some(),
                _ => return Err(EvalError::Type("BOUND expects a variable".into())),
            }));
        }
        let values = args
            .iter()
            .map(|a| a.eval_in(scope))
            .collect::<Result<Vec<_>, _>>()?;
        let text = |i: usize| lexical(&values[i], f.name());
        match f {
            Function::Concat => {
                let mut out = String::new();
                for v in &values {
                    out.push_str(&lexical(v, "CONCAT")?);
                }
                Ok(string(&out))
            }
            Function::Str => match &values[0] {
                Term::Iri(i) => Ok(string(i.as_str())),
                Term::Literal(l) => Ok(string(l.lexical())),
                Term::Blank(_) => Err(EvalError::Type("STR of a blank node".into())),
            },
            Function::StrAfter => {
                let (s, sep) = (text(0)?, text(1)?);
                Ok(string(s.find(&sep).map_or("", |i| s[i + sep.len()..].trim())))
            }
            Function::StrBefore => {
                let (s, sep) = (text(0)?, text(1)?);
                Ok(string(s.find(&sep).map_or("", |i| &s[..i])))
            }
            Function::Replace => {
                let (s, from, to) = (text(0)?, text(1)?, text(2)?);
                if from.is_empty() {
                    return Ok(string(&s));
                }
                Ok(string(&s.replace(&from, &to)))
            }
            Function::UCase => Ok(with_same_kind(&values[0], &text(0)?.to_uppercase())),
            Function::LCase => Ok(with_same_kind(&values[0], &text(0)?.to_lowercase())),
            Function::Substr => {
                let s = text(0)?;
                let start = integer_arg(&values[1])?;
                let len = match values.get(2) {
                    Some(v) => Some(integer_arg(v)?),
                    None => None,
                };
                // 1-based, character indexed.
                let begin = (start - 1).max(0) as usize;
                let end = match len {
                    Some(l) => (start - 1 + l).max(0) as usize,
                    None => usize::MAX,
                };
                let out: String = s
                    .chars()
                    .enumerate()
                    .filter(|(i, _)| *i >= begin && *i < end)
                    .map(|(_, c)| c)
                    .collect();
                Ok(string(&out))
            }
            Function::Day => Ok(Term::integer(i64::from(date_of(&values[0])?.day()))),
            Function::Month => Ok(Term::integer(i64::from(date_of(&values[0])?.month()))),
            Function::Year => Ok(Term::integer(i64::from(date_of(&values[0])?.year()))),
            Function::Iri => match &values[0] {
                Term::Iri(i) => Ok(Term::Iri(i.clone())),
                Term::Literal(l) => Iri::new(l.lexical())
                    .map(Term::Iri)
                    .map_err(|e| EvalError::Type(e.to_string())),
                Term::Blank(_) => Err(EvalError::Type("IRI of a blank node".into())),
            },
            Function::IsIri => Ok(boolean(matches!(values[0], Term::Iri(_)))),
            Function::IsBlank => Ok(boolean(matches!(values[0], Term::Blank(_)))),
            Function::IsLiteral => Ok(boolean(values[0].is_literal())),
            Function::Bound => unreachable!(),
        }
    }

    /// Variables referenced anywhere in the expression.
    pub fn variables(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expression::Variable(v) = e {
                out.insert(v.clone());
            }
        });
        out
    }

    /// Property IRIs and constant IRIs referenced in the expression.
    pub fn iris(&self) -> BTreeSet<Iri> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| match e {
            Expression::Property(p) => {
                out.insert(p.clone());
            }
            Expression::Constant(Term::Iri(i)) => {
                out.insert(i.clone());
            }
            _ => {}
        });
        out
    }

    pub fn has_aggregate(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| found |= matches!(e, Expression::Aggregate(..)));
        found
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Expression)) {
        f(self);
        match self {
            Expression::Variable(_) | Expression::Property(_) | Expression::Constant(_) => {}
            Expression::Not(e) | Expression::Negate(e) | Expression::Cast(_, e) => e.visit(f),
            Expression::Binary(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Expression::In { expr, list, .. } => {
                expr.visit(f);
                for e in list {
                    e.visit(f);
                }
            }
            Expression::Call(_, args) => {
                for a in args {
                    a.visit(f);
                }
            }
            Expression::Aggregate(_, arg) => {
                if let Some(a) = arg {
                    a.visit(f);
                }
            }
        }
    }

    /// Rebuilds the expression bottom-up, replacing nodes for which `f`
    /// returns `Some`.
    pub fn rewrite<E>(
        &self,
        f: &mut impl FnMut(&Expression) -> Result<Option<Expression>, E>,
    ) -> Result<Expression, E> {
        if let Some(replacement) = f(self)? {
            return Ok(replacement);
        }
        Ok(match self {
            Expression::Variable(_) | Expression::Property(_) | Expression::Constant(_) => {
                self.clone()
            }
            Expression::Not(e) => Expression::Not(Box::new(e.rewrite(f)?)),
            Expression::Negate(e) => Expression::Negate(Box::new(e.rewrite(f)?)),
            Expression::Cast(t, e) => Expression::Cast(*t, Box::new(e.rewrite(f)?)),
            Expression::Binary(op, a, b) => {
                Expression::Binary(*op, Box::new(a.rewrite(f)?), Box::new(b.rewrite(f)?))
            }
            Expression::In {
                expr,
                list,
                negated,
            } => Expression::In {
                expr: Box::new(expr.rewrite(f)?),
                list: list.iter().map(|e| e.rewrite(f)).collect::<Result<_, _>>()?,
                negated: *negated,
            },
            Expression::Call(func, args) => Expression::Call(
                *func,
                args.iter().map(|e| e.rewrite(f)).collect::<Result<_, _>>()?,
            ),
            Expression::Aggregate(agg, arg) => Expression::Aggregate(
                *agg,
                match arg {
                    Some(a) => Some(Box::new(a.rewrite(f)?)),
                    None => None,
                },
            ),
        })
    }
}

fn with_same_kind(original: &Term, text: &str) -> Term {
    match original.as_literal() {
        Some(l) if l.language().is_some() => {
            Term::Literal(Literal::lang(text, l.language().unwrap_or_default()))
        }
        _ => string(text),
    }
}

fn integer_arg(t: &Term) -> Result<i64, EvalError> {
    match Numeric::from_term(t) {
        Some(Numeric::Int(i)) => Ok(i),
        Some(Numeric::Dec(f)) | Some(Numeric::Dbl(f)) => Ok(if f < 0.0 { (f - 0.5) as i64 } else { (f + 0.5) as i64 }),
        None => Err(EvalError::Type(format!("expected a number, got {t}"))),
    }
}

/// Re-types a term; integer casts from decimal forms truncate toward zero.
pub fn cast(ty: CastType, t: &Term) -> Result<Term, EvalError> {
    match ty {
        CastType::String => match t {
            Term::Iri(i) => Ok(string(i.as_str())),
            Term::Literal(l) => Ok(string(l.lexical())),
            Term::Blank(_) => Err(EvalError::Cast("blank node to xsd:string".into())),
        },
        CastType::Integer => {
            if let Some(n) = Numeric::from_term(t) {
                return match n {
                    Numeric::Int(i) => Ok(Term::integer(i)),
                    Numeric::Dec(f) | Numeric::Dbl(f) => float_to_int(f),
                };
            }
            let lex = lexical(t, "xsd:integer")?;
            let lex = lex.trim();
            if lex == "true" || lex == "false" {
                return Ok(Term::integer(i64::from(lex == "true")));
            }
            let body = lex.strip_prefix(['+', '-']).unwrap_or(lex);
            let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
            let digits_ok = !int_part.is_empty() || !frac_part.is_empty();
            if digits_ok
                && int_part.bytes().all(|b| b.is_ascii_digit())
                && frac_part.bytes().all(|b| b.is_ascii_digit())
            {
                let sign_len = lex.len() - body.len();
                let truncated = &lex[..sign_len + int_part.len()];
                let truncated = if int_part.is_empty() { "0" } else { truncated };
                return truncated
                    .strip_prefix('+')
                    .unwrap_or(truncated)
                    .parse::<i64>()
                    .map(|i| Term::integer(if i == 0 { 0 } else { i }))
                    .map_err(|_| EvalError::Cast(format!("{lex:?} out of range")));
            }
            match parse_float(lex) {
                Some(f) if lex.contains(['e', 'E']) => float_to_int(f),
                _ => Err(EvalError::Cast(format!("{lex:?} is not numeric"))),
            }
        }
        CastType::Double => {
            if let Some(n) = Numeric::from_term(t) {
                return Ok(Numeric::Dbl(n.as_f64()).to_term());
            }
            let lex = lexical(t, "xsd:double")?;
            parse_float(lex.trim())
                .map(|f| Numeric::Dbl(f).to_term())
                .ok_or_else(|| EvalError::Cast(format!("{lex:?} is not numeric")))
        }
    }
}

fn float_to_int(f: f64) -> Result<Term, EvalError> {
    if !f.is_finite() || f.abs() >= 9.2e18 {
        return Err(EvalError::Cast(format!("{f} has no integer value")));
    }
    // `as` truncates toward zero.
    Ok(Term::integer(f as i64))
}

fn aggregate(
    agg: AggregateFn,
    arg: Option<&Expression>,
    rows: &[&dyn EvalContext],
) -> Result<Term, EvalError> {
    let Some(arg) = arg else {
        return Ok(Term::integer(rows.len() as i64));
    };
    let values: BTreeSet<Term> = rows
        .iter()
        .filter_map(|r| arg.eval(*r).ok())
        .collect();
    match agg {
        AggregateFn::Count => Ok(Term::integer(values.len() as i64)),
        AggregateFn::Sum | AggregateFn::Avg => {
            let mut total = Numeric::Int(0);
            for v in &values {
                let n = Numeric::from_term(v)
                    .ok_or_else(|| EvalError::Type(format!("{} over non-numeric {v}", agg.name())))?;
                total = total.arith(BinaryOp::Add, n)?;
            }
            if agg == AggregateFn::Sum {
                return Ok(total.to_term());
            }
            if values.is_empty() {
                return Ok(Term::integer(0));
            }
            Ok(total
                .arith(BinaryOp::Div, Numeric::Int(values.len() as i64))?
                .to_term())
        }
        AggregateFn::Max | AggregateFn::Min => {
            let mut best: Option<&Term> = None;
            for v in &values {
                best = Some(match best {
                    None => v,
                    Some(b) => {
                        let ord = compare_terms(v, b).unwrap_or_else(|_| v.cmp(b));
                        let better = if agg == AggregateFn::Max {
                            ord == Ordering::Greater
                        } else {
                            ord == Ordering::Less
                        };
                        if better { v } else { b }
                    }
                });
            }
            best.cloned()
                .ok_or_else(|| EvalError::Type(format!("{} over an empty group", agg.name())))
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Variable(v) => write!(f, "{v}"),
            Expression::Property(p) => write!(f, "{p}"),
            Expression::Constant(t) => write_constant(f, t),
            Expression::Not(e) => write!(f, "!({e})"),
            Expression::Negate(e) => write!(f, "-({e})"),
            Expression::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expression::In {
                expr,
                list,
                negated,
            } => {
                write!(f, "({expr} {}IN (", if *negated { "NOT " } else { "" })?;
                for (i, e) in list.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{e}")?;
                }
                f.write_str("))")
            }
            Expression::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, e) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{e}")?;
                }
                f.write_str(")")
            }
            Expression::Cast(ty, e) => write!(f, "<{}>({e})", ty.iri()),
            Expression::Aggregate(agg, arg) => match arg {
                Some(a) => write!(f, "{}({a})", agg.name()),
                None => write!(f, "{}(*)", agg.name()),
            },
        }
    }
}

fn write_constant(f: &mut fmt::Formatter<'_>, t: &Term) -> fmt::Result {
    if let Term::Literal(lit) = t {
        let dt = lit.datatype();
        let lex = lit.lexical();
        let plain_integer = dt.as_str() == xsd::INTEGER
            && !lex.is_empty()
            && lex.bytes().all(|b| b.is_ascii_digit());
        if plain_integer {
            return f.write_str(lex);
        }
        if lit.language().is_none() && dt.as_str() == xsd::BOOLEAN && (lex == "true" || lex == "false") {
            return f.write_str(lex);
        }
        if lit.language().is_none() && dt.as_str() == xsd::STRING {
            f.write_str("\"")?;
            write_escaped(f, lex)?;
            return f.write_str("\"");
        }
    }
    write!(f, "{t}")
}

fn write_escaped(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\r' => f.write_str("\\r")?,
            '\t' => f.write_str("\\t")?,
            c => fmt::Write::write_char(f, c)?,
        }
    }
    Ok(())
}
