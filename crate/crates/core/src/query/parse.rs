//! Text syntax for expressions, as written in mapping files.
//!
//! Prefixed names and `<iri>` references become property references, except
//! when followed by `(` and naming an XSD cast type.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::expr::{AggregateFn, BinaryOp, CastType, Expression, Function};
use super::Variable;
use crate::term::{Iri, Literal, Term};
use crate::turtle::Prefixes;
use crate::vocab::xsd;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpressionParseError {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for ExpressionParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at offset {}: {}", self.offset, self.message)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Var(String),
    Iri(String),
    PName(String),
    Name(String),
    Literal(Term),
    /// A literal whose datatype is a prefixed name, resolved while parsing.
    TypedPName(String, String),
    Punct(&'static str),
}

pub fn parse_expression(text: &str, prefixes: &Prefixes) -> Result<Expression, ExpressionParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        prefixes,
        end: text.len(),
    };
    let e = p.or()?;
    if p.pos < p.tokens.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ExpressionParseError> {
    let err = |offset: usize, m: &str| ExpressionParseError {
        offset,
        message: m.to_string(),
    };
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < text.len() {
        let c = text[i..].chars().next().unwrap_or(' ');
        let start = i;
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        match c {
            '?' | '$' => {
                i += 1;
                while i < text.len() && is_name_byte(bytes[i]) && bytes[i] != b'.' {
                    i += 1;
                }
                if i == start + 1 {
                    return Err(err(start, "empty variable name"));
                }
                out.push((start, Tok::Var(text[start + 1..i].to_string())));
            }
            '<' => {
                // An IRI reference if a '>' closes it before any whitespace.
                let rest = &text[i + 1..];
                let close = rest.find(|ch: char| ch == '>' || ch.is_whitespace());
                match close {
                    Some(n) if rest.as_bytes()[n] == b'>' && n > 0 && rest[..n].contains(':') => {
                        out.push((start, Tok::Iri(rest[..n].to_string())));
                        i += n + 2;
                    }
                    _ => {
                        if rest.starts_with('=') {
                            out.push((start, Tok::Punct("<=")));
                            i += 2;
                        } else {
                            out.push((start, Tok::Punct("<")));
                            i += 1;
                        }
                    }
                }
            }
            '"' | '\'' => {
                let (lexical, next) = read_string(text, i)?;
                i = next;
                let term = if text[i..].starts_with('@') {
                    let tag_start = i + 1;
                    i = tag_start;
                    while i < text.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'-') {
                        i += 1;
                    }
                    Term::Literal(Literal::lang(&lexical, &text[tag_start..i]))
                } else if text[i..].starts_with("^^") {
                    i += 2;
                    let dt_start = i;
                    if text[i..].starts_with('<') {
                        let close = text[i..].find('>').ok_or_else(|| err(i, "unterminated IRI"))?;
                        let dt = Iri::new_unchecked(&text[i + 1..i + close]);
                        i += close + 1;
                        out.push((start, Tok::Literal(Term::typed(&lexical, dt))));
                        continue;
                    }
                    while i < text.len() && (is_name_byte(bytes[i]) || bytes[i] == b':') {
                        i += 1;
                    }
                    let pname = text[dt_start..i].trim_end_matches('.');
                    i = dt_start + pname.len();
                    out.push((start, Tok::TypedPName(lexical, pname.to_string())));
                    continue;
                } else {
                    Term::string(&lexical)
                };
                out.push((start, Tok::Literal(term)));
            }
            '0'..='9' | '.' if c != '.' || bytes.get(i + 1).is_some_and(u8::is_ascii_digit) => {
                while i < text.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let mut dt = xsd::integer();
                if i < text.len() && bytes[i] == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit) {
                    i += 1;
                    while i < text.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    dt = xsd::decimal();
                }
                if i < text.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < text.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < text.len() && bytes[j].is_ascii_digit() {
                        while j < text.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                        dt = xsd::double();
                    }
                }
                out.push((start, Tok::Literal(Term::typed(&text[start..i], dt))));
            }
            '(' | ')' | ',' | '+' | '-' | '*' | '/' | '=' => {
                i += 1;
                let p = match c {
                    '(' => "(",
                    ')' => ")",
                    ',' => ",",
                    '+' => "+",
                    '-' => "-",
                    '*' => "*",
                    '/' => "/",
                    _ => "=",
                };
                out.push((start, Tok::Punct(p)));
            }
            '!' => {
                if text[i..].starts_with("!=") {
                    out.push((start, Tok::Punct("!=")));
                    i += 2;
                } else {
                    out.push((start, Tok::Punct("!")));
                    i += 1;
                }
            }
            '>' => {
                if text[i..].starts_with(">=") {
                    out.push((start, Tok::Punct(">=")));
                    i += 2;
                } else {
                    out.push((start, Tok::Punct(">")));
                    i += 1;
                }
            }
            '&' if text[i..].starts_with("&&") => {
                out.push((start, Tok::Punct("&&")));
                i += 2;
            }
            '|' if text[i..].starts_with("||") => {
                out.push((start, Tok::Punct("||")));
                i += 2;
            }
            c if c.is_alphabetic() || c == '_' || c == ':' => {
                while i < text.len() {
                    let ch = text[i..].chars().next().unwrap_or(' ');
                    if ch.is_alphanumeric() || ch == '_' || ch == '-' || ch == '.' || ch == ':' || ch == '%' {
                        i += ch.len_utf8();
                    } else {
                        break;
                    }
                }
                let word = text[start..i].trim_end_matches('.');
                i = start + word.len();
                if word.contains(':') {
                    out.push((start, Tok::PName(word.to_string())));
                } else {
                    out.push((start, Tok::Name(word.to_string())));
                }
            }
            _ => return Err(err(start, "unexpected character")),
        }
    }
    Ok(out)
}

fn is_name_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'-' || b == b'.' || b >= 0x80
}

fn read_string(text: &str, start: usize) -> Result<(String, usize), ExpressionParseError> {
    let quote = text[start..].chars().next().unwrap_or('"');
    let mut out = String::new();
    let mut chars = text[start + 1..].char_indices();
    while let Some((off, c)) = chars.next() {
        if c == quote {
            return Ok((out, start + 1 + off + 1));
        }
        if c == '\\' {
            let Some((_, e)) = chars.next() else { break };
            out.push(match e {
                'n' => '\n',
                't' => '\t',
                'r' => '\r',
                other => other,
            });
        } else {
            out.push(c);
        }
    }
    Err(ExpressionParseError {
        offset: start,
        message: "unterminated string".to_string(),
    })
}

struct Parser<'a> {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
    prefixes: &'a Prefixes,
    end: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> ExpressionParseError {
        ExpressionParseError {
            offset: self.tokens.get(self.pos).map_or(self.end, |(o, _)| *o),
            message: message.to_string(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn eat(&mut self, p: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Punct(q)) if *q == p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_name(&mut self, word: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Name(n)) if n.eq_ignore_ascii_case(word)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: &str) -> Result<(), ExpressionParseError> {
        if self.eat(p) {
            Ok(())
        } else {
            Err(self.error(&alloc::format!("expected '{p}'")))
        }
    }

    fn or(&mut self) -> Result<Expression, ExpressionParseError> {
        let mut left = self.and()?;
        while self.eat("||") {
            let right = self.and()?;
            left = Expression::Binary(BinaryOp::Or, Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<Expression, ExpressionParseError> {
        let mut left = self.relational()?;
        while self.eat("&&") {
            let right = self.relational()?;
            left = Expression::Binary(BinaryOp::And, Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn relational(&mut self) -> Result<Expression, ExpressionParseError> {
        let left = self.additive()?;
        for (sym, op) in [
            ("=", BinaryOp::Eq),
            ("!=", BinaryOp::Ne),
            ("<=", BinaryOp::Le),
            (">=", BinaryOp::Ge),
            ("<", BinaryOp::Lt),
            (">", BinaryOp::Gt),
        ] {
            if self.eat(sym) {
                let right = self.additive()?;
                return Ok(Expression::Binary(op, Box::new(left), Box::new(right)));
            }
        }
        let save = self.pos;
        let negated = self.eat_name("NOT");
        if self.eat_name("IN") {
            self.expect("(")?;
            let list = self.arguments()?;
            return Ok(Expression::In {
                expr: Box::new(left),
                list,
                negated,
            });
        }
        self.pos = save;
        Ok(left)
    }

    fn additive(&mut self) -> Result<Expression, ExpressionParseError> {
        let mut left = self.multiplicative()?;
        loop {
            let op = if self.eat("+") {
                BinaryOp::Add
            } else if self.eat("-") {
                BinaryOp::Sub
            } else {
                return Ok(left);
            };
            let right = self.multiplicative()?;
            left = Expression::Binary(op, Box::new(left), Box::new(right));
        }
    }

    fn multiplicative(&mut self) -> Result<Expression, ExpressionParseError> {
        let mut left = self.unary()?;
        loop {
            let op = if self.eat("*") {
                BinaryOp::Mul
            } else if self.eat("/") {
                BinaryOp::Div
            } else {
                return Ok(left);
            };
            let right = self.unary()?;
            left = Expression::Binary(op, Box::new(left), Box::new(right));
        }
    }

    fn unary(&mut self) -> Result<Expression, ExpressionParseError> {
        if self.eat("!") {
            return Ok(Expression::Not(Box::new(self.unary()?)));
        }
        if self.eat("-") {
            return Ok(Expression::Negate(Box::new(self.unary()?)));
        }
        if self.eat("+") {
            return self.unary();
        }
        self.primary()
    }

    /// Comma-separated expressions up to and including the closing paren.
    fn arguments(&mut self) -> Result<Vec<Expression>, ExpressionParseError> {
        let mut args = Vec::new();
        if self.eat(")") {
            return Ok(args);
        }
        loop {
            args.push(self.or()?);
            if self.eat(")") {
                return Ok(args);
            }
            self.expect(",")?;
        }
    }

    fn resolve_pname(&self, pname: &str) -> Result<Iri, ExpressionParseError> {
        match self.prefixes.expand_pname(pname) {
            Some(iri) => Ok(Iri::new_unchecked(iri.as_str())),
            None => Err(self.error(&alloc::format!(
                "unknown prefix in {pname}"
            ))),
        }
    }

    fn iri_term(&mut self, iri: Iri) -> Result<Expression, ExpressionParseError> {
        if self.eat("(") {
            let Some(ty) = CastType::from_iri(iri.as_str()) else {
                return Err(self.error(&alloc::format!("{iri} is not a supported cast")));
            };
            let mut args = self.arguments()?;
            if args.len() != 1 {
                return Err(self.error("casts take exactly one argument"));
            }
            return Ok(Expression::Cast(ty, Box::new(args.remove(0))));
        }
        Ok(Expression::Property(iri))
    }

    fn primary(&mut self) -> Result<Expression, ExpressionParseError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error("unexpected end of expression"));
        };
        self.pos += 1;
        match tok {
            Tok::Punct("(") => {
                let e = self.or()?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::Var(name) => Ok(Expression::Variable(Variable::new(&name))),
            Tok::Iri(iri) => self.iri_term(Iri::new_unchecked(iri.as_str())),
            Tok::TypedPName(lexical, dt) => {
                let dt = self.resolve_pname(&dt)?;
                Ok(Expression::Constant(Term::typed(&lexical, dt)))
            }
            Tok::PName(p) => {
                let iri = self.resolve_pname(&p)?;
                self.iri_term(iri)
            }
            Tok::Literal(t) => Ok(Expression::Constant(t)),
            Tok::Name(name) => {
                if name == "true" || name == "false" {
                    return Ok(Expression::Constant(Term::typed(&name, xsd::boolean())));
                }
                if !self.eat("(") {
                    return Err(ExpressionParseError {
                        offset: self.tokens[self.pos - 1].0,
                        message: alloc::format!("unexpected name {name}"),
                    });
                }
                if let Some(agg) = AggregateFn::from_name(&name) {
                    if agg == AggregateFn::Count && self.eat("*") {
                        self.expect(")")?;
                        return Ok(Expression::Aggregate(agg, None));
                    }
                    let _ = self.eat_name("DISTINCT");
                    let mut args = self.arguments()?;
                    if args.len() != 1 {
                        return Err(self.error("aggregates take one argument"));
                    }
                    return Ok(Expression::Aggregate(agg, Some(Box::new(args.remove(0)))));
                }
                match Function::from_name(&name) {
                    Some(f) => Ok(Expression::Call(f, self.arguments()?)),
                    None => Err(ExpressionParseError {
                        offset: self.tokens[self.pos - 2].0,
                        message: alloc::format!("unknown function {name}"),
                    }),
                }
            }
            Tok::Punct(p) => Err(ExpressionParseError {
                offset: self.tokens[self.pos - 1].0,
                message: alloc::format!("unexpected '{p}'"),
            }),
        }
    }
}
