//! Moving expressions between property form and variable form.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use super::expr::Expression;
use super::{Pattern, TermPattern, Variable};
use crate::term::{Iri, Term};

/// Direction of `validate_expressions`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Substitution {
    /// flag = 1: property IRIs become the object variables of their patterns.
    PropertiesToVariables,
    /// flag = 0: variables become the predicates of the patterns binding them.
    VariablesToProperties,
}

impl Substitution {
    pub fn from_flag(flag: u8) -> Option<Self> {
        match flag {
            1 => Some(Substitution::PropertiesToVariables),
            0 => Some(Substitution::VariablesToProperties),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValidateError {
    NoPatternForProperty(Iri),
    NoPatternForVariable(Variable),
}

impl fmt::Display for ValidateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidateError::NoPatternForProperty(p) => {
                write!(f, "no triple pattern has predicate {p}")
            }
            ValidateError::NoPatternForVariable(v) => {
                write!(f, "no triple pattern has {v} as object")
            }
        }
    }
}

/// Rewrites each expression so it refers to `q` through variables (flag 1) or
/// through properties (flag 0). The first matching triple pattern in
/// pre-order wins.
pub fn validate_expressions(
    exps: &[Expression],
    q: &Pattern,
    direction: Substitution,
) -> Result<Vec<Expression>, ValidateError> {
    let patterns = q.triple_patterns();
    exps.iter()
        .map(|e| {
            e.rewrite(&mut |node| match (direction, node) {
                (Substitution::PropertiesToVariables, Expression::Property(p)) => patterns
                    .iter()
                    .find_map(|tp| match (&tp.predicate, &tp.object) {
                        (TermPattern::Term(Term::Iri(pred)), TermPattern::Var(v)) if pred == p => {
                            Some(Expression::Variable(v.clone()))
                        }
                        _ => None,
                    })
                    .map(Some)
                    .ok_or_else(|| ValidateError::NoPatternForProperty(p.clone())),
                (Substitution::VariablesToProperties, Expression::Variable(v)) => patterns
                    .iter()
                    .find_map(|tp| match (&tp.predicate, &tp.object) {
                        (TermPattern::Term(Term::Iri(pred)), TermPattern::Var(o)) if o == v => {
                            Some(Expression::Property(pred.clone()))
                        }
                        _ => None,
                    })
                    .map(Some)
                    .ok_or_else(|| ValidateError::NoPatternForVariable(v.clone())),
                _ => Ok(None),
            })
        })
        .collect()
}

/// The properties of `universe` that the expressions mention.
pub fn get_properties_from_expressions(
    universe: &BTreeSet<Iri>,
    exps: &[Expression],
) -> BTreeSet<Iri> {
    exps.iter()
        .flat_map(Expression::iris)
        .filter(|i| universe.contains(i))
        .collect()
}
