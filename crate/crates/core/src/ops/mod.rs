//! Execution-layer operations. Each one is a pure function from input graphs
//! (plus the IRI graph where needed) to an output graph; reading and writing
//! the materialized files is the executor's job.

use alloc::collections::BTreeSet;
use alloc::string::String;
use core::fmt;

use crate::query::{EvalContext, Variable};
use crate::term::{Iri, Term};

pub mod cdc;
pub mod generate;
pub mod inference;
pub mod iri;
pub mod linking;
pub mod transform;
pub mod update;

pub use cdc::changed_data_capture;
pub use generate::{level_member_generator, observation_generator, GeneratorParams};
pub use inference::materialize_inference;
pub use iri::{generate_iri, update_iri, IriGraph, IriScheme};
pub use linking::external_linking;
pub use transform::{
    extraction_query, graph_extractor, join_transformation, transformation_on_literal, JoinParams,
    TransformParams,
};
pub use update::{update_level, UpdateOutcome, UpdateParams};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OpError {
    /// A value needed to mint an IRI is missing.
    NullIriValue(String),
    /// An expression mentions a property the source TBox lacks.
    UnknownProperty(Iri),
    /// A common property is missing from its TBox.
    UnknownCommonProperty(Iri),
    /// A changed or mapped property has no property-mapping.
    Unmapped(Iri),
    /// An observation target property is neither a level nor a measure.
    BadTargetKind(Iri),
    /// A Type2 member has no current version.
    NoCurrentVersion(Iri),
    Threshold(String),
    Invalid(String),
}

impl fmt::Display for OpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpError::NullIriValue(s) => write!(f, "no value to build an IRI for {s}"),
            OpError::UnknownProperty(p) => write!(f, "property {p} is not in the source TBox"),
            OpError::UnknownCommonProperty(p) => {
                write!(f, "common property {p} is not in its TBox")
            }
            OpError::Unmapped(p) => write!(f, "property {p} has no property-mapping"),
            OpError::BadTargetKind(p) => {
                write!(f, "target property {p} is neither a level nor a measure")
            }
            OpError::NoCurrentVersion(i) => write!(f, "level member {i} has no current version"),
            OpError::Threshold(t) => write!(f, "threshold {t} is outside [0, 1]"),
            OpError::Invalid(m) => f.write_str(m),
        }
    }
}

/// Evaluates property references against an instance's `(property, value)`
/// pairs; the smallest value wins when a property has several.
pub(crate) struct PairContext<'a>(pub &'a BTreeSet<(Iri, Term)>);

impl EvalContext for PairContext<'_> {
    fn variable(&self, _v: &Variable) -> Option<Term> {
        None
    }

    fn property(&self, p: &Iri) -> Option<Term> {
        self.0
            .iter()
            .find(|(q, _)| q == p)
            .map(|(_, v)| v.clone())
    }
}

/// Property IRIs an expression reads (constants excluded).
pub(crate) fn referenced_properties(e: &crate::query::Expression) -> BTreeSet<Iri> {
    let mut out = BTreeSet::new();
    e.visit(&mut |node| {
        if let crate::query::Expression::Property(p) = node {
            out.insert(p.clone());
        }
    });
    out
}
