//! Semantic ETL core: RDF model, query algebra, QB4OLAP target schemas,
//! source-to-target mappings, ETL operations and flow generation.
//!
//! The crate is `no_std` and only needs `alloc`. File access, the triple
//! store and the command line live in the `semetl` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod date;
pub mod graph;
pub mod iso;
pub mod mapping;
pub mod ntriples;
pub mod operation;
pub mod ops;
pub mod plan;
pub mod query;
pub mod schema;
pub mod term;
pub mod turtle;
pub mod vocab;

mod diag;

pub use date::{Clock, Date, FixedClock};
pub use diag::Diagnostic;
pub use graph::Graph;
pub use term::{BlankNode, Iri, Literal, Term, Triple};
