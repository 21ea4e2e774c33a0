//! Cut sparsification toolkit for embedded planar multigraphs.
//!
//! The crate computes exact minimum terminal cuts with deterministic
//! tie-breaking, recognizes and enumerates elementary cutsets, decomposes
//! arbitrary minimum terminal cutsets into elementary pieces, contracts
//! graphs into minor mimicking networks, fragments elementary dual cycles
//! into labeled path pieces, builds a queryable terminal-cuts store, and
//! performs the outer-face reductions between minor cut sparsifiers and
//! distance-approximating minors. Everything is checkable at desk scale
//! against an independent brute-force oracle.

pub mod duality;
pub mod elementary;
mod flow;
pub mod gen;
pub mod graph;
pub mod labels;
pub mod mincut;
pub mod oracle;
pub mod sparsifier;
pub mod tcs;

pub use graph::{build_dual, DualGraph, EdgeRec, PlanarGraph};
pub use mincut::{Cutset, TerminalSet};

/// Toolkit-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("embedding error: {0}")]
    Embedding(String),
    #[error("structure error: {0}")]
    Structure(String),
    #[error("invalid terminal subset: {0}")]
    InvalidSubset(String),
    #[error("guard exceeded: {0}")]
    Guard(String),
    #[error("terminal lists differ between graphs")]
    TerminalMismatch,
    #[error("no connector path exists for label parts ({0}, {1})")]
    MissingConnector(usize, usize),
    #[error("duplicate fragment label detected: {0}")]
    LabelCollision(String),
    #[error("serialization error: {0}")]
    Serialization(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
