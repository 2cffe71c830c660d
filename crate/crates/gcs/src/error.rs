//! Error types shared across the crate.

use thiserror::Error;

/// Violations detected while constructing or validating a grammar.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrammarError {
    /// A pair rule references itself or a rule defined later. Rule order is
    /// required to be topological, so any cycle shows up as such a reference.
    #[error("rule {0} references itself or a later rule")]
    CyclicRule(u32),
    #[error("rule {0} references an id outside the rule table")]
    DanglingReference(u32),
    #[error("rule {0} stores an expansion length inconsistent with its children")]
    LengthMismatch(u32),
    #[error("rule {0} is not in CNF shape")]
    NotCnf(u32),
    #[error("terminal rule {rule} uses symbol {symbol} outside 1..={sigma}")]
    SymbolOutOfRange { rule: u32, symbol: u32, sigma: u32 },
    #[error("input text is empty")]
    EmptyInput,
}

/// Errors raised by queries against a built index.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("position {pos} outside valid range {lo}..={hi}")]
    PositionOutOfRange { pos: u64, lo: u64, hi: u64 },
    #[error("occurrence {k} of symbol {symbol} outside 1..={max}")]
    OccurrenceOutOfRange { symbol: u32, k: u64, max: u64 },
    #[error("symbol {0} outside alphabet 1..={1}")]
    SymbolOutOfRange(u32, u32),
}

/// Errors for DAG inputs to the path-counting reduction.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DagError {
    #[error("input graph contains a cycle")]
    CyclicInput,
    #[error("input graph has no sink")]
    NoSink,
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("node {0:?} is not a sink")]
    NotASink(String),
    #[error("total path count exceeds the configured ceiling of {0}")]
    TooManyPaths(u64),
}
