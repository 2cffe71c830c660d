//! Rank, select and access queries on grammar-compressed strings.
//!
//! A string is stored as a CNF grammar (straight-line program) and queried
//! without decompression:
//!
//! - [`access`]: substring extraction through heavy-path search, packed
//!   fringe strings and jump pointers, in O(log N + m / log_sigma N)-style
//!   work.
//! - [`rankselect`]: rank via per-character center-prefix counters on heavy
//!   paths; select via per-character occurrence-weighted DAGs.
//! - [`balanced`]: an alternative engine that expands right-hand sides a few
//!   levels at a time, trading space for shallower traversals on balanced
//!   grammars.
//! - [`pathcount`]: counting distinct node-to-sink paths in a DAG with two
//!   rank queries over a derived grammar.
//!
//! [`index::TextIndex`] bundles the engines behind one query interface, and
//! [`format`] persists indexes to disk.

pub mod bitpack;
pub mod corpus;
pub mod counters;
pub mod error;
pub mod format;
pub mod general;
pub mod grammar;
pub mod heavypath;
pub mod index;
pub mod oracle;
pub mod access;
pub mod balanced;
pub mod pathcount;
pub mod rankselect;
pub mod repair;

pub use counters::Counters;
pub use error::{DagError, GrammarError, QueryError};
pub use grammar::{Grammar, Rule, RuleId, RuleKind, Symbol};
pub use heavypath::{HeavyForest, Side, Triplet};
pub use index::{Engine, IndexOptions, TextIndex};
pub use rankselect::RankSelectIndex;
