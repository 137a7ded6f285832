//! Differentiable forward chaining over ground facts.
//!
//! Facts carry soft truth values, predicates live in an embedding space, and
//! unification is cosine similarity instead of symbol equality. Rules are
//! templates whose predicate slots are trainable embeddings; k steps of
//! forward chaining build a computation graph whose weights can be trained
//! either against labelled target facts (rule induction) or against a set of
//! observations jointly with a parameterized store of candidate core facts
//! (theory compression). A symbolic oracle provides the crisp semantics that
//! the soft engine must agree with at one-hot embeddings.

pub mod chain;
pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod decode;
pub mod diff;
pub mod logic;
pub mod oracle;
pub mod report;
pub mod tasks;
pub mod train;

pub use logic::{Dataset, GroundFact, SymbolTable, Template};

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("template error: {0}")]
    Template(String),
    #[error("dataset error: {0}")]
    DatasetInvalid(String),
    #[error("unknown task '{name}'; valid tasks: {valid}")]
    UnknownTask { name: String, valid: String },
    #[error("config error: {0}")]
    Config(String),
    #[error("argument error: {0}")]
    Argument(String),
    #[error("capacity exceeded: rule {rule} overflowed the new-fact cap ({cap})")]
    Capacity { rule: usize, cap: usize },
    #[error("numeric failure at seed {seed}, epoch {epoch}: {msg}")]
    Numeric { seed: u64, epoch: usize, msg: String },
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
