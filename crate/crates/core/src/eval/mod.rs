//! Retrieval evaluation: ranked-list metrics, paired significance testing,
//! and cross-validated parameter sweeps.
//!
//! The pieces compose bottom-up:
//!
//! - [`metrics`] scores a ranked list against relevance judgments (AP, RR,
//!   P@10, NDCG@10) and averages over queries.
//! - [`significance`] compares two systems' per-query metric vectors with a
//!   paired randomization test.
//! - [`sweep`] tunes the smoothing parameter μ and the message pool size
//!   |R_Q| by exhaustive grid search under k-fold cross-validation, and
//!   traces pool-size sensitivity curves.
//!
//! Judgments are graded (0/1/2) but evaluation binarizes them — a thread is
//! relevant iff its level is ≥ 1 — except for the opt-in graded NDCG gain
//! (see [`metrics::MetricOptions`]). Queries with no relevant thread in the
//! judgments carry no signal for ranking quality and are excluded from all
//! means.

pub mod metrics;
pub mod significance;
pub mod sweep;

use alloc::string::String;
use core::fmt;

use crate::fusion::RetrieveError;

/// Why an evaluation could not be produced.
#[derive(Clone, Debug, PartialEq)]
pub enum EvalError {
    /// The run ranks a query the judgments know nothing about.
    UnknownQuery {
        /// The unjudged query.
        query_id: String,
    },
    /// A run violated its shape invariants (contiguous ranks from 1,
    /// non-increasing scores, no repeated thread within a query).
    MalformedRun {
        /// The offending query.
        query_id: String,
        /// Which invariant broke.
        reason: &'static str,
    },
    /// No evaluated query had a relevant thread in the judgments, so every
    /// mean would be over an empty set.
    NoJudgedQueries,
    /// The two per-query vectors of a paired test cover different query
    /// sets.
    MismatchedQueries,
    /// A paired test needs at least two queries.
    TooFewQueries {
        /// How many were supplied.
        found: usize,
    },
    /// Monte Carlo sampling needs at least one iteration.
    InvalidIterations,
    /// The parameter grid has no points.
    EmptyGrid,
    /// Cross-validation needs at least two folds.
    InvalidFolds {
        /// The rejected fold count.
        folds: usize,
    },
    /// Every fold must receive at least one query.
    NotEnoughQueries {
        /// How many queries were supplied.
        queries: usize,
        /// How many folds they must fill.
        folds: usize,
    },
    /// Pool-size curves require strictly ascending pool sizes.
    UnsortedPoolSizes,
    /// Retrieval failed while materializing rankings for a sweep.
    Retrieve(RetrieveError),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::UnknownQuery { query_id } => {
                write!(f, "run ranks query {query_id:?}, which the judgments do not contain")
            }
            EvalError::MalformedRun { query_id, reason } => {
                write!(f, "malformed run for query {query_id:?}: {reason}")
            }
            EvalError::NoJudgedQueries => {
                f.write_str("no evaluated query has a relevant thread in the judgments")
            }
            EvalError::MismatchedQueries => {
                f.write_str("paired test inputs cover different query sets")
            }
            EvalError::TooFewQueries { found } => {
                write!(f, "paired test needs at least 2 queries, got {found}")
            }
            EvalError::InvalidIterations => {
                f.write_str("Monte Carlo sampling needs at least one iteration")
            }
            EvalError::EmptyGrid => f.write_str("parameter grid is empty"),
            EvalError::InvalidFolds { folds } => {
                write!(f, "cross-validation needs at least 2 folds, got {folds}")
            }
            EvalError::NotEnoughQueries { queries, folds } => {
                write!(f, "{queries} queries cannot fill {folds} folds")
            }
            EvalError::UnsortedPoolSizes => {
                f.write_str("pool sizes must be strictly ascending")
            }
            EvalError::Retrieve(e) => write!(f, "retrieval failed: {e}"),
        }
    }
}

impl core::error::Error for EvalError {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            EvalError::Retrieve(e) => Some(e),
            _ => None,
        }
    }
}

impl From<RetrieveError> for EvalError {
    fn from(e: RetrieveError) -> Self {
        EvalError::Retrieve(e)
    }
}
