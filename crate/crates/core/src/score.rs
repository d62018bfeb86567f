//! Query-likelihood scoring with Dirichlet smoothing, in log space.
//!
//! A document M is scored against a query Q by the log of
//!
//! ```text
//! P(Q|M) = Π_q ( (n(q,M) + μ·P(q|C)) / (|M| + μ) )^n(q,Q)
//! ```
//!
//! where `n(q,·)` are term frequencies, `|M|` is the document length, and
//! `P(q|C)` is the collection language model. The product underflows doubles
//! for realistic queries, so everything downstream works with its natural
//! log, which orders documents identically.
//!
//! Query terms the collection has never seen get `P(q|C) = 0` and would
//! force every score to −∞; they are dropped up front and reported (see
//! [`PreparedQuery::dropped_terms`]). Only documents containing at least one
//! surviving query term are candidates — retrieving the whole collection for
//! every query would make per-thread vote counts degenerate to thread
//! length.
//!
//! Results are deterministic: ties in score break by ascending document id.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::QueryRecord;
use crate::fusion::{RankMethod, ThreadScore, ThreadScoreList};
use crate::index::{CollectionStats, DocumentStats, IndexKind, InvertedIndex};
use crate::math;
use crate::text::{Analyzer, AnalyzerMode};

/// A query reduced to scoreable terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreparedQuery {
    /// Surviving term → `n(q,Q)` multiplicity.
    pub term_counts: BTreeMap<String, u32>,
    /// Terms dropped for zero collection frequency, deduplicated and sorted.
    /// Surfaced so callers can warn; dropping preserves the ranking induced
    /// by the remaining terms.
    pub dropped_terms: Vec<String>,
}

/// Counts query-term multiplicities and drops terms the collection has
/// never seen.
pub fn prepare_query(terms: &[String], collection: &CollectionStats) -> PreparedQuery {
    let mut term_counts: BTreeMap<String, u32> = BTreeMap::new();
    let mut dropped: BTreeSet<String> = BTreeSet::new();
    for term in terms {
        if collection.term_frequency(term) > 0 {
            *term_counts.entry(term.clone()).or_insert(0) += 1;
        } else {
            dropped.insert(term.clone());
        }
    }
    PreparedQuery { term_counts, dropped_terms: dropped.into_iter().collect() }
}

/// The log query likelihood of one document.
///
/// `term_counts` must hold only terms with positive collection frequency
/// (see [`prepare_query`]) and `mu` must be positive and finite; under those
/// preconditions the result is finite and ≤ 0.
pub fn score_document(
    term_counts: &BTreeMap<String, u32>,
    doc: &DocumentStats,
    collection: &CollectionStats,
    mu: f64,
) -> f64 {
    debug_assert!(mu.is_finite() && mu > 0.0, "mu must be positive and finite");
    debug_assert!(!term_counts.is_empty(), "queries are non-empty after preparation");
    let denominator = doc.length as f64 + mu;
    let mut log_score = 0.0;
    for (term, &count) in term_counts {
        let smoothed =
            (f64::from(doc.term_frequency(term)) + mu * collection.probability(term))
                / denominator;
        log_score += f64::from(count) * math::ln(smoothed);
    }
    log_score
}

/// One retrieved message.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredMessage {
    /// The message.
    pub message_id: String,
    /// Its parent thread.
    pub thread_id: String,
    /// `ln P(Q|M)`; finite and ≤ 0.
    pub log_score: f64,
    /// 1-based rank in the pool.
    pub rank: u32,
}

/// The ranked message pool `R_Q` for one query.
#[derive(Clone, Debug, PartialEq)]
pub struct RankedMessageList {
    /// The query that produced the pool.
    pub query_id: String,
    /// Smoothing parameter used.
    pub mu: f64,
    /// Pool size requested (N); at most this many entries are returned.
    pub pool_size: usize,
    /// Query terms dropped for zero collection frequency (for warnings).
    pub dropped_terms: Vec<String>,
    /// Messages in descending score order (ties: ascending id), ranks 1..n.
    pub entries: Vec<ScoredMessage>,
}

impl RankedMessageList {
    /// `|R_Q|`: the pool size actually realized.
    pub fn realized_pool(&self) -> usize {
        self.entries.len()
    }
}

/// Why a query could not be ranked.
#[derive(Clone, Debug, PartialEq)]
pub enum ScoreError {
    /// No scoreable terms remain: the query analyzed to nothing, or every
    /// term was stoplisted or absent from the collection.
    EmptyQuery {
        /// The query that produced no terms.
        query_id: String,
    },
    /// The index granularity does not match the operation.
    WrongIndexKind {
        /// What the operation needs.
        expected: IndexKind,
        /// What it was given.
        found: IndexKind,
    },
    /// The smoothing parameter must be positive and finite.
    InvalidMu {
        /// The rejected value.
        mu: f64,
    },
    /// Pool sizes and cutoffs must be at least 1.
    InvalidPoolSize,
    /// The query analyzer was not in query-time mode.
    WrongAnalyzerMode,
}

impl fmt::Display for ScoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreError::EmptyQuery { query_id } => {
                write!(
                    f,
                    "query {query_id:?} has no scoreable terms \
                     (all stoplisted, unseen, or empty)"
                )
            }
            ScoreError::WrongIndexKind { expected, found } => {
                write!(f, "expected a {expected} index, found a {found} index")
            }
            ScoreError::InvalidMu { mu } => {
                write!(f, "smoothing parameter must be positive and finite, got {mu}")
            }
            ScoreError::InvalidPoolSize => f.write_str("pool size must be at least 1"),
            ScoreError::WrongAnalyzerMode => {
                f.write_str("queries must be analyzed with a query-time analyzer")
            }
        }
    }
}

impl core::error::Error for ScoreError {}

/// Ranks the top `pool_size` messages for a query, using the query-time
/// analyzer derived from the index's own configuration.
pub fn rank_messages(
    query: &QueryRecord,
    index: &InvertedIndex,
    mu: f64,
    pool_size: usize,
) -> Result<RankedMessageList, ScoreError> {
    rank_messages_with(query, index, &index.query_analyzer(), mu, pool_size)
}

/// [`rank_messages`] with an explicit query analyzer (for stoplist
/// overrides). The analyzer must be in query-time mode and should share the
/// index's stemming configuration.
pub fn rank_messages_with(
    query: &QueryRecord,
    index: &InvertedIndex,
    analyzer: &Analyzer,
    mu: f64,
    pool_size: usize,
) -> Result<RankedMessageList, ScoreError> {
    if index.kind() != IndexKind::MessageLevel {
        return Err(ScoreError::WrongIndexKind {
            expected: IndexKind::MessageLevel,
            found: index.kind(),
        });
    }
    let (prepared, entries) = rank_documents(query, index, analyzer, mu, pool_size)?;
    Ok(RankedMessageList {
        query_id: query.query_id.clone(),
        mu,
        pool_size,
        dropped_terms: prepared.dropped_terms,
        entries: entries
            .into_iter()
            .enumerate()
            .map(|(i, (doc_id, log_score))| ScoredMessage {
                thread_id: index
                    .thread_of(&doc_id)
                    .expect("every indexed document maps to a thread")
                    .to_string(),
                message_id: doc_id,
                log_score,
                rank: i as u32 + 1,
            })
            .collect(),
    })
}

/// Ranks threads directly by their virtual documents: the baseline.
///
/// Mirrors [`rank_messages`] with thread ids as document ids; `cutoff`
/// bounds the number of threads returned.
pub fn rank_virtual_docs(
    query: &QueryRecord,
    index: &InvertedIndex,
    mu: f64,
    cutoff: usize,
) -> Result<ThreadScoreList, ScoreError> {
    rank_virtual_docs_with(query, index, &index.query_analyzer(), mu, cutoff)
}

/// [`rank_virtual_docs`] with an explicit query-time analyzer.
pub fn rank_virtual_docs_with(
    query: &QueryRecord,
    index: &InvertedIndex,
    analyzer: &Analyzer,
    mu: f64,
    cutoff: usize,
) -> Result<ThreadScoreList, ScoreError> {
    if index.kind() != IndexKind::VirtualDocument {
        return Err(ScoreError::WrongIndexKind {
            expected: IndexKind::VirtualDocument,
            found: index.kind(),
        });
    }
    let (_, entries) = rank_documents(query, index, analyzer, mu, cutoff)?;
    Ok(ThreadScoreList {
        query_id: query.query_id.clone(),
        method: RankMethod::VirtualDocument,
        requested_pool: cutoff,
        realized_pool: entries.len(),
        entries: entries
            .into_iter()
            .enumerate()
            .map(|(i, (thread_id, score))| ThreadScore {
                thread_id,
                score,
                rank: i as u32 + 1,
            })
            .collect(),
    })
}

/// Shared ranking core: analyze, prepare, gather candidates from postings,
/// score, sort, truncate. Returns (doc_id, log_score) pairs in final order.
fn rank_documents(
    query: &QueryRecord,
    index: &InvertedIndex,
    analyzer: &Analyzer,
    mu: f64,
    limit: usize,
) -> Result<(PreparedQuery, Vec<(String, f64)>), ScoreError> {
    if analyzer.mode() != AnalyzerMode::QueryTime {
        return Err(ScoreError::WrongAnalyzerMode);
    }
    if !(mu.is_finite() && mu > 0.0) {
        return Err(ScoreError::InvalidMu { mu });
    }
    if limit == 0 {
        return Err(ScoreError::InvalidPoolSize);
    }

    let terms = analyzer.analyze(&query.text);
    let prepared = prepare_query(&terms, index.collection());
    if prepared.term_counts.is_empty() {
        return Err(ScoreError::EmptyQuery { query_id: query.query_id.clone() });
    }

    // Candidates: every document containing at least one surviving term.
    // Postings are sorted and the set is ordered, so candidate order (and
    // with it every tie-break) is deterministic.
    let mut candidates: BTreeSet<u32> = BTreeSet::new();
    for term in prepared.term_counts.keys() {
        candidates.extend(index.postings(term).iter().map(|p| p.doc));
    }

    let mut scored: Vec<(u32, f64)> = candidates
        .into_iter()
        .map(|position| {
            let doc = index.doc(position);
            (position, score_document(&prepared.term_counts, doc, index.collection(), mu))
        })
        .collect();
    // Descending score; ties by ascending position, which is ascending
    // doc_id because the document table is id-sorted.
    scored.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(limit);

    Ok((
        prepared,
        scored
            .into_iter()
            .map(|(position, log_score)| (index.doc(position).doc_id.clone(), log_score))
            .collect(),
    ))
}
