//! Voting techniques: aggregating a ranked message list into thread scores.
//!
//! Given the top-N messages for a query, each retrieved message acts as a
//! vote for its parent thread. The thirteen [`FusionMethod`]s differ in how a
//! thread's votes are combined: by count (Votes), by rank (ReciprocalRank,
//! BordaFuse), by score (the Comb* family over `P(Q|M)`), or by score pushed
//! through an exponential (the ExpComb* family over `e^P(Q|M)`).
//!
//! # Score domains
//!
//! Message scores arrive as natural-log probabilities (see [`crate::score`]),
//! and raw products of `P(Q|M)` underflow doubles for realistic queries, so
//! each family is computed in the domain where it is stable:
//!
//! * CombMIN/MAX/MED operate on the logs directly — `ln` is monotone, so
//!   min/max/median commute with it
//!   (median of an even count: the two middle probabilities are averaged,
//!   i.e. `logsumexp(lo, hi) − ln 2`);
//! * CombSUM/ANZ/MNZ produce **log-domain** results via log-sum-exp;
//!   CombGNZ, the geometric mean, is the arithmetic mean of the logs;
//! * the ExpComb* methods produce **raw** results: with `p = e^log_score ∈
//!   (0,1]`, `Σ e^p` is computed as `|R_T| + Σ expm1(p)` under compensated
//!   summation, which keeps the tiny `e^p − 1` contributions from vanishing
//!   when every `p` underflows — exactly the regime where these methods
//!   otherwise degenerate into Votes;
//! * Votes/ReciprocalRank/BordaFuse are rank-arithmetic and exact.
//!
//! Scores produced by different methods are therefore **not** comparable
//! with each other; within one method they order threads correctly, which is
//! all ranking needs. [`FusionMethod::log_domain`] says which convention a
//! method's output uses.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::corpus::QueryRecord;
use crate::index::InvertedIndex;
use crate::math;
use crate::score::{self, RankedMessageList, ScoreError};

/// The thirteen voting techniques.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum FusionMethod {
    /// Number of the thread's ranked messages, `|R_T|`.
    Votes,
    /// Sum of reciprocal ranks, `Σ 1/rank(Q,M)`.
    ReciprocalRank,
    /// Borda count: `Σ (|R_Q| − rank(Q,M))` over the realized pool.
    BordaFuse,
    /// Minimum member probability.
    CombMin,
    /// Maximum member probability.
    CombMax,
    /// Median member probability (even counts: mean of the two middle).
    CombMed,
    /// Sum of member probabilities.
    CombSum,
    /// Mean member probability (CombSUM ÷ |R_T|).
    CombAnz,
    /// Geometric mean of member probabilities.
    CombGnz,
    /// CombSUM × |R_T|.
    CombMnz,
    /// Sum of exponentiated probabilities, `Σ e^p`.
    ExpCombSum,
    /// Mean exponentiated probability.
    ExpCombAnz,
    /// ExpCombSUM × |R_T|.
    ExpCombMnz,
}

impl FusionMethod {
    /// Every method, in the order used for reports.
    pub const ALL: [FusionMethod; 13] = [
        FusionMethod::Votes,
        FusionMethod::ReciprocalRank,
        FusionMethod::BordaFuse,
        FusionMethod::CombMin,
        FusionMethod::CombMax,
        FusionMethod::CombMed,
        FusionMethod::CombSum,
        FusionMethod::CombAnz,
        FusionMethod::CombGnz,
        FusionMethod::CombMnz,
        FusionMethod::ExpCombSum,
        FusionMethod::ExpCombAnz,
        FusionMethod::ExpCombMnz,
    ];

    /// The method's canonical name (the CLI string).
    pub fn name(self) -> &'static str {
        match self {
            FusionMethod::Votes => "votes",
            FusionMethod::ReciprocalRank => "rr",
            FusionMethod::BordaFuse => "bordafuse",
            FusionMethod::CombMin => "combmin",
            FusionMethod::CombMax => "combmax",
            FusionMethod::CombMed => "combmed",
            FusionMethod::CombSum => "combsum",
            FusionMethod::CombAnz => "combanz",
            FusionMethod::CombGnz => "combgnz",
            FusionMethod::CombMnz => "combmnz",
            FusionMethod::ExpCombSum => "expcombsum",
            FusionMethod::ExpCombAnz => "expcombanz",
            FusionMethod::ExpCombMnz => "expcombmnz",
        }
    }

    /// Whether this method's thread scores are natural-log probabilities
    /// (true for the Comb* family) or raw values (counts, rank sums, and the
    /// ExpComb* family).
    pub fn log_domain(self) -> bool {
        matches!(
            self,
            FusionMethod::CombMin
                | FusionMethod::CombMax
                | FusionMethod::CombMed
                | FusionMethod::CombSum
                | FusionMethod::CombAnz
                | FusionMethod::CombGnz
                | FusionMethod::CombMnz
        )
    }
}

impl fmt::Display for FusionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A thread-ranking strategy: the virtual-document baseline or one of the
/// thirteen fusion methods.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum RankMethod {
    /// Rank threads directly by their concatenated text.
    VirtualDocument,
    /// Rank threads by fusing their messages' retrieval scores.
    Fusion(FusionMethod),
}

impl RankMethod {
    /// All fourteen strategies: the baseline first, then the fusion methods.
    pub const ALL: [RankMethod; 14] = [
        RankMethod::VirtualDocument,
        RankMethod::Fusion(FusionMethod::Votes),
        RankMethod::Fusion(FusionMethod::ReciprocalRank),
        RankMethod::Fusion(FusionMethod::BordaFuse),
        RankMethod::Fusion(FusionMethod::CombMin),
        RankMethod::Fusion(FusionMethod::CombMax),
        RankMethod::Fusion(FusionMethod::CombMed),
        RankMethod::Fusion(FusionMethod::CombSum),
        RankMethod::Fusion(FusionMethod::CombAnz),
        RankMethod::Fusion(FusionMethod::CombGnz),
        RankMethod::Fusion(FusionMethod::CombMnz),
        RankMethod::Fusion(FusionMethod::ExpCombSum),
        RankMethod::Fusion(FusionMethod::ExpCombAnz),
        RankMethod::Fusion(FusionMethod::ExpCombMnz),
    ];

    /// Canonical name: `vd`, or the fusion method's name.
    pub fn name(self) -> &'static str {
        match self {
            RankMethod::VirtualDocument => "vd",
            RankMethod::Fusion(method) => method.name(),
        }
    }
}

impl fmt::Display for RankMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Failure to parse a method name; lists the accepted names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseMethodError {
    /// The rejected input.
    pub input: String,
}

impl fmt::Display for ParseMethodError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown method {:?}; valid methods are: ", self.input)?;
        for (i, method) in RankMethod::ALL.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(method.name())?;
        }
        Ok(())
    }
}

impl core::error::Error for ParseMethodError {}

impl FromStr for FusionMethod {
    type Err = ParseMethodError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FusionMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| ParseMethodError { input: s.to_string() })
    }
}

impl FromStr for RankMethod {
    type Err = ParseMethodError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RankMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| ParseMethodError { input: s.to_string() })
    }
}

/// One ranked message's contribution to its thread: log score and 1-based
/// rank within the pool.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MemberScore {
    /// Natural log of `P(Q|M)`.
    pub log_score: f64,
    /// 1-based rank in the ranked message list.
    pub rank: u32,
}

/// A thread's evidence: the members of the ranked message list that belong
/// to it. Never empty — threads with no ranked message receive no score.
#[derive(Clone, Debug, PartialEq)]
pub struct ThreadEvidence {
    /// The thread.
    pub thread_id: String,
    /// Its ranked messages, in pool order; `len()` is `|R_T|`.
    pub members: Vec<MemberScore>,
}

/// One fused thread score.
#[derive(Clone, Debug, PartialEq)]
pub struct ThreadScore {
    /// The thread.
    pub thread_id: String,
    /// Fused score; see the module docs for per-method domains.
    pub score: f64,
    /// 1-based rank among all scored threads.
    pub rank: u32,
}

/// A complete thread ranking for one query under one method.
#[derive(Clone, Debug, PartialEq)]
pub struct ThreadScoreList {
    /// The query this ranking answers.
    pub query_id: String,
    /// How the scores were produced.
    pub method: RankMethod,
    /// Threads in descending score order (ties: ascending thread id),
    /// ranks 1..n.
    pub entries: Vec<ThreadScore>,
    /// The message pool size that was requested (N).
    pub requested_pool: usize,
    /// The pool size actually realized (`|R_Q|`).
    pub realized_pool: usize,
}

impl ThreadScoreList {
    /// Keeps only the top `cutoff` threads. Ranks stay valid (a prefix).
    pub fn truncate(&mut self, cutoff: usize) {
        self.entries.truncate(cutoff);
    }
}

/// Grouping failure: a ranked message that maps to no thread.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FusionError {
    /// The resolver had no thread for this message.
    UnresolvedMessage {
        /// The unresolvable message id.
        message_id: String,
    },
}

impl fmt::Display for FusionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FusionError::UnresolvedMessage { message_id } => {
                write!(f, "ranked message {message_id:?} resolves to no thread")
            }
        }
    }
}

impl core::error::Error for FusionError {}

/// Partitions a ranked message list into per-thread evidence under the given
/// message → thread resolver, ascending by thread id. Member counts sum to
/// the realized pool size.
pub fn group_by_thread(
    ranked: &RankedMessageList,
    mut thread_of: impl FnMut(&str) -> Option<String>,
) -> Result<Vec<ThreadEvidence>, FusionError> {
    let mut groups: alloc::collections::BTreeMap<String, Vec<MemberScore>> =
        alloc::collections::BTreeMap::new();
    for entry in &ranked.entries {
        let thread_id =
            thread_of(&entry.message_id).ok_or_else(|| FusionError::UnresolvedMessage {
                message_id: entry.message_id.clone(),
            })?;
        groups
            .entry(thread_id)
            .or_default()
            .push(MemberScore { log_score: entry.log_score, rank: entry.rank });
    }
    Ok(groups
        .into_iter()
        .map(|(thread_id, members)| ThreadEvidence { thread_id, members })
        .collect())
}

/// Fuses one thread's evidence into a score.
///
/// `realized_pool` is `|R_Q|`, used only by BordaFuse. Members are
/// canonicalized (sorted) internally, so the result is bitwise identical
/// under any permutation of `members`.
///
/// # Panics
///
/// Panics if `members` is empty — threads without evidence are unranked,
/// never scored.
pub fn thread_score(method: FusionMethod, members: &[MemberScore], realized_pool: usize) -> f64 {
    assert!(!members.is_empty(), "thread evidence is never empty");
    let count = members.len() as f64;
    match method {
        FusionMethod::Votes => count,
        FusionMethod::ReciprocalRank => {
            let mut ranks: Vec<u32> = members.iter().map(|m| m.rank).collect();
            ranks.sort_unstable();
            ranks.iter().map(|&r| 1.0 / f64::from(r)).sum()
        }
        FusionMethod::BordaFuse => {
            let mut ranks: Vec<u32> = members.iter().map(|m| m.rank).collect();
            ranks.sort_unstable();
            ranks.iter().map(|&r| realized_pool as f64 - f64::from(r)).sum()
        }
        FusionMethod::CombMin => sorted_logs(members)[0],
        FusionMethod::CombMax => *sorted_logs(members).last().expect("non-empty"),
        FusionMethod::CombMed => {
            let logs = sorted_logs(members);
            let n = logs.len();
            if n % 2 == 1 {
                logs[n / 2]
            } else {
                // Mean of the two middle probabilities, expressed in logs.
                math::log_sum_exp(&logs[n / 2 - 1..=n / 2]) - math::ln(2.0)
            }
        }
        FusionMethod::CombSum => math::log_sum_exp(&sorted_logs(members)),
        FusionMethod::CombAnz => math::log_sum_exp(&sorted_logs(members)) - math::ln(count),
        FusionMethod::CombGnz => math::kahan_sum(&sorted_logs(members)) / count,
        FusionMethod::CombMnz => math::ln(count) + math::log_sum_exp(&sorted_logs(members)),
        FusionMethod::ExpCombSum => count + sum_exp_m1(members),
        FusionMethod::ExpCombAnz => 1.0 + sum_exp_m1(members) / count,
        FusionMethod::ExpCombMnz => count * (count + sum_exp_m1(members)),
    }
}

/// Member log-scores in ascending order — the canonical form that makes
/// score aggregation independent of member order.
fn sorted_logs(members: &[MemberScore]) -> Vec<f64> {
    let mut logs: Vec<f64> = members.iter().map(|m| m.log_score).collect();
    logs.sort_unstable_by(f64::total_cmp);
    logs
}

/// `Σ (e^{p_i} − 1)` with `p_i = exp(log_score_i)`, compensated. Adding
/// `|R_T|` back yields `Σ e^{p_i}` without losing the sub-epsilon
/// contributions of tiny probabilities.
fn sum_exp_m1(members: &[MemberScore]) -> f64 {
    let mut acc = math::KahanSum::new();
    for &log_score in &sorted_logs(members) {
        acc.add(math::exp_m1(math::exp(log_score)));
    }
    acc.value()
}

/// Fuses grouped evidence into a full thread ranking for one query.
///
/// The realized pool size is taken from `ranked`, whose entries must be the
/// same ones `evidence` was grouped from.
pub fn fuse(
    method: FusionMethod,
    ranked: &RankedMessageList,
    evidence: &[ThreadEvidence],
) -> ThreadScoreList {
    let realized_pool = ranked.realized_pool();
    debug_assert_eq!(
        evidence.iter().map(|e| e.members.len()).sum::<usize>(),
        realized_pool,
        "evidence member counts must sum to the realized pool"
    );
    let mut scored: Vec<(String, f64)> = evidence
        .iter()
        .map(|e| (e.thread_id.clone(), thread_score(method, &e.members, realized_pool)))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ThreadScoreList {
        query_id: ranked.query_id.clone(),
        method: RankMethod::Fusion(method),
        entries: scored
            .into_iter()
            .enumerate()
            .map(|(i, (thread_id, score))| ThreadScore {
                thread_id,
                score,
                rank: i as u32 + 1,
            })
            .collect(),
        requested_pool: ranked.pool_size,
        realized_pool,
    }
}

/// Errors from the end-to-end single-query pipeline.
#[derive(Clone, Debug, PartialEq)]
pub enum RetrieveError {
    /// Message or virtual-document ranking failed.
    Score(ScoreError),
    /// Grouping failed.
    Fusion(FusionError),
}

impl fmt::Display for RetrieveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RetrieveError::Score(e) => e.fmt(f),
            RetrieveError::Fusion(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for RetrieveError {}

impl From<ScoreError> for RetrieveError {
    fn from(e: ScoreError) -> Self {
        RetrieveError::Score(e)
    }
}

impl From<FusionError> for RetrieveError {
    fn from(e: FusionError) -> Self {
        RetrieveError::Fusion(e)
    }
}

/// Ranks threads for one query: the full pipeline behind both the CLI and
/// the evaluation harness.
///
/// For fusion methods the index must be message-level; messages are ranked
/// into a pool of `pool_size`, grouped by thread, fused, and the ranking is
/// cut to `cutoff` threads. For [`RankMethod::VirtualDocument`] the index
/// must be the virtual-document one; threads are ranked directly and
/// `pool_size` is not consulted.
pub fn retrieve_threads(
    query: &QueryRecord,
    index: &InvertedIndex,
    method: RankMethod,
    mu: f64,
    pool_size: usize,
    cutoff: usize,
) -> Result<ThreadScoreList, RetrieveError> {
    match method {
        RankMethod::VirtualDocument => {
            Ok(score::rank_virtual_docs(query, index, mu, cutoff)?)
        }
        RankMethod::Fusion(fusion_method) => {
            let ranked = score::rank_messages(query, index, mu, pool_size)?;
            let evidence =
                group_by_thread(&ranked, |id| index.thread_of(id).map(String::from))?;
            let mut list = fuse(fusion_method, &ranked, &evidence);
            list.truncate(cutoff);
            Ok(list)
        }
    }
}
