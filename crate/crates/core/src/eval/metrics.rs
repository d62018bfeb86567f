//! Ranked-list effectiveness metrics: AP, RR, P@10, NDCG@10.
//!
//! Definitions, for one query with `R` relevant threads in the judgments
//! and a ranking `r_1, r_2, …`:
//!
//! - AP = (1/R) Σ P@k over the ranks k where a relevant thread appears.
//!   Relevant threads never retrieved contribute 0 through the 1/R factor.
//! - RR = 1/k for the smallest k with `r_k` relevant; 0 if none retrieved.
//! - P@10 = relevant threads among the first ten, divided by ten — always
//!   ten, even when fewer threads were retrieved.
//! - NDCG@10 = DCG@10 / IDCG@10 with DCG@10 = Σ_{i=1..10} gain(r_i) /
//!   log2(i+1), the ideal ordering taken over the judged gains.
//!
//! Gains are binary (relevant = 1) by default; [`MetricOptions`] can switch
//! NDCG to graded gains that use the judgment level directly. Threads
//! absent from the judgments count as irrelevant, and queries whose
//! judgments contain no relevant thread are excluded from every mean — a
//! ranking cannot be right or wrong about them.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::corpus::QrelSet;
use crate::eval::EvalError;
use crate::math;

/// One line of a run: a thread retrieved for a query at a rank.
#[derive(Clone, Debug, PartialEq)]
pub struct RunEntry {
    /// The query.
    pub query_id: String,
    /// The retrieved thread.
    pub thread_id: String,
    /// 1-based rank; contiguous within a query.
    pub rank: u32,
    /// The retrieval score; non-increasing with rank within a query.
    pub score: f64,
    /// Label identifying the system that produced the run.
    pub run_tag: String,
}

/// Evaluation knobs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MetricOptions {
    /// Use judgment levels as NDCG gains instead of collapsing to 0/1.
    /// AP, RR, and P@10 stay binary either way.
    pub graded_ndcg: bool,
}

/// The four metrics for a single query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QueryMetrics {
    /// Average precision.
    pub ap: f64,
    /// Reciprocal rank of the first relevant thread.
    pub rr: f64,
    /// Precision at cutoff 10.
    pub p_at_10: f64,
    /// Normalized discounted cumulative gain at cutoff 10.
    pub ndcg_at_10: f64,
}

/// Arithmetic means of the per-query metrics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricMeans {
    /// Mean average precision.
    pub map: f64,
    /// Mean reciprocal rank.
    pub mrr: f64,
    /// Mean P@10.
    pub p_at_10: f64,
    /// Mean NDCG@10.
    pub ndcg_at_10: f64,
}

/// Per-query metrics plus their means over the evaluated query set.
///
/// `per_query` holds exactly the evaluated queries: those present in the
/// input with at least one relevant thread in the judgments.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricReport {
    /// Metrics for each evaluated query.
    pub per_query: BTreeMap<String, QueryMetrics>,
    /// Means over `per_query`.
    pub means: MetricMeans,
}

/// Scores one ranked list of thread ids against the judgments.
///
/// Returns `None` when the judgments hold no relevant thread for the query
/// (including queries they have never seen): such queries are excluded
/// from evaluation rather than scored zero.
pub fn query_metrics(
    query_id: &str,
    ranked: &[String],
    qrels: &QrelSet,
    options: MetricOptions,
) -> Option<QueryMetrics> {
    let judged = qrels.judgments_for(query_id)?;
    let total_relevant = judged.values().filter(|&&level| level >= 1).count();
    if total_relevant == 0 {
        return None;
    }

    let mut hits = 0u32;
    let mut precision_sum = 0.0;
    let mut first_relevant_rank = None;
    let mut hits_at_10 = 0u32;
    let mut dcg = 0.0;
    for (i, thread_id) in ranked.iter().enumerate() {
        let level = judged.get(thread_id).copied().unwrap_or(0);
        let rank = i + 1;
        if level >= 1 {
            hits += 1;
            precision_sum += f64::from(hits) / rank as f64;
            first_relevant_rank.get_or_insert(rank);
            if rank <= 10 {
                hits_at_10 += 1;
            }
        }
        if rank <= 10 {
            dcg += gain(level, options) / math::log2(rank as f64 + 1.0);
        }
    }

    let mut ideal_gains: Vec<f64> =
        judged.values().map(|&level| gain(level, options)).collect();
    ideal_gains.sort_unstable_by(|a, b| b.total_cmp(a));
    let idcg: f64 = ideal_gains
        .iter()
        .take(10)
        .enumerate()
        .map(|(i, g)| g / math::log2(i as f64 + 2.0))
        .sum();

    Some(QueryMetrics {
        ap: precision_sum / total_relevant as f64,
        rr: first_relevant_rank.map_or(0.0, |rank| 1.0 / rank as f64),
        p_at_10: f64::from(hits_at_10) / 10.0,
        // total_relevant ≥ 1 puts at least one positive gain in the ideal
        // ordering, so idcg > 0 in both gain modes.
        ndcg_at_10: dcg / idcg,
    })
}

fn gain(level: u8, options: MetricOptions) -> f64 {
    if options.graded_ndcg {
        f64::from(level)
    } else if level >= 1 {
        1.0
    } else {
        0.0
    }
}

/// Scores a whole run against the judgments.
///
/// Entries may arrive in any order; they are grouped by query and sorted by
/// rank. Each query's entries must have contiguous ranks from 1,
/// non-increasing scores, and distinct threads, and every ranked query must
/// be present in the judgments. Queries without a relevant thread are
/// excluded; if none remain, the report would be empty and an error is
/// returned instead.
pub fn metrics_for_run(
    entries: &[RunEntry],
    qrels: &QrelSet,
    options: MetricOptions,
) -> Result<MetricReport, EvalError> {
    let mut by_query: BTreeMap<&str, Vec<&RunEntry>> = BTreeMap::new();
    for entry in entries {
        by_query.entry(&entry.query_id).or_default().push(entry);
    }

    let mut per_query = BTreeMap::new();
    for (query_id, mut group) in by_query {
        if qrels.judgments_for(query_id).is_none() {
            return Err(EvalError::UnknownQuery { query_id: query_id.into() });
        }
        group.sort_by_key(|e| e.rank);
        let mut seen = BTreeSet::new();
        for (i, entry) in group.iter().enumerate() {
            if entry.rank as usize != i + 1 {
                return Err(EvalError::MalformedRun {
                    query_id: query_id.into(),
                    reason: "ranks are not contiguous from 1",
                });
            }
            if i > 0 && entry.score > group[i - 1].score {
                return Err(EvalError::MalformedRun {
                    query_id: query_id.into(),
                    reason: "scores increase with rank",
                });
            }
            if !seen.insert(entry.thread_id.as_str()) {
                return Err(EvalError::MalformedRun {
                    query_id: query_id.into(),
                    reason: "a thread is ranked twice",
                });
            }
        }
        let ranked: Vec<String> = group.iter().map(|e| e.thread_id.clone()).collect();
        if let Some(metrics) = query_metrics(query_id, &ranked, qrels, options) {
            per_query.insert(query_id.into(), metrics);
        }
    }

    report_from_per_query(per_query)
}

/// Wraps evaluated per-query metrics into a report with their means.
pub(crate) fn report_from_per_query(
    per_query: BTreeMap<String, QueryMetrics>,
) -> Result<MetricReport, EvalError> {
    if per_query.is_empty() {
        return Err(EvalError::NoJudgedQueries);
    }
    let n = per_query.len() as f64;
    let mut map = 0.0;
    let mut mrr = 0.0;
    let mut p = 0.0;
    let mut ndcg = 0.0;
    for m in per_query.values() {
        map += m.ap;
        mrr += m.rr;
        p += m.p_at_10;
        ndcg += m.ndcg_at_10;
    }
    Ok(MetricReport {
        per_query,
        means: MetricMeans {
            map: map / n,
            mrr: mrr / n,
            p_at_10: p / n,
            ndcg_at_10: ndcg / n,
        },
    })
}
