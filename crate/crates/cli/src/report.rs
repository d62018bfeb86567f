//! The all-methods comparison table: every ranking method evaluated on the
//! same queries, with per-metric significance markers against the
//! virtual-document baseline.
//!
//! Each fusion method's per-query metric vector is compared to the
//! baseline's with a paired randomization test; a marker on a value flags a
//! significant difference (▲/▼ at p < 0.01, △/▽ at p < 0.05, direction by
//! the sign of the mean difference). The baseline row carries no markers.

use std::collections::BTreeMap;
use std::io::Write;

use anyhow::Result;

use threadrank_core::corpus::{QrelSet, QueryRecord};
use threadrank_core::eval::metrics::{query_metrics, MetricMeans, MetricOptions, QueryMetrics};
use threadrank_core::eval::significance::paired_randomization_test;
use threadrank_core::eval::EvalError;
use threadrank_core::fusion::{retrieve_threads, RankMethod, RetrieveError};
use threadrank_core::index::InvertedIndex;
use threadrank_core::score::ScoreError;

/// Everything a comparison run needs.
pub struct ComparisonSpec<'a> {
    /// Queries to rank.
    pub queries: &'a [QueryRecord],
    /// Relevance judgments.
    pub qrels: &'a QrelSet,
    /// Message-level index for the fusion methods.
    pub message_index: &'a InvertedIndex,
    /// Virtual-document index for the baseline.
    pub vd_index: &'a InvertedIndex,
    /// Dirichlet smoothing parameter.
    pub mu: f64,
    /// Message pool size for the fusion methods.
    pub pool_size: usize,
    /// Maximum threads kept per ranking.
    pub cutoff: usize,
    /// Monte Carlo sign flips for the significance tests past 20 queries.
    pub iterations: u64,
    /// Seed for the Monte Carlo sampling.
    pub seed: u64,
    /// Metric configuration.
    pub options: MetricOptions,
}

/// How a value compares to the baseline.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Marker {
    /// Not significant, not tested (baseline row), or untestable (fewer
    /// than two queries).
    None,
    /// Higher than the baseline, p < 0.05.
    Up,
    /// Higher than the baseline, p < 0.01.
    UpStrong,
    /// Lower than the baseline, p < 0.05.
    Down,
    /// Lower than the baseline, p < 0.01.
    DownStrong,
}

impl Marker {
    fn symbol(self) -> &'static str {
        match self {
            Marker::None => "",
            Marker::Up => "△",
            Marker::UpStrong => "▲",
            Marker::Down => "▽",
            Marker::DownStrong => "▼",
        }
    }
}

/// One table row: a method's metric means and their markers in the column
/// order map, mrr, p10, ndcg10.
pub struct MethodRow {
    /// The ranking method.
    pub method: RankMethod,
    /// Mean metrics over the evaluated queries.
    pub means: MetricMeans,
    /// Significance markers, one per metric column.
    pub markers: [Marker; 4],
}

/// The comparison table plus the number of evaluated queries.
pub struct ComparisonTable {
    /// One row per method, baseline first.
    pub rows: Vec<MethodRow>,
    /// Queries that were ranked and had at least one relevant judgment.
    pub query_count: usize,
}

/// Per-query metric vectors for one method, in table column order.
fn metric_vectors(per_query: &BTreeMap<String, QueryMetrics>) -> [BTreeMap<String, f64>; 4] {
    let pick = |f: fn(&QueryMetrics) -> f64| {
        per_query.iter().map(|(q, m)| (q.clone(), f(m))).collect::<BTreeMap<_, _>>()
    };
    [pick(|m| m.ap), pick(|m| m.rr), pick(|m| m.p_at_10), pick(|m| m.ndcg_at_10)]
}

fn means_of(per_query: &BTreeMap<String, QueryMetrics>) -> MetricMeans {
    let n = per_query.len() as f64;
    MetricMeans {
        map: per_query.values().map(|m| m.ap).sum::<f64>() / n,
        mrr: per_query.values().map(|m| m.rr).sum::<f64>() / n,
        p_at_10: per_query.values().map(|m| m.p_at_10).sum::<f64>() / n,
        ndcg_at_10: per_query.values().map(|m| m.ndcg_at_10).sum::<f64>() / n,
    }
}

/// Ranks every query under every method and assembles the table.
///
/// Queries with no scoreable terms are skipped for every method alike (the
/// two indexes share one analyzer, so a query empty for one is empty for
/// both); queries without a relevant judgment are excluded by the metrics.
/// All methods therefore score exactly the same query set, which is what
/// makes the paired tests valid.
pub fn comparison_table(spec: &ComparisonSpec<'_>) -> Result<ComparisonTable> {
    let mut per_method: Vec<BTreeMap<String, QueryMetrics>> = Vec::new();
    for method in RankMethod::ALL {
        let index = match method {
            RankMethod::VirtualDocument => spec.vd_index,
            RankMethod::Fusion(_) => spec.message_index,
        };
        let mut per_query = BTreeMap::new();
        for query in spec.queries {
            let list = match retrieve_threads(
                query,
                index,
                method,
                spec.mu,
                spec.pool_size,
                spec.cutoff,
            ) {
                Ok(list) => list,
                Err(RetrieveError::Score(ScoreError::EmptyQuery { query_id })) => {
                    if method == RankMethod::VirtualDocument {
                        eprintln!("warning: query {query_id}: no scoreable terms; skipped");
                    }
                    continue;
                }
                Err(err) => return Err(err.into()),
            };
            let ranked: Vec<String> =
                list.entries.into_iter().map(|e| e.thread_id).collect();
            if let Some(m) = query_metrics(&query.query_id, &ranked, spec.qrels, spec.options) {
                per_query.insert(query.query_id.clone(), m);
            }
        }
        if per_query.is_empty() {
            return Err(EvalError::NoJudgedQueries.into());
        }
        per_method.push(per_query);
    }

    let baseline_vectors = metric_vectors(&per_method[0]);
    let mut rows = Vec::new();
    for (method, per_query) in RankMethod::ALL.into_iter().zip(&per_method) {
        let means = means_of(per_query);
        let mut markers = [Marker::None; 4];
        if method != RankMethod::VirtualDocument {
            let vectors = metric_vectors(per_query);
            for (slot, (ours, baseline)) in
                markers.iter_mut().zip(vectors.iter().zip(&baseline_vectors))
            {
                *slot = marker_against_baseline(ours, baseline, spec.iterations, spec.seed)?;
            }
        }
        rows.push(MethodRow { method, means, markers });
    }
    Ok(ComparisonTable { rows, query_count: per_method[0].len() })
}

fn marker_against_baseline(
    ours: &BTreeMap<String, f64>,
    baseline: &BTreeMap<String, f64>,
    iterations: u64,
    seed: u64,
) -> Result<Marker> {
    let p = match paired_randomization_test(ours, baseline, iterations, seed) {
        Ok(p) => p,
        // A single evaluated query cannot support a test; report no marker.
        Err(EvalError::TooFewQueries { .. }) => return Ok(Marker::None),
        Err(err) => return Err(err.into()),
    };
    let diff: f64 = ours
        .iter()
        .map(|(query_id, value)| value - baseline[query_id])
        .sum();
    Ok(if p >= 0.05 || diff == 0.0 {
        Marker::None
    } else {
        match (p < 0.01, diff > 0.0) {
            (true, true) => Marker::UpStrong,
            (false, true) => Marker::Up,
            (true, false) => Marker::DownStrong,
            (false, false) => Marker::Down,
        }
    })
}

/// Writes the table as TSV: `method  map  mrr  p10  ndcg10`, one row per
/// method, markers appended to their values.
pub fn render_table(out: &mut impl Write, table: &ComparisonTable) -> Result<()> {
    writeln!(out, "method\tmap\tmrr\tp10\tndcg10")?;
    for row in &table.rows {
        let values = [
            row.means.map,
            row.means.mrr,
            row.means.p_at_10,
            row.means.ndcg_at_10,
        ];
        write!(out, "{}", row.method)?;
        for (value, marker) in values.iter().zip(row.markers) {
            write!(out, "\t{value:.4}{}", marker.symbol())?;
        }
        writeln!(out)?;
    }
    Ok(())
}
