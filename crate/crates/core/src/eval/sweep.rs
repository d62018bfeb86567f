//! Cross-validated grid search over (μ, pool size) and pool-size curves.
//!
//! Retrieval quality depends on the Dirichlet smoothing parameter μ and,
//! for the voting techniques, on how many messages feed the vote. Both are
//! tuned by exhaustive grid search: queries are split into k folds by a
//! seeded shuffle, each fold is held out once, the grid point with the best
//! mean AP on the remaining folds is chosen, and the held-out fold is
//! scored with it. The report pools the held-out results, so every query is
//! scored exactly once by a configuration its own judgments did not pick.
//!
//! Ties on training MAP resolve to the smallest μ, then the smallest pool
//! size, regardless of the order grid points were supplied in.
//!
//! [`sweep_curve`] holds μ fixed and traces mean AP as the pool grows — the
//! diagnostic for vote dilution, where enlarging the pool admits weakly
//! scored messages that outvote genuinely relevant threads.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::corpus::{QrelSet, QueryRecord};
use crate::eval::metrics::{
    query_metrics, report_from_per_query, MetricOptions, MetricReport, QueryMetrics,
};
use crate::eval::EvalError;
use crate::fusion::{retrieve_threads, RankMethod, RetrieveError};
use crate::index::InvertedIndex;
use crate::rng::SplitMix64;
use crate::score::ScoreError;

/// One candidate configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    /// Dirichlet smoothing parameter.
    pub mu: f64,
    /// Message pool size |R_Q| fed to the voting technique. Ignored by
    /// direct virtual-document ranking, which has no pool.
    pub pool_size: usize,
}

/// Sweep-wide settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepConfig {
    /// Number of cross-validation folds.
    pub folds: usize,
    /// Seed for the fold-assignment shuffle.
    pub seed: u64,
    /// Maximum threads retained per ranking during evaluation.
    pub cutoff: usize,
    /// Metric configuration.
    pub options: MetricOptions,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { folds: 5, seed: 42, cutoff: 1000, options: MetricOptions::default() }
    }
}

/// What one fold chose and how it did on its training queries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FoldOutcome {
    /// Fold index, 0-based.
    pub fold: usize,
    /// The grid point that maximized training MAP.
    pub chosen: GridPoint,
    /// The training MAP it achieved.
    pub train_map: f64,
}

/// The full cross-validation result.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    /// Which fold each query landed in.
    pub fold_of: BTreeMap<String, usize>,
    /// Per-fold chosen configurations.
    pub folds: Vec<FoldOutcome>,
    /// Held-out metrics pooled across folds: each evaluated query scored
    /// once, under the configuration chosen without it.
    pub pooled: MetricReport,
}

/// One point of a pool-size curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    /// The pool size evaluated.
    pub pool_size: usize,
    /// Mean AP across evaluated queries at that pool size.
    pub map: f64,
}

/// Splits query ids into `folds` groups of near-equal size (differing by at
/// most one) with a seeded shuffle. Duplicate ids collapse first; ids are
/// sorted before shuffling so the assignment depends only on the id set and
/// the seed, not on input order.
pub fn assign_folds(
    query_ids: &[String],
    folds: usize,
    seed: u64,
) -> Result<BTreeMap<String, usize>, EvalError> {
    if folds < 2 {
        return Err(EvalError::InvalidFolds { folds });
    }
    let mut ids: Vec<&String> = query_ids.iter().collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() < folds {
        return Err(EvalError::NotEnoughQueries { queries: ids.len(), folds });
    }
    SplitMix64::new(seed).shuffle(&mut ids);
    Ok(ids.into_iter().enumerate().map(|(i, id)| (id.clone(), i % folds)).collect())
}

/// Exhaustive grid search maximizing MAP under k-fold cross-validation.
///
/// The index granularity must match the method (message-level for voting
/// techniques, virtual-document for direct thread ranking). Queries the
/// judgments contain no relevant thread for are excluded from training and
/// test means; queries whose text yields no scoreable term count as having
/// retrieved nothing.
pub fn cross_validated_sweep(
    queries: &[QueryRecord],
    qrels: &QrelSet,
    index: &InvertedIndex,
    method: RankMethod,
    grid: &[GridPoint],
    config: &SweepConfig,
) -> Result<SweepReport, EvalError> {
    if grid.is_empty() {
        return Err(EvalError::EmptyGrid);
    }
    let query_ids: Vec<String> = queries.iter().map(|q| q.query_id.clone()).collect();
    let fold_of = assign_folds(&query_ids, config.folds, config.seed)?;

    // Tie resolution order: ascending (μ, pool). Sorting up front and
    // replacing only on strict improvement makes the winner independent of
    // the supplied grid order.
    let mut ordered: Vec<GridPoint> = grid.to_vec();
    ordered.sort_unstable_by(|a, b| {
        a.mu.total_cmp(&b.mu).then_with(|| a.pool_size.cmp(&b.pool_size))
    });

    // Per-query metrics depend on the grid point but not on the fold split,
    // so evaluate each (point, query) pair exactly once.
    let evaluations: Vec<BTreeMap<String, QueryMetrics>> = ordered
        .iter()
        .map(|point| {
            evaluate_grid_point(
                queries,
                qrels,
                index,
                method,
                point.mu,
                point.pool_size,
                config.cutoff,
                config.options,
            )
        })
        .collect::<Result<_, _>>()?;

    let mut folds = Vec::with_capacity(config.folds);
    let mut pooled_per_query = BTreeMap::new();
    for fold in 0..config.folds {
        let mut best: Option<(usize, f64)> = None;
        for (g, per_query) in evaluations.iter().enumerate() {
            let train: Vec<f64> = per_query
                .iter()
                .filter(|(query_id, _)| fold_of[query_id.as_str()] != fold)
                .map(|(_, m)| m.ap)
                .collect();
            if train.is_empty() {
                return Err(EvalError::NoJudgedQueries);
            }
            let train_map = train.iter().sum::<f64>() / train.len() as f64;
            let improves = match best {
                None => true,
                Some((_, incumbent)) => train_map > incumbent,
            };
            if improves {
                best = Some((g, train_map));
            }
        }
        let (chosen, train_map) = best.expect("grid is non-empty");
        folds.push(FoldOutcome { fold, chosen: ordered[chosen], train_map });
        for (query_id, metrics) in &evaluations[chosen] {
            if fold_of[query_id.as_str()] == fold {
                pooled_per_query.insert(query_id.clone(), *metrics);
            }
        }
    }

    Ok(SweepReport { fold_of, folds, pooled: report_from_per_query(pooled_per_query)? })
}

/// Mean AP as a function of pool size, everything else held fixed.
/// `pool_sizes` must be non-empty and strictly ascending.
#[allow(clippy::too_many_arguments)]
pub fn sweep_curve(
    queries: &[QueryRecord],
    qrels: &QrelSet,
    index: &InvertedIndex,
    method: RankMethod,
    mu: f64,
    pool_sizes: &[usize],
    cutoff: usize,
    options: MetricOptions,
) -> Result<Vec<CurvePoint>, EvalError> {
    if pool_sizes.is_empty() {
        return Err(EvalError::EmptyGrid);
    }
    if pool_sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EvalError::UnsortedPoolSizes);
    }
    pool_sizes
        .iter()
        .map(|&pool_size| {
            let per_query =
                evaluate_grid_point(queries, qrels, index, method, mu, pool_size, cutoff, options)?;
            if per_query.is_empty() {
                return Err(EvalError::NoJudgedQueries);
            }
            let map =
                per_query.values().map(|m| m.ap).sum::<f64>() / per_query.len() as f64;
            Ok(CurvePoint { pool_size, map })
        })
        .collect()
}

/// Retrieves and scores every query at one configuration. Queries without
/// relevant judgments are omitted; queries with no scoreable term yield an
/// empty ranking and score zero.
#[allow(clippy::too_many_arguments)]
fn evaluate_grid_point(
    queries: &[QueryRecord],
    qrels: &QrelSet,
    index: &InvertedIndex,
    method: RankMethod,
    mu: f64,
    pool_size: usize,
    cutoff: usize,
    options: MetricOptions,
) -> Result<BTreeMap<String, QueryMetrics>, EvalError> {
    let mut per_query = BTreeMap::new();
    for query in queries {
        let ranked: Vec<String> =
            match retrieve_threads(query, index, method, mu, pool_size, cutoff) {
                Ok(list) => list.entries.into_iter().map(|e| e.thread_id).collect(),
                Err(RetrieveError::Score(ScoreError::EmptyQuery { .. })) => Vec::new(),
                Err(e) => return Err(e.into()),
            };
        if let Some(metrics) = query_metrics(&query.query_id, &ranked, qrels, options) {
            per_query.insert(query.query_id.clone(), metrics);
        }
    }
    Ok(per_query)
}
