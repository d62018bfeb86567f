//! The subcommands: argument definitions and implementations.
//!
//! Every command reads inputs through [`crate::formats`], works through
//! `threadrank-core`, and writes byte-deterministic output: running a
//! command twice on the same inputs produces identical bytes.
//!
//! Exit-status contract (mapped in `main`): 0 on success, 1 when some
//! queries failed but the run completed for the rest, 2 on invalid input or
//! configuration.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;

use threadrank_core::corpus::{Corpus, QrelSet};
use threadrank_core::eval::metrics::{
    metrics_for_run, MetricMeans, MetricOptions, MetricReport, QueryMetrics,
};
use threadrank_core::eval::significance::paired_randomization_test;
use threadrank_core::eval::sweep::{cross_validated_sweep, sweep_curve, GridPoint, SweepConfig};
use threadrank_core::fusion::{retrieve_threads, RankMethod, RetrieveError, ThreadScoreList};
use threadrank_core::index::InvertedIndex;
use threadrank_core::score::{prepare_query, ScoreError};
use threadrank_core::text::{parse_stoplist, Analyzer};

use crate::formats;
use crate::index_io;
use crate::report;

/// A 318-word English stoplist, applied to query terms at ranking time.
const DEFAULT_STOPLIST: &str = include_str!("data/stopwords.txt");

/// File name of the message-level index inside an index directory.
pub const MESSAGE_INDEX_FILE: &str = "message.idx";
/// File name of the virtual-document index inside an index directory.
pub const VD_INDEX_FILE: &str = "vd.idx";

/// How a command finished short of an error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Everything worked.
    Success,
    /// Some queries failed; the rest were processed.
    PartialFailure,
}

/// The stoplist used when none is supplied.
pub fn default_stoplist() -> BTreeSet<String> {
    parse_stoplist(DEFAULT_STOPLIST)
}

fn load_stoplist(path: Option<&Path>) -> Result<BTreeSet<String>> {
    match path {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read stoplist {}", path.display()))?;
            Ok(parse_stoplist(&text))
        }
        None => Ok(default_stoplist()),
    }
}

/// The index file a ranking method reads: fusion methods rank messages, the
/// baseline ranks whole threads.
fn index_path(dir: &Path, method: RankMethod) -> PathBuf {
    match method {
        RankMethod::VirtualDocument => dir.join(VD_INDEX_FILE),
        RankMethod::Fusion(_) => dir.join(MESSAGE_INDEX_FILE),
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        Some(path) => {
            let file = File::create(path)
                .with_context(|| format!("cannot create {}", path.display()))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(BufWriter::new(std::io::stdout().lock()))),
    }
}

/// Build message-level and virtual-document indexes from a corpus.
#[derive(Args, Debug)]
pub struct IndexArgs {
    /// Corpus file: one JSON message record per line.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Directory to write the two index files into (created if absent).
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Index raw tokens instead of stemmed terms.
    #[arg(long)]
    pub no_stem: bool,
    /// Stoplist file (one word per line) replacing the built-in list.
    /// Stopwords are removed from queries at ranking time, never from
    /// documents.
    #[arg(long)]
    pub stoplist: Option<PathBuf>,
}

/// Builds both indexes and prints a corpus summary.
pub fn cmd_index(args: &IndexArgs) -> Result<Outcome> {
    let records = formats::read_corpus(&args.corpus)?;
    let corpus = Corpus::from_records(records)
        .with_context(|| format!("invalid corpus {}", args.corpus.display()))?;
    let stoplist = load_stoplist(args.stoplist.as_deref())?;
    let analyzer = Analyzer::index_time(!args.no_stem, stoplist);

    let message_index = InvertedIndex::build_message_level(&corpus, &analyzer)?;
    let vd_index = InvertedIndex::build_virtual_documents(&corpus, &analyzer)?;

    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("cannot create {}", args.out_dir.display()))?;
    let message_path = args.out_dir.join(MESSAGE_INDEX_FILE);
    let vd_path = args.out_dir.join(VD_INDEX_FILE);
    index_io::save_index(&message_index, &message_path)?;
    index_io::save_index(&vd_index, &vd_path)?;

    let mut out = BufWriter::new(std::io::stdout().lock());
    writeln!(out, "threads\t{}", corpus.thread_count())?;
    writeln!(out, "messages\t{}", corpus.message_count())?;
    writeln!(out, "tokens\t{}", message_index.collection().total_tokens)?;
    writeln!(out, "vocabulary\t{}", message_index.collection().vocab_size())?;
    writeln!(out, "message_index\t{}", message_path.display())?;
    writeln!(out, "vd_index\t{}", vd_path.display())?;
    out.flush()?;
    Ok(Outcome::Success)
}

/// Rank threads for a query file and write a TREC run.
#[derive(Args, Debug)]
pub struct SearchArgs {
    /// Directory holding the index files written by `index`.
    #[arg(long)]
    pub index_dir: PathBuf,
    /// Query file: query_id<TAB>text per line.
    #[arg(long)]
    pub queries: PathBuf,
    /// Ranking method: `vd` or a voting technique.
    #[arg(long)]
    pub method: RankMethod,
    /// Dirichlet smoothing parameter.
    #[arg(long, default_value_t = 1000.0)]
    pub mu: f64,
    /// Message pool size fed to the voting technique (ignored by `vd`).
    #[arg(long, default_value_t = 1000)]
    pub pool_size: usize,
    /// Maximum threads kept per query.
    #[arg(long, default_value_t = 1000)]
    pub cutoff: usize,
    /// Run tag for the output file; defaults to the method name.
    #[arg(long)]
    pub run_tag: Option<String>,
    /// Write the run here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Ranks every query, skipping (and reporting) queries with no scoreable
/// terms; any skip downgrades the outcome to a partial failure.
pub fn cmd_search(args: &SearchArgs) -> Result<Outcome> {
    let index = index_io::load_index(&index_path(&args.index_dir, args.method))?;
    let queries = formats::read_queries(&args.queries)?;
    let query_analyzer = index.query_analyzer();

    let mut lists: Vec<ThreadScoreList> = Vec::new();
    let mut failures = 0usize;
    for query in &queries {
        // Re-derive the term drops for the warning; ranking repeats this
        // internally.
        let prepared = prepare_query(&query_analyzer.analyze(&query.text), index.collection());
        if !prepared.dropped_terms.is_empty() {
            eprintln!(
                "warning: query {}: dropped terms absent from the collection: {}",
                query.query_id,
                prepared.dropped_terms.join(", ")
            );
        }
        match retrieve_threads(query, &index, args.method, args.mu, args.pool_size, args.cutoff)
        {
            Ok(list) => lists.push(list),
            Err(RetrieveError::Score(ScoreError::EmptyQuery { query_id })) => {
                eprintln!("warning: query {query_id}: no scoreable terms; skipped");
                failures += 1;
            }
            Err(err) => return Err(err.into()),
        }
    }

    let run_tag = args.run_tag.as_deref().unwrap_or(args.method.name());
    let mut out = open_output(args.output.as_deref())?;
    formats::write_run(&mut out, &lists, run_tag)?;
    out.flush()?;
    Ok(if failures > 0 { Outcome::PartialFailure } else { Outcome::Success })
}

/// Score a run file against relevance judgments.
#[derive(Args, Debug)]
pub struct EvalArgs {
    /// TREC run file to evaluate.
    #[arg(long)]
    pub run: PathBuf,
    /// Relevance judgments.
    #[arg(long)]
    pub qrels: PathBuf,
    /// Use judgment levels as NDCG gains instead of collapsing to 0/1.
    #[arg(long)]
    pub graded_ndcg: bool,
    /// Also write the report as JSON (full precision) to this path.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// Scores a run over every judged query with a relevant thread: judged
/// queries missing from the run count as zeros, so a run is not excused
/// from queries it skipped. Queries without a relevant thread are excluded
/// from the means, matching the sweep harness.
pub fn evaluate_run(
    entries: &[threadrank_core::eval::metrics::RunEntry],
    qrels: &QrelSet,
    options: MetricOptions,
) -> Result<MetricReport> {
    let report = metrics_for_run(entries, qrels, options)?;
    let mut per_query = report.per_query;
    let judged: Vec<String> = qrels.judged_queries().map(String::from).collect();
    for query_id in judged {
        if qrels.relevant_count(&query_id) > 0 && !per_query.contains_key(&query_id) {
            per_query.insert(
                query_id,
                QueryMetrics { ap: 0.0, rr: 0.0, p_at_10: 0.0, ndcg_at_10: 0.0 },
            );
        }
    }
    let means = means_of(&per_query);
    Ok(MetricReport { per_query, means })
}

fn means_of(per_query: &BTreeMap<String, QueryMetrics>) -> MetricMeans {
    let n = per_query.len().max(1) as f64;
    let mut sums = MetricMeans { map: 0.0, mrr: 0.0, p_at_10: 0.0, ndcg_at_10: 0.0 };
    for m in per_query.values() {
        sums.map += m.ap;
        sums.mrr += m.rr;
        sums.p_at_10 += m.p_at_10;
        sums.ndcg_at_10 += m.ndcg_at_10;
    }
    MetricMeans {
        map: sums.map / n,
        mrr: sums.mrr / n,
        p_at_10: sums.p_at_10 / n,
        ndcg_at_10: sums.ndcg_at_10 / n,
    }
}

/// Prints the per-query metric table with an `ALL` means row.
pub fn cmd_eval(args: &EvalArgs) -> Result<Outcome> {
    let entries = formats::read_run(&args.run)?;
    let qrels = formats::read_qrels(&args.qrels)?;
    let options = MetricOptions { graded_ndcg: args.graded_ndcg };
    let report = evaluate_run(&entries, &qrels, options)
        .with_context(|| format!("cannot evaluate {}", args.run.display()))?;

    let mut out = BufWriter::new(std::io::stdout().lock());
    formats::write_metric_tsv(&mut out, &report)?;
    out.flush()?;
    if let Some(json_path) = &args.json {
        let mut json_out = open_output(Some(json_path))?;
        formats::write_metric_json(&mut json_out, &report)?;
        json_out.flush()?;
    }
    Ok(Outcome::Success)
}

/// The per-query quantity a significance test permutes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum MetricName {
    /// Average precision (the quantity behind MAP).
    Ap,
    /// Reciprocal rank.
    Rr,
    /// Precision at 10.
    P10,
    /// NDCG at 10.
    Ndcg10,
}

impl MetricName {
    fn of(self, m: &QueryMetrics) -> f64 {
        match self {
            MetricName::Ap => m.ap,
            MetricName::Rr => m.rr,
            MetricName::P10 => m.p_at_10,
            MetricName::Ndcg10 => m.ndcg_at_10,
        }
    }

    fn label(self) -> &'static str {
        match self {
            MetricName::Ap => "ap",
            MetricName::Rr => "rr",
            MetricName::P10 => "p10",
            MetricName::Ndcg10 => "ndcg10",
        }
    }
}

/// Compare two runs with a paired randomization test.
#[derive(Args, Debug)]
pub struct SignificanceArgs {
    /// First run file.
    #[arg(long)]
    pub run_a: PathBuf,
    /// Second run file.
    #[arg(long)]
    pub run_b: PathBuf,
    /// Relevance judgments.
    #[arg(long)]
    pub qrels: PathBuf,
    /// Per-query metric whose difference is tested.
    #[arg(long, value_enum, default_value_t = MetricName::Ap)]
    pub metric: MetricName,
    /// Monte Carlo sign flips when there are more than 20 queries (the
    /// exact distribution is enumerated at or below 20).
    #[arg(long, default_value_t = 100_000)]
    pub iterations: u64,
    /// Seed for the Monte Carlo sampling.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Use judgment levels as NDCG gains instead of collapsing to 0/1.
    #[arg(long)]
    pub graded_ndcg: bool,
}

/// Evaluates both runs over the judged queries and prints the two-sided
/// p-value for the mean difference of the chosen metric.
pub fn cmd_significance(args: &SignificanceArgs) -> Result<Outcome> {
    let qrels = formats::read_qrels(&args.qrels)?;
    let options = MetricOptions { graded_ndcg: args.graded_ndcg };
    let mut vectors = Vec::new();
    for path in [&args.run_a, &args.run_b] {
        let entries = formats::read_run(path)?;
        let report = evaluate_run(&entries, &qrels, options)
            .with_context(|| format!("cannot evaluate {}", path.display()))?;
        let vector: BTreeMap<String, f64> = report
            .per_query
            .iter()
            .map(|(query_id, m)| (query_id.clone(), args.metric.of(m)))
            .collect();
        vectors.push(vector);
    }
    let p = paired_randomization_test(&vectors[0], &vectors[1], args.iterations, args.seed)?;
    let mean = |v: &BTreeMap<String, f64>| v.values().sum::<f64>() / v.len() as f64;

    let mut out = BufWriter::new(std::io::stdout().lock());
    writeln!(out, "metric\t{}", args.metric.label())?;
    writeln!(out, "queries\t{}", vectors[0].len())?;
    writeln!(out, "mean_a\t{:.4}", mean(&vectors[0]))?;
    writeln!(out, "mean_b\t{:.4}", mean(&vectors[1]))?;
    writeln!(out, "p_value\t{p}")?;
    out.flush()?;
    Ok(Outcome::Success)
}

/// Tune μ and pool size by cross-validated grid search.
#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Directory holding the index files written by `index`.
    #[arg(long)]
    pub index_dir: PathBuf,
    /// Query file.
    #[arg(long)]
    pub queries: PathBuf,
    /// Relevance judgments.
    #[arg(long)]
    pub qrels: PathBuf,
    /// Ranking method: `vd` or a voting technique.
    #[arg(long)]
    pub method: RankMethod,
    /// Candidate μ values.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "500,1000,1500,2000,2500,3000,3500,4000"
    )]
    pub mu_grid: Vec<f64>,
    /// Candidate pool sizes.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "500,1000,1500,2000,2500,3000,3500,4000,4500,5000"
    )]
    pub pool_grid: Vec<usize>,
    /// Number of cross-validation folds.
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Seed for the fold-assignment shuffle.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Maximum threads kept per query during evaluation.
    #[arg(long, default_value_t = 1000)]
    pub cutoff: usize,
    /// Use judgment levels as NDCG gains instead of collapsing to 0/1.
    #[arg(long)]
    pub graded_ndcg: bool,
}

/// Runs the cross-validated sweep and prints the per-fold choices followed
/// by the pooled held-out metric table.
pub fn cmd_sweep(args: &SweepArgs) -> Result<Outcome> {
    let index = index_io::load_index(&index_path(&args.index_dir, args.method))?;
    let queries = formats::read_queries(&args.queries)?;
    let qrels = formats::read_qrels(&args.qrels)?;
    let grid: Vec<GridPoint> = args
        .mu_grid
        .iter()
        .flat_map(|&mu| args.pool_grid.iter().map(move |&pool_size| GridPoint { mu, pool_size }))
        .collect();
    let config = SweepConfig {
        folds: args.folds,
        seed: args.seed,
        cutoff: args.cutoff,
        options: MetricOptions { graded_ndcg: args.graded_ndcg },
    };
    let report = cross_validated_sweep(&queries, &qrels, &index, args.method, &grid, &config)?;

    let mut out = BufWriter::new(std::io::stdout().lock());
    writeln!(out, "# method\t{}", args.method)?;
    writeln!(
        out,
        "# grid\t{} mu x {} pool = {} points",
        args.mu_grid.len(),
        args.pool_grid.len(),
        grid.len()
    )?;
    writeln!(out, "# folds\t{}", args.folds)?;
    writeln!(out, "# seed\t{}", args.seed)?;
    writeln!(out, "fold\tmu\tpool_size\ttrain_map")?;
    for fold in &report.folds {
        writeln!(
            out,
            "{}\t{}\t{}\t{:.4}",
            fold.fold, fold.chosen.mu, fold.chosen.pool_size, fold.train_map
        )?;
    }
    writeln!(out)?;
    formats::write_metric_tsv(&mut out, &report.pooled)?;
    out.flush()?;
    Ok(Outcome::Success)
}

/// Trace mean AP as the message pool grows.
#[derive(Args, Debug)]
pub struct CurveArgs {
    /// Directory holding the index files written by `index`.
    #[arg(long)]
    pub index_dir: PathBuf,
    /// Query file.
    #[arg(long)]
    pub queries: PathBuf,
    /// Relevance judgments.
    #[arg(long)]
    pub qrels: PathBuf,
    /// Ranking method: `vd` or a voting technique.
    #[arg(long)]
    pub method: RankMethod,
    /// Dirichlet smoothing parameter.
    #[arg(long, default_value_t = 1000.0)]
    pub mu: f64,
    /// Pool sizes to evaluate, strictly ascending.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "500,1000,1500,2000,2500,3000,3500,4000,4500,5000"
    )]
    pub pool_grid: Vec<usize>,
    /// Maximum threads kept per query during evaluation.
    #[arg(long, default_value_t = 1000)]
    pub cutoff: usize,
    /// Use judgment levels as NDCG gains instead of collapsing to 0/1.
    #[arg(long)]
    pub graded_ndcg: bool,
}

/// Prints the pool-size/MAP curve as TSV.
pub fn cmd_curve(args: &CurveArgs) -> Result<Outcome> {
    let index = index_io::load_index(&index_path(&args.index_dir, args.method))?;
    let queries = formats::read_queries(&args.queries)?;
    let qrels = formats::read_qrels(&args.qrels)?;
    let points = sweep_curve(
        &queries,
        &qrels,
        &index,
        args.method,
        args.mu,
        &args.pool_grid,
        args.cutoff,
        MetricOptions { graded_ndcg: args.graded_ndcg },
    )?;
    let mut out = BufWriter::new(std::io::stdout().lock());
    formats::write_curve_tsv(&mut out, &points)?;
    out.flush()?;
    Ok(Outcome::Success)
}

/// Compare every ranking method against the virtual-document baseline.
#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Directory holding the index files written by `index`.
    #[arg(long)]
    pub index_dir: PathBuf,
    /// Query file.
    #[arg(long)]
    pub queries: PathBuf,
    /// Relevance judgments.
    #[arg(long)]
    pub qrels: PathBuf,
    /// Dirichlet smoothing parameter.
    #[arg(long, default_value_t = 1000.0)]
    pub mu: f64,
    /// Message pool size fed to the voting techniques.
    #[arg(long, default_value_t = 1000)]
    pub pool_size: usize,
    /// Maximum threads kept per query.
    #[arg(long, default_value_t = 1000)]
    pub cutoff: usize,
    /// Monte Carlo sign flips when there are more than 20 queries.
    #[arg(long, default_value_t = 100_000)]
    pub iterations: u64,
    /// Seed for the Monte Carlo sampling.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Use judgment levels as NDCG gains instead of collapsing to 0/1.
    #[arg(long)]
    pub graded_ndcg: bool,
}

/// Prints the all-methods comparison table with significance markers
/// against the baseline.
pub fn cmd_report(args: &ReportArgs) -> Result<Outcome> {
    let message_index = index_io::load_index(&args.index_dir.join(MESSAGE_INDEX_FILE))?;
    let vd_index = index_io::load_index(&args.index_dir.join(VD_INDEX_FILE))?;
    let queries = formats::read_queries(&args.queries)?;
    let qrels = formats::read_qrels(&args.qrels)?;
    let table = report::comparison_table(&report::ComparisonSpec {
        queries: &queries,
        qrels: &qrels,
        message_index: &message_index,
        vd_index: &vd_index,
        mu: args.mu,
        pool_size: args.pool_size,
        cutoff: args.cutoff,
        iterations: args.iterations,
        seed: args.seed,
        options: MetricOptions { graded_ndcg: args.graded_ndcg },
    })?;
    let mut out = BufWriter::new(std::io::stdout().lock());
    writeln!(out, "# mu\t{}", args.mu)?;
    writeln!(out, "# pool_size\t{}", args.pool_size)?;
    writeln!(out, "# queries\t{}", table.query_count)?;
    writeln!(out, "# significance vs {}: ▲/▼ p<0.01, △/▽ p<0.05", RankMethod::VirtualDocument)?;
    report::render_table(&mut out, &table)?;
    out.flush()?;
    Ok(Outcome::Success)
}
