//! File formats: JSONL corpora, TSV queries, qrels, TREC run files, and the
//! TSV/JSON evaluation reports.
//!
//! Readers validate as they go and report failures as `path:line: problem`,
//! with 1-based line numbers. Writers produce byte-deterministic output:
//! fixed field orders, `\n` line endings, run scores with six decimal
//! places, and metric values with four.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use threadrank_core::corpus::{MessageRecord, QrelRecord, QrelSet, QueryRecord};
use threadrank_core::eval::metrics::{MetricReport, RunEntry};
use threadrank_core::eval::sweep::CurvePoint;
use threadrank_core::fusion::ThreadScoreList;

/// On-disk shape of one corpus line.
#[derive(Serialize, Deserialize)]
struct MessageLine {
    message_id: String,
    thread_id: String,
    seq: u32,
    text: String,
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Iterates a file's lines with 1-based numbers, skipping blank lines and
/// stripping trailing carriage returns.
fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, line)| (i + 1, line.strip_suffix('\r').unwrap_or(line)))
        .filter(|(_, line)| !line.trim().is_empty())
}

/// Reads a JSONL corpus: one message object per line with `message_id`,
/// `thread_id`, `seq`, and `text` fields.
pub fn read_corpus(path: &Path) -> Result<Vec<MessageRecord>> {
    let text = read_to_string(path)?;
    let mut records = Vec::new();
    for (line_no, line) in numbered_lines(&text) {
        let parsed: MessageLine = serde_json::from_str(line)
            .with_context(|| format!("{}:{line_no}: invalid message record", path.display()))?;
        records.push(MessageRecord {
            message_id: parsed.message_id,
            thread_id: parsed.thread_id,
            seq: parsed.seq,
            text: parsed.text,
        });
    }
    Ok(records)
}

/// Writes message records back out as JSONL, one object per line.
pub fn write_corpus(out: &mut impl Write, records: &[MessageRecord]) -> Result<()> {
    for record in records {
        let line = serde_json::to_string(&MessageLine {
            message_id: record.message_id.clone(),
            thread_id: record.thread_id.clone(),
            seq: record.seq,
            text: record.text.clone(),
        })?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Reads a query file: `query_id<TAB>text` per line. Query ids must be
/// unique.
pub fn read_queries(path: &Path) -> Result<Vec<QueryRecord>> {
    let text = read_to_string(path)?;
    let mut queries: Vec<QueryRecord> = Vec::new();
    for (line_no, line) in numbered_lines(&text) {
        let Some((query_id, query_text)) = line.split_once('\t') else {
            bail!("{}:{line_no}: expected query_id<TAB>text", path.display());
        };
        if query_id.is_empty() {
            bail!("{}:{line_no}: empty query id", path.display());
        }
        if queries.iter().any(|q| q.query_id == query_id) {
            bail!("{}:{line_no}: duplicate query id {query_id:?}", path.display());
        }
        queries.push(QueryRecord { query_id: query_id.to_string(), text: query_text.to_string() });
    }
    Ok(queries)
}

/// Reads relevance judgments: whitespace-separated
/// `query_id 0 thread_id level` lines (the second column is ignored, as in
/// TREC qrels). Levels must be 0, 1, or 2, and a (query, thread) pair may
/// be judged only once.
pub fn read_qrels(path: &Path) -> Result<QrelSet> {
    let text = read_to_string(path)?;
    let mut qrels = QrelSet::new();
    for (line_no, line) in numbered_lines(&text) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [query_id, _iteration, thread_id, level] = fields.as_slice() else {
            bail!(
                "{}:{line_no}: expected 4 fields (query_id 0 thread_id level), found {}",
                path.display(),
                fields.len()
            );
        };
        let level: u8 = level
            .parse()
            .with_context(|| format!("{}:{line_no}: invalid relevance level {level:?}", path.display()))?;
        qrels
            .insert(QrelRecord {
                query_id: query_id.to_string(),
                thread_id: thread_id.to_string(),
                level,
            })
            .with_context(|| format!("{}:{line_no}: invalid judgment", path.display()))?;
    }
    Ok(qrels)
}

/// Writes judgments in the same format `read_qrels` accepts, with a literal
/// `0` in the ignored column.
pub fn write_qrels(out: &mut impl Write, qrels: &QrelSet) -> Result<()> {
    for record in qrels.records() {
        writeln!(out, "{} 0 {} {}", record.query_id, record.thread_id, record.level)?;
    }
    Ok(())
}

/// Reads a TREC run file: `query_id Q0 thread_id rank score run_tag` per
/// line.
pub fn read_run(path: &Path) -> Result<Vec<RunEntry>> {
    let text = read_to_string(path)?;
    let mut entries = Vec::new();
    for (line_no, line) in numbered_lines(&text) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [query_id, literal, thread_id, rank, score, run_tag] = fields.as_slice() else {
            bail!(
                "{}:{line_no}: expected 6 fields (query_id Q0 thread_id rank score run_tag), found {}",
                path.display(),
                fields.len()
            );
        };
        if *literal != "Q0" {
            bail!("{}:{line_no}: expected literal Q0 in field 2, found {literal:?}", path.display());
        }
        let rank: u32 = rank
            .parse()
            .with_context(|| format!("{}:{line_no}: invalid rank {rank:?}", path.display()))?;
        let score: f64 = score
            .parse()
            .with_context(|| format!("{}:{line_no}: invalid score {score:?}", path.display()))?;
        entries.push(RunEntry {
            query_id: query_id.to_string(),
            thread_id: thread_id.to_string(),
            rank,
            score,
            run_tag: run_tag.to_string(),
        });
    }
    Ok(entries)
}

/// Writes thread rankings as a TREC run file, scores to six decimal places.
pub fn write_run(out: &mut impl Write, lists: &[ThreadScoreList], run_tag: &str) -> Result<()> {
    for list in lists {
        for entry in &list.entries {
            writeln!(
                out,
                "{} Q0 {} {} {:.6} {run_tag}",
                list.query_id, entry.thread_id, entry.rank, entry.score
            )?;
        }
    }
    Ok(())
}

/// Writes a metric report as TSV: a header, one row per query, and a final
/// `ALL` row with the means. Values use four decimal places.
pub fn write_metric_tsv(out: &mut impl Write, report: &MetricReport) -> Result<()> {
    writeln!(out, "query_id\tap\trr\tp10\tndcg10")?;
    for (query_id, m) in &report.per_query {
        writeln!(
            out,
            "{query_id}\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
            m.ap, m.rr, m.p_at_10, m.ndcg_at_10
        )?;
    }
    let means = &report.means;
    writeln!(
        out,
        "ALL\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
        means.map, means.mrr, means.p_at_10, means.ndcg_at_10
    )?;
    Ok(())
}

/// Writes a metric report as JSON: full-precision per-query values plus the
/// means, for downstream tooling.
pub fn write_metric_json(out: &mut impl Write, report: &MetricReport) -> Result<()> {
    let per_query: BTreeMap<&str, serde_json::Value> = report
        .per_query
        .iter()
        .map(|(query_id, m)| {
            (
                query_id.as_str(),
                serde_json::json!({
                    "ap": m.ap,
                    "rr": m.rr,
                    "p10": m.p_at_10,
                    "ndcg10": m.ndcg_at_10,
                }),
            )
        })
        .collect();
    let means = &report.means;
    let value = serde_json::json!({
        "per_query": per_query,
        "means": {
            "map": means.map,
            "mrr": means.mrr,
            "p10": means.p_at_10,
            "ndcg10": means.ndcg_at_10,
        },
    });
    serde_json::to_writer_pretty(&mut *out, &value)?;
    writeln!(out)?;
    Ok(())
}

/// Writes a pool-size curve as TSV: a header and one `pool_size  map` row
/// per point, MAP to four decimal places.
pub fn write_curve_tsv(out: &mut impl Write, points: &[CurvePoint]) -> Result<()> {
    writeln!(out, "pool_size\tmap")?;
    for point in points {
        writeln!(out, "{}\t{:.4}", point.pool_size, point.map)?;
    }
    Ok(())
}
