//! Shared helpers for the end-to-end and acceptance tests: running the
//! binary and generating fixture corpora.

use std::path::{Path, PathBuf};
use std::process::Command;

use threadrank_core::corpus::MessageRecord;

/// Captured result of one binary invocation.
pub struct BinOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the `threadrank` binary with the given arguments.
pub fn threadrank(args: &[&str]) -> BinOutput {
    run(Command::new(env!("CARGO_BIN_EXE_threadrank")).args(args))
}

/// Runs the binary from a working directory, so relative paths in the
/// arguments (and in the printed output) resolve inside it.
#[allow(dead_code)] // each test binary compiles this module and uses a subset
pub fn threadrank_in(cwd: &Path, args: &[&str]) -> BinOutput {
    run(Command::new(env!("CARGO_BIN_EXE_threadrank")).args(args).current_dir(cwd))
}

fn run(command: &mut Command) -> BinOutput {
    let output = command.output().expect("binary should run");
    BinOutput {
        code: output.status.code().expect("terminated by signal"),
        stdout: String::from_utf8(output.stdout).expect("stdout should be UTF-8"),
        stderr: String::from_utf8(output.stderr).expect("stderr should be UTF-8"),
    }
}

/// The planted-noise corpus: `families` independent query topics.
///
/// Per topic `i`, thread `rel{i}` holds five strong messages (topic term
/// frequency 50 of 100 tokens) and thread `noise{i}` holds forty weak ones
/// (frequency 1 of 100). Small message pools see only the relevant thread;
/// large pools let the noise thread outvote it under count- and sum-style
/// fusion, while the virtual-document ranking always puts `rel{i}` first.
pub fn noise_records(families: usize) -> Vec<MessageRecord> {
    let mut records = Vec::new();
    for i in 0..families {
        let strong = (format!("topic{i} ").repeat(50) + &"pad ".repeat(50)).trim_end().to_string();
        let weak = (format!("topic{i} ") + &"pad ".repeat(99)).trim_end().to_string();
        for j in 0..5 {
            records.push(MessageRecord {
                message_id: format!("relm{i}_{j}"),
                thread_id: format!("rel{i}"),
                seq: j,
                text: strong.clone(),
            });
        }
        for j in 0..40 {
            records.push(MessageRecord {
                message_id: format!("noisem{i}_{j:02}"),
                thread_id: format!("noise{i}"),
                seq: j,
                text: weak.clone(),
            });
        }
    }
    records
}

fn message_json(record: &MessageRecord) -> String {
    serde_json::json!({
        "message_id": record.message_id,
        "thread_id": record.thread_id,
        "seq": record.seq,
        "text": record.text,
    })
    .to_string()
}

/// Paths of one on-disk fixture: corpus, queries, qrels.
pub struct FixturePaths {
    pub corpus: PathBuf,
    pub queries: PathBuf,
    pub qrels: PathBuf,
}

/// Writes the planted-noise fixture ([`noise_records`]) plus its queries
/// (`q{i}` = `topic{i}`) and judgments (`rel{i}` relevant) into `dir`.
pub fn write_noise_fixture(dir: &Path, families: usize) -> FixturePaths {
    let corpus_lines: Vec<String> = noise_records(families).iter().map(message_json).collect();
    let query_lines: Vec<String> =
        (0..families).map(|i| format!("q{i}\ttopic{i}")).collect();
    let qrel_lines: Vec<String> =
        (0..families).map(|i| format!("q{i} 0 rel{i} 1")).collect();
    let paths = FixturePaths {
        corpus: dir.join("corpus.jsonl"),
        queries: dir.join("queries.tsv"),
        qrels: dir.join("qrels.txt"),
    };
    std::fs::write(&paths.corpus, corpus_lines.join("\n") + "\n").unwrap();
    std::fs::write(&paths.queries, query_lines.join("\n") + "\n").unwrap();
    std::fs::write(&paths.qrels, qrel_lines.join("\n") + "\n").unwrap();
    paths
}

/// Writes a three-thread toy corpus with two awkward queries: `q2` is all
/// stopwords and `q3` carries a term absent from the collection.
#[allow(dead_code)] // each test binary compiles this module and uses a subset
pub fn write_small_fixture(dir: &Path) -> FixturePaths {
    let mut corpus_lines = Vec::new();
    for t in 0..3 {
        for s in 0..2 {
            corpus_lines.push(message_json(&MessageRecord {
                message_id: format!("m{t}{s}"),
                thread_id: format!("t{t}"),
                seq: s,
                text: format!("topic{t} discussion of the subject pad pad"),
            }));
        }
    }
    let paths = FixturePaths {
        corpus: dir.join("corpus.jsonl"),
        queries: dir.join("queries.tsv"),
        qrels: dir.join("qrels.txt"),
    };
    std::fs::write(&paths.corpus, corpus_lines.join("\n") + "\n").unwrap();
    std::fs::write(
        &paths.queries,
        "q0\ttopic0 discussion\nq1\ttopic1\nq2\tthe of\nq3\ttopic2 zzzunknown\n",
    )
    .unwrap();
    std::fs::write(&paths.qrels, "q0 0 t0 1\nq1 0 t1 2\nq1 0 t2 0\nq3 0 t2 1\n").unwrap();
    paths
}

/// Runs `index` into `dir/idx` and returns that directory, panicking on a
/// non-zero exit.
pub fn build_index(fixture: &FixturePaths, dir: &Path) -> PathBuf {
    let idx = dir.join("idx");
    let out = threadrank(&[
        "index",
        "--corpus",
        fixture.corpus.to_str().unwrap(),
        "--out-dir",
        idx.to_str().unwrap(),
    ]);
    assert_eq!(out.code, 0, "index failed: {}", out.stderr);
    idx
}
