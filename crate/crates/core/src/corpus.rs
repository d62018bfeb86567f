//! Corpus ingestion: messages grouped into threads, queries, and relevance
//! judgments.
//!
//! A corpus is immutable once built. [`Corpus::from_records`] validates the
//! raw message records (unique ids, gap-free `seq` numbering per thread) and
//! fixes the canonical orders used everywhere downstream: messages ascend by
//! `message_id`, threads by `thread_id`, and a thread's members by `seq`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// One forum message, the atomic unit of text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessageRecord {
    /// Unique id across the whole corpus.
    pub message_id: String,
    /// The thread this message belongs to.
    pub thread_id: String,
    /// Position within the thread: 0 for the opening message, then 1, 2, …
    /// with no gaps or duplicates.
    pub seq: u32,
    /// Raw message text.
    pub text: String,
}

/// One thread: an ordered sequence of messages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThreadRecord {
    /// Unique thread id.
    pub thread_id: String,
    /// Member message ids, ordered by `seq`.
    pub message_ids: Vec<String>,
}

/// One retrieval query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryRecord {
    /// Unique query id.
    pub query_id: String,
    /// Raw query text.
    pub text: String,
}

/// One relevance judgment: how relevant a thread is to a query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QrelRecord {
    /// The judged query.
    pub query_id: String,
    /// The judged thread.
    pub thread_id: String,
    /// Graded relevance: 0 = not relevant, 1 = relevant, 2 = highly relevant.
    pub level: u8,
}

/// Why a set of message records does not form a valid corpus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CorpusError {
    /// Two records share a `message_id`.
    DuplicateMessageId {
        /// The repeated id.
        message_id: String,
    },
    /// Two messages in one thread share a `seq` value.
    DuplicateSeq {
        /// The offending thread.
        thread_id: String,
        /// The repeated seq value.
        seq: u32,
    },
    /// A thread's `seq` values are not exactly 0..n.
    SeqGap {
        /// The offending thread.
        thread_id: String,
        /// The seq value that should have appeared.
        expected: u32,
        /// The seq value found instead.
        found: u32,
    },
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusError::DuplicateMessageId { message_id } => {
                write!(f, "duplicate message id {message_id:?}")
            }
            CorpusError::DuplicateSeq { thread_id, seq } => {
                write!(f, "thread {thread_id:?} has two messages with seq {seq}")
            }
            CorpusError::SeqGap { thread_id, expected, found } => {
                write!(
                    f,
                    "thread {thread_id:?} has a seq gap: expected {expected}, found {found}"
                )
            }
        }
    }
}

impl core::error::Error for CorpusError {}

/// Headline counts for a corpus.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CorpusSummary {
    /// Number of threads.
    pub thread_count: usize,
    /// Number of messages.
    pub message_count: usize,
    /// Number of indexed tokens. Zero until an index is built; token counts
    /// are a property of the analyzer, not the raw corpus.
    pub token_count: u64,
}

/// A validated, immutable collection of threads and their messages.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Corpus {
    messages: BTreeMap<String, MessageRecord>,
    threads: BTreeMap<String, ThreadRecord>,
}

impl Corpus {
    /// Builds a corpus from raw message records, in any input order.
    ///
    /// Validates that message ids are unique and that each thread's `seq`
    /// values form exactly `0..n`. An empty record set is a valid (empty)
    /// corpus.
    pub fn from_records(
        records: impl IntoIterator<Item = MessageRecord>,
    ) -> Result<Self, CorpusError> {
        let mut messages: BTreeMap<String, MessageRecord> = BTreeMap::new();
        let mut members: BTreeMap<String, Vec<(u32, String)>> = BTreeMap::new();
        for record in records {
            if messages.contains_key(&record.message_id) {
                return Err(CorpusError::DuplicateMessageId {
                    message_id: record.message_id,
                });
            }
            members
                .entry(record.thread_id.clone())
                .or_default()
                .push((record.seq, record.message_id.clone()));
            messages.insert(record.message_id.clone(), record);
        }

        let mut threads = BTreeMap::new();
        for (thread_id, mut seqs) in members {
            seqs.sort_unstable();
            for (position, (seq, _)) in seqs.iter().enumerate() {
                let expected = position as u32;
                if position > 0 && *seq == seqs[position - 1].0 {
                    return Err(CorpusError::DuplicateSeq { thread_id, seq: *seq });
                }
                if *seq != expected {
                    return Err(CorpusError::SeqGap { thread_id, expected, found: *seq });
                }
            }
            let message_ids = seqs.into_iter().map(|(_, id)| id).collect();
            threads.insert(thread_id.clone(), ThreadRecord { thread_id, message_ids });
        }

        Ok(Self { messages, threads })
    }

    /// Headline counts (token count is zero here; see [`CorpusSummary`]).
    pub fn summary(&self) -> CorpusSummary {
        CorpusSummary {
            thread_count: self.threads.len(),
            message_count: self.messages.len(),
            token_count: 0,
        }
    }

    /// Number of messages.
    pub fn message_count(&self) -> usize {
        self.messages.len()
    }

    /// Number of threads.
    pub fn thread_count(&self) -> usize {
        self.threads.len()
    }

    /// True when the corpus holds no messages.
    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    /// Looks up one message.
    pub fn message(&self, message_id: &str) -> Option<&MessageRecord> {
        self.messages.get(message_id)
    }

    /// Looks up one thread.
    pub fn thread(&self, thread_id: &str) -> Option<&ThreadRecord> {
        self.threads.get(thread_id)
    }

    /// All messages, ascending by `message_id`.
    pub fn messages(&self) -> impl Iterator<Item = &MessageRecord> {
        self.messages.values()
    }

    /// All threads, ascending by `thread_id`.
    pub fn threads(&self) -> impl Iterator<Item = &ThreadRecord> {
        self.threads.values()
    }
}

/// Why relevance judgments were rejected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QrelError {
    /// The same (query, thread) pair was judged twice.
    DuplicateJudgment {
        /// The judged query.
        query_id: String,
        /// The judged thread.
        thread_id: String,
    },
    /// A relevance level outside 0, 1, 2.
    InvalidLevel {
        /// The out-of-range level.
        level: u8,
    },
}

impl fmt::Display for QrelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QrelError::DuplicateJudgment { query_id, thread_id } => {
                write!(f, "duplicate judgment for query {query_id:?}, thread {thread_id:?}")
            }
            QrelError::InvalidLevel { level } => {
                write!(f, "relevance level {level} is out of range (expected 0, 1, or 2)")
            }
        }
    }
}

impl core::error::Error for QrelError {}

/// A set of graded relevance judgments, keyed by query and thread.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QrelSet {
    judgments: BTreeMap<String, BTreeMap<String, u8>>,
}

impl QrelSet {
    /// An empty judgment set.
    pub fn new() -> Self {
        Self::default()
    }

    /// Collects records, rejecting duplicates and out-of-range levels.
    pub fn from_records(
        records: impl IntoIterator<Item = QrelRecord>,
    ) -> Result<Self, QrelError> {
        let mut set = Self::new();
        for record in records {
            set.insert(record)?;
        }
        Ok(set)
    }

    /// Adds one judgment.
    pub fn insert(&mut self, record: QrelRecord) -> Result<(), QrelError> {
        if record.level > 2 {
            return Err(QrelError::InvalidLevel { level: record.level });
        }
        let per_query = self.judgments.entry(record.query_id.clone()).or_default();
        if per_query.contains_key(&record.thread_id) {
            return Err(QrelError::DuplicateJudgment {
                query_id: record.query_id,
                thread_id: record.thread_id,
            });
        }
        per_query.insert(record.thread_id, record.level);
        Ok(())
    }

    /// The graded level for a (query, thread) pair, if judged.
    pub fn level(&self, query_id: &str, thread_id: &str) -> Option<u8> {
        self.judgments.get(query_id)?.get(thread_id).copied()
    }

    /// True when the pair is judged relevant (level ≥ 1). Unjudged pairs are
    /// not relevant.
    pub fn is_relevant(&self, query_id: &str, thread_id: &str) -> bool {
        self.level(query_id, thread_id).is_some_and(|l| l >= 1)
    }

    /// Number of relevant (level ≥ 1) threads for a query.
    pub fn relevant_count(&self, query_id: &str) -> usize {
        self.judgments
            .get(query_id)
            .map_or(0, |per_query| per_query.values().filter(|&&l| l >= 1).count())
    }

    /// Queries with at least one judgment, ascending.
    pub fn judged_queries(&self) -> impl Iterator<Item = &str> {
        self.judgments.keys().map(String::as_str)
    }

    /// All judgments for one query (thread → level), if any.
    pub fn judgments_for(&self, query_id: &str) -> Option<&BTreeMap<String, u8>> {
        self.judgments.get(query_id)
    }

    /// Collapses grades to binary relevance: the set of (query, thread)
    /// pairs with level ≥ 1.
    pub fn binarize(&self) -> BTreeSet<(String, String)> {
        self.judgments
            .iter()
            .flat_map(|(query_id, per_query)| {
                per_query
                    .iter()
                    .filter(|(_, &level)| level >= 1)
                    .map(move |(thread_id, _)| (query_id.clone(), thread_id.clone()))
            })
            .collect()
    }

    /// All judgments as records, ascending by (query, thread).
    pub fn records(&self) -> impl Iterator<Item = QrelRecord> + '_ {
        self.judgments.iter().flat_map(|(query_id, per_query)| {
            per_query.iter().map(move |(thread_id, &level)| QrelRecord {
                query_id: query_id.clone(),
                thread_id: thread_id.clone(),
                level,
            })
        })
    }

    /// Total number of judgments.
    pub fn len(&self) -> usize {
        self.judgments.values().map(BTreeMap::len).sum()
    }

    /// True when no judgments are present.
    pub fn is_empty(&self) -> bool {
        self.judgments.is_empty()
    }
}
