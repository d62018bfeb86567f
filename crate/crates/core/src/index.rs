//! Inverted indexes over the corpus, at two granularities.
//!
//! Retrieval needs the same corpus indexed two ways:
//!
//! * **message-level** — one document per message; the source of the ranked
//!   message pool that fusion methods aggregate, and
//! * **virtual-document** — one document per thread, formed by concatenating
//!   the thread's messages; the baseline that ranks threads directly.
//!
//! Both carry their own [`CollectionStats`] because the smoothing parameter
//! μ is tuned per collection; the two views share total token mass but have
//! very different document-length distributions.
//!
//! Documents are held sorted by `doc_id`, postings reference documents by
//! dense index (so posting lists are sorted and binary-searchable), and all
//! maps are ordered — iteration order, and therefore every downstream
//! ranking, is deterministic.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::Corpus;
use crate::text::{Analyzer, AnalyzerMode};

/// Which granularity an index was built at.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndexKind {
    /// One document per message.
    MessageLevel,
    /// One document per thread (concatenated message texts).
    VirtualDocument,
}

impl fmt::Display for IndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IndexKind::MessageLevel => "message-level",
            IndexKind::VirtualDocument => "virtual-document",
        })
    }
}

/// Per-document statistics: the `n(q,M)` term counts and length `|M|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DocumentStats {
    /// Message id, or thread id for virtual documents.
    pub doc_id: String,
    /// Token count after index-time analysis; always the sum of
    /// `term_freqs` values.
    pub length: u64,
    /// Term → in-document frequency.
    pub term_freqs: BTreeMap<String, u32>,
}

impl DocumentStats {
    /// Builds stats for one document from its analyzed terms.
    pub fn from_terms(doc_id: String, terms: &[String]) -> Self {
        let mut term_freqs: BTreeMap<String, u32> = BTreeMap::new();
        for term in terms {
            *term_freqs.entry(term.clone()).or_insert(0) += 1;
        }
        Self { doc_id, length: terms.len() as u64, term_freqs }
    }

    /// `n(term, doc)`: how often the term occurs in this document.
    pub fn term_frequency(&self, term: &str) -> u32 {
        self.term_freqs.get(term).copied().unwrap_or(0)
    }
}

/// Collection-wide statistics: the background language model.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CollectionStats {
    /// Total analyzed tokens across all documents; positive in any built
    /// index.
    pub total_tokens: u64,
    /// Number of documents.
    pub doc_count: u64,
    /// Term → corpus-wide frequency.
    pub coll_term_freqs: BTreeMap<String, u64>,
}

impl CollectionStats {
    /// Corpus-wide frequency of a term (0 when unseen).
    pub fn term_frequency(&self, term: &str) -> u64 {
        self.coll_term_freqs.get(term).copied().unwrap_or(0)
    }

    /// The collection language model `P(term | C)`: corpus frequency over
    /// total tokens. Zero for unseen terms.
    pub fn probability(&self, term: &str) -> f64 {
        debug_assert!(self.total_tokens > 0, "collection statistics are empty");
        self.term_frequency(term) as f64 / self.total_tokens as f64
    }

    /// Number of distinct terms.
    pub fn vocab_size(&self) -> usize {
        self.coll_term_freqs.len()
    }
}

/// One postings entry: a document (by dense index into the sorted document
/// table) and the term's frequency there.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Posting {
    /// Index into [`InvertedIndex::docs`]; ascending within a posting list,
    /// which also means ascending `doc_id`.
    pub doc: u32,
    /// Term frequency in that document.
    pub tf: u32,
}

/// Why an index could not be built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IndexError {
    /// The corpus holds no documents at this granularity.
    EmptyCorpus,
    /// Analysis produced zero tokens overall, leaving `P(q|C)` undefined.
    NoTokens,
    /// Two documents share an id.
    DuplicateDocId {
        /// The repeated id.
        doc_id: String,
    },
    /// A document has no thread mapping.
    UnmappedDocument {
        /// The unmapped document.
        doc_id: String,
    },
    /// The analyzer was not in index-time mode.
    WrongAnalyzerMode,
}

impl fmt::Display for IndexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexError::EmptyCorpus => f.write_str("cannot index an empty corpus"),
            IndexError::NoTokens => {
                f.write_str("analysis produced no tokens; collection model is undefined")
            }
            IndexError::DuplicateDocId { doc_id } => {
                write!(f, "duplicate document id {doc_id:?}")
            }
            IndexError::UnmappedDocument { doc_id } => {
                write!(f, "document {doc_id:?} has no thread mapping")
            }
            IndexError::WrongAnalyzerMode => {
                f.write_str("indexes must be built with an index-time analyzer")
            }
        }
    }
}

impl core::error::Error for IndexError {}

/// An immutable inverted index over one document collection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvertedIndex {
    kind: IndexKind,
    analyzer: Analyzer,
    /// Ascending by `doc_id`; postings reference positions in this table.
    docs: Vec<DocumentStats>,
    doc_to_thread: BTreeMap<String, String>,
    postings: BTreeMap<String, Vec<Posting>>,
    collection: CollectionStats,
}

impl InvertedIndex {
    /// Builds a message-level index: one document per corpus message.
    pub fn build_message_level(corpus: &Corpus, analyzer: &Analyzer) -> Result<Self, IndexError> {
        let docs = corpus
            .messages()
            .map(|m| DocumentStats::from_terms(m.message_id.clone(), &analyzer.analyze(&m.text)))
            .collect();
        let doc_to_thread = corpus
            .messages()
            .map(|m| (m.message_id.clone(), m.thread_id.clone()))
            .collect();
        Self::from_parts(IndexKind::MessageLevel, analyzer.clone(), docs, doc_to_thread)
    }

    /// Builds a virtual-document index: one document per thread, whose term
    /// frequencies are the multiset union of its messages' frequencies
    /// (equivalently: the thread's messages concatenated in `seq` order).
    pub fn build_virtual_documents(
        corpus: &Corpus,
        analyzer: &Analyzer,
    ) -> Result<Self, IndexError> {
        let mut docs = Vec::with_capacity(corpus.thread_count());
        for thread in corpus.threads() {
            let mut term_freqs: BTreeMap<String, u32> = BTreeMap::new();
            let mut length = 0u64;
            for message_id in &thread.message_ids {
                let message = corpus
                    .message(message_id)
                    .expect("thread membership is validated at ingestion");
                for term in analyzer.analyze(&message.text) {
                    *term_freqs.entry(term).or_insert(0) += 1;
                    length += 1;
                }
            }
            docs.push(DocumentStats { doc_id: thread.thread_id.clone(), length, term_freqs });
        }
        let doc_to_thread = corpus
            .threads()
            .map(|t| (t.thread_id.clone(), t.thread_id.clone()))
            .collect();
        Self::from_parts(IndexKind::VirtualDocument, analyzer.clone(), docs, doc_to_thread)
    }

    /// Assembles an index from prepared documents, deriving postings and
    /// collection statistics. This is the single construction path: the
    /// corpus builders above and the on-disk loader both come through here,
    /// so the derived structures can never disagree with the documents.
    pub fn from_parts(
        kind: IndexKind,
        analyzer: Analyzer,
        mut docs: Vec<DocumentStats>,
        doc_to_thread: BTreeMap<String, String>,
    ) -> Result<Self, IndexError> {
        if analyzer.mode() != AnalyzerMode::IndexTime {
            return Err(IndexError::WrongAnalyzerMode);
        }
        if docs.is_empty() {
            return Err(IndexError::EmptyCorpus);
        }
        docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
        for pair in docs.windows(2) {
            if pair[0].doc_id == pair[1].doc_id {
                return Err(IndexError::DuplicateDocId { doc_id: pair[0].doc_id.clone() });
            }
        }

        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        let mut coll_term_freqs: BTreeMap<String, u64> = BTreeMap::new();
        let mut total_tokens = 0u64;
        for (position, doc) in docs.iter().enumerate() {
            if !doc_to_thread.contains_key(&doc.doc_id) {
                return Err(IndexError::UnmappedDocument { doc_id: doc.doc_id.clone() });
            }
            debug_assert_eq!(
                doc.length,
                doc.term_freqs.values().map(|&tf| u64::from(tf)).sum::<u64>(),
                "document length must equal the sum of its term frequencies"
            );
            total_tokens += doc.length;
            for (term, &tf) in &doc.term_freqs {
                postings
                    .entry(term.clone())
                    .or_default()
                    .push(Posting { doc: position as u32, tf });
                *coll_term_freqs.entry(term.clone()).or_insert(0) += u64::from(tf);
            }
        }
        if total_tokens == 0 {
            return Err(IndexError::NoTokens);
        }

        let collection = CollectionStats {
            total_tokens,
            doc_count: docs.len() as u64,
            coll_term_freqs,
        };
        Ok(Self { kind, analyzer, docs, doc_to_thread, postings, collection })
    }

    /// This index's granularity.
    pub fn kind(&self) -> IndexKind {
        self.kind
    }

    /// The index-time analyzer the documents were built with. Query analysis
    /// must use the same configuration; see [`InvertedIndex::query_analyzer`].
    pub fn analyzer(&self) -> &Analyzer {
        &self.analyzer
    }

    /// The matching query-side analyzer: same stemming and stoplist, but in
    /// query-time mode so stoplisted terms are dropped.
    pub fn query_analyzer(&self) -> Analyzer {
        self.analyzer.with_mode(AnalyzerMode::QueryTime)
    }

    /// Collection-wide statistics.
    pub fn collection(&self) -> &CollectionStats {
        &self.collection
    }

    /// Number of documents.
    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    /// All documents, ascending by `doc_id`.
    pub fn docs(&self) -> &[DocumentStats] {
        &self.docs
    }

    /// The document at a postings' dense index.
    pub fn doc(&self, position: u32) -> &DocumentStats {
        &self.docs[position as usize]
    }

    /// Locates a document by id.
    pub fn doc_position(&self, doc_id: &str) -> Option<u32> {
        self.docs
            .binary_search_by(|d| d.doc_id.as_str().cmp(doc_id))
            .ok()
            .map(|p| p as u32)
    }

    /// The thread a document belongs to (identity for virtual documents).
    pub fn thread_of(&self, doc_id: &str) -> Option<&str> {
        self.doc_to_thread.get(doc_id).map(String::as_str)
    }

    /// The full document → thread mapping.
    pub fn doc_to_thread(&self) -> &BTreeMap<String, String> {
        &self.doc_to_thread
    }

    /// The posting list for a term; empty when the term is unseen.
    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map_or(&[], Vec::as_slice)
    }

    /// All posting lists, ascending by term.
    pub fn all_postings(&self) -> &BTreeMap<String, Vec<Posting>> {
        &self.postings
    }
}
