//! Text analysis: tokenization, stopword handling, and stemming.
//!
//! The same analyzer configuration is used for documents and queries, with
//! one asymmetry: stopwords are removed from **queries only**. Documents are
//! indexed in full so that document lengths and collection statistics reflect
//! the text as written, while stoplisted query terms are dropped before they
//! can dominate a short query. Stoplist matching looks at the surface token,
//! before stemming, so the list is written in plain English words.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

pub mod porter;

/// Splits text into maximal runs of Unicode letters and digits, lowercased.
///
/// Punctuation, whitespace, and symbols separate tokens and are discarded;
/// `"don't"` therefore becomes `["don", "t"]`. Order and multiplicity follow
/// the input text.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            current.extend(ch.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(core::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Parses a stoplist: one word per line, `#` lines are comments, blank lines
/// and surrounding whitespace are ignored. Words are lowercased so the list
/// can match the (already lowercased) tokens it is held against.
pub fn parse_stoplist(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|line| !line.is_empty() && !line.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

/// Whether an [`Analyzer`] is preparing documents or queries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnalyzerMode {
    /// Document side: keep stopwords so index statistics cover the full text.
    IndexTime,
    /// Query side: drop stoplisted surface tokens before stemming.
    QueryTime,
}

/// A tokenize → stoplist → stem pipeline with a fixed configuration.
///
/// Index-time and query-time analyzers for the same collection must share
/// `stem` and `stoplist`; only the mode differs. [`Analyzer::with_mode`]
/// exists to derive one side from the other.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Analyzer {
    mode: AnalyzerMode,
    stem: bool,
    stoplist: BTreeSet<String>,
}

impl Analyzer {
    /// An analyzer with explicit mode, stemming switch, and stoplist.
    pub fn new(mode: AnalyzerMode, stem: bool, stoplist: BTreeSet<String>) -> Self {
        Self { mode, stem, stoplist }
    }

    /// Document-side analyzer.
    pub fn index_time(stem: bool, stoplist: BTreeSet<String>) -> Self {
        Self::new(AnalyzerMode::IndexTime, stem, stoplist)
    }

    /// Query-side analyzer.
    pub fn query_time(stem: bool, stoplist: BTreeSet<String>) -> Self {
        Self::new(AnalyzerMode::QueryTime, stem, stoplist)
    }

    /// This analyzer's mode.
    pub fn mode(&self) -> AnalyzerMode {
        self.mode
    }

    /// Whether terms are stemmed.
    pub fn stems(&self) -> bool {
        self.stem
    }

    /// The stoplist (only consulted in query-time mode).
    pub fn stoplist(&self) -> &BTreeSet<String> {
        &self.stoplist
    }

    /// The same configuration under a different mode.
    pub fn with_mode(&self, mode: AnalyzerMode) -> Self {
        Self { mode, ..self.clone() }
    }

    /// Runs the pipeline: tokenize, drop stoplisted tokens (query-time only),
    /// then stem. Stoplist matching happens before stemming, on the surface
    /// token, so stemming can never create or rescue a stopword match.
    pub fn analyze(&self, text: &str) -> Vec<String> {
        let mut terms = Vec::new();
        for token in tokenize(text) {
            if self.mode == AnalyzerMode::QueryTime && self.stoplist.contains(&token) {
                continue;
            }
            let term = if self.stem { porter::stem(&token) } else { token };
            // The stemmer can reduce a token to nothing (the bare word "s");
            // an empty term can be neither indexed nor queried.
            if !term.is_empty() {
                terms.push(term);
            }
        }
        terms
    }
}
