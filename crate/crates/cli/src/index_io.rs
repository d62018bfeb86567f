//! On-disk index persistence: a single self-describing binary file.
//!
//! Layout: an 8-byte magic string, a `u32` format version, then the index
//! parts — granularity, analyzer configuration (stemming flag and
//! stoplist), the document table, and the document → thread map. All
//! integers are little-endian; strings are a `u32` byte length followed by
//! UTF-8 bytes. Postings and collection statistics are not stored: the
//! loader rebuilds them through the same constructor the corpus builders
//! use, so a loaded index is structurally identical to the one that was
//! saved, bit for bit.
//!
//! The loader rejects files with the wrong magic, reports version
//! mismatches naming both the expected and the found version, and treats
//! truncated or oversized files as corrupt.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};

use threadrank_core::index::{DocumentStats, IndexKind, InvertedIndex};
use threadrank_core::text::Analyzer;

/// Identifies a thread-retrieval index file.
const MAGIC: &[u8; 8] = b"TRKINDEX";
/// Current format version.
const VERSION: u32 = 1;

fn write_u32(out: &mut impl Write, value: u32) -> Result<()> {
    out.write_all(&value.to_le_bytes())?;
    Ok(())
}

fn write_u64(out: &mut impl Write, value: u64) -> Result<()> {
    out.write_all(&value.to_le_bytes())?;
    Ok(())
}

fn write_str(out: &mut impl Write, value: &str) -> Result<()> {
    let len: u32 = value.len().try_into().context("string too long for index format")?;
    write_u32(out, len)?;
    out.write_all(value.as_bytes())?;
    Ok(())
}

fn read_u32(input: &mut impl Read) -> Result<u32> {
    let mut bytes = [0u8; 4];
    input.read_exact(&mut bytes)?;
    Ok(u32::from_le_bytes(bytes))
}

fn read_u64(input: &mut impl Read) -> Result<u64> {
    let mut bytes = [0u8; 8];
    input.read_exact(&mut bytes)?;
    Ok(u64::from_le_bytes(bytes))
}

fn read_str(input: &mut impl Read) -> Result<String> {
    let len = read_u32(input)? as usize;
    let mut bytes = vec![0u8; len];
    input.read_exact(&mut bytes)?;
    String::from_utf8(bytes).context("index file holds invalid UTF-8")
}

/// Saves an index to one binary file, creating or truncating it.
pub fn save_index(index: &InvertedIndex, path: &Path) -> Result<()> {
    let file =
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut out = BufWriter::new(file);
    out.write_all(MAGIC)?;
    write_u32(&mut out, VERSION)?;
    out.write_all(&[match index.kind() {
        IndexKind::MessageLevel => 0u8,
        IndexKind::VirtualDocument => 1u8,
    }])?;
    let analyzer = index.analyzer();
    out.write_all(&[u8::from(analyzer.stems())])?;
    write_u64(&mut out, analyzer.stoplist().len() as u64)?;
    for word in analyzer.stoplist() {
        write_str(&mut out, word)?;
    }
    write_u64(&mut out, index.docs().len() as u64)?;
    for doc in index.docs() {
        write_str(&mut out, &doc.doc_id)?;
        write_u64(&mut out, doc.length)?;
        write_u64(&mut out, doc.term_freqs.len() as u64)?;
        for (term, &tf) in &doc.term_freqs {
            write_str(&mut out, term)?;
            write_u32(&mut out, tf)?;
        }
    }
    write_u64(&mut out, index.doc_to_thread().len() as u64)?;
    for (doc_id, thread_id) in index.doc_to_thread() {
        write_str(&mut out, doc_id)?;
        write_str(&mut out, thread_id)?;
    }
    out.flush().with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Loads an index saved by [`save_index`].
pub fn load_index(path: &Path) -> Result<InvertedIndex> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut input = BufReader::new(file);
    parse_index(&mut input).with_context(|| format!("cannot load index {}", path.display()))
}

fn parse_index(input: &mut impl Read) -> Result<InvertedIndex> {
    let mut magic = [0u8; 8];
    input
        .read_exact(&mut magic)
        .context("file is truncated (while reading the magic header)")?;
    if &magic != MAGIC {
        bail!("not a thread-retrieval index file (bad magic)");
    }
    let version = read_u32(input).context("file is truncated (while reading the version)")?;
    if version != VERSION {
        bail!("unsupported index format version {version} (this build reads version {VERSION})");
    }

    let mut kind_and_stem = [0u8; 2];
    input
        .read_exact(&mut kind_and_stem)
        .context("file is truncated (while reading the index header)")?;
    let kind = match kind_and_stem[0] {
        0 => IndexKind::MessageLevel,
        1 => IndexKind::VirtualDocument,
        other => bail!("unknown index kind tag {other}"),
    };
    let stem = match kind_and_stem[1] {
        0 => false,
        1 => true,
        other => bail!("unknown stemming flag {other}"),
    };

    let body = (|| -> Result<InvertedIndex> {
        let stoplist_len = read_u64(input)?;
        let mut stoplist = std::collections::BTreeSet::new();
        for _ in 0..stoplist_len {
            stoplist.insert(read_str(input)?);
        }

        let doc_count = read_u64(input)?;
        let mut docs = Vec::with_capacity(doc_count.min(1 << 20) as usize);
        for _ in 0..doc_count {
            let doc_id = read_str(input)?;
            let length = read_u64(input)?;
            let term_count = read_u64(input)?;
            let mut term_freqs = BTreeMap::new();
            for _ in 0..term_count {
                let term = read_str(input)?;
                let tf = read_u32(input)?;
                term_freqs.insert(term, tf);
            }
            docs.push(DocumentStats { doc_id, length, term_freqs });
        }

        let map_len = read_u64(input)?;
        let mut doc_to_thread = BTreeMap::new();
        for _ in 0..map_len {
            let doc_id = read_str(input)?;
            let thread_id = read_str(input)?;
            doc_to_thread.insert(doc_id, thread_id);
        }

        let mut trailing = [0u8; 1];
        if input.read(&mut trailing)? != 0 {
            bail!("trailing bytes after the index body");
        }

        let analyzer = Analyzer::index_time(stem, stoplist);
        Ok(InvertedIndex::from_parts(kind, analyzer, docs, doc_to_thread)?)
    })();
    body.map_err(|err| match err.downcast_ref::<std::io::Error>() {
        Some(io) if io.kind() == std::io::ErrorKind::UnexpectedEof => {
            err.context("file is truncated")
        }
        _ => err,
    })
}
