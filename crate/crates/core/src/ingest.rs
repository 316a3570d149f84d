//! Empirical distributions from chunked `key<TAB>count` data.
//!
//! A [`KeyMap`] assigns each distinct key a domain index in first-seen
//! order, so distributions built from different chunks live on one domain
//! and can be compared directly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use indexmap::IndexSet;
use thiserror::Error;

use crate::dist::{DistError, Distribution};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("{keys} keys do not fit in a domain of size {final_n}")]
    DomainOverflow { keys: usize, final_n: usize },
    #[error("chunk contains no samples")]
    EmptyBatch,
    #[error("duplicate key `{key}` on line {line}")]
    DuplicateKey { key: String, line: usize },
    #[error("chunk index {index} out of range ({available} chunks)")]
    NoSuchChunk { index: usize, available: usize },
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Bijection between keys and `1..=len()`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KeyMap {
    keys: IndexSet<String>,
}

impl KeyMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// 1-based index of `key`.
    pub fn get(&self, key: &str) -> Option<usize> {
        self.keys.get_index_of(key).map(|i| i + 1)
    }

    /// Index of `key`, appending it if unseen.
    pub fn insert(&mut self, key: &str) -> usize {
        match self.keys.get_index_of(key) {
            Some(i) => i + 1,
            None => {
                self.keys.insert(key.to_owned());
                self.keys.len()
            }
        }
    }

    /// Keys in index order.
    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.keys.iter().map(String::as_str)
    }
}

/// Parses `key<TAB>count` records. Blank lines are skipped.
pub fn parse_chunk<I, S>(lines: I) -> Result<Vec<(String, u64)>, IngestError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut records = Vec::new();
    for (k, line) in lines.into_iter().enumerate() {
        let line = line.as_ref().trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| IngestError::MalformedLine {
            line: k + 1,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(malformed(format!(
                "expected 2 tab-separated fields, found {}",
                fields.len()
            )));
        }
        let count = fields[1].trim().parse::<u64>().map_err(|_| {
            malformed(format!(
                "count `{}` is not a non-negative integer",
                fields[1]
            ))
        })?;
        records.push((fields[0].to_owned(), count));
    }
    Ok(records)
}

/// Registers the chunk's keys in `keymap` and returns its empirical
/// distribution over `[final_n]`. Repeated keys within a chunk are summed.
///
/// The keymap is left untouched if the chunk is rejected.
pub fn ingest_chunk<I, S>(
    lines: I,
    keymap: &mut KeyMap,
    final_n: usize,
) -> Result<Distribution, IngestError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let records = parse_chunk(lines)?;
    let mut new_keys = IndexSet::new();
    for (key, _) in &records {
        if keymap.get(key).is_none() {
            new_keys.insert(key.as_str());
        }
    }
    let keys = keymap.len() + new_keys.len();
    if keys > final_n {
        return Err(IngestError::DomainOverflow { keys, final_n });
    }
    let total: u128 = records.iter().map(|(_, c)| *c as u128).sum();
    if total == 0 {
        return Err(IngestError::EmptyBatch);
    }

    let mut counts = vec![0u128; final_n];
    for (key, count) in &records {
        counts[keymap.insert(key) - 1] += *count as u128;
    }
    let total = total as f64;
    Ok(Distribution::new(
        counts.iter().map(|&c| c as f64 / total).collect(),
    )?)
}

pub fn write_keymap<W: Write>(keymap: &KeyMap, writer: W) -> Result<(), IngestError> {
    let mut w = BufWriter::new(writer);
    for (i, key) in keymap.keys().enumerate() {
        writeln!(w, "{key}\t{}", i + 1)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_keymap<R: Read>(reader: R) -> Result<KeyMap, IngestError> {
    let mut keymap = KeyMap::new();
    for (k, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let line_no = k + 1;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let (key, idx) = line
            .rsplit_once('\t')
            .ok_or_else(|| IngestError::MalformedLine {
                line: line_no,
                message: "expected `key<TAB>index`".into(),
            })?;
        let idx: usize = idx.trim().parse().map_err(|_| IngestError::MalformedLine {
            line: line_no,
            message: format!("bad index `{idx}`"),
        })?;
        if keymap.get(key).is_some() {
            return Err(IngestError::DuplicateKey {
                key: key.to_owned(),
                line: line_no,
            });
        }
        if idx != keymap.len() + 1 {
            return Err(IngestError::MalformedLine {
                line: line_no,
                message: format!("index {idx} breaks the contiguous numbering"),
            });
        }
        keymap.insert(key);
    }
    Ok(keymap)
}

pub fn save_keymap(keymap: &KeyMap, path: impl AsRef<Path>) -> Result<(), IngestError> {
    write_keymap(keymap, File::create(path)?)
}

pub fn load_keymap(path: impl AsRef<Path>) -> Result<KeyMap, IngestError> {
    read_keymap(File::open(path)?)
}

/// Regular files of `dir`, sorted by file name. Chunk `k` is the `k`-th.
pub fn list_chunks(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>, IngestError> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        if entry.file_type()?.is_file() {
            files.push(entry.path());
        }
    }
    files.sort();
    Ok(files)
}

fn read_lines(path: &Path) -> Result<Vec<String>, IngestError> {
    Ok(BufReader::new(File::open(path)?)
        .lines()
        .collect::<Result<_, _>>()?)
}

/// Ingests chunk `index` of `dir`. All chunks are first scanned so that
/// every key of the directory gets an index; `final_n` defaults to the
/// resulting keymap size.
pub fn ingest_directory(
    dir: impl AsRef<Path>,
    index: usize,
    keymap: &mut KeyMap,
    final_n: Option<usize>,
) -> Result<Distribution, IngestError> {
    let chunks = list_chunks(dir)?;
    if index >= chunks.len() {
        return Err(IngestError::NoSuchChunk {
            index,
            available: chunks.len(),
        });
    }
    let mut scanned = keymap.clone();
    for path in &chunks {
        for (key, _) in parse_chunk(read_lines(path)?)? {
            scanned.insert(&key);
        }
    }
    let final_n = final_n.unwrap_or(scanned.len());
    if scanned.len() > final_n {
        return Err(IngestError::DomainOverflow {
            keys: scanned.len(),
            final_n,
        });
    }
    let dist = ingest_chunk(read_lines(&chunks[index])?, &mut scanned, final_n)?;
    *keymap = scanned;
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_keys_padded_domain() {
        let mut km = KeyMap::new();
        let p = ingest_chunk(["a\t1", "b\t1"], &mut km, 4).unwrap();
        assert_eq!(p.probs(), &[0.5, 0.5, 0.0, 0.0]);
        assert_eq!(km.get("a"), Some(1));
        assert_eq!(km.get("b"), Some(2));
    }

    #[test]
    fn empty_chunk() {
        let mut km = KeyMap::new();
        let none: [&str; 0] = [];
        assert!(matches!(
            ingest_chunk(none, &mut km, 3),
            Err(IngestError::EmptyBatch)
        ));
        assert!(matches!(
            ingest_chunk(["a\t0"], &mut km, 3),
            Err(IngestError::EmptyBatch)
        ));
    }

    #[test]
    fn shared_keys_keep_their_index() {
        let mut km = KeyMap::new();
        let p = ingest_chunk(["x\t3", "a\t1"], &mut km, 3).unwrap();
        let q = ingest_chunk(["b\t2", "a\t2"], &mut km, 3).unwrap();
        assert_eq!(km.get("a"), Some(2));
        assert_eq!(p.probs(), &[0.75, 0.25, 0.0]);
        assert_eq!(q.probs(), &[0.0, 0.5, 0.5]);
    }

    #[test]
    fn duplicate_lines_are_summed() {
        let mut km = KeyMap::new();
        let p = ingest_chunk(["a\t1", "b\t2", "a\t1"], &mut km, 2).unwrap();
        assert_eq!(p.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn malformed_lines() {
        let mut km = KeyMap::new();
        for bad in ["a", "a\t1\t2", "a\t-1", "a\t1.5", "a\tx"] {
            assert!(
                matches!(
                    ingest_chunk(["ok\t1", bad], &mut km, 10),
                    Err(IngestError::MalformedLine { line: 2, .. })
                ),
                "{bad:?}"
            );
        }
        assert!(km.is_empty());
    }

    #[test]
    fn overflow_leaves_keymap_unchanged() {
        let mut km = KeyMap::new();
        ingest_chunk(["a\t1"], &mut km, 2).unwrap();
        assert!(matches!(
            ingest_chunk(["b\t1", "c\t1"], &mut km, 2),
            Err(IngestError::DomainOverflow {
                keys: 3,
                final_n: 2
            })
        ));
        assert_eq!(km.len(), 1);
    }

    #[test]
    fn keymap_round_trip() {
        let mut km = KeyMap::new();
        for k in ["10.0.0.1", "10.0.0.2", "key with spaces"] {
            km.insert(k);
        }
        let mut buf = Vec::new();
        write_keymap(&km, &mut buf).unwrap();
        assert_eq!(read_keymap(buf.as_slice()).unwrap(), km);
        assert_eq!(read_keymap("".as_bytes()).unwrap(), KeyMap::new());
    }

    #[test]
    fn keymap_load_errors() {
        assert!(matches!(
            read_keymap("a\t1\na\t2\n".as_bytes()),
            Err(IngestError::DuplicateKey { line: 2, .. })
        ));
        assert!(matches!(
            read_keymap("a\t1\nb\t3\n".as_bytes()),
            Err(IngestError::MalformedLine { line: 2, .. })
        ));
    }

    #[test]
    fn directory_ingest_scans_all_chunks() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("00.tsv"), "a\t1\nb\t3\n").unwrap();
        std::fs::write(dir.path().join("01.tsv"), "c\t2\na\t2\n").unwrap();
        let mut km = KeyMap::new();
        let p = ingest_directory(dir.path(), 0, &mut km, None).unwrap();
        assert_eq!(km.len(), 3);
        assert_eq!(p.probs(), &[0.25, 0.75, 0.0]);
        let q = ingest_directory(dir.path(), 1, &mut km, Some(5)).unwrap();
        assert_eq!(q.probs(), &[0.5, 0.0, 0.5, 0.0, 0.0]);
        assert!(matches!(
            ingest_directory(dir.path(), 2, &mut km, None),
            Err(IngestError::NoSuchChunk { .. })
        ));
    }
}
