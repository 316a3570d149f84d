//! Text formats: `.dist` distributions, `.augflat` flattenings and
//! `.meta.json` metadata maps.
//!
//! ```text
//! #augdist v1 n=4
//! 1 5.0000000000000000e-1
//! 3 5.0000000000000000e-1
//! ```
//!
//! Fields are tab-separated. Indices are 1-based; omitted indices have probability 0.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::dist::{DistError, Distribution};
use crate::flatten::{FlattenError, Flattening};

const DIST_MAGIC: &str = "#augdist v1";
const FLAT_MAGIC: &str = "#augflat v1";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Flatten(#[from] FlattenError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn parse_err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_header(line: Option<String>, magic: &str) -> Result<usize, FormatError> {
    let line = line.ok_or_else(|| parse_err(1, "missing header"))?;
    let rest = line
        .trim_end()
        .strip_prefix(magic)
        .ok_or_else(|| parse_err(1, format!("expected header `{magic} n=<n>`")))?;
    let n = rest
        .trim()
        .strip_prefix("n=")
        .and_then(|v| v.parse::<usize>().ok())
        .ok_or_else(|| parse_err(1, "malformed `n=<n>` in header"))?;
    if n == 0 {
        return Err(parse_err(1, "domain size must be positive"));
    }
    Ok(n)
}

/// Parses `index<TAB>value` body lines into a dense vector.
fn parse_body<R: BufRead, T, F>(
    lines: std::io::Lines<R>,
    n: usize,
    zero: T,
    parse: F,
) -> Result<Vec<T>, FormatError>
where
    T: Copy,
    F: Fn(&str) -> Option<T>,
{
    let mut values = vec![zero; n];
    let mut seen = vec![false; n];
    for (k, line) in lines.enumerate() {
        let line_no = k + 2;
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        let (idx, val) = line
            .split_once('\t')
            .ok_or_else(|| parse_err(line_no, "expected `<index>\\t<value>`"))?;
        let idx: usize = idx
            .trim()
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad index `{idx}`")))?;
        if idx == 0 || idx > n {
            return Err(parse_err(line_no, format!("index {idx} outside [1, {n}]")));
        }
        if seen[idx - 1] {
            return Err(parse_err(line_no, format!("duplicate index {idx}")));
        }
        seen[idx - 1] = true;
        values[idx - 1] =
            parse(val.trim()).ok_or_else(|| parse_err(line_no, format!("bad value `{val}`")))?;
    }
    Ok(values)
}

pub fn read_dist<R: Read>(reader: R) -> Result<Distribution, FormatError> {
    let mut lines = BufReader::new(reader).lines();
    let n = parse_header(lines.next().transpose()?, DIST_MAGIC)?;
    let probs = parse_body(lines, n, 0.0, |s| s.parse::<f64>().ok())?;
    Ok(Distribution::new(probs)?)
}

pub fn write_dist<W: Write>(p: &Distribution, writer: W) -> Result<(), FormatError> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "{DIST_MAGIC} n={}", p.len())?;
    for (k, &v) in p.probs().iter().enumerate() {
        if v != 0.0 {
            writeln!(w, "{}\t{:.16e}", k + 1, v)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_dist(path: impl AsRef<Path>) -> Result<Distribution, FormatError> {
    read_dist(File::open(path)?)
}

pub fn save_dist(p: &Distribution, path: impl AsRef<Path>) -> Result<(), FormatError> {
    write_dist(p, File::create(path)?)
}

pub fn read_flattening<R: Read>(reader: R) -> Result<Flattening, FormatError> {
    let mut lines = BufReader::new(reader).lines();
    let n = parse_header(lines.next().transpose()?, FLAT_MAGIC)?;
    let buckets = parse_body(lines, n, 0u64, |s| s.parse::<u64>().ok())?;
    Ok(Flattening::from_buckets(buckets)?)
}

/// Every element is listed, including those with a single bucket.
pub fn write_flattening<W: Write>(f: &Flattening, writer: W) -> Result<(), FormatError> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "{FLAT_MAGIC} n={}", f.n())?;
    for (k, m) in f.buckets().iter().enumerate() {
        writeln!(w, "{}\t{}", k + 1, m)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_meta(meta: &BTreeMap<String, f64>, path: impl AsRef<Path>) -> Result<(), FormatError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, meta)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn load_meta(path: impl AsRef<Path>) -> Result<BTreeMap<String, f64>, FormatError> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}
