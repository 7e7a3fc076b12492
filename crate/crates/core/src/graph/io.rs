//! Graph and ground-truth file formats.
//!
//! * Text: a header line `n m`, then one `u v` line per edge with `u < v`, in
//!   lexicographic order.
//! * Binary: the magic `SGRB`, `n` as a little-endian `u64`, then the strict
//!   upper triangle (pairs `(0,1), (0,2), …, (n-2,n-1)`) packed LSB-first into
//!   bytes.
//! * Truth: JSON with the generation parameters and the planted cliques. It
//!   is kept apart from the graph so that recovery code only ever sees the
//!   public file.

use std::io::{BufRead, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Graph, PlantedCoverInstance, PlantedParams};
use crate::error::{Error, Result};

pub const BINARY_MAGIC: &[u8; 4] = b"SGRB";

pub fn write_text<W: Write>(g: &Graph, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{} {}", g.n(), g.edge_count())?;
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    out.flush()
}

pub fn read_text<R: BufRead>(input: R, path: &Path) -> Result<Graph> {
    let mut lines = input.lines().enumerate();
    let parse_pair = |line: &str, lineno: usize| -> Result<(usize, usize)> {
        let mut it = line.split_whitespace().map(str::parse::<usize>);
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
            _ => Err(Error::format(
                path,
                format!("line {}: expected two integers", lineno + 1),
            )),
        }
    };
    let (n, m) = loop {
        match lines.next() {
            None => return Err(Error::format(path, "missing `n m` header")),
            Some((i, line)) => {
                let line = line.map_err(|e| Error::io(path, e))?;
                if !line.trim().is_empty() {
                    break parse_pair(&line, i)?;
                }
            }
        }
    };
    let mut g = Graph::empty(n);
    let mut prev: Option<(usize, usize)> = None;
    let mut count = 0usize;
    for (i, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let (u, v) = parse_pair(&line, i)?;
        if u >= v || v >= n {
            return Err(Error::format(
                path,
                format!("line {}: need u < v < n", i + 1),
            ));
        }
        if prev.is_some_and(|p| p >= (u, v)) {
            return Err(Error::format(
                path,
                format!("line {}: edges not sorted", i + 1),
            ));
        }
        prev = Some((u, v));
        g.add_edge(u, v);
        count += 1;
    }
    if count != m {
        return Err(Error::format(
            path,
            format!("header says {m} edges, found {count}"),
        ));
    }
    Ok(g)
}

pub fn write_binary<W: Write>(g: &Graph, mut out: W) -> std::io::Result<()> {
    out.write_all(BINARY_MAGIC)?;
    out.write_all(&(g.n() as u64).to_le_bytes())?;
    let mut byte = 0u8;
    let mut filled = 0;
    let mut buf = Vec::with_capacity(1 << 16);
    for u in 0..g.n() {
        for v in u + 1..g.n() {
            if g.has_edge(u, v) {
                byte |= 1 << filled;
            }
            filled += 1;
            if filled == 8 {
                buf.push(byte);
                byte = 0;
                filled = 0;
                if buf.len() == buf.capacity() {
                    out.write_all(&buf)?;
                    buf.clear();
                }
            }
        }
    }
    if filled > 0 {
        buf.push(byte);
    }
    out.write_all(&buf)?;
    out.flush()
}

pub fn read_binary<R: Read>(mut input: R, path: &Path) -> Result<Graph> {
    let mut header = [0u8; 12];
    input
        .read_exact(&mut header)
        .map_err(|_| Error::format(path, "truncated header"))?;
    if &header[..4] != BINARY_MAGIC {
        return Err(Error::format(path, "bad magic bytes"));
    }
    let n = u64::from_le_bytes(header[4..].try_into().unwrap()) as usize;
    let pairs = n * n.saturating_sub(1) / 2;
    let mut body = Vec::new();
    input
        .read_to_end(&mut body)
        .map_err(|e| Error::io(path, e))?;
    if body.len() != pairs.div_ceil(8) {
        return Err(Error::format(
            path,
            format!(
                "expected {} payload bytes, found {}",
                pairs.div_ceil(8),
                body.len()
            ),
        ));
    }
    let mut g = Graph::empty(n);
    let mut idx = 0usize;
    for u in 0..n {
        for v in u + 1..n {
            if body[idx / 8] >> (idx % 8) & 1 == 1 {
                g.add_edge(u, v);
            }
            idx += 1;
        }
    }
    Ok(g)
}

/// Contents of a `.truth.json` file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub params: PlantedParams,
    pub seed: u64,
    pub cliques: Vec<Vec<usize>>,
    pub background_edge_count: u64,
}

impl Truth {
    pub fn of(instance: &PlantedCoverInstance) -> Self {
        Truth {
            params: instance.params,
            seed: instance.seed,
            cliques: instance.planted_cliques.clone(),
            background_edge_count: instance.background.edge_count(),
        }
    }
}
