//! Plain-text snapshots and edge-list import.
//!
//! ```text
//! edge-reconnect snapshot v1
//! n 4
//! m 3
//! kappa 2
//! seed 7
//! step 1200
//! degrees 2 2 1 1
//! sha256 <hex digest of the edge lines>
//! edges
//! 1 2
//! ...
//! ```
//!
//! Vertices are 1-based. Edges are written as `min max`, sorted
//! lexicographically. A loop `v v` contributes 2 to `degrees[v]`; a file
//! whose degree line disagrees with its edges is rejected.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::state::MultigraphState;
use crate::error::{Error, Result};

const MAGIC: &str = "edge-reconnect snapshot v1";

/// Chain metadata stored alongside the graph.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub kappa: Option<f64>,
    pub seed: Option<u64>,
}

fn edge_block(state: &MultigraphState) -> String {
    let mut s = String::with_capacity(state.m() * 12);
    for (a, b) in state.canonical_edges() {
        let _ = writeln!(s, "{} {}", a + 1, b + 1);
    }
    s
}

fn digest(block: &str) -> String {
    let hash = Sha256::digest(block.as_bytes());
    hash.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Render a snapshot; the result depends only on the edge multiset, the
/// step counter and `meta`.
pub fn snapshot_string(state: &MultigraphState, meta: SnapshotMeta) -> String {
    let block = edge_block(state);
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC}");
    let _ = writeln!(s, "n {}", state.n());
    let _ = writeln!(s, "m {}", state.m());
    match meta.kappa {
        Some(k) => {
            let _ = writeln!(s, "kappa {k}");
        }
        None => s.push_str("kappa -\n"),
    }
    match meta.seed {
        Some(v) => {
            let _ = writeln!(s, "seed {v}");
        }
        None => s.push_str("seed -\n"),
    }
    let _ = writeln!(s, "step {}", state.steps());
    s.push_str("degrees");
    for d in state.degree() {
        let _ = write!(s, " {d}");
    }
    s.push('\n');
    let _ = writeln!(s, "sha256 {}", digest(&block));
    s.push_str("edges\n");
    s.push_str(&block);
    s
}

pub fn snapshot_save<P: AsRef<Path>>(state: &MultigraphState, meta: SnapshotMeta, path: P) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, snapshot_string(state, meta)).map_err(|e| Error::io(path, e))
}

pub fn snapshot_load<P: AsRef<Path>>(path: P) -> Result<(MultigraphState, SnapshotMeta)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_snapshot(&text)
}

fn bad(line: usize, msg: impl Into<String>) -> Error {
    Error::MalformedSnapshot { line, msg: msg.into() }
}

fn header<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, key: &str) -> Result<(usize, &'a str)> {
    let (no, line) = lines.next().ok_or_else(|| bad(0, format!("missing `{key}` line")))?;
    let rest = line
        .strip_prefix(key)
        .filter(|r| r.is_empty() || r.starts_with(' '))
        .ok_or_else(|| bad(no, format!("expected `{key}`")))?;
    Ok((no, rest.trim()))
}

fn number<T: std::str::FromStr>(no: usize, s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| bad(no, format!("cannot parse {what} from `{s}`")))
}

fn optional<T: std::str::FromStr>(no: usize, s: &str, what: &str) -> Result<Option<T>> {
    if s == "-" {
        Ok(None)
    } else {
        number(no, s, what).map(Some)
    }
}

pub fn parse_snapshot(text: &str) -> Result<(MultigraphState, SnapshotMeta)> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l == MAGIC => {}
        _ => return Err(bad(1, "missing snapshot header")),
    }
    let (no, v) = header(&mut lines, "n")?;
    let n: usize = number(no, v, "n")?;
    let (no, v) = header(&mut lines, "m")?;
    let m: usize = number(no, v, "m")?;
    let (no, v) = header(&mut lines, "kappa")?;
    let kappa = optional(no, v, "kappa")?;
    let (no, v) = header(&mut lines, "seed")?;
    let seed = optional(no, v, "seed")?;
    let (no, v) = header(&mut lines, "step")?;
    let step: u64 = number(no, v, "step")?;
    let (deg_line, v) = header(&mut lines, "degrees")?;
    let degrees = v
        .split_whitespace()
        .map(|d| number::<u32>(deg_line, d, "degree"))
        .collect::<Result<Vec<_>>>()?;
    let (no, v) = header(&mut lines, "sha256")?;
    let expected = v.to_string();
    if expected.len() != 64 {
        return Err(bad(no, "checksum must be 64 hex digits"));
    }
    let (_, v) = header(&mut lines, "edges")?;
    if !v.is_empty() {
        return Err(bad(0, "unexpected text after `edges`"));
    }
    let mut block = String::new();
    let mut ends = Vec::with_capacity(2 * m);
    for (no, line) in lines {
        let mut it = line.split_whitespace();
        let (a, b) = match (it.next(), it.next(), it.next()) {
            (Some(a), Some(b), None) => (number::<usize>(no, a, "vertex")?, number::<usize>(no, b, "vertex")?),
            _ => return Err(bad(no, "edge lines hold exactly two vertices")),
        };
        if a == 0 || b == 0 || a > n || b > n {
            return Err(bad(no, format!("vertex out of range 1..={n}")));
        }
        ends.push((a - 1) as u32);
        ends.push((b - 1) as u32);
        block.push_str(line);
        block.push('\n');
    }
    let actual = digest(&block);
    if actual != expected {
        return Err(Error::ChecksumMismatch { expected, actual });
    }
    if ends.len() != 2 * m {
        return Err(bad(0, format!("header says m = {m}, found {} edges", ends.len() / 2)));
    }
    let mut state = MultigraphState::from_ends(n, ends)?;
    if degrees.len() != n || degrees != state.degree() {
        return Err(bad(
            deg_line,
            "degree line disagrees with edge list (loops must count twice)",
        ));
    }
    state.set_steps(step);
    Ok((state, SnapshotMeta { kappa, seed }))
}

/// Read whitespace-separated `u v` lines with 1-based vertices. Blank lines
/// and lines starting with `#` are skipped. With `n = None` the vertex
/// count is the largest index seen.
pub fn read_edge_list<R: Read>(reader: R, n: Option<usize>) -> Result<MultigraphState> {
    let mut pairs = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| Error::io("<edge list>", e))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut it = t.split_whitespace();
        match (it.next(), it.next(), it.next()) {
            (Some(a), Some(b), None) => {
                pairs.push((number::<usize>(i + 1, a, "vertex")?, number::<usize>(i + 1, b, "vertex")?));
            }
            _ => return Err(bad(i + 1, "expected `u v`")),
        }
    }
    let n = n.unwrap_or_else(|| pairs.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(1));
    MultigraphState::from_edge_list(n, &pairs)
}

pub fn import_edge_list<P: AsRef<Path>>(path: P, n: Option<usize>) -> Result<MultigraphState> {
    let path = path.as_ref();
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_edge_list(f, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> MultigraphState {
        MultigraphState::from_edge_list(4, &[(3, 1), (2, 2), (1, 3), (4, 2)]).unwrap()
    }

    #[test]
    fn round_trip_is_byte_stable() {
        let meta = SnapshotMeta {
            kappa: Some(2.0),
            seed: Some(11),
        };
        let text = snapshot_string(&sample(), meta);
        let (back, meta2) = parse_snapshot(&text).unwrap();
        assert_eq!(meta2, meta);
        assert_eq!(back.canonical_edges(), sample().canonical_edges());
        assert_eq!(back.degree(), sample().degree());
        assert_eq!(snapshot_string(&back, meta2), text);
    }

    #[test]
    fn odd_loop_accounting_rejected() {
        let text = snapshot_string(&sample(), SnapshotMeta::default());
        let broken = text.replace("degrees 2 3 2 1", "degrees 2 2 2 1");
        assert_ne!(broken, text);
        assert!(matches!(parse_snapshot(&broken), Err(Error::MalformedSnapshot { .. })));
    }

    #[test]
    fn tampered_edges_fail_checksum() {
        let text = snapshot_string(&sample(), SnapshotMeta::default());
        let tampered = text.replace("2 4\n", "1 4\n");
        assert!(matches!(parse_snapshot(&tampered), Err(Error::ChecksumMismatch { .. })));
    }

    #[test]
    fn edge_list_import() {
        let g = read_edge_list("# comment\n1 2\n\n3 3\n".as_bytes(), None).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.degree(), &[1, 1, 2]);
        assert!(read_edge_list("1 2 3\n".as_bytes(), None).is_err());
        assert!(read_edge_list("1 5\n".as_bytes(), Some(4)).is_err());
    }
}
