use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use super::matrix::SquareMatrix;
use crate::error::{Error, Result};

/// Incrementally maintained adjacency counts among vertices `0..k`.
///
/// Diagonal entries hold twice the loop count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WatchedWindow {
    counts: SquareMatrix,
}

impl WatchedWindow {
    pub fn k(&self) -> usize {
        self.counts.k()
    }

    pub fn counts(&self) -> &SquareMatrix {
        &self.counts
    }

    #[inline]
    fn edge(&mut self, a: u32, b: u32, sign: i64) {
        let k = self.counts.k() as u32;
        if a < k && b < k {
            let (a, b) = (a as usize, b as usize);
            if a == b {
                self.counts.add(a, a, 2 * sign);
            } else {
                self.counts.add(a, b, sign);
                self.counts.add(b, a, sign);
            }
        }
    }
}

/// A multigraph on a fixed vertex set with a fixed number of edges.
///
/// The flat endpoint array is the ground truth: edge `e` is
/// `{ends[2e], ends[2e+1]}`. Degrees count loops twice, so every endpoint
/// slot contributes exactly one unit of degree. Indices are 0-based here
/// and 1-based in all file formats.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultigraphState {
    n: usize,
    ends: Vec<u32>,
    degree: Vec<u32>,
    window: Option<WatchedWindow>,
    steps: u64,
}

impl MultigraphState {
    /// Build from 1-based vertex pairs.
    pub fn from_edge_list(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut ends = Vec::with_capacity(2 * pairs.len());
        for &(u, v) in pairs {
            for x in [u, v] {
                if x == 0 || x > n {
                    return Err(Error::VertexOutOfRange { index: x, n });
                }
                ends.push((x - 1) as u32);
            }
        }
        Self::from_ends(n, ends)
    }

    /// Build from a flat 0-based endpoint array of even length.
    pub fn from_ends(n: usize, ends: Vec<u32>) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("a multigraph needs at least one vertex"));
        }
        if n > u32::MAX as usize {
            return Err(Error::param("vertex count exceeds u32 range"));
        }
        if ends.len() % 2 != 0 {
            return Err(Error::param("endpoint array must have even length"));
        }
        let mut degree = vec![0u32; n];
        for &x in &ends {
            if x as usize >= n {
                return Err(Error::VertexOutOfRange {
                    index: x as usize + 1,
                    n,
                });
            }
            degree[x as usize] += 1;
        }
        Ok(Self {
            n,
            ends,
            degree,
            window: None,
            steps: 0,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.ends.len() / 2
    }

    #[inline]
    pub fn degree(&self) -> &[u32] {
        &self.degree
    }

    /// The flat endpoint array (length `2m`).
    #[inline]
    pub fn ends(&self) -> &[u32] {
        &self.ends
    }

    /// 0-based endpoints of edge slot `e`.
    #[inline]
    pub fn edge(&self, e: usize) -> (u32, u32) {
        (self.ends[2 * e], self.ends[2 * e + 1])
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.ends.chunks_exact(2).map(|c| (c[0], c[1]))
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn set_steps(&mut self, steps: u64) {
        self.steps = steps;
    }

    pub(crate) fn tick(&mut self) {
        self.steps += 1;
    }

    /// `2m / n^2`, the edge density of the step embedding.
    pub fn rho(&self) -> f64 {
        2.0 * self.m() as f64 / (self.n as f64 * self.n as f64)
    }

    /// Start tracking adjacency counts among vertices `0..k`.
    pub fn watch(&mut self, k: usize) -> Result<()> {
        let counts = self.adjacency_window(k)?;
        self.window = Some(WatchedWindow { counts });
        Ok(())
    }

    pub fn unwatch(&mut self) {
        self.window = None;
    }

    pub fn window(&self) -> Option<&WatchedWindow> {
        self.window.as_ref()
    }

    /// Adjacency counts among the first `k` vertices, recounted from the
    /// edge list: entry `(i, j)` is the number of `{i, j}` edges for
    /// `i != j` and twice the loop count at `i` on the diagonal.
    pub fn adjacency_window(&self, k: usize) -> Result<SquareMatrix> {
        if k > self.n {
            return Err(Error::WindowTooLarge { k, n: self.n });
        }
        let mut w = WatchedWindow {
            counts: SquareMatrix::zeros(k),
        };
        for (a, b) in self.edges() {
            w.edge(a, b, 1);
        }
        Ok(w.counts)
    }

    /// Multiplicity of `{a, b}`, scanning the edge list.
    pub fn multiplicity(&self, a: u32, b: u32) -> u32 {
        self.edges()
            .filter(|&(u, v)| (u == a && v == b) || (u == b && v == a))
            .count() as u32
    }

    /// Adjacency entry `B(a, b)` (twice the loop count on the diagonal).
    pub fn adjacency(&self, a: u32, b: u32) -> u32 {
        let mult = self.multiplicity(a, b);
        if a == b {
            2 * mult
        } else {
            mult
        }
    }

    /// Edge multiplicities keyed by `(min, max)` endpoint.
    pub fn pair_counts(&self) -> HashMap<(u32, u32), u32> {
        let mut map = HashMap::new();
        for (a, b) in self.edges() {
            *map.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
        map
    }

    /// Edges as sorted 0-based `(min, max)` pairs.
    pub fn canonical_edges(&self) -> Vec<(u32, u32)> {
        let mut e: Vec<(u32, u32)> = self.edges().map(|(a, b)| (a.min(b), a.max(b))).collect();
        e.sort_unstable();
        e
    }

    /// Replace the vertex at endpoint slot `slot` by `v`, keeping degrees
    /// and the watched window in sync.
    #[inline]
    pub(crate) fn move_endpoint(&mut self, slot: usize, v: u32) {
        let old = self.ends[slot];
        if old == v {
            return;
        }
        let other = self.ends[slot ^ 1];
        if let Some(w) = self.window.as_mut() {
            w.edge(old, other, -1);
            w.edge(v, other, 1);
        }
        self.degree[old as usize] -= 1;
        self.degree[v as usize] += 1;
        self.ends[slot] = v;
    }

    /// Relabel every vertex `i` as `perm[i]`.
    pub fn relabel(&self, perm: &[u32]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::param("permutation length must equal n"));
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p as usize >= self.n || std::mem::replace(&mut seen[p as usize], true) {
                return Err(Error::param("not a permutation"));
            }
        }
        let ends = self.ends.iter().map(|&x| perm[x as usize]).collect();
        let mut out = Self::from_ends(self.n, ends)?;
        out.steps = self.steps;
        if let Some(w) = &self.window {
            out.watch(w.k())?;
        }
        Ok(out)
    }

    /// Relabel by a uniformly random permutation of the vertices.
    pub fn shuffle_labels<R: Rng + ?Sized>(&self, rng: &mut R) -> Self {
        let mut perm: Vec<u32> = (0..self.n as u32).collect();
        perm.shuffle(rng);
        self.relabel(&perm).expect("shuffled identity is a permutation")
    }

    /// Recount degrees and the window from the edge list and compare with
    /// the caches. Returns a description of the first mismatch.
    pub fn check_consistency(&self) -> std::result::Result<(), String> {
        let mut degree = vec![0u32; self.n];
        for &x in &self.ends {
            degree[x as usize] += 1;
        }
        if degree != self.degree {
            return Err("degree cache disagrees with edge list".into());
        }
        let total: u64 = self.degree.iter().map(|&d| u64::from(d)).sum();
        if total != self.ends.len() as u64 {
            return Err(format!("degree sum {total} != 2m = {}", self.ends.len()));
        }
        if let Some(w) = &self.window {
            let fresh = self.adjacency_window(w.k()).map_err(|e| e.to_string())?;
            if &fresh != w.counts() {
                return Err("watched window disagrees with edge list".into());
            }
        }
        Ok(())
    }
}
