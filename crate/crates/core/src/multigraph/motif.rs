use std::collections::HashMap;

use rand::Rng;

use super::matrix::SquareMatrix;
use super::state::MultigraphState;
use crate::error::{Error, Result};
use crate::numeric::POLICY;
use crate::rngcore::index_draw;

/// A small multigraph `F` given by its adjacency matrix (even diagonal).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteMotif {
    a: SquareMatrix,
}

impl FiniteMotif {
    pub fn new(a: SquareMatrix) -> Result<Self> {
        if a.k() == 0 {
            return Err(Error::InvalidMotif("empty motif".into()));
        }
        if !a.is_adjacency() {
            return Err(Error::InvalidMotif(format!("{a:?} is not symmetric with even diagonal")));
        }
        Ok(Self { a })
    }

    pub fn from_rows(rows: &[Vec<u32>]) -> Result<Self> {
        let a = SquareMatrix::from_rows(rows).ok_or_else(|| Error::InvalidMotif("ragged rows".into()))?;
        Self::new(a)
    }

    pub fn k(&self) -> usize {
        self.a.k()
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.a
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.a.get(i, j)
    }

    /// Every motif of size `k` whose entries are at most `max_entry`
    /// (diagonal entries even and at most `max_entry`).
    pub fn enumerate(k: usize, max_entry: u32) -> Vec<FiniteMotif> {
        let cells: Vec<(usize, usize)> = (0..k).flat_map(|i| (i..k).map(move |j| (i, j))).collect();
        let mut out = Vec::new();
        let mut a = SquareMatrix::zeros(k);
        fn rec(idx: usize, cells: &[(usize, usize)], max: u32, a: &mut SquareMatrix, out: &mut Vec<FiniteMotif>) {
            if idx == cells.len() {
                out.push(FiniteMotif { a: a.clone() });
                return;
            }
            let (i, j) = cells[idx];
            let step = if i == j { 2 } else { 1 };
            let mut v = 0;
            while v <= max {
                a.set(i, j, v);
                a.set(j, i, v);
                rec(idx + 1, cells, max, a, out);
                v += step;
            }
        }
        if k > 0 {
            rec(0, &cells, max_entry, &mut a, &mut out);
        }
        out
    }
}

/// Adjacency lookup `B(a, b)` for the whole graph.
enum Lookup {
    Dense { n: usize, b: Vec<u32> },
    Sparse(HashMap<(u32, u32), u32>),
}

impl Lookup {
    fn new(g: &MultigraphState) -> Self {
        let n = g.n();
        if n <= 4096 {
            let mut b = vec![0u32; n * n];
            for (u, v) in g.edges() {
                let (u, v) = (u as usize, v as usize);
                if u == v {
                    b[u * n + u] += 2;
                } else {
                    b[u * n + v] += 1;
                    b[v * n + u] += 1;
                }
            }
            Lookup::Dense { n, b }
        } else {
            let mut map = g.pair_counts();
            for ((a, b), c) in map.iter_mut() {
                if a == b {
                    *c *= 2;
                }
            }
            Lookup::Sparse(map)
        }
    }

    #[inline]
    fn get(&self, a: u32, b: u32) -> u32 {
        match self {
            Lookup::Dense { n, b: m } => m[a as usize * n + b as usize],
            Lookup::Sparse(map) => map.get(&(a.min(b), a.max(b))).copied().unwrap_or(0),
        }
    }
}

fn matches(a: &FiniteMotif, lookup: &Lookup, phi: &[u32]) -> bool {
    let k = a.k();
    (0..k).all(|i| (i..k).all(|j| a.get(i, j) == lookup.get(phi[i], phi[j])))
}

/// `t_=(A, G)`: the fraction of all maps `[k] -> [n]` (injective or not)
/// under which every multiplicity of `A` matches `G` exactly.
///
/// Refuses when `n^k` exceeds the enumeration budget.
pub fn induced_density_exact(a: &FiniteMotif, g: &MultigraphState) -> Result<f64> {
    let (k, n) = (a.k(), g.n());
    let required = (n as f64).powi(k as i32);
    if (k as f64) * (n as f64).ln() > POLICY.enumeration_budget.ln() {
        return Err(Error::EnumerationBudget {
            required,
            budget: POLICY.enumeration_budget,
        });
    }
    let lookup = Lookup::new(g);
    let mut phi = vec![0u32; k];
    let count = extend(a, &lookup, n as u32, &mut phi, 0);
    Ok(count as f64 / required)
}

/// Count completions of `phi[..depth]`, pruning as soon as a constraint
/// between assigned vertices fails.
fn extend(a: &FiniteMotif, lookup: &Lookup, n: u32, phi: &mut [u32], depth: usize) -> u64 {
    if depth == phi.len() {
        return 1;
    }
    let mut total = 0;
    for v in 0..n {
        phi[depth] = v;
        let ok = (0..=depth).all(|i| a.get(i, depth) == lookup.get(phi[i], v));
        if ok {
            total += extend(a, lookup, n, phi, depth + 1);
        }
    }
    total
}

/// Monte Carlo estimate of `t_=(A, G)` from i.i.d. uniform maps, with the
/// standard error `sd / sqrt(samples)`.
pub fn induced_density_mc<R: Rng + ?Sized>(
    a: &FiniteMotif,
    g: &MultigraphState,
    samples: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(Error::param("need at least one sample"));
    }
    let lookup = Lookup::new(g);
    let n = g.n();
    let mut phi = vec![0u32; a.k()];
    let mut hits = 0u64;
    for _ in 0..samples {
        for p in phi.iter_mut() {
            *p = index_draw(rng, n) as u32;
        }
        if matches(a, &lookup, &phi) {
            hits += 1;
        }
    }
    let s = samples as f64;
    let p = hits as f64 / s;
    let stderr = if samples > 1 {
        (p * (1.0 - p) * s / (s - 1.0)).sqrt() / s.sqrt()
    } else {
        0.0
    };
    Ok((p, stderr))
}
