//! Exact one-step laws of the watched window.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::chain::{ChainParams, StepEvent};
use crate::error::{Error, Result};
use crate::multigraph::{MultigraphState, SquareMatrix};

/// An unordered vertex pair stored as `(min, max)`.
pub type Pair = (u32, u32);

#[inline]
pub fn pair(a: u32, b: u32) -> Pair {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Effect of one step on the window counts. `Minus(p)` removes one edge
/// of type `p` (for a loop, the diagonal entry drops by 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum WindowMove {
    Stay,
    Minus(Pair),
    Plus(Pair),
    Swap { minus: Pair, plus: Pair },
}

#[inline]
fn pair_index(p: Pair, k: usize) -> usize {
    let (i, j) = (p.0 as usize, p.1 as usize);
    i * k - i * i.saturating_sub(1) / 2 + (j - i)
}

fn pair_from_index(mut idx: usize, k: usize) -> Pair {
    for i in 0..k {
        let row = k - i;
        if idx < row {
            return (i as u32, (i + idx) as u32);
        }
        idx -= row;
    }
    panic!("pair index out of range")
}

impl WindowMove {
    /// Dense index in `0..Self::count(k)`.
    pub fn index(&self, k: usize) -> usize {
        let p = k * (k + 1) / 2;
        match *self {
            WindowMove::Stay => 0,
            WindowMove::Minus(a) => 1 + pair_index(a, k),
            WindowMove::Plus(a) => 1 + p + pair_index(a, k),
            WindowMove::Swap { minus, plus } => 1 + 2 * p + pair_index(minus, k) * p + pair_index(plus, k),
        }
    }

    pub fn from_index(idx: usize, k: usize) -> Self {
        let p = k * (k + 1) / 2;
        match idx {
            0 => WindowMove::Stay,
            i if i <= p => WindowMove::Minus(pair_from_index(i - 1, k)),
            i if i <= 2 * p => WindowMove::Plus(pair_from_index(i - 1 - p, k)),
            i => {
                let r = i - 1 - 2 * p;
                WindowMove::Swap {
                    minus: pair_from_index(r / p, k),
                    plus: pair_from_index(r % p, k),
                }
            }
        }
    }

    pub fn count(k: usize) -> usize {
        let p = k * (k + 1) / 2;
        1 + 2 * p + p * p
    }

    /// The window move caused by `event` for window size `k`.
    #[inline]
    pub fn classify(event: &StepEvent, k: usize) -> Self {
        if event.v_old == event.v_new {
            return WindowMove::Stay;
        }
        let k = k as u32;
        let inside_w = event.w < k;
        let minus = (inside_w && event.v_old < k).then(|| pair(event.v_old, event.w));
        let plus = (inside_w && event.v_new < k).then(|| pair(event.v_new, event.w));
        match (minus, plus) {
            (None, None) => WindowMove::Stay,
            (Some(m), None) => WindowMove::Minus(m),
            (None, Some(p)) => WindowMove::Plus(p),
            (Some(minus), Some(plus)) => WindowMove::Swap { minus, plus },
        }
    }

    /// Change of adjacency entry `(i, j)` under this move.
    pub fn delta(&self, i: u32, j: u32) -> i32 {
        let p = pair(i, j);
        let unit = if i == j { 2 } else { 1 };
        let (minus, plus) = match *self {
            WindowMove::Stay => (None, None),
            WindowMove::Minus(a) => (Some(a), None),
            WindowMove::Plus(a) => (None, Some(a)),
            WindowMove::Swap { minus, plus } => (Some(minus), Some(plus)),
        };
        unit * (i32::from(plus == Some(p)) - i32::from(minus == Some(p)))
    }

    /// Apply to a window matrix in adjacency units.
    pub fn apply(&self, counts: &mut SquareMatrix) {
        let mut bump = |p: Pair, s: i64| {
            let (a, b) = (p.0 as usize, p.1 as usize);
            if a == b {
                counts.add(a, a, 2 * s);
            } else {
                counts.add(a, b, s);
                counts.add(b, a, s);
            }
        };
        match *self {
            WindowMove::Stay => {}
            WindowMove::Minus(a) => bump(a, -1),
            WindowMove::Plus(a) => bump(a, 1),
            WindowMove::Swap { minus, plus } => {
                bump(minus, -1);
                bump(plus, 1);
            }
        }
    }
}

/// A probability law over window moves.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TransitionLaw {
    pub k: usize,
    pub probs: BTreeMap<WindowMove, f64>,
}

impl TransitionLaw {
    pub fn prob(&self, mv: &WindowMove) -> f64 {
        self.probs.get(mv).copied().unwrap_or(0.0)
    }

    pub fn stay(&self) -> f64 {
        self.prob(&WindowMove::Stay)
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Probability that adjacency entry `(i, j)` goes up.
    pub fn increment(&self, i: u32, j: u32) -> f64 {
        self.probs.iter().filter(|(m, _)| m.delta(i, j) > 0).map(|(_, p)| p).sum()
    }

    /// Probability that adjacency entry `(i, j)` goes down.
    pub fn decrement(&self, i: u32, j: u32) -> f64 {
        self.probs.iter().filter(|(m, _)| m.delta(i, j) < 0).map(|(_, p)| p).sum()
    }

    /// Law as a dense vector indexed by [`WindowMove::index`].
    pub fn dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; WindowMove::count(self.k)];
        for (m, p) in &self.probs {
            v[m.index(self.k)] += p;
        }
        v
    }

    pub fn total_variation(&self, other: &TransitionLaw) -> f64 {
        let a = self.dense();
        let b = other.dense();
        0.5 * a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>()
    }

    fn add(&mut self, mv: WindowMove, p: f64) {
        *self.probs.entry(mv).or_insert(0.0) += p;
    }
}

/// Largest state the brute-force oracle accepts.
pub const ORACLE_MAX_N: usize = 6;
pub const ORACLE_MAX_M: usize = 12;

/// Exact one-step law of the window by enumerating every
/// `(edge slot, coin, v_new)` triple. The window is the watched window if
/// there is one, else the whole vertex set.
pub fn transition_oracle(state: &MultigraphState, params: &ChainParams) -> Result<TransitionLaw> {
    let (n, m) = (state.n(), state.m());
    if n > ORACLE_MAX_N || m > ORACLE_MAX_M {
        return Err(Error::OracleSizeLimit(format!(
            "n = {n}, m = {m} (limit n <= {ORACLE_MAX_N}, m <= {ORACLE_MAX_M})"
        )));
    }
    if m == 0 {
        return Err(Error::NoEdges);
    }
    let k = state.window().map_or(n, |w| w.k());
    let z = 2.0 * m as f64 + n as f64 * params.kappa;
    let mut law = TransitionLaw {
        k,
        probs: BTreeMap::new(),
    };
    let ends = state.ends();
    for slot in 0..2 * m {
        for v_new in 0..n as u32 {
            let ev = StepEvent {
                v_old: ends[slot],
                w: ends[slot ^ 1],
                v_new,
                edge_slot: slot / 2,
                end: (slot % 2) as u8,
            };
            let p = (state.degree()[v_new as usize] as f64 + params.kappa) / z / (2 * m) as f64;
            law.add(WindowMove::classify(&ev, k), p);
        }
    }
    Ok(law)
}

/// Exact one-step law of the window of size `k` computed from the window
/// counts and degrees alone, in O(k^3) for any state size.
pub fn window_move_law(state: &MultigraphState, kappa: f64, k: usize) -> Result<TransitionLaw> {
    let (n, m) = (state.n(), state.m());
    if m == 0 {
        return Err(Error::NoEdges);
    }
    let counts = match state.window() {
        Some(w) if w.k() == k => w.counts().clone(),
        _ => state.adjacency_window(k)?,
    };
    let two_m = 2.0 * m as f64;
    let z = two_m + n as f64 * kappa;
    let deg = state.degree();
    let p_in: Vec<f64> = (0..k).map(|c| (deg[c] as f64 + kappa) / z).collect();
    let p_out = (1.0 - p_in.iter().sum::<f64>()).max(0.0);
    let mut law = TransitionLaw {
        k,
        probs: BTreeMap::new(),
    };
    let mut moving = 0.0;
    for b in 0..k {
        let mut inside = 0u64;
        for a in 0..k {
            let x = counts.get(a, b);
            inside += u64::from(x);
            if x == 0 {
                continue;
            }
            let pick = x as f64 / two_m;
            let minus = pair(a as u32, b as u32);
            for (c, &pc) in p_in.iter().enumerate() {
                if c != a {
                    law.add(
                        WindowMove::Swap {
                            minus,
                            plus: pair(c as u32, b as u32),
                        },
                        pick * pc,
                    );
                    moving += pick * pc;
                }
            }
            law.add(WindowMove::Minus(minus), pick * p_out);
            moving += pick * p_out;
        }
        let outside = (u64::from(deg[b]) - inside) as f64 / two_m;
        if outside > 0.0 {
            for (c, &pc) in p_in.iter().enumerate() {
                law.add(WindowMove::Plus(pair(c as u32, b as u32)), outside * pc);
                moving += outside * pc;
            }
        }
    }
    law.probs.retain(|_, p| *p > 0.0);
    law.add(WindowMove::Stay, (1.0 - moving).max(0.0));
    Ok(law)
}

/// `P(v_new = i) = (d(i) + kappa) / (2m + n kappa)` for every vertex.
pub fn preferential_probabilities(degree: &[u32], kappa: f64) -> Vec<f64> {
    let total: f64 = degree.iter().map(|&d| d as f64).sum::<f64>() + degree.len() as f64 * kappa;
    degree.iter().map(|&d| (d as f64 + kappa) / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge_law() {
        let s = MultigraphState::from_edge_list(2, &[(1, 2)]).unwrap();
        let p = ChainParams::new(1.0, 1.0, 0).unwrap();
        let law = transition_oracle(&s, &p).unwrap();
        assert!((law.decrement(0, 1) - 0.5).abs() < 1e-15);
        assert!((law.stay() - 0.5).abs() < 1e-15);
        assert!((law.increment(0, 0) - 0.25).abs() < 1e-15);
        assert!((law.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn absent_entry_cannot_decrease() {
        let s = MultigraphState::from_edge_list(3, &[(1, 2), (2, 2)]).unwrap();
        let p = ChainParams::new(0.7, 1.0, 0).unwrap();
        let law = transition_oracle(&s, &p).unwrap();
        assert_eq!(law.decrement(0, 2), 0.0);
        assert_eq!(law.decrement(2, 2), 0.0);
    }

    #[test]
    fn size_limit() {
        let s = MultigraphState::from_ends(7, vec![0, 1]).unwrap();
        let p = ChainParams::new(1.0, 1.0, 0).unwrap();
        assert!(matches!(transition_oracle(&s, &p), Err(Error::OracleSizeLimit(_))));
    }

    #[test]
    fn aggregated_law_matches_enumeration() {
        let pairs = [(1, 2), (1, 2), (3, 3), (2, 4), (5, 1), (4, 4), (2, 3)];
        let base = MultigraphState::from_edge_list(5, &pairs).unwrap();
        let p = ChainParams::new(1.3, 1.0, 0).unwrap();
        for k in 1..=5 {
            let mut s = base.clone();
            s.watch(k).unwrap();
            let brute = transition_oracle(&s, &p).unwrap();
            let fast = window_move_law(&s, p.kappa, k).unwrap();
            assert!(brute.total_variation(&fast) < 1e-14, "k = {k}");
        }
    }

    #[test]
    fn dense_index_round_trip() {
        for k in 1..=4 {
            for idx in 0..WindowMove::count(k) {
                assert_eq!(WindowMove::from_index(idx, k).index(k), idx);
            }
        }
    }

    #[test]
    fn huge_kappa_is_nearly_uniform() {
        let p = preferential_probabilities(&[2, 0], 1e6);
        assert!((p[0] - 0.5).abs() < 1e-5);
        let p = preferential_probabilities(&[2, 0], 2.0);
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15);
    }
}
