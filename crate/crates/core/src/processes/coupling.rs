//! Per-step maximal coupling of the chain's watched window with a window
//! of independent M/M/inf queues.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{queue_kernel, QueueKernelParams};
use crate::dynamics::{
    apply_event, preferential_sample, sample_event, window_move_law, Pair, StepEvent, TransitionLaw, WindowMove,
};
use crate::error::{Error, Result};
use crate::multigraph::{MultigraphState, SquareMatrix};
use crate::rngcore::{index_draw, uniform01};

/// Queue side of the coupling. Counts are edge counts per vertex pair, so
/// a loop counts once (half the adjacency entry).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoupledWindow {
    k: usize,
    pairs: Vec<Pair>,
    y: Vec<u64>,
    mu: Vec<f64>,
    dt: f64,
    pub steps: u64,
    pub agreements: u64,
    /// Step index of the first disagreement, if any.
    pub first_disagreement: Option<u64>,
    /// Multi-jump mass folded into "stay", summed over steps and its maximum.
    pub folded_total: f64,
    pub folded_max: f64,
    #[serde(skip)]
    last_folded: f64,
    #[serde(skip)]
    y_law: Option<TransitionLaw>,
    #[serde(skip)]
    chain_cache: Option<(Vec<u32>, Vec<u32>, TransitionLaw)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledOutcome {
    pub event: StepEvent,
    pub chain_move: WindowMove,
    pub queue_move: WindowMove,
    pub agreement: bool,
    /// Total variation between the two one-step laws at this step.
    pub tv: f64,
}

impl CoupledWindow {
    /// Anchor at the current state: `Y(0)` is the watched window and the
    /// arrival rates are `mu_ij = d_i d_j / (2m (1 + 1[i = j]))`. One chain
    /// step is queue time `1 / m`.
    pub fn new(state: &MultigraphState, k: usize) -> Result<Self> {
        let m = state.m();
        if m == 0 {
            return Err(Error::NoEdges);
        }
        let counts = state.adjacency_window(k)?;
        let mut pairs = Vec::new();
        let mut y = Vec::new();
        let mut mu = Vec::new();
        let deg = state.degree();
        for i in 0..k {
            for j in i..k {
                pairs.push((i as u32, j as u32));
                let x = counts.get(i, j);
                y.push(u64::from(if i == j { x / 2 } else { x }));
                let loops = if i == j { 2.0 } else { 1.0 };
                mu.push(deg[i] as f64 * deg[j] as f64 / (2.0 * m as f64 * loops));
            }
        }
        Ok(Self {
            k,
            pairs,
            y,
            mu,
            dt: 1.0 / m as f64,
            steps: 0,
            agreements: 0,
            first_disagreement: None,
            folded_total: 0.0,
            folded_max: 0.0,
            last_folded: 0.0,
            y_law: None,
            chain_cache: None,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rates(&self) -> &[f64] {
        &self.mu
    }

    /// Queue counts as an adjacency matrix (diagonal doubled).
    pub fn queue_window(&self) -> SquareMatrix {
        let mut a = SquareMatrix::zeros(self.k);
        for (&(i, j), &v) in self.pairs.iter().zip(&self.y) {
            let (i, j) = (i as usize, j as usize);
            if i == j {
                a.set(i, i, 2 * v as u32);
            } else {
                a.set(i, j, v as u32);
                a.set(j, i, v as u32);
            }
        }
        a
    }

    /// One-step law of the queue window and the folded multi-jump mass.
    pub fn queue_law(&self) -> (TransitionLaw, f64) {
        let stay: Vec<f64> = self
            .y
            .iter()
            .zip(&self.mu)
            .map(|(&y, &mu)| queue_kernel(QueueKernelParams::new(self.dt, y, mu).expect("valid"), y))
            .collect();
        let all_stay: f64 = stay.iter().product();
        let mut probs = BTreeMap::new();
        let mut single = 0.0;
        for (idx, (&y, &mu)) in self.y.iter().zip(&self.mu).enumerate() {
            let others = if stay[idx] > 0.0 {
                all_stay / stay[idx]
            } else {
                stay.iter().enumerate().filter(|(j, _)| *j != idx).map(|(_, s)| s).product()
            };
            let params = QueueKernelParams::new(self.dt, y, mu).expect("valid");
            let up = others * queue_kernel(params, y + 1);
            if up > 0.0 {
                probs.insert(WindowMove::Plus(self.pairs[idx]), up);
                single += up;
            }
            if y > 0 {
                let down = others * queue_kernel(params, y - 1);
                if down > 0.0 {
                    probs.insert(WindowMove::Minus(self.pairs[idx]), down);
                    single += down;
                }
            }
        }
        let folded = (1.0 - all_stay - single).max(0.0);
        probs.insert(WindowMove::Stay, all_stay + folded);
        (TransitionLaw { k: self.k, probs }, folded)
    }

    fn apply_queue_move(&mut self, mv: WindowMove) {
        let idx = |p: Pair, pairs: &[Pair]| pairs.iter().position(|&q| q == p).expect("pair in window");
        match mv {
            WindowMove::Stay => return,
            WindowMove::Plus(p) => {
                let i = idx(p, &self.pairs);
                self.y[i] += 1;
            }
            WindowMove::Minus(p) => {
                let i = idx(p, &self.pairs);
                self.y[i] -= 1;
            }
            WindowMove::Swap { .. } => unreachable!("queue window moves one queue at a time"),
        }
        self.y_law = None;
    }

    fn chain_law(&mut self, state: &MultigraphState, kappa: f64) -> Result<TransitionLaw> {
        let counts = match state.window() {
            Some(w) if w.k() == self.k => w.counts().as_slice().to_vec(),
            _ => state.adjacency_window(self.k)?.as_slice().to_vec(),
        };
        let deg = state.degree()[..self.k].to_vec();
        if let Some((c, d, law)) = &self.chain_cache {
            if *c == counts && *d == deg {
                return Ok(law.clone());
            }
        }
        let law = window_move_law(state, kappa, self.k)?;
        self.chain_cache = Some((counts, deg, law.clone()));
        Ok(law)
    }
}

/// Draw a pair of moves from a maximal coupling of `p` and `q` with one
/// shared uniform. Returns `(from p, from q, tv)`.
pub fn maximal_coupling<R: Rng + ?Sized>(p: &TransitionLaw, q: &TransitionLaw, rng: &mut R) -> (WindowMove, WindowMove, f64) {
    let mut keys: Vec<WindowMove> = p.probs.keys().chain(q.probs.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    let overlap: Vec<f64> = keys.iter().map(|m| p.prob(m).min(q.prob(m))).collect();
    let alpha: f64 = overlap.iter().sum();
    let tv = (1.0 - alpha).max(0.0);
    let u = uniform01(rng);
    let pick = |weights: &dyn Fn(usize) -> f64, target: f64| -> WindowMove {
        let mut acc = 0.0;
        let mut last = None;
        for i in 0..keys.len() {
            let w = weights(i);
            if w > 0.0 {
                acc += w;
                last = Some(keys[i]);
                if target < acc {
                    return keys[i];
                }
            }
        }
        last.unwrap_or(WindowMove::Stay)
    };
    if u < alpha {
        let mv = pick(&|i| overlap[i], u);
        return (mv, mv, tv);
    }
    let v = (u - alpha) / tv.max(f64::MIN_POSITIVE);
    let res_p: f64 = keys.iter().zip(&overlap).map(|(m, o)| (p.prob(m) - o).max(0.0)).sum();
    let res_q: f64 = keys.iter().zip(&overlap).map(|(m, o)| (q.prob(m) - o).max(0.0)).sum();
    let mp = pick(&|i| (p.prob(&keys[i]) - overlap[i]).max(0.0), v * res_p);
    let mq = pick(&|i| (q.prob(&keys[i]) - overlap[i]).max(0.0), v * res_q);
    (mp, mq, tv)
}

/// A chain event drawn from its law conditioned on producing window move `mv`.
pub fn sample_event_given_move<R: Rng + ?Sized>(
    state: &MultigraphState,
    kappa: f64,
    k: usize,
    mv: WindowMove,
    rng: &mut R,
) -> Result<StepEvent> {
    let k32 = k as u32;
    if k > state.n() {
        return Err(Error::WindowTooLarge { k, n: state.n() });
    }
    let ends = state.ends();
    let deg = state.degree();
    let z = ends.len() as f64 + state.n() as f64 * kappa;
    let p_vertex = |c: u32| (deg[c as usize] as f64 + kappa) / z;
    // (v_old, w, v_new) with v_old or v_new possibly "outside" (None)
    let mut triples: Vec<(Option<u32>, u32, Option<u32>, f64)> = Vec::new();
    let window = match state.window() {
        Some(w) if w.k() == k => w.counts().clone(),
        _ => state.adjacency_window(k)?,
    };
    // endpoint slots held by a whose partner is b
    let oriented = |a: u32, b: u32| window.get(a as usize, b as usize) as f64;
    let outside_with_partner = |b: u32| -> f64 {
        let inside: u32 = (0..k).map(|a| window.get(a, b as usize)).sum();
        (deg[b as usize] - inside) as f64
    };
    let orient = |p: Pair| if p.0 == p.1 { vec![p] } else { vec![p, (p.1, p.0)] };
    match mv {
        WindowMove::Stay => loop {
            let ev = sample_event(state, kappa, rng)?;
            if WindowMove::classify(&ev, k) == WindowMove::Stay {
                return Ok(ev);
            }
        },
        WindowMove::Minus(p) => {
            for (v_old, w) in orient(p) {
                triples.push((Some(v_old), w, None, oriented(v_old, w)));
            }
        }
        WindowMove::Plus(p) => {
            for (v_new, w) in orient(p) {
                triples.push((None, w, Some(v_new), outside_with_partner(w) * p_vertex(v_new)));
            }
        }
        WindowMove::Swap { minus, plus } => {
            for (v_old, w) in orient(minus) {
                for (v_new, w2) in orient(plus) {
                    if w == w2 && v_old != v_new {
                        triples.push((Some(v_old), w, Some(v_new), oriented(v_old, w) * p_vertex(v_new)));
                    }
                }
            }
        }
    }
    let total: f64 = triples.iter().map(|t| t.3).sum();
    if !(total > 0.0) {
        return Err(Error::param(format!("window move {mv:?} has zero probability")));
    }
    let mut u = uniform01(rng) * total;
    let mut chosen = triples[triples.len() - 1];
    for t in &triples {
        if u < t.3 {
            chosen = *t;
            break;
        }
        u -= t.3;
    }
    let (v_old, w, v_new, _) = chosen;
    // uniform endpoint slot with the right occupant and partner
    let matches = |slot: usize| {
        let own = ends[slot];
        ends[slot ^ 1] == w
            && match v_old {
                Some(v) => own == v,
                None => own >= k32,
            }
    };
    let count = (0..ends.len()).filter(|&s| matches(s)).count();
    if count == 0 {
        return Err(Error::param("no endpoint slot realizes the requested move"));
    }
    let target = index_draw(rng, count);
    let slot = (0..ends.len()).filter(|&s| matches(s)).nth(target).expect("slot exists");
    let v_new = match v_new {
        Some(v) => v,
        None => loop {
            let c = preferential_sample(state, kappa, rng);
            if c >= k32 {
                break c;
            }
        },
    };
    Ok(StepEvent {
        v_old: ends[slot],
        w,
        v_new,
        edge_slot: slot / 2,
        end: (slot % 2) as u8,
    })
}

/// Advance the chain and the queue window by one coupled step.
pub fn coupled_step<R: Rng + ?Sized>(
    state: &mut MultigraphState,
    coupled: &mut CoupledWindow,
    kappa: f64,
    rng: &mut R,
) -> Result<CoupledOutcome> {
    let chain_law = coupled.chain_law(state, kappa)?;
    if coupled.y_law.is_none() {
        let (law, folded) = coupled.queue_law();
        coupled.y_law = Some(law);
        coupled.last_folded = folded;
        coupled.folded_max = coupled.folded_max.max(folded);
    }
    let y_law = coupled.y_law.clone().expect("cached");
    let (chain_move, queue_move, tv) = maximal_coupling(&chain_law, &y_law, rng);
    let event = sample_event_given_move(state, kappa, coupled.k, chain_move, rng)?;
    apply_event(state, &event);
    coupled.apply_queue_move(queue_move);
    coupled.folded_total += coupled.last_folded;
    let agreement = chain_move == queue_move;
    if agreement {
        coupled.agreements += 1;
    } else if coupled.first_disagreement.is_none() {
        coupled.first_disagreement = Some(coupled.steps);
    }
    coupled.steps += 1;
    Ok(CoupledOutcome {
        event,
        chain_move,
        queue_move,
        agreement,
        tv,
    })
}

/// One step of both sides conditioned on agreement: the common move is drawn
/// from the normalized overlap of the two laws. Returns the overlap mass
/// `1 - tv`, so the product along such a path is the conditional
/// probability that the coupling has held so far.
pub fn agreement_conditioned_step<R: Rng + ?Sized>(
    state: &mut MultigraphState,
    coupled: &mut CoupledWindow,
    kappa: f64,
    rng: &mut R,
) -> Result<f64> {
    let chain_law = coupled.chain_law(state, kappa)?;
    if coupled.y_law.is_none() {
        let (law, folded) = coupled.queue_law();
        coupled.y_law = Some(law);
        coupled.last_folded = folded;
        coupled.folded_max = coupled.folded_max.max(folded);
    }
    let y_law = coupled.y_law.as_ref().expect("cached");
    let mut overlap = TransitionLaw { k: coupled.k, probs: BTreeMap::new() };
    let mut alpha = 0.0;
    for (mv, p) in &chain_law.probs {
        let o = p.min(y_law.prob(mv));
        if o > 0.0 {
            overlap.probs.insert(*mv, o);
            alpha += o;
        }
    }
    if !(alpha > 0.0) {
        return Ok(0.0);
    }
    let mut u = uniform01(rng) * alpha;
    let mut mv = *overlap.probs.keys().next_back().expect("non-empty");
    for (m, o) in &overlap.probs {
        if u < *o {
            mv = *m;
            break;
        }
        u -= o;
    }
    let event = sample_event_given_move(state, kappa, coupled.k, mv, rng)?;
    apply_event(state, &event);
    coupled.apply_queue_move(mv);
    coupled.folded_total += coupled.last_folded;
    coupled.agreements += 1;
    coupled.steps += 1;
    Ok(alpha)
}
