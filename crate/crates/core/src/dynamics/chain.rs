use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multigraph::MultigraphState;
use crate::rngcore::{index_draw, uniform01};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    /// Preferential-attachment offset.
    pub kappa: f64,
    /// Edge density used only to convert limit times into step counts.
    pub rho_target: f64,
    pub seed: u64,
}

impl ChainParams {
    pub fn new(kappa: f64, rho_target: f64, seed: u64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::param(format!("kappa must be positive, got {kappa}")));
        }
        if !(rho_target > 0.0 && rho_target.is_finite()) {
            return Err(Error::param(format!("rho must be positive, got {rho_target}")));
        }
        Ok(Self {
            kappa,
            rho_target,
            seed,
        })
    }

    /// `floor(t rho n^2 / 2)`: edge multiplicities move on this scale.
    pub fn edge_scale_steps(&self, t: f64, n: usize) -> u64 {
        let n = n as f64;
        (t * self.rho_target * n * n / 2.0).floor() as u64
    }

    /// `floor(t rho n^3)`: degrees move on this scale.
    pub fn degree_scale_steps(&self, t: f64, n: usize) -> u64 {
        let n = n as f64;
        (t * self.rho_target * n * n * n).floor() as u64
    }
}

/// One transition: the endpoint `v_old` of edge slot `edge_slot` is moved
/// to `v_new`, so `{v_old, w}` becomes `{v_new, w}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StepEvent {
    pub v_old: u32,
    pub w: u32,
    pub v_new: u32,
    pub edge_slot: usize,
    /// Which endpoint of the edge moves (0 or 1).
    pub end: u8,
}

impl StepEvent {
    #[inline]
    pub fn endpoint_slot(&self) -> usize {
        2 * self.edge_slot + self.end as usize
    }

    #[inline]
    pub fn is_noop(&self) -> bool {
        self.v_old == self.v_new
    }
}

/// Vertex `i` with probability `(d(i) + kappa) / (2m + n kappa)`.
///
/// With probability `n kappa / (2m + n kappa)` a uniform vertex, otherwise
/// the vertex sitting in a uniform endpoint slot.
#[inline]
pub fn preferential_sample<R: Rng + ?Sized>(state: &MultigraphState, kappa: f64, rng: &mut R) -> u32 {
    let n = state.n();
    let slots = state.ends().len();
    let uniform_mass = n as f64 * kappa;
    if slots == 0 || uniform01(rng) * (slots as f64 + uniform_mass) < uniform_mass {
        index_draw(rng, n) as u32
    } else {
        state.ends()[index_draw(rng, slots)]
    }
}

/// The same law for a bare degree vector; the endpoint phase walks the
/// cumulative degrees, so each draw costs O(n).
pub fn preferential_sample_degrees<R: Rng + ?Sized>(degree: &[u32], kappa: f64, rng: &mut R) -> Result<usize> {
    let n = degree.len();
    let slots: u64 = degree.iter().map(|&d| u64::from(d)).sum();
    let uniform_mass = n as f64 * kappa;
    if !(slots as f64 + uniform_mass > 0.0) {
        return Err(Error::param("preferential sampling needs 2m + n kappa > 0"));
    }
    if slots == 0 || uniform01(rng) * (slots as f64 + uniform_mass) < uniform_mass {
        return Ok(index_draw(rng, n));
    }
    let mut r = rng.random_range(0..slots);
    for (i, &d) in degree.iter().enumerate() {
        if r < u64::from(d) {
            return Ok(i);
        }
        r -= u64::from(d);
    }
    unreachable!("slot index below total degree")
}

/// Draw the next transition without applying it.
///
/// A loop edge has both endpoints equal, so `v_old = w` whatever the coin.
#[inline]
pub fn sample_event<R: Rng + ?Sized>(state: &MultigraphState, kappa: f64, rng: &mut R) -> Result<StepEvent> {
    let m = state.m();
    if m == 0 {
        return Err(Error::NoEdges);
    }
    let edge_slot = index_draw(rng, m);
    let end = (rng.next_u32() & 1) as u8;
    let slot = 2 * edge_slot + end as usize;
    let ends = state.ends();
    let v_old = ends[slot];
    let w = ends[slot ^ 1];
    let v_new = preferential_sample(state, kappa, rng);
    Ok(StepEvent {
        v_old,
        w,
        v_new,
        edge_slot,
        end,
    })
}

/// Apply a transition drawn from this state.
#[inline]
pub fn apply_event(state: &mut MultigraphState, event: &StepEvent) {
    debug_assert_eq!(state.ends()[event.endpoint_slot()], event.v_old);
    state.move_endpoint(event.endpoint_slot(), event.v_new);
    state.tick();
}

#[inline]
pub fn step<R: Rng + ?Sized>(state: &mut MultigraphState, params: &ChainParams, rng: &mut R) -> Result<StepEvent> {
    let ev = sample_event(state, params.kappa, rng)?;
    apply_event(state, &ev);
    Ok(ev)
}
