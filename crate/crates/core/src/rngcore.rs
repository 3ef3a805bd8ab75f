//! Seedable, splittable random streams and the scalar draws built on them.
//!
//! A stream is a ChaCha8 keystream keyed by the master seed; the 64-bit
//! ChaCha stream word carries the stream id. Two streams with the same
//! `(seed, id)` emit identical sequences, and replica farms can derive
//! their streams without coordination.

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identity of a random stream, recorded in every report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamId {
    pub seed: u64,
    pub stream: u64,
}

#[derive(Debug, Clone)]
pub struct RngStream {
    id: StreamId,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            id: StreamId { seed, stream },
            inner,
        }
    }

    /// Stream for replica `replica` of seed slot `slot` under `seed`.
    pub fn replica(seed: u64, slot: u32, replica: u32) -> Self {
        Self::new(seed, (u64::from(slot) << 32) | u64::from(replica))
    }

    /// A child stream keyed by this stream's identity and `salt`.
    ///
    /// Children of different parents or different salts never share a key.
    pub fn child(&self, salt: u64) -> Self {
        let key = self
            .id
            .seed
            .rotate_left(17)
            .wrapping_add(self.id.stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
            ^ salt.wrapping_mul(0xD1B5_4A32_D192_ED03);
        Self::new(key, salt)
    }

    pub fn id(&self) -> StreamId {
        self.id
    }
}

impl RngCore for RngStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Uniform draw on `[0, 1)` with 53 random bits.
#[inline]
pub fn uniform01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn poisson_draw<R: Rng + ?Sized>(rng: &mut R, lam: f64) -> Result<u64> {
    if !(lam >= 0.0) || !lam.is_finite() {
        return Err(Error::param(format!("poisson rate must be finite and >= 0, got {lam}")));
    }
    if lam == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(lam).map_err(|e| Error::param(e.to_string()))?;
    Ok(dist.sample(rng) as u64)
}

/// Gamma draw with shape `alpha` and rate `beta` (density `g(x, alpha, beta)`).
///
/// Valid for every `alpha > 0`, including shapes below one.
pub fn gamma_draw<R: Rng + ?Sized>(rng: &mut R, alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha > 0.0 && beta > 0.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::param(format!(
            "gamma needs shape > 0 and rate > 0, got ({alpha}, {beta})"
        )));
    }
    let dist = Gamma::new(alpha, 1.0 / beta).map_err(|e| Error::param(e.to_string()))?;
    Ok(dist.sample(rng))
}

pub fn binomial_draw<R: Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> Result<u64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("binomial p must lie in [0,1], got {p}")));
    }
    let dist = Binomial::new(n, p).map_err(|e| Error::param(e.to_string()))?;
    Ok(dist.sample(rng))
}

pub fn categorical_draw<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> Result<usize> {
    let dist = WeightedIndex::new(weights).map_err(|e| Error::param(e.to_string()))?;
    Ok(dist.sample(rng))
}

/// Uniform index in `0..len`; `len` must be positive.
#[inline]
pub fn index_draw<R: Rng + ?Sized>(rng: &mut R, len: usize) -> usize {
    rng.random_range(0..len)
}
