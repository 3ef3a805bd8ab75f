use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::distributions::CirParams;
use crate::error::{Error, Result};
use crate::rngcore::{gamma_draw, poisson_draw};

/// Exact draw of `Z_t` given `Z_0 = z`: a Poisson(`z tau`) index `i`, then
/// `Gamma(kappa + i, tau + alpha)`.
pub fn cir_sample_exact<R: Rng + ?Sized>(params: CirParams, z: f64, t: f64, rng: &mut R) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::param(format!("CIR transition needs t > 0, got {t}")));
    }
    if !(z >= 0.0) {
        return Err(Error::param(format!("CIR start must be >= 0, got {z}")));
    }
    let tau = params.tau(t);
    let i = poisson_draw(rng, z * tau)?;
    gamma_draw(rng, params.kappa + i as f64, tau + params.alpha())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EulerNoise {
    Brownian,
    /// Drop the diffusion term and integrate the drift ODE only.
    DriftOnly,
}

/// Full-truncation Euler scheme for `dZ = (kappa - alpha Z) dt + sqrt(2 Z) dB`:
/// the raw iterate may go negative, but both coefficients see `max(Z, 0)`.
/// Returns `max(Z_T, 0)`.
pub fn cir_euler<R: Rng + ?Sized>(
    params: CirParams,
    z: f64,
    t_end: f64,
    dt: f64,
    noise: EulerNoise,
    rng: &mut R,
) -> Result<f64> {
    Ok(*cir_euler_path(params, z, t_end, dt, noise, 0, rng)?.last().expect("path is non-empty"))
}

/// Like [`cir_euler`] but keeping every `keep_every`-th value (`0` keeps
/// only the endpoint). Values are truncated at zero.
pub fn cir_euler_path<R: Rng + ?Sized>(
    params: CirParams,
    z: f64,
    t_end: f64,
    dt: f64,
    noise: EulerNoise,
    keep_every: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(dt > 0.0) || !(t_end >= 0.0) || !(z >= 0.0) {
        return Err(Error::param("Euler scheme needs dt > 0, t_end >= 0, z >= 0"));
    }
    let steps = (t_end / dt).round() as u64;
    let h = if steps > 0 { t_end / steps as f64 } else { 0.0 };
    let sq = h.sqrt();
    let alpha = params.alpha();
    let mut x = z;
    let mut out = vec![z];
    for s in 1..=steps {
        let xp = x.max(0.0);
        let mut next = x + (params.kappa - alpha * xp) * h;
        if noise == EulerNoise::Brownian {
            let g: f64 = StandardNormal.sample(rng);
            next += (2.0 * xp).sqrt() * sq * g;
        }
        x = next;
        if keep_every > 0 && s % keep_every as u64 == 0 && s != steps {
            out.push(x.max(0.0));
        }
    }
    if keep_every == 0 {
        out.clear();
    }
    out.push(x.max(0.0));
    Ok(out)
}
