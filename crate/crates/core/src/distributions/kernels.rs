//! The M/M/inf transition kernel and the CIR transition density.

use serde::{Deserialize, Serialize};

use super::pmf::{binomial_pmf_pq, gamma_pdf, poisson_pmf};
use super::quantile::QuantileDistribution;
use crate::error::{Error, Result};
use crate::numeric::POLICY;

/// Start an M/M/inf queue with `h` customers, arrival rate `mu` and unit
/// service rate, and look at it after time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueueKernelParams {
    pub t: f64,
    pub h: u64,
    pub mu: f64,
}

impl QueueKernelParams {
    pub fn new(t: f64, h: u64, mu: f64) -> Result<Self> {
        if !(t >= 0.0) || !(mu >= 0.0) || !mu.is_finite() {
            return Err(Error::param(format!("queue kernel needs t >= 0, mu >= 0 (t={t}, mu={mu})")));
        }
        Ok(Self { t, h, mu })
    }

    /// Survival probability `e^{-t}` and its complement, without cancellation.
    fn survival(&self) -> (f64, f64) {
        if self.t.is_infinite() {
            return (0.0, 1.0);
        }
        ((-self.t).exp(), -(-self.t).exp_m1())
    }
}

/// `q(t, h, k, mu)`: law of `BIN(h, e^{-t}) + POI((1 - e^{-t}) mu)` at `k`.
pub fn queue_kernel(params: QueueKernelParams, k: u64) -> f64 {
    let (keep, gone) = params.survival();
    let arrivals = gone * params.mu;
    (0..=k.min(params.h))
        .map(|l| binomial_pmf_pq(l, params.h, keep, gone) * poisson_pmf(k - l, arrivals))
        .sum()
}

/// Full law of the queue after time `t`, truncated once the remaining mass
/// drops below the series tolerance.
pub fn queue_kernel_law(params: QueueKernelParams) -> Vec<f64> {
    let (_, gone) = params.survival();
    let mean = params.h as f64 + gone * params.mu;
    let mut out = Vec::new();
    let mut mass = 0.0;
    let mut k = 0u64;
    loop {
        let p = queue_kernel(params, k);
        out.push(p);
        mass += p;
        k += 1;
        if (k as f64) > mean && (1.0 - mass < POLICY.series_tail || k as f64 > mean + 40.0 * (mean.sqrt() + 1.0)) {
            break;
        }
    }
    out
}

/// Parameters of `dZ = (kappa - (kappa / rho) Z) dt + sqrt(2 Z) dB`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirParams {
    pub kappa: f64,
    pub rho: f64,
}

impl CirParams {
    pub fn new(kappa: f64, rho: f64) -> Result<Self> {
        if !(kappa > 0.0 && rho > 0.0) || !kappa.is_finite() || !rho.is_finite() {
            return Err(Error::param(format!("CIR needs kappa, rho > 0 (kappa={kappa}, rho={rho})")));
        }
        Ok(Self { kappa, rho })
    }

    /// Mean-reversion speed `kappa / rho`.
    pub fn alpha(&self) -> f64 {
        self.kappa / self.rho
    }

    /// `alpha / (exp(alpha t) - 1)`.
    pub fn tau(&self, t: f64) -> f64 {
        let a = self.alpha();
        a / (a * t).exp_m1()
    }

    /// `E[Z_t | Z_0 = z] = rho + (z - rho) e^{-alpha t}`.
    pub fn mean_at(&self, z: f64, t: f64) -> f64 {
        self.rho + (z - self.rho) * (-self.alpha() * t).exp()
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && !t.is_nan() {
        Ok(())
    } else {
        Err(Error::param(format!("transition time must be > 0, got {t}")))
    }
}

/// Poisson-mixed gamma transition density `f(t, z, y)`.
///
/// The series over the Poisson index is summed from a few standard
/// deviations below the Poisson mean until the collected weight reaches
/// `1 - 1e-12`. Mixing rates `z * tau(t)` above
/// [`NumericPolicy::max_mixing_rate`](crate::numeric::NumericPolicy) (very
/// small `t`) are refused.
pub fn cir_transition_density(params: CirParams, t: f64, z: f64, y: f64) -> Result<f64> {
    check_time(t)?;
    if !(z >= 0.0) {
        return Err(Error::param(format!("CIR start must be >= 0, got {z}")));
    }
    let tau = params.tau(t);
    let lambda = z * tau;
    if lambda > POLICY.max_mixing_rate {
        return Err(Error::OutsideStableRange(format!(
            "mixing rate z*tau = {lambda:.3e} at t = {t:e}; decrease resolution or increase t"
        )));
    }
    Ok(series(params.kappa, tau + params.alpha(), lambda, y))
}

fn series(kappa: f64, rate: f64, lambda: f64, y: f64) -> f64 {
    if lambda == 0.0 {
        return gamma_pdf(y, kappa, rate);
    }
    let spread = lambda.sqrt();
    let lo = (lambda - 12.0 * spread - 12.0).max(0.0).floor() as u64;
    let hi = (lambda + 40.0 * spread + 100.0) as u64;
    let mut weight = 0.0;
    let mut acc = 0.0;
    for i in lo..=hi {
        let w = poisson_pmf(i, lambda);
        weight += w;
        acc += w * gamma_pdf(y, kappa + i as f64, rate);
        if i as f64 > lambda && weight >= 1.0 - POLICY.series_tail {
            break;
        }
    }
    acc
}

/// `f(t, y) = integral of f(t, z, y) dF_0(z)`, with `F_0` reduced to atoms
/// once at construction.
#[derive(Debug, Clone)]
pub struct CirMixture {
    params: CirParams,
    t: f64,
    atoms: Vec<(f64, f64)>,
}

impl CirMixture {
    pub fn new(params: CirParams, initial: &QuantileDistribution, t: f64) -> Result<Self> {
        check_time(t)?;
        let atoms = initial.atoms(POLICY.quantile_atoms);
        let tau = params.tau(t);
        if let Some(&(z, _)) = atoms.last() {
            if z * tau > POLICY.max_mixing_rate {
                return Err(Error::OutsideStableRange(format!(
                    "mixing rate z*tau = {:.3e} at t = {t:e}",
                    z * tau
                )));
            }
        }
        Ok(Self { params, t, atoms })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn params(&self) -> CirParams {
        self.params
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn density(&self, y: f64) -> f64 {
        let tau = self.params.tau(self.t);
        let rate = tau + self.params.alpha();
        self.atoms
            .iter()
            .map(|&(z, w)| w * series(self.params.kappa, rate, z * tau, y))
            .sum()
    }

    /// Mean of the mixture, from the exact conditional mean.
    pub fn mean(&self) -> f64 {
        self.atoms
            .iter()
            .map(|&(z, w)| w * self.params.mean_at(z, self.t))
            .sum()
    }

    /// CDF and generalized inverse of the mixture density.
    pub fn distribution(&self) -> Result<QuantileDistribution> {
        let me = self.clone();
        super::quantile::cdf_and_inverse(move |y| me.density(y), POLICY.inverse_tol)
    }
}

/// Convenience wrapper: one evaluation of `f(t, y)`.
pub fn mixture_density(params: CirParams, initial: &QuantileDistribution, t: f64, y: f64) -> Result<f64> {
    Ok(CirMixture::new(params, initial, t)?.density(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::pmf::binomial_pmf;
    use crate::distributions::oracle::{exp_sinh, simpson};

    #[test]
    fn queue_kernel_normalised() {
        for &(t, h, mu) in &[(0.1, 0, 2.0), (1.0, 5, 2.0), (3.0, 12, 0.5), (0.01, 3, 40.0)] {
            let p = QueueKernelParams::new(t, h, mu).unwrap();
            let s: f64 = queue_kernel_law(p).iter().sum();
            assert!((s - 1.0).abs() < 1e-10, "{t} {h} {mu}: {s}");
        }
    }

    #[test]
    fn queue_kernel_matches_bruteforce_convolution() {
        for &(t, h, mu) in &[(0.4, 6, 1.3), (2.0, 9, 3.0)] {
            let p = QueueKernelParams::new(t, h, mu).unwrap();
            let keep = (-t).exp();
            for k in 0..25 {
                let mut brute = 0.0;
                for l in 0..=h {
                    for j in 0..=k {
                        if l + j == k {
                            brute += binomial_pmf(l, h, keep) * poisson_pmf(j, (1.0 - keep) * mu);
                        }
                    }
                }
                assert!((queue_kernel(p, k) - brute).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn queue_kernel_limits() {
        for k in 0..10 {
            let near0 = queue_kernel(QueueKernelParams::new(1e-12, 4, 2.5).unwrap(), k);
            assert!((near0 - if k == 4 { 1.0 } else { 0.0 }).abs() < 1e-10);
            let zero = queue_kernel(QueueKernelParams::new(0.0, 4, 2.5).unwrap(), k);
            assert_eq!(zero, if k == 4 { 1.0 } else { 0.0 });
            let far = queue_kernel(QueueKernelParams::new(60.0, 4, 2.5).unwrap(), k);
            assert!((far - poisson_pmf(k, 2.5)).abs() < 1e-12);
            let empty = queue_kernel(QueueKernelParams::new(0.7, 0, 2.5).unwrap(), k);
            let lam = (1.0 - (-0.7f64).exp()) * 2.5;
            assert!((empty - poisson_pmf(k, lam)).abs() < 1e-15);
        }
    }

    #[test]
    fn cir_density_integrates_to_one_and_has_the_right_mean() {
        let params = CirParams::new(2.0, 1.5).unwrap();
        for &(t, z) in &[(0.2, 0.5), (1.0, 3.0), (0.05, 1.0)] {
            let f = |y: f64| cir_transition_density(params, t, z, y).unwrap();
            let total = exp_sinh(&f);
            assert!((total - 1.0).abs() < 1e-6, "t={t} z={z} total={total}");
            let mean = exp_sinh(&|y: f64| y * f(y));
            assert!((mean - params.mean_at(z, t)).abs() < 1e-5, "mean {mean}");
        }
    }

    #[test]
    fn cir_density_limits() {
        let params = CirParams::new(2.0, 1.5).unwrap();
        for i in 1..40 {
            let y = 0.1 * i as f64;
            let stationary = gamma_pdf(y, 2.0, 2.0 / 1.5);
            let late = cir_transition_density(params, 60.0, 2.3, y).unwrap();
            assert!((late - stationary).abs() < 1e-6);
            let tau = params.tau(0.3);
            let at_zero = cir_transition_density(params, 0.3, 0.0, y).unwrap();
            assert!((at_zero - gamma_pdf(y, 2.0, tau + params.alpha())).abs() < 1e-15);
        }
        assert!(cir_transition_density(params, 0.0, 1.0, 1.0).is_err());
        assert!(cir_transition_density(params, 1e-9, 10.0, 1.0).is_err());
    }

    #[test]
    fn mixture_of_point_mass_is_transition_density() {
        let params = CirParams::new(1.5, 1.0).unwrap();
        let point = QuantileDistribution::point_mass(0.8);
        for i in 1..20 {
            let y = 0.2 * i as f64;
            let a = mixture_density(params, &point, 0.7, y).unwrap();
            let b = cir_transition_density(params, 0.7, 0.8, y).unwrap();
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn mixture_integrates_to_one() {
        let params = CirParams::new(2.0, 1.0).unwrap();
        let f0 = QuantileDistribution::from_atoms(&[(0.5, 0.5), (1.5, 0.5)]).unwrap();
        let mix = CirMixture::new(params, &f0, 0.5).unwrap();
        let total = simpson(&|y| mix.density(y), 1e-9, 30.0, 200_000);
        assert!((total - 1.0).abs() < 1e-5, "{total}");
    }

    #[test]
    fn gamma_profile_is_stationary_under_the_mixture() {
        let (kappa, rho) = (2.0, 1.0);
        let params = CirParams::new(kappa, rho).unwrap();
        let f0 = QuantileDistribution::gamma(kappa, kappa / rho).unwrap();
        for &t in &[0.3, 1.0, 4.0] {
            let mix = CirMixture::new(params, &f0, t).unwrap();
            let mut worst: f64 = 0.0;
            for i in 0..200 {
                let y = 0.01 + (10.0 * rho - 0.01) * i as f64 / 199.0;
                worst = worst.max((mix.density(y) - gamma_pdf(y, kappa, kappa / rho)).abs());
            }
            assert!(worst < 1e-2, "t={t} worst={worst}");
        }
    }
}
