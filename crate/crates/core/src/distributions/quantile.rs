//! Distributions on `[0, inf)` given by a CDF and its generalized inverse
//! `F^{-1}(x) = min { z : F(z) >= x }`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Gamma};

use crate::error::{Error, Result};
use crate::numeric::{bisect, integrate, integrate_from_zero, integrate_to_infinity, POLICY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Representation {
    /// Finitely many atoms (a step-function CDF).
    Empirical,
    /// Tabulated from a density by quadrature.
    Smooth,
    /// Closed-form gamma law.
    Gamma,
}

#[derive(Clone)]
pub struct QuantileDistribution {
    repr: Repr,
}

#[derive(Clone)]
enum Repr {
    Empirical { values: Vec<f64>, cum: Vec<f64> },
    Smooth(Arc<Tabulated>),
    Gamma { shape: f64, rate: f64, law: Gamma },
}

type Density = dyn Fn(f64) -> f64 + Send + Sync;

struct Tabulated {
    density: Box<Density>,
    upper: f64,
    cell: f64,
    /// Unnormalised cumulative mass at each cell boundary.
    cum: Vec<f64>,
    total: f64,
    mean: f64,
    tol: f64,
}

impl Tabulated {
    fn partial(&self, i: usize, z: f64) -> f64 {
        let lo = i as f64 * self.cell;
        if i == 0 {
            integrate_from_zero(&*self.density, z)
        } else {
            integrate(&*self.density, lo, z)
        }
    }

    fn cdf(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        if z >= self.upper {
            return (self.cum[self.cum.len() - 1] / self.total).min(1.0);
        }
        let i = ((z / self.cell) as usize).min(self.cum.len() - 2);
        ((self.cum[i] + self.partial(i, z)) / self.total).clamp(0.0, 1.0)
    }

    fn inverse(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let target = x * self.total;
        let last = self.cum.len() - 1;
        if target >= self.cum[last] {
            return self.upper;
        }
        // largest i with cum[i] < target
        let i = self.cum.partition_point(|&c| c < target).saturating_sub(1).min(last - 1);
        let lo = i as f64 * self.cell;
        let hi = lo + self.cell;
        bisect(|z| self.cum[i] + self.partial(i, z) >= target, lo, hi, self.tol)
    }
}

impl QuantileDistribution {
    pub fn point_mass(z: f64) -> Self {
        Self {
            repr: Repr::Empirical {
                values: vec![z],
                cum: vec![1.0],
            },
        }
    }

    /// Equal-weight empirical distribution of `samples`.
    pub fn empirical(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() || samples.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::param("empirical distribution needs finite non-negative samples"));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mut values = Vec::new();
        let mut cum = Vec::new();
        for (idx, &v) in sorted.iter().enumerate() {
            if values.last() == Some(&v) {
                *cum.last_mut().unwrap() = (idx + 1) as f64 / n;
            } else {
                values.push(v);
                cum.push((idx + 1) as f64 / n);
            }
        }
        Ok(Self {
            repr: Repr::Empirical { values, cum },
        })
    }

    /// Distribution with atoms `(value, weight)`; weights are normalised.
    pub fn from_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if atoms.is_empty() || !(total > 0.0) || atoms.iter().any(|a| a.1 < 0.0 || !(a.0 >= 0.0)) {
            return Err(Error::param("atoms need non-negative values and positive total weight"));
        }
        let mut sorted = atoms.to_vec();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut values = Vec::new();
        let mut cum = Vec::new();
        let mut acc = 0.0;
        for (v, w) in sorted {
            acc += w / total;
            if values.last() == Some(&v) {
                *cum.last_mut().unwrap() = acc;
            } else {
                values.push(v);
                cum.push(acc);
            }
        }
        *cum.last_mut().unwrap() = 1.0;
        Ok(Self {
            repr: Repr::Empirical { values, cum },
        })
    }

    /// Gamma law with shape `shape` and rate `rate`.
    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        let law = Gamma::new(shape, rate).map_err(|e| Error::param(e.to_string()))?;
        Ok(Self {
            repr: Repr::Gamma { shape, rate, law },
        })
    }

    pub fn representation(&self) -> Representation {
        match self.repr {
            Repr::Empirical { .. } => Representation::Empirical,
            Repr::Smooth(_) => Representation::Smooth,
            Repr::Gamma { .. } => Representation::Gamma,
        }
    }

    pub fn cdf(&self, z: f64) -> f64 {
        match &self.repr {
            Repr::Empirical { values, cum } => {
                let j = values.partition_point(|&v| v <= z);
                if j == 0 {
                    0.0
                } else {
                    cum[j - 1]
                }
            }
            Repr::Smooth(tab) => tab.cdf(z),
            Repr::Gamma { law, .. } => {
                if z <= 0.0 {
                    0.0
                } else {
                    law.cdf(z)
                }
            }
        }
    }

    /// `min { z : F(z) >= x }`; `x <= 0` maps to the lower end of the support.
    pub fn inverse(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::Empirical { values, cum } => {
                let j = cum.partition_point(|&c| c < x).min(values.len() - 1);
                values[j]
            }
            Repr::Smooth(tab) => tab.inverse(x),
            Repr::Gamma { law, shape, rate } => {
                if x <= 0.0 {
                    return 0.0;
                }
                if x >= 1.0 {
                    return f64::INFINITY;
                }
                let mut hi = (shape / rate).max(1e-300);
                while law.cdf(hi) < x {
                    hi *= 2.0;
                }
                bisect(|z| law.cdf(z) >= x, 0.0, hi, POLICY.inverse_tol)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match &self.repr {
            Repr::Empirical { values, cum } => {
                let mut prev = 0.0;
                let mut m = 0.0;
                for (v, c) in values.iter().zip(cum) {
                    m += v * (c - prev);
                    prev = *c;
                }
                m
            }
            Repr::Smooth(tab) => tab.mean,
            Repr::Gamma { shape, rate, .. } => shape / rate,
        }
    }

    /// Lower and upper end of the (numerical) support.
    pub fn support(&self) -> (f64, f64) {
        match &self.repr {
            Repr::Empirical { values, .. } => (values[0], values[values.len() - 1]),
            Repr::Smooth(tab) => (0.0, tab.upper),
            Repr::Gamma { .. } => (0.0, f64::INFINITY),
        }
    }

    /// Atoms `(value, weight)`: the atoms themselves for an empirical law,
    /// otherwise `q` mid-quantile atoms `F^{-1}((j - 1/2) / q)`.
    pub fn atoms(&self, q: usize) -> Vec<(f64, f64)> {
        match &self.repr {
            Repr::Empirical { values, cum } => {
                let mut prev = 0.0;
                values
                    .iter()
                    .zip(cum)
                    .map(|(&v, &c)| {
                        let w = c - prev;
                        prev = c;
                        (v, w)
                    })
                    .collect()
            }
            _ => {
                let w = 1.0 / q as f64;
                (0..q).map(|j| (self.inverse((j as f64 + 0.5) * w), w)).collect()
            }
        }
    }

    /// Empirical discretisation at `q` mid-quantile atoms.
    pub fn discretize(&self, q: usize) -> Self {
        match self.repr {
            Repr::Empirical { .. } => self.clone(),
            _ => Self::from_atoms(&self.atoms(q)).expect("quantile atoms are valid"),
        }
    }
}

impl fmt::Debug for QuantileDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Empirical { values, .. } => f
                .debug_struct("QuantileDistribution::Empirical")
                .field("atoms", &values.len())
                .finish(),
            Repr::Smooth(tab) => f
                .debug_struct("QuantileDistribution::Smooth")
                .field("upper", &tab.upper)
                .field("cells", &(tab.cum.len() - 1))
                .field("mean", &tab.mean)
                .finish(),
            Repr::Gamma { shape, rate, .. } => f
                .debug_struct("QuantileDistribution::Gamma")
                .field("shape", shape)
                .field("rate", rate)
                .finish(),
        }
    }
}

/// Tabulate the CDF of a density on `[0, inf)` and wrap it with a
/// bisection inverse of stopping width `tol`.
///
/// The right end of the table is the first power of two beyond which the
/// density carries less than `1e-13` mass. The first cell is integrated
/// after an `x = u^2` substitution so `y^{kappa - 1}` singularities at the
/// origin are handled.
pub fn cdf_and_inverse<F>(density: F, tol: f64) -> Result<QuantileDistribution>
where
    F: Fn(f64) -> f64 + Send + Sync + 'static,
{
    let mut upper = 1.0;
    let mut tail = integrate_to_infinity(&density, upper);
    let mut guard = 0;
    while tail > 1e-13 {
        upper *= 2.0;
        tail = integrate_to_infinity(&density, upper);
        guard += 1;
        if guard > 80 || !tail.is_finite() {
            return Err(Error::Normalization { total: f64::NAN });
        }
    }
    let cells = POLICY.cdf_cells;
    let cell = upper / cells as f64;
    let mut cum = Vec::with_capacity(cells + 1);
    cum.push(0.0);
    let mut acc = 0.0;
    let mut first_moment = 0.0;
    let weighted = |z: f64| z * density(z);
    for i in 0..cells {
        let (lo, hi) = (i as f64 * cell, (i + 1) as f64 * cell);
        if i == 0 {
            acc += integrate_from_zero(&density, hi);
            first_moment += integrate_from_zero(&weighted, hi);
        } else {
            acc += integrate(&density, lo, hi);
            first_moment += integrate(&weighted, lo, hi);
        }
        cum.push(acc);
    }
    let total = acc + tail;
    if !total.is_finite() || (total - 1.0).abs() > POLICY.normalization_tol {
        return Err(Error::Normalization { total });
    }
    let tab = Tabulated {
        density: Box::new(density),
        upper,
        cell,
        cum,
        total,
        mean: first_moment / total,
        tol,
    };
    Ok(QuantileDistribution {
        repr: Repr::Smooth(Arc::new(tab)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::gamma_pdf;

    #[test]
    fn empirical_generalized_inverse() {
        let d = QuantileDistribution::empirical(&[2.0, 1.0, 1.0, 3.0]).unwrap();
        assert_eq!(d.cdf(0.5), 0.0);
        assert_eq!(d.cdf(1.0), 0.5);
        assert_eq!(d.cdf(2.5), 0.75);
        assert_eq!(d.inverse(0.5), 1.0);
        assert_eq!(d.inverse(0.50001), 2.0);
        assert_eq!(d.inverse(1.0), 3.0);
        assert_eq!(d.mean(), 1.75);
    }

    #[test]
    fn exponential_inverse_closed_form() {
        let beta = 1.7;
        let d = cdf_and_inverse(move |y| gamma_pdf(y, 1.0, beta), 1e-12).unwrap();
        for i in 1..100 {
            let x = i as f64 / 100.0;
            let want = -(1.0 - x).ln() / beta;
            assert!((d.inverse(x) - want).abs() < 1e-6, "x={x}");
        }
        assert!((d.mean() - 1.0 / beta).abs() < 1e-9);
    }

    #[test]
    fn inverse_identity_and_monotone() {
        let d = cdf_and_inverse(|y| gamma_pdf(y, 0.5, 0.5), 1e-12).unwrap();
        for &z in &[0.01, 0.3, 1.0, 4.0, 9.0] {
            assert!((d.inverse(d.cdf(z)) - z).abs() < 1e-6, "z={z}");
        }
        let mut prev = 0.0;
        for i in 1..1000 {
            let v = d.inverse(i as f64 / 1000.0);
            assert!(v >= prev);
            prev = v;
        }
        let g = QuantileDistribution::gamma(0.5, 0.5).unwrap();
        for i in 1..20 {
            let x = i as f64 / 20.0;
            assert!((d.inverse(x) - g.inverse(x)).abs() < 1e-7);
        }
    }

    #[test]
    fn normalization_failure_detected() {
        let r = cdf_and_inverse(|y| 2.0 * gamma_pdf(y, 2.0, 1.0), 1e-10);
        assert!(matches!(r, Err(Error::Normalization { .. })));
    }

    #[test]
    fn atoms_of_smooth_law() {
        let g = QuantileDistribution::gamma(2.0, 2.0).unwrap();
        let atoms = g.atoms(1024);
        let mean: f64 = atoms.iter().map(|a| a.0 * a.1).sum();
        assert!((mean - 1.0).abs() < 2e-3);
        assert!(atoms.windows(2).all(|w| w[0].0 <= w[1].0));
    }
}
