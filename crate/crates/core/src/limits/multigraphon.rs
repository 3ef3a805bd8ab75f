use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::distributions::{poisson_pmf, queue_kernel, queue_kernel_law, QuantileDistribution, QueueKernelParams};
use crate::error::{Error, Result};
use crate::multigraph::MultigraphState;
use crate::numeric::{integrate, POLICY};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Variant {
    Step,
    PoissonProfile,
    EdgeEvolved { t: f64 },
    DegreeEvolved { kappa: f64, t: f64 },
    StationaryHat { kappa: f64 },
}

/// A symmetric kernel `W(x, y, k)`: for each pair of latent positions a
/// law on edge multiplicities, supported on even `k` when `x = y`.
///
/// Multiplicities are in adjacency units, so a diagonal value `k` means
/// `k / 2` loops.
#[derive(Debug, Clone)]
pub enum Multigraphon {
    Step(StepKernel),
    Poisson(PoissonKernel),
    EdgeEvolved(EdgeEvolvedKernel),
}

/// Step function of a finite multigraph: `W(x, y, k) = 1[B(ceil(nx), ceil(ny)) = k]`.
#[derive(Debug, Clone)]
pub struct StepKernel {
    n: usize,
    m: usize,
    degree: Vec<u32>,
    adjacency: Arc<HashMap<(u32, u32), u32>>,
}

impl StepKernel {
    #[inline]
    pub fn cell(&self, x: f64) -> usize {
        ((x * self.n as f64).ceil() as usize).clamp(1, self.n) - 1
    }

    /// Adjacency entry between cells (twice the loop count on the diagonal).
    #[inline]
    pub fn entry(&self, a: usize, b: usize) -> u32 {
        let key = (a.min(b) as u32, a.max(b) as u32);
        let mult = self.adjacency.get(&key).copied().unwrap_or(0);
        if a == b {
            2 * mult
        } else {
            mult
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> &[u32] {
        &self.degree
    }
}

/// Degree profile of a Poisson multigraphon.
#[derive(Debug, Clone)]
pub enum Profile {
    Constant(f64),
    Quantile(Arc<QuantileDistribution>),
}

impl Profile {
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Profile::Constant(c) => *c,
            Profile::Quantile(d) => d.inverse(x),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Profile::Constant(c) => *c,
            Profile::Quantile(d) => d.mean(),
        }
    }
}

/// `W(x, y, k) = p(k, phi(x) phi(y) / rho)` off the diagonal and
/// `1[k even] p(k/2, phi(x)^2 / (2 rho))` on it.
#[derive(Debug, Clone)]
pub struct PoissonKernel {
    pub(crate) profile: Profile,
    pub(crate) rho: f64,
    pub(crate) variant: Variant,
}

impl PoissonKernel {
    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    #[inline]
    pub fn rate(&self, px: f64, py: f64, diagonal: bool) -> f64 {
        if diagonal {
            px * py / (2.0 * self.rho)
        } else {
            px * py / self.rho
        }
    }
}

/// `W_t(x, y, k) = sum_h W(x, y, h) q(t, h, k, D(x) D(y) / rho)`, with the
/// diagonal evaluated in half units at half the rate.
#[derive(Debug, Clone)]
pub struct EdgeEvolvedKernel {
    base: Arc<Multigraphon>,
    t: f64,
    rho: f64,
}

impl EdgeEvolvedKernel {
    pub fn base(&self) -> &Multigraphon {
        &self.base
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn rate(&self, x: f64, y: f64, diagonal: bool) -> f64 {
        let dd = self.base.degree(x) * self.base.degree(y) / self.rho;
        if diagonal {
            dd / 2.0
        } else {
            dd
        }
    }
}

/// Truncated Poisson pmf on `0..`, stopping once the tail is below the
/// series tolerance.
pub(crate) fn poisson_law(lambda: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut mass = 0.0;
    let mut k = 0u64;
    loop {
        let p = poisson_pmf(k, lambda);
        out.push(p);
        mass += p;
        k += 1;
        if k as f64 > lambda && (1.0 - mass < POLICY.series_tail || k as f64 > lambda + 40.0 * (lambda.sqrt() + 1.0)) {
            return out;
        }
    }
}

/// Spread a half-unit law onto adjacency units (even indices only).
pub(crate) fn double_support(half: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; 2 * half.len().max(1) - 1];
    for (j, &p) in half.iter().enumerate() {
        out[2 * j] = p;
    }
    out
}

impl Multigraphon {
    /// Step embedding of a finite multigraph.
    pub fn step(state: &MultigraphState) -> Self {
        Multigraphon::Step(StepKernel {
            n: state.n(),
            m: state.m(),
            degree: state.degree().to_vec(),
            adjacency: Arc::new(state.pair_counts()),
        })
    }

    /// Every entry Poisson(`lambda`) off the diagonal and loops Poisson(`lambda / 2`).
    pub fn constant_poisson(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::param("constant Poisson multigraphon needs lambda > 0"));
        }
        Ok(Multigraphon::Poisson(PoissonKernel {
            profile: Profile::Constant(lambda),
            rho: lambda,
            variant: Variant::PoissonProfile,
        }))
    }

    /// Poisson multigraphon with profile `F^{-1}` and normalising density `rho`.
    pub fn poisson_profile(profile: QuantileDistribution, rho: f64) -> Result<Self> {
        Self::poisson_with(profile, rho, Variant::PoissonProfile)
    }

    pub(crate) fn poisson_with(profile: QuantileDistribution, rho: f64, variant: Variant) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::param("rho must be positive"));
        }
        Ok(Multigraphon::Poisson(PoissonKernel {
            profile: Profile::Quantile(Arc::new(profile)),
            rho,
            variant,
        }))
    }

    /// `W_t` on the edge time scale.
    pub fn edge_evolved(base: &Multigraphon, t: f64) -> Result<Self> {
        if !(t >= 0.0) || t.is_nan() {
            return Err(Error::param(format!("time must be >= 0, got {t}")));
        }
        let rho = base.edge_density()?;
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::param("edge evolution needs 0 < rho(W) < inf"));
        }
        Ok(Multigraphon::EdgeEvolved(EdgeEvolvedKernel {
            base: Arc::new(base.clone()),
            t,
            rho,
        }))
    }

    pub fn variant(&self) -> Variant {
        match self {
            Multigraphon::Step(_) => Variant::Step,
            Multigraphon::Poisson(p) => p.variant,
            Multigraphon::EdgeEvolved(e) => Variant::EdgeEvolved { t: e.t },
        }
    }

    /// `W(x, y, k)`; the diagonal branch applies when `x == y`.
    pub fn eval(&self, x: f64, y: f64, k: u64) -> f64 {
        match self {
            Multigraphon::Step(s) => f64::from(u8::from(u64::from(s.entry(s.cell(x), s.cell(y))) == k)),
            Multigraphon::Poisson(p) => {
                let (px, py) = (p.profile.value(x), p.profile.value(y));
                if x == y {
                    if k % 2 == 1 {
                        0.0
                    } else {
                        poisson_pmf(k / 2, p.rate(px, py, true))
                    }
                } else {
                    poisson_pmf(k, p.rate(px, py, false))
                }
            }
            Multigraphon::EdgeEvolved(e) => {
                let diagonal = x == y;
                if diagonal && k % 2 == 1 {
                    return 0.0;
                }
                let mu = e.rate(x, y, diagonal);
                match e.base.as_ref() {
                    Multigraphon::Step(s) => {
                        let h = u64::from(s.entry(s.cell(x), s.cell(y)));
                        let (h, k) = if diagonal { (h / 2, k / 2) } else { (h, k) };
                        queue_kernel(QueueKernelParams::new(e.t, h, mu).expect("valid"), k)
                    }
                    base => {
                        let law = base.entry_law(x, y);
                        law.iter()
                            .enumerate()
                            .filter(|(_, &w)| w > 0.0)
                            .map(|(h, &w)| {
                                let (h, k) = if diagonal { (h as u64 / 2, k / 2) } else { (h as u64, k) };
                                w * queue_kernel(QueueKernelParams::new(e.t, h, mu).expect("valid"), k)
                            })
                            .sum()
                    }
                }
            }
        }
    }

    /// The law `k -> W(x, y, k)` truncated where the tail is below `1e-12`.
    pub fn entry_law(&self, x: f64, y: f64) -> Vec<f64> {
        match self {
            Multigraphon::Step(s) => {
                let h = s.entry(s.cell(x), s.cell(y)) as usize;
                let mut v = vec![0.0; h + 1];
                v[h] = 1.0;
                v
            }
            Multigraphon::Poisson(p) => {
                let (px, py) = (p.profile.value(x), p.profile.value(y));
                if x == y {
                    double_support(&poisson_law(p.rate(px, py, true)))
                } else {
                    poisson_law(p.rate(px, py, false))
                }
            }
            Multigraphon::EdgeEvolved(e) => {
                let diagonal = x == y;
                let mu = e.rate(x, y, diagonal);
                let evolve = |base_law: &[f64], half: bool, mu: f64| -> Vec<f64> {
                    let mut out: Vec<f64> = Vec::new();
                    for (h, &w) in base_law.iter().enumerate() {
                        if w == 0.0 || (half && h % 2 == 1) {
                            continue;
                        }
                        let h = if half { h / 2 } else { h };
                        let q = queue_kernel_law(QueueKernelParams::new(e.t, h as u64, mu).expect("valid"));
                        if q.len() > out.len() {
                            out.resize(q.len(), 0.0);
                        }
                        for (k, p) in q.iter().enumerate() {
                            out[k] += w * p;
                        }
                    }
                    if half {
                        double_support(&out)
                    } else {
                        out
                    }
                };
                evolve(&e.base.entry_law(x, y), diagonal, mu)
            }
        }
    }

    /// `D(W, x) = integral over y of sum_k k W(x, y, k)`.
    pub fn degree(&self, x: f64) -> f64 {
        match self {
            Multigraphon::Step(s) => s.degree[s.cell(x)] as f64 / s.n as f64,
            Multigraphon::Poisson(p) => p.profile.value(x) * p.profile.mean() / p.rho,
            Multigraphon::EdgeEvolved(e) => match e.base.as_ref() {
                Multigraphon::Step(s) => {
                    let a = s.cell(x);
                    let xa = (a as f64 + 0.5) / s.n as f64;
                    (0..s.n)
                        .map(|b| {
                            // off the diagonal point inside the own cell
                            let y = (b as f64 + if a == b { 0.25 } else { 0.5 }) / s.n as f64;
                            law_mean(&self.entry_law(xa, y))
                        })
                        .sum::<f64>()
                        / s.n as f64
                }
                _ => integrate(&|y: f64| law_mean(&self.entry_law(x, y)), 0.0, 1.0),
            },
        }
    }

    /// `rho(W) = integral of D(W, x) dx`.
    pub fn edge_density(&self) -> Result<f64> {
        let rho = match self {
            Multigraphon::Step(s) => 2.0 * s.m as f64 / (s.n as f64 * s.n as f64),
            Multigraphon::Poisson(p) => p.profile.mean() * p.profile.mean() / p.rho,
            Multigraphon::EdgeEvolved(e) => match e.base.as_ref() {
                Multigraphon::Step(s) => {
                    (0..s.n).map(|a| self.degree((a as f64 + 0.5) / s.n as f64)).sum::<f64>() / s.n as f64
                }
                _ => integrate(&|x: f64| self.degree(x), 0.0, 1.0),
            },
        };
        if rho.is_finite() {
            Ok(rho)
        } else {
            Err(Error::OutsideStableRange("edge density diverges".into()))
        }
    }

    /// `F_0(z) = |{x : D(W, x) <= z}|`: the empirical law of the degree
    /// multiset for step kernels, the scaled profile for Poisson kernels,
    /// and a `2^14`-point grid otherwise.
    pub fn degree_distribution(&self) -> Result<QuantileDistribution> {
        match self {
            Multigraphon::Step(s) => {
                let v: Vec<f64> = s.degree.iter().map(|&d| d as f64 / s.n as f64).collect();
                QuantileDistribution::empirical(&v)
            }
            Multigraphon::Poisson(p) => match &p.profile {
                Profile::Constant(c) => Ok(QuantileDistribution::point_mass(c * c / p.rho)),
                Profile::Quantile(d) if (d.mean() - p.rho).abs() <= 1e-12 * p.rho => Ok((**d).clone()),
                Profile::Quantile(_) => self.grid_degree_distribution(),
            },
            Multigraphon::EdgeEvolved(e) => match e.base.as_ref() {
                Multigraphon::Step(_) => e.base.degree_distribution(),
                _ => self.grid_degree_distribution(),
            },
        }
    }

    fn grid_degree_distribution(&self) -> Result<QuantileDistribution> {
        let g = POLICY.degree_grid;
        let v: Vec<f64> = (0..g).map(|i| self.degree((i as f64 + 0.5) / g as f64)).collect();
        QuantileDistribution::empirical(&v)
    }

    /// Representative positions: cell midpoints for step-based kernels,
    /// `q` mid-quantile points otherwise.
    pub(crate) fn positions(&self, q: usize) -> Vec<f64> {
        let n = match self {
            Multigraphon::Step(s) => s.n,
            Multigraphon::EdgeEvolved(e) => match e.base.as_ref() {
                Multigraphon::Step(s) => s.n,
                _ => q,
            },
            _ => q,
        };
        (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
    }
}

pub(crate) fn law_mean(law: &[f64]) -> f64 {
    law.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
}
