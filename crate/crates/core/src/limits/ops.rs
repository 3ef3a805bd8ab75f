use std::collections::HashMap;
use std::path::Path;

use rand::Rng;
use serde::Serialize;

use super::multigraphon::{double_support, law_mean, poisson_law, Multigraphon, PoissonKernel, Variant};
use crate::distributions::{CirMixture, CirParams, QuantileDistribution};
use crate::error::{Error, Result};
use crate::multigraph::{FiniteMotif, MultigraphState, SquareMatrix};
use crate::rngcore::uniform01;

pub fn step_multigraphon(state: &MultigraphState) -> Multigraphon {
    Multigraphon::step(state)
}

pub fn degree_function(w: &Multigraphon, x: f64) -> f64 {
    w.degree(x)
}

pub fn edge_density(w: &Multigraphon) -> Result<f64> {
    w.edge_density()
}

/// `W_t(x, y, k)` on the edge time scale.
pub fn w_t_eval(w: &Multigraphon, t: f64, x: f64, y: f64, k: u64) -> Result<f64> {
    Ok(Multigraphon::edge_evolved(w, t)?.eval(x, y, k))
}

/// The degree-scale limit `W-hat_t` for a given `F_0`, with `F_t` and its
/// inverse tabulated once.
#[derive(Debug, Clone)]
pub struct DegreeScaleLimit {
    kappa: f64,
    rho: f64,
    t: f64,
    ft: QuantileDistribution,
    w: Multigraphon,
}

impl DegreeScaleLimit {
    /// `t = 0` is refused: the limit is only claimed for `t > 0`.
    pub fn new(kappa: f64, rho: f64, f0: &QuantileDistribution, t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::param(format!("degree-scale limit needs t > 0, got {t}")));
        }
        let mix = CirMixture::new(CirParams::new(kappa, rho)?, f0, t)?;
        let ft = mix.distribution()?;
        let w = Multigraphon::poisson_with(ft.clone(), rho, Variant::DegreeEvolved { kappa, t })?;
        Ok(Self { kappa, rho, t, ft, w })
    }

    pub fn eval(&self, x: f64, y: f64, k: u64) -> f64 {
        self.w.eval(x, y, k)
    }

    /// `F_t`, the law of a rescaled degree at time `t`.
    pub fn ft(&self) -> &QuantileDistribution {
        &self.ft
    }

    pub fn multigraphon(&self) -> &Multigraphon {
        &self.w
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

/// One evaluation of `W-hat_t(x, y, k)`. Builds `F_t` from scratch; use
/// [`DegreeScaleLimit`] for repeated evaluation.
pub fn w_hat_t_eval(kappa: f64, rho: f64, f0: &QuantileDistribution, t: f64, x: f64, y: f64, k: u64) -> Result<f64> {
    Ok(DegreeScaleLimit::new(kappa, rho, f0, t)?.eval(x, y, k))
}

/// Poisson multigraphon with the `Gamma(kappa, kappa / rho)` quantile
/// function as its profile.
pub fn stationary_hat(kappa: f64, rho: f64) -> Result<Multigraphon> {
    let g = QuantileDistribution::gamma(kappa, kappa / rho)?;
    Multigraphon::poisson_with(g, rho, Variant::StationaryHat { kappa })
}

pub fn w_hat_infty_eval(kappa: f64, rho: f64, x: f64, y: f64, k: u64) -> Result<f64> {
    Ok(stationary_hat(kappa, rho)?.eval(x, y, k))
}

/// Latent positions together with the sampled adjacency matrix.
#[derive(Debug, Clone, Serialize)]
pub struct WRandomSample {
    pub latents: Vec<f64>,
    pub matrix: SquareMatrix,
}

impl WRandomSample {
    pub fn to_state(&self) -> Result<MultigraphState> {
        state_from_adjacency(&self.matrix)
    }
}

/// Multigraph with the given adjacency matrix (diagonal = twice the loops).
pub fn state_from_adjacency(a: &SquareMatrix) -> Result<MultigraphState> {
    if !a.is_adjacency() {
        return Err(Error::InvalidMotif("adjacency must be symmetric with even diagonal".into()));
    }
    let k = a.k();
    let mut ends = Vec::new();
    for i in 0..k {
        for _ in 0..a.get(i, i) / 2 {
            ends.extend([i as u32, i as u32]);
        }
        for j in i + 1..k {
            for _ in 0..a.get(i, j) {
                ends.extend([i as u32, j as u32]);
            }
        }
    }
    MultigraphState::from_ends(k, ends)
}

#[inline]
fn inverse_cdf_draw<R: Rng + ?Sized>(law: &[f64], rng: &mut R) -> u32 {
    let u = uniform01(rng);
    let mut cum = 0.0;
    for (k, &p) in law.iter().enumerate() {
        cum += p;
        if u < cum {
            return k as u32;
        }
    }
    // u fell in the truncated tail; return the last supported index
    law.iter().rposition(|&p| p > 0.0).unwrap_or(0) as u32
}

fn profile_values(p: &PoissonKernel, xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| p.profile().value(x)).collect()
}

/// A `W`-random multigraph on `k` vertices: i.i.d. uniform latents, then
/// conditionally independent entries drawn from `W(U_i, U_j, .)` by
/// inverse CDF over `k`.
pub fn sample_w_random<R: Rng + ?Sized>(w: &Multigraphon, k: usize, rng: &mut R) -> WRandomSample {
    let latents: Vec<f64> = (0..k).map(|_| uniform01(rng)).collect();
    let mut matrix = SquareMatrix::zeros(k);
    match w {
        Multigraphon::Poisson(p) => {
            let phi = profile_values(p, &latents);
            for i in 0..k {
                let loops = inverse_cdf_draw(&poisson_law(p.rate(phi[i], phi[i], true)), rng);
                matrix.set(i, i, 2 * loops);
                for j in i + 1..k {
                    let v = inverse_cdf_draw(&poisson_law(p.rate(phi[i], phi[j], false)), rng);
                    matrix.set(i, j, v);
                    matrix.set(j, i, v);
                }
            }
        }
        _ => {
            for i in 0..k {
                for j in i..k {
                    let v = inverse_cdf_draw(&w.entry_law(latents[i], latents[j]), rng);
                    matrix.set(i, j, v);
                    matrix.set(j, i, v);
                }
            }
        }
    }
    WRandomSample { latents, matrix }
}

/// Monte Carlo estimate of `t_=(A, W)`, the probability that a
/// `W`-random sample on `k` vertices equals `A`.
pub fn motif_density_w<R: Rng + ?Sized>(
    a: &FiniteMotif,
    w: &Multigraphon,
    samples: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(Error::param("need at least one sample"));
    }
    let k = a.k();
    let mut xs = vec![0.0; k];
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        for x in xs.iter_mut() {
            *x = uniform01(rng);
        }
        let mut prod = 1.0;
        match w {
            Multigraphon::Poisson(p) => {
                let phi = profile_values(p, &xs);
                'outer: for i in 0..k {
                    for j in i..k {
                        let entry = u64::from(a.get(i, j));
                        let v = if i == j {
                            crate::distributions::poisson_pmf(entry / 2, p.rate(phi[i], phi[i], true))
                        } else {
                            crate::distributions::poisson_pmf(entry, p.rate(phi[i], phi[j], false))
                        };
                        prod *= v;
                        if prod == 0.0 {
                            break 'outer;
                        }
                    }
                }
            }
            _ => {
                'outer2: for i in 0..k {
                    for j in i..k {
                        prod *= w.eval(xs[i], xs[j], u64::from(a.get(i, j)));
                        if prod == 0.0 {
                            break 'outer2;
                        }
                    }
                }
            }
        }
        sum += prod;
        sum_sq += prod * prod;
    }
    let s = samples as f64;
    let mean = sum / s;
    let var = if samples > 1 {
        ((sum_sq - s * mean * mean) / (s - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok((mean, (var / s).sqrt()))
}

fn add_law(acc: &mut Vec<f64>, law: &[f64], weight: f64) {
    if law.len() > acc.len() {
        acc.resize(law.len(), 0.0);
    }
    for (a, p) in acc.iter_mut().zip(law) {
        *a += weight * p;
    }
}

/// Fold everything at or above `kmax` into the last cell.
fn cap(mut law: Vec<f64>, kmax: usize) -> Vec<f64> {
    if law.len() > kmax + 1 {
        let tail: f64 = law[kmax..].iter().sum();
        law.truncate(kmax + 1);
        law[kmax] = tail;
    } else {
        law.resize(kmax + 1, 0.0);
    }
    law
}

/// Law of one off-diagonal entry of a `W`-random multigraph, with cells
/// `0..kmax` and a tail cell at `kmax`.
///
/// For kernels built on a finite graph the two latent positions are two
/// distinct uniformly chosen cells, the exact analogue of watching two
/// distinct vertices of a relabeled graph. Otherwise the positions run
/// over a grid of mid-quantile points.
pub fn pair_law(w: &Multigraphon, kmax: usize) -> Vec<f64> {
    let step = match w {
        Multigraphon::Step(s) => Some(s),
        Multigraphon::EdgeEvolved(e) => match e.base() {
            Multigraphon::Step(s) => Some(s),
            _ => None,
        },
        _ => None,
    };
    if let Some(s) = step {
        let n = s.n();
        // group unordered cell pairs by (entry, degree, degree), keeping a representative
        let mut groups: HashMap<(u32, u32, u32), (u64, u32, u32)> = HashMap::new();
        let deg = s.degree();
        for a in 0..n as u32 {
            for b in a + 1..n as u32 {
                let h = s.entry(a as usize, b as usize);
                let (da, db) = (deg[a as usize], deg[b as usize]);
                groups.entry((h, da.min(db), da.max(db))).or_insert((0, a, b)).0 += 1;
            }
        }
        let pairs = (n * (n - 1) / 2) as f64;
        let mut acc = Vec::new();
        let mut keys: Vec<_> = groups.into_iter().collect();
        keys.sort_unstable();
        for ((h, _, _), (count, a, b)) in keys {
            let law = match w {
                Multigraphon::Step(_) => {
                    let mut l = vec![0.0; h as usize + 1];
                    l[h as usize] = 1.0;
                    l
                }
                _ => w.entry_law((a as f64 + 0.5) / n as f64, (b as f64 + 0.5) / n as f64),
            };
            add_law(&mut acc, &law, count as f64 / pairs);
        }
        return cap(acc, kmax);
    }
    let q = 256;
    let xs = w.positions(q);
    let mut acc = Vec::new();
    match w {
        Multigraphon::Poisson(p) => {
            let phi = profile_values(p, &xs);
            let weight = 1.0 / (q * q) as f64;
            for i in 0..q {
                add_law(&mut acc, &poisson_law(p.rate(phi[i], phi[i], false)), weight);
                for j in i + 1..q {
                    add_law(&mut acc, &poisson_law(p.rate(phi[i], phi[j], false)), 2.0 * weight);
                }
            }
        }
        _ => {
            let weight = 1.0 / (q * (q - 1)) as f64;
            for i in 0..q {
                for j in i + 1..q {
                    add_law(&mut acc, &w.entry_law(xs[i], xs[j]), 2.0 * weight);
                }
            }
        }
    }
    cap(acc, kmax)
}

/// Law of a diagonal entry (adjacency units, even support) at a uniform
/// latent position; cells `0..kmax` plus a tail cell.
pub fn loop_law(w: &Multigraphon, kmax: usize) -> Vec<f64> {
    let xs = w.positions(1024);
    let weight = 1.0 / xs.len() as f64;
    let mut acc = Vec::new();
    match w {
        Multigraphon::Poisson(p) => {
            for &x in &xs {
                let v = p.profile().value(x);
                let half = poisson_law(p.rate(v, v, true));
                add_law(&mut acc, &double_support(&half), weight);
            }
        }
        _ => {
            let mut memo: HashMap<(u32, u32), Vec<f64>> = HashMap::new();
            for &x in &xs {
                match step_cell_key(w, x) {
                    Some(key) => {
                        let law = memo.entry(key).or_insert_with(|| w.entry_law(x, x));
                        add_law(&mut acc, law, weight);
                    }
                    None => add_law(&mut acc, &w.entry_law(x, x), weight),
                }
            }
        }
    }
    cap(acc, kmax)
}

/// (degree, diagonal entry) of the cell holding `x`, for step-based kernels.
fn step_cell_key(w: &Multigraphon, x: f64) -> Option<(u32, u32)> {
    let s = match w {
        Multigraphon::Step(s) => s,
        Multigraphon::EdgeEvolved(e) => match e.base() {
            Multigraphon::Step(s) => s,
            _ => return None,
        },
        _ => return None,
    };
    let a = s.cell(x);
    Some((s.degree()[a], s.entry(a, a)))
}

/// Mean of a truncated law.
pub fn mean_of(law: &[f64]) -> f64 {
    law_mean(law)
}

/// `(x, y, W(x, y, k))` on a uniform `grid x grid` set of cell midpoints.
pub fn export_slice_csv<P: AsRef<Path>>(w: &Multigraphon, k: u64, grid: usize, path: P) -> Result<()> {
    let mut out = csv::Writer::from_path(path.as_ref())?;
    out.write_record(["x", "y", "value"])?;
    for i in 0..grid {
        let x = (i as f64 + 0.5) / grid as f64;
        for j in 0..grid {
            let y = (j as f64 + 0.5) / grid as f64;
            out.write_record([x.to_string(), y.to_string(), w.eval(x, y, k).to_string()])?;
        }
    }
    out.flush().map_err(|e| Error::io(path.as_ref(), e))
}
