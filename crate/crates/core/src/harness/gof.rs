//! Chi-square and Kolmogorov-Smirnov tests.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Significance level used when a report is built without an explicit one.
pub const DEFAULT_ALPHA: f64 = 0.01;

/// A merged group of histogram cells `lo..=hi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledCell {
    pub lo: usize,
    pub hi: usize,
    pub observed: f64,
    pub expected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub name: String,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub pooled: Vec<PooledCell>,
    pub alpha: f64,
    pub pass: bool,
}

impl GofReport {
    /// Re-evaluate the pass flag against `alpha` (pass means `p > alpha`).
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self.pass = self.p_value > alpha;
        self
    }

    /// Report for a test that should reject: passes iff `p < alpha`.
    pub fn expect_rejection(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self.pass = self.p_value < alpha;
        self
    }
}

/// Upper tail of the chi-square law with `dof` degrees of freedom.
pub fn chi_square_sf(statistic: f64, dof: usize) -> f64 {
    if statistic <= 0.0 {
        return 1.0;
    }
    match ChiSquared::new(dof as f64) {
        Ok(law) => law.sf(statistic).clamp(0.0, 1.0),
        Err(_) => f64::NAN,
    }
}

/// Greedy left-to-right pooling: a group closes once its weight reaches
/// `min`; a light final group joins its left neighbour.
fn pool(weights: &[f64], min: f64) -> Vec<(usize, usize)> {
    let mut groups = Vec::new();
    let mut start = 0;
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if acc >= min {
            groups.push((start, i));
            start = i + 1;
            acc = 0.0;
        }
    }
    if start < weights.len() {
        match groups.last_mut() {
            Some(last) => last.1 = weights.len() - 1,
            None => groups.push((start, weights.len() - 1)),
        }
    }
    groups
}

/// Pearson goodness of fit of a count histogram against cell
/// probabilities. Cells beyond either vector count as zero; cells whose
/// expected count is below `pooling_min` are merged with neighbours.
pub fn chi_square_gof(name: &str, observed: &[u64], expected: &[f64], pooling_min: f64) -> Result<GofReport> {
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(Error::param("chi-square test needs at least one observation"));
    }
    let mass: f64 = expected.iter().sum();
    if (mass - 1.0).abs() > 1e-6 || expected.iter().any(|p| *p < -1e-12) {
        return Err(Error::param(format!("expected probabilities sum to {mass}")));
    }
    let len = observed.len().max(expected.len());
    let n = total as f64;
    let exp_counts: Vec<f64> = (0..len)
        .map(|i| n * expected.get(i).copied().unwrap_or(0.0).max(0.0))
        .collect();
    let groups = pool(&exp_counts, pooling_min);
    let mut pooled = Vec::with_capacity(groups.len());
    let mut statistic = 0.0;
    for (lo, hi) in groups {
        let o: f64 = (lo..=hi).map(|i| observed.get(i).copied().unwrap_or(0) as f64).sum();
        let e: f64 = exp_counts[lo..=hi].iter().sum();
        if e > 0.0 {
            statistic += (o - e) * (o - e) / e;
        } else if o > 0.0 {
            statistic = f64::INFINITY;
        }
        pooled.push(PooledCell {
            lo,
            hi,
            observed: o,
            expected: e,
        });
    }
    if pooled.len() < 2 {
        return Err(Error::TooFewCells(pooled.len()));
    }
    let dof = pooled.len() - 1;
    let p_value = if statistic.is_finite() { chi_square_sf(statistic, dof) } else { 0.0 };
    Ok(GofReport {
        name: name.to_string(),
        statistic,
        dof,
        p_value,
        pooled,
        alpha: DEFAULT_ALPHA,
        pass: p_value > DEFAULT_ALPHA,
    })
}

/// Chi-square test of homogeneity for two count histograms (a 2 x K
/// table). Pooling is driven by the smaller of the two expected counts.
pub fn chi_square_two_sample(name: &str, a: &[u64], b: &[u64], pooling_min: f64) -> Result<GofReport> {
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    if na == 0 || nb == 0 {
        return Err(Error::param("two-sample chi-square needs observations on both sides"));
    }
    let len = a.len().max(b.len());
    let (fa, fb) = (na as f64, nb as f64);
    let nt = fa + fb;
    let get = |v: &[u64], i: usize| v.get(i).copied().unwrap_or(0) as f64;
    let min_side = fa.min(fb) / nt;
    let weights: Vec<f64> = (0..len).map(|i| (get(a, i) + get(b, i)) * min_side).collect();
    let groups = pool(&weights, pooling_min);
    if groups.len() < 2 {
        return Err(Error::TooFewCells(groups.len()));
    }
    let mut statistic = 0.0;
    let mut pooled = Vec::with_capacity(groups.len());
    for (lo, hi) in groups {
        let oa: f64 = (lo..=hi).map(|i| get(a, i)).sum();
        let ob: f64 = (lo..=hi).map(|i| get(b, i)).sum();
        let col = oa + ob;
        let ea = col * fa / nt;
        let eb = col * fb / nt;
        if col > 0.0 {
            statistic += (oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb;
        }
        pooled.push(PooledCell {
            lo,
            hi,
            observed: oa,
            expected: ea,
        });
    }
    let dof = pooled.len() - 1;
    let p_value = chi_square_sf(statistic, dof);
    Ok(GofReport {
        name: name.to_string(),
        statistic,
        dof,
        p_value,
        pooled,
        alpha: DEFAULT_ALPHA,
        pass: p_value > DEFAULT_ALPHA,
    })
}

/// Limiting Kolmogorov distribution tail `P(K > lambda)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // small-lambda (theta function) form
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * lambda * lambda);
        let mut s = 0.0;
        for j in 1..=12 {
            let k = (2 * j - 1) as f64;
            s += (-k * k * c).exp();
        }
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let mut s = 0.0;
        for j in 1..=100 {
            let k = j as f64;
            let term = (-2.0 * k * k * lambda * lambda).exp();
            s += if j % 2 == 1 { term } else { -term };
            if term < 1e-18 {
                break;
            }
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}

fn ks_p(d: f64, n_eff: f64) -> f64 {
    let sq = n_eff.sqrt();
    kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d)
}

/// One-sample KS distance `sup |F_emp - F|` with an asymptotic p-value.
/// `cdf` should be continuous.
pub fn ks_statistic(samples: &[f64], cdf: &dyn Fn(f64) -> f64) -> Result<(f64, f64)> {
    if samples.len() < 10 {
        return Err(Error::param("KS test needs at least 10 samples"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok((d, ks_p(d, n)))
}

/// Two-sample KS distance with an asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.len() < 10 || b.len() < 10 {
        return Err(Error::param("KS test needs at least 10 samples per side"));
    }
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok((d, ks_p(d, na * nb / (na + nb))))
}

/// Turn a slice of samples into a count histogram over `0..len` (the last
/// cell absorbs everything at or above `len - 1`).
pub fn histogram(values: impl IntoIterator<Item = u64>, len: usize) -> Vec<u64> {
    let mut h = vec![0u64; len.max(1)];
    let last = h.len() - 1;
    for v in values {
        h[(v as usize).min(last)] += 1;
    }
    h
}
