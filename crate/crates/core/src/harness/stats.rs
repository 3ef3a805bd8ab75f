//! Small regression helpers for trend checks.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub dof: usize,
    /// Two-sided confidence interval for the slope.
    pub ci: (f64, f64),
    pub level: f64,
}

impl SlopeFit {
    pub fn ci_contains(&self, v: f64) -> bool {
        self.ci.0 <= v && v <= self.ci.1
    }
}

/// Ordinary least squares `y = a + b x` with a Student-t interval for `b`.
pub fn ols_slope(x: &[f64], y: &[f64], level: f64) -> Result<SlopeFit> {
    let n = x.len();
    if n != y.len() || n < 3 {
        return Err(Error::param("regression needs at least 3 paired points"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::param("confidence level must lie in (0, 1)"));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::param("regression needs distinct x values"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let dof = n - 2;
    let stderr = (rss / dof as f64 / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof as f64)
        .expect("dof >= 1")
        .inverse_cdf(0.5 + level / 2.0);
    Ok(SlopeFit { slope, intercept, stderr, dof, ci: (slope - t * stderr, slope + t * stderr), level })
}

/// Log-linear fit of a survival function: slope of `ln P(X > z)` in `z`
/// over the points where the empirical tail is positive.
pub fn log_tail_fit(samples: &[f64], grid: &[f64], level: f64) -> Result<SlopeFit> {
    let n = samples.len() as f64;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &z in grid {
        let tail = samples.iter().filter(|&&s| s > z).count() as f64 / n;
        if tail > 0.0 {
            xs.push(z);
            ys.push(tail.ln());
        }
    }
    ols_slope(&xs, &ys, level)
}
