//! Scalar kernels: Poisson, binomial and gamma laws, the M/M/inf
//! transition kernel, CIR transition densities, and distributions given by
//! a CDF with its generalized inverse.

mod kernels;
mod pmf;
mod quantile;

#[cfg(test)]
pub(crate) mod oracle;

use std::path::Path;

pub use kernels::{
    cir_transition_density, mixture_density, queue_kernel, queue_kernel_law, CirMixture, CirParams,
    QueueKernelParams,
};
pub use pmf::{binomial_pmf, binomial_pmf_pq, gamma_pdf, poisson_pmf};
pub use quantile::{cdf_and_inverse, QuantileDistribution, Representation};

use crate::error::{Error, Result};

/// Write `(y, density, cdf)` rows for plotting.
pub fn export_density_csv<P: AsRef<Path>>(
    path: P,
    dist: &QuantileDistribution,
    density: &dyn Fn(f64) -> f64,
    grid: &[f64],
) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["y", "density", "cdf"])?;
    for &y in grid {
        w.write_record([y.to_string(), density(y).to_string(), dist.cdf(y).to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
