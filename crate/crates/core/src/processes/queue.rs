use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{poisson_pmf, queue_kernel, QueueKernelParams};
use crate::error::{Error, Result};
use crate::numeric::POLICY;
use crate::rngcore::{binomial_draw, poisson_draw, uniform01};

/// An M/M/inf queue: arrivals at rate `mu`, each customer served at rate 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueueState {
    pub count: u64,
    pub arrival_rate: f64,
    pub clock: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QueueTrajectory {
    /// Jump times, starting with `0`.
    pub times: Vec<f64>,
    /// Count after each jump, starting with the initial count.
    pub counts: Vec<u64>,
    pub t_end: f64,
}

impl QueueTrajectory {
    pub fn terminal(&self) -> u64 {
        *self.counts.last().expect("trajectory holds the initial state")
    }

    /// `(time, value)` rows.
    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut w = csv::Writer::from_path(path.as_ref())?;
        w.write_record(["time", "value"])?;
        for (t, c) in self.times.iter().zip(&self.counts) {
            w.write_record([t.to_string(), c.to_string()])?;
        }
        w.write_record([self.t_end.to_string(), self.terminal().to_string()])?;
        w.flush().map_err(|e| Error::io(path.as_ref(), e))
    }
}

/// Event-driven simulation: holding times are exponential with rate
/// `mu + count`, and a jump is an arrival with probability `mu / (mu + count)`.
pub fn queue_simulate<R: Rng + ?Sized>(h: u64, mu: f64, t_end: f64, rng: &mut R) -> Result<QueueTrajectory> {
    if !(mu >= 0.0 && mu.is_finite()) || !(t_end >= 0.0) {
        return Err(Error::param("queue simulation needs mu >= 0 and t_end >= 0"));
    }
    let mut state = QueueState {
        count: h,
        arrival_rate: mu,
        clock: 0.0,
    };
    let mut traj = QueueTrajectory {
        times: vec![0.0],
        counts: vec![h],
        t_end,
    };
    loop {
        let rate = state.arrival_rate + state.count as f64;
        if rate == 0.0 {
            break;
        }
        let hold = -(1.0 - uniform01(rng)).ln() / rate;
        if state.clock + hold > t_end {
            break;
        }
        state.clock += hold;
        if uniform01(rng) * rate < state.arrival_rate {
            state.count += 1;
        } else {
            state.count -= 1;
        }
        traj.times.push(state.clock);
        traj.counts.push(state.count);
    }
    Ok(traj)
}

/// Exact draw of the queue at time `t`: survivors `BIN(h, e^{-t})` plus
/// new arrivals `POI((1 - e^{-t}) mu)`.
pub fn queue_transition_sample<R: Rng + ?Sized>(h: u64, mu: f64, t: f64, rng: &mut R) -> Result<u64> {
    if !(t >= 0.0) || !(mu >= 0.0) {
        return Err(Error::param("queue transition needs t >= 0 and mu >= 0"));
    }
    let keep = (-t).exp();
    let gone = -(-t).exp_m1();
    Ok(binomial_draw(rng, h, keep)? + poisson_draw(rng, gone * mu)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingCheck {
    pub holds: bool,
    pub bound: f64,
    pub max_gap: f64,
    /// First `(l, |q - p|)` exceeding the bound.
    pub witness: Option<(u64, f64)>,
}

/// Check `|q(t, h, l, mu) - p(l, mu)| <= e^{-t} (h + mu)` at every `l`
/// where either law has mass above the series tolerance.
pub fn queue_mixing_bound_check(h: u64, mu: f64, t: f64) -> Result<MixingCheck> {
    let params = QueueKernelParams::new(t, h, mu)?;
    let bound = (-t).exp() * (h as f64 + mu);
    let mut max_gap: f64 = 0.0;
    let mut witness = None;
    let top = (h as f64 + mu + 40.0 * (h as f64 + mu).sqrt() + 40.0) as u64;
    for l in 0..=top {
        let q = queue_kernel(params, l);
        let p = poisson_pmf(l, mu);
        if q <= POLICY.series_tail && p <= POLICY.series_tail {
            continue;
        }
        let gap = (q - p).abs();
        max_gap = max_gap.max(gap);
        if gap > bound * (1.0 + 1e-12) + f64::EPSILON && witness.is_none() {
            witness = Some((l, gap));
        }
    }
    Ok(MixingCheck {
        holds: witness.is_none(),
        bound,
        max_gap,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::queue_kernel_law;
    use crate::harness::gof::{chi_square_gof, chi_square_two_sample, histogram};
    use crate::rngcore::RngStream;

    #[test]
    fn pure_death_empties_with_closed_form_probability() {
        let mut rng = RngStream::new(1, 0);
        let runs = 100_000;
        let empty = (0..runs)
            .filter(|_| queue_simulate(3, 0.0, 1.0, &mut rng).unwrap().terminal() == 0)
            .count();
        let want = (1.0 - (-1.0f64).exp()).powi(3);
        let sd = (want * (1.0 - want) / runs as f64).sqrt();
        assert!((empty as f64 / runs as f64 - want).abs() < 4.0 * sd);
    }

    #[test]
    fn empty_queue_without_arrivals_stays_empty() {
        let mut rng = RngStream::new(2, 0);
        let tr = queue_simulate(0, 0.0, 5.0, &mut rng).unwrap();
        assert_eq!(tr.counts, vec![0]);
        assert_eq!(queue_transition_sample(4, 1.0, 0.0, &mut rng).unwrap(), 4);
    }

    #[test]
    fn simulator_terminal_law_matches_kernel() {
        let mut rng = RngStream::new(3, 0);
        let params = QueueKernelParams::new(1.0, 5, 2.0).unwrap();
        let law = queue_kernel_law(params);
        let sim: Vec<u64> = (0..100_000)
            .map(|_| queue_simulate(5, 2.0, 1.0, &mut rng).unwrap().terminal())
            .collect();
        let rep = chi_square_gof("queue terminal", &histogram(sim.iter().copied(), law.len()), &law, 5.0).unwrap();
        assert!(rep.p_value > 0.01, "{rep:?}");
        let exact: Vec<u64> = (0..100_000)
            .map(|_| queue_transition_sample(5, 2.0, 1.0, &mut rng).unwrap())
            .collect();
        let rep = chi_square_two_sample("queue cross", &histogram(sim, 30), &histogram(exact, 30), 5.0).unwrap();
        assert!(rep.p_value > 0.01, "{rep:?}");
    }

    #[test]
    fn mixing_bound_examples() {
        assert!(queue_mixing_bound_check(3, 2.0, 1.0).unwrap().holds);
        for &t in &[0.0, 1.0, 7.0] {
            assert!(queue_mixing_bound_check(0, 0.0, t).unwrap().holds);
        }
    }
}
