//! Initial graphs for the experiments.

use rand::Rng;

use crate::error::{Error, Result};
use crate::limits::{sample_w_random, Multigraphon};
use crate::multigraph::MultigraphState;

/// Two blocks of sizes `ceil(n/2)` and `floor(n/2)`; distinct vertices in
/// block 1 share `c11` edges, across blocks `c12`, in block 2 `c22`. No loops.
pub fn two_block(n: usize, c11: u32, c12: u32, c22: u32) -> Result<MultigraphState> {
    if n < 2 {
        return Err(Error::param("two-block graph needs n >= 2"));
    }
    let half = n.div_ceil(2);
    let mut ends = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let c = match (i < half, j < half) {
                (true, true) => c11,
                (false, false) => c22,
                _ => c12,
            };
            for _ in 0..c {
                ends.extend([i as u32, j as u32]);
            }
        }
    }
    if ends.is_empty() {
        return Err(Error::NoEdges);
    }
    MultigraphState::from_ends(n, ends)
}

/// `m` edges laid out by circulant shifts `i ~ i + s`, so degrees differ by
/// at most two. Labels are shuffled afterwards.
pub fn near_regular<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<MultigraphState> {
    if n < 2 || m == 0 {
        return Err(Error::param("near-regular graph needs n >= 2 and m >= 1"));
    }
    let shifts = n / 2;
    let mut ends = Vec::with_capacity(2 * m);
    let mut s = 1;
    'fill: loop {
        // shift n/2 on an even cycle only has n/2 distinct edges
        let len = if 2 * s == n { n / 2 } else { n };
        for i in 0..len {
            if ends.len() == 2 * m {
                break 'fill;
            }
            ends.extend([i as u32, ((i + s) % n) as u32]);
        }
        s = s % shifts + 1;
    }
    Ok(MultigraphState::from_ends(n, ends)?.shuffle_labels(rng))
}

/// `W`-random multigraph on `n` vertices.
pub fn w_random<R: Rng + ?Sized>(w: &Multigraphon, n: usize, rng: &mut R) -> Result<MultigraphState> {
    sample_w_random(w, n, rng).to_state()
}

/// Poisson multigraph with off-diagonal mean `rho` (loops at half rate).
pub fn erdos_renyi<R: Rng + ?Sized>(n: usize, rho: f64, rng: &mut R) -> Result<MultigraphState> {
    w_random(&Multigraphon::constant_poisson(rho)?, n, rng)
}

/// Empirical averages of `exp(lambda B(i,j))` over pairs `i < j` and over
/// the diagonal, `B` the adjacency matrix.
pub fn moment_condition_check(state: &MultigraphState, lambda: f64) -> (f64, f64) {
    let n = state.n();
    let pairs = n * n.saturating_sub(1) / 2;
    let (mut off, mut diag) = (0.0, 0.0);
    for (&(a, b), &c) in &state.pair_counts() {
        if a == b {
            diag += (lambda * 2.0 * c as f64).exp() - 1.0;
        } else {
            off += (lambda * c as f64).exp() - 1.0;
        }
    }
    let off = if pairs == 0 { 1.0 } else { 1.0 + off / pairs as f64 };
    let diag = if n == 0 { 1.0 } else { 1.0 + diag / n as f64 };
    (off, diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rngcore::RngStream;

    #[test]
    fn two_block_degrees() {
        let s = two_block(400, 2, 1, 0).unwrap();
        assert_eq!(s.m(), 79_800);
        assert_eq!(s.degree()[0], 2 * 199 + 200);
        assert_eq!(s.degree()[399], 200);
        assert_eq!(s.pair_counts().keys().filter(|(a, b)| a == b).count(), 0);
    }

    #[test]
    fn near_regular_is_nearly_regular() {
        let mut rng = RngStream::new(1, 0);
        for (n, m) in [(10, 7), (10, 45), (11, 200), (300, 44_850)] {
            let s = near_regular(n, m, &mut rng).unwrap();
            assert_eq!(s.m(), m);
            let lo = *s.degree().iter().min().unwrap();
            let hi = *s.degree().iter().max().unwrap();
            assert!(hi - lo <= 2, "n={n} m={m}: {lo}..{hi}");
            s.check_consistency().unwrap();
        }
    }

    #[test]
    fn moment_check_examples() {
        let empty = MultigraphState::from_ends(5, vec![]).unwrap();
        assert_eq!(moment_condition_check(&empty, 1.0), (1.0, 1.0));
        // simple path 1-2-3: two of three pairs carry one edge
        let path = MultigraphState::from_edge_list(3, &[(1, 2), (2, 3)]).unwrap();
        let (off, diag) = moment_condition_check(&path, 1.0);
        assert!((off - (1.0 + 2.0 * std::f64::consts::E) / 3.0).abs() < 1e-12);
        assert!(off <= std::f64::consts::E);
        assert_eq!(diag, 1.0);
        // one loop: B(1,1) = 2
        let lp = MultigraphState::from_edge_list(2, &[(1, 1)]).unwrap();
        assert!((moment_condition_check(&lp, 0.5).1 - (1.0 + 1.0f64.exp()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn erdos_renyi_moments_stable_in_n() {
        // direct computation: E exp(0.1 X) for X ~ POI(rho) is exp(rho (e^0.1 - 1))
        let rho = 1.0;
        let target = (rho * (0.1f64.exp() - 1.0)).exp();
        let mut rng = RngStream::new(2, 0);
        for n in [100, 200] {
            let s = erdos_renyi(n, rho, &mut rng).unwrap();
            let (off, diag) = moment_condition_check(&s, 0.1);
            assert!((off - target).abs() < 0.01, "n={n}: {off} vs {target}");
            // loops: B = 2 POI(rho/2)
            let dtarget = (rho / 2.0 * (0.2f64.exp() - 1.0)).exp();
            assert!((diag - dtarget).abs() < 0.05, "n={n}: {diag} vs {dtarget}");
        }
    }
}
