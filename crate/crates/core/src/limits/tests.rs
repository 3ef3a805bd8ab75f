use super::*;
use crate::distributions::{poisson_pmf, QuantileDistribution};
use crate::harness::gof::{chi_square_gof, histogram};
use crate::multigraph::{FiniteMotif, MultigraphState};
use crate::numeric::integrate;
use crate::rngcore::RngStream;

fn grid() -> Vec<f64> {
    vec![0.03, 0.2, 0.37, 0.5, 0.61, 0.8, 0.97]
}

fn check_axioms(w: &Multigraphon, tol: f64) {
    for &x in &grid() {
        for &y in &grid() {
            let law = w.entry_law(x, y);
            let total: f64 = law.iter().sum();
            assert!((total - 1.0).abs() <= tol, "sum {total} at ({x},{y}) {:?}", w.variant());
            for k in 0..law.len() as u64 {
                assert_eq!(w.eval(x, y, k), w.eval(y, x, k));
            }
            if x == y {
                for k in (1..law.len() as u64).step_by(2) {
                    assert_eq!(w.eval(x, x, k), 0.0);
                }
            }
        }
    }
}

fn two_block_state() -> MultigraphState {
    // 6 vertices: block {1,2,3} heavy, {4,5,6} light
    let mut pairs = Vec::new();
    for i in 1..=6 {
        for j in i + 1..=6 {
            let c = match (i <= 3, j <= 3) {
                (true, true) => 2,
                (true, false) | (false, true) => 1,
                _ => 0,
            };
            for _ in 0..c {
                pairs.push((i, j));
            }
        }
    }
    pairs.push((1, 1));
    MultigraphState::from_edge_list(6, &pairs).unwrap()
}

#[test]
fn step_kernel_cells() {
    let s = MultigraphState::from_edge_list(2, &[(1, 2)]).unwrap();
    let w = step_multigraphon(&s);
    assert_eq!(w.eval(0.25, 0.75, 1), 1.0);
    assert_eq!(w.eval(0.25, 0.75, 0), 0.0);
    assert_eq!(w.eval(0.25, 0.25, 1), 0.0);
    assert_eq!(edge_density(&w).unwrap(), 0.5);
    let g = two_block_state();
    let w = step_multigraphon(&g);
    assert_eq!(edge_density(&w).unwrap(), 2.0 * g.m() as f64 / 36.0);
    for i in 0..6 {
        let x = (i as f64 + 0.5) / 6.0;
        assert_eq!(degree_function(&w, x), g.degree()[i] as f64 / 6.0);
    }
    check_axioms(&w, 0.0);
}

#[test]
fn constant_poisson_degree_and_density() {
    let w = Multigraphon::constant_poisson(1.7).unwrap();
    for &x in &grid() {
        assert!((degree_function(&w, x) - 1.7).abs() < 1e-15);
    }
    let rho = edge_density(&w).unwrap();
    assert!((rho - 1.7).abs() < 1e-15);
    let quad = integrate(&|x: f64| degree_function(&w, x), 0.0, 1.0);
    assert!((quad - rho).abs() < 1e-8);
    check_axioms(&w, 1e-8);
}

#[test]
fn edge_evolved_limits_and_degree_preservation() {
    let g = two_block_state();
    let w = step_multigraphon(&g);
    let rho = edge_density(&w).unwrap();
    for &(x, y) in &[(0.1, 0.3), (0.1, 0.9), (0.7, 0.95), (0.4, 0.4)] {
        for k in 0..8 {
            assert!((w_t_eval(&w, 0.0, x, y, k).unwrap() - w.eval(x, y, k)).abs() < 1e-15);
            let mu = degree_function(&w, x) * degree_function(&w, y) / rho;
            let late = w_t_eval(&w, 1e3, x, y, k).unwrap();
            let want = if x == y {
                if k % 2 == 0 {
                    poisson_pmf(k / 2, mu / 2.0)
                } else {
                    0.0
                }
            } else {
                poisson_pmf(k, mu)
            };
            assert!((late - want).abs() < 1e-12);
        }
    }
    for &t in &[0.3, 1.0, 4.0] {
        let wt = Multigraphon::edge_evolved(&w, t).unwrap();
        check_axioms(&wt, 1e-8);
        for i in 0..6 {
            let x = (i as f64 + 0.5) / 6.0;
            assert!((degree_function(&wt, x) - degree_function(&w, x)).abs() < 1e-6);
        }
    }
}

#[test]
fn edge_evolved_poisson_base_preserves_degree() {
    let profile = QuantileDistribution::from_atoms(&[(0.5, 0.5), (1.5, 0.5)]).unwrap();
    let base = Multigraphon::poisson_profile(profile, 1.0).unwrap();
    let wt = Multigraphon::edge_evolved(&base, 0.7).unwrap();
    for &x in &[0.2, 0.8] {
        assert!((degree_function(&wt, x) - degree_function(&base, x)).abs() < 1e-6);
    }
}

#[test]
fn stationary_hat_axioms() {
    let w = stationary_hat(2.0, 1.0).unwrap();
    check_axioms(&w, 1e-8);
    assert_eq!(w_hat_infty_eval(2.0, 1.0, 0.3, 0.3, 3).unwrap(), 0.0);
}

#[test]
fn degree_scale_limit_refuses_zero_time() {
    let f0 = QuantileDistribution::from_atoms(&[(0.5, 0.5), (1.5, 0.5)]).unwrap();
    assert!(DegreeScaleLimit::new(2.0, 1.0, &f0, 0.0).is_err());
}

#[test]
fn degree_scale_limit_long_time_and_density() {
    let f0 = QuantileDistribution::from_atoms(&[(0.5, 0.5), (1.5, 0.5)]).unwrap();
    let late = DegreeScaleLimit::new(2.0, 1.0, &f0, 50.0).unwrap();
    let stat = stationary_hat(2.0, 1.0).unwrap();
    let xs = [0.05, 0.25, 0.5, 0.75, 0.95];
    for &x in &xs {
        for &y in &xs {
            for k in 0..10 {
                let a = late.eval(x, y, k);
                let b = stat.eval(x, y, k);
                assert!((a - b).abs() < 1e-4, "({x},{y},{k}) {a} vs {b}");
            }
        }
    }
    let mid = DegreeScaleLimit::new(2.0, 1.0, &f0, 0.5).unwrap();
    assert!((edge_density(mid.multigraphon()).unwrap() - 1.0).abs() < 1e-4);
    check_axioms(mid.multigraphon(), 1e-8);
}

#[test]
fn degree_scale_limit_small_time_approaches_initial_profile() {
    let f0 = QuantileDistribution::from_atoms(&[(0.5, 0.5), (1.5, 0.5)]).unwrap();
    let start = Multigraphon::poisson_profile(f0.clone(), 1.0).unwrap();
    let start_law = pair_law(&start, 12);
    let tv = |t: f64| {
        let lim = DegreeScaleLimit::new(2.0, 1.0, &f0, t).unwrap();
        let law = pair_law(lim.multigraphon(), 12);
        0.5 * law.iter().zip(&start_law).map(|(a, b)| (a - b).abs()).sum::<f64>()
    };
    let (coarse, fine) = (tv(1e-1), tv(1e-2));
    assert!(fine < coarse, "{fine} vs {coarse}");
    assert!(fine < 0.02, "{fine}");
}

#[test]
fn poisson_sampler_matches_pmf() {
    let w = Multigraphon::constant_poisson(1.3).unwrap();
    let mut rng = RngStream::new(21, 0);
    let draws: Vec<u64> = (0..50_000)
        .map(|_| u64::from(sample_w_random(&w, 2, &mut rng).matrix.get(0, 1)))
        .collect();
    let mut probs: Vec<f64> = (0..15).map(|k| poisson_pmf(k, 1.3)).collect();
    let rest = 1.0 - probs.iter().sum::<f64>();
    probs[14] += rest;
    let rep = chi_square_gof("constant poisson entries", &histogram(draws, 15), &probs, 5.0).unwrap();
    assert!(rep.p_value > 0.01, "{rep:?}");
}

#[test]
fn single_loop_graph_samples_loop() {
    let g = MultigraphState::from_edge_list(1, &[(1, 1)]).unwrap();
    let w = step_multigraphon(&g);
    let mut rng = RngStream::new(1, 1);
    for _ in 0..10 {
        assert_eq!(sample_w_random(&w, 1, &mut rng).matrix.get(0, 0), 2);
    }
}

#[test]
fn motif_density_of_constant_poisson_edge() {
    let lam = 0.9;
    let w = Multigraphon::constant_poisson(lam).unwrap();
    let a = FiniteMotif::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap();
    let mut rng = RngStream::new(2, 2);
    let (est, se) = motif_density_w(&a, &w, 1000, &mut rng).unwrap();
    let exact = lam * (-lam).exp() * (-lam / 2.0).exp().powi(2);
    assert!((est - exact).abs() < 1e-12 + 4.0 * se, "{est} vs {exact}");
    let one = FiniteMotif::from_rows(&[vec![0]]).unwrap();
    let g = MultigraphState::from_edge_list(3, &[(1, 2), (2, 3)]).unwrap();
    assert_eq!(motif_density_w(&one, &step_multigraphon(&g), 100, &mut rng).unwrap().0, 1.0);
}

#[test]
fn motif_densities_agree_with_sampler_frequencies() {
    let profile = QuantileDistribution::from_atoms(&[(0.4, 0.5), (1.2, 0.5)]).unwrap();
    let w = Multigraphon::poisson_profile(profile, 0.8).unwrap();
    let mut rng = RngStream::new(8, 0);
    let draws = 100_000;
    let mut freq = std::collections::HashMap::new();
    for _ in 0..draws {
        let s = sample_w_random(&w, 2, &mut rng);
        *freq.entry(s.matrix).or_insert(0u32) += 1;
    }
    for a in FiniteMotif::enumerate(2, 4) {
        let (est, se) = motif_density_w(&a, &w, 100_000, &mut rng).unwrap();
        let f = *freq.get(a.matrix()).unwrap_or(&0) as f64 / draws as f64;
        let sd = (est * (1.0 - est) / draws as f64).sqrt();
        assert!((est - f).abs() < 4.0 * (se * se + sd * sd).sqrt() + 1e-4, "{a:?}: {est} vs {f}");
    }
}

#[test]
fn pair_law_of_step_and_evolved() {
    let g = two_block_state();
    let w = step_multigraphon(&g);
    let law = pair_law(&w, 5);
    // 15 unordered pairs: 3 with entry 2, 9 with entry 1, 3 with entry 0
    assert!((law[2] - 3.0 / 15.0).abs() < 1e-15);
    assert!((law[1] - 9.0 / 15.0).abs() < 1e-15);
    assert!((law[0] - 3.0 / 15.0).abs() < 1e-15);
    let wt = Multigraphon::edge_evolved(&w, 1.0).unwrap();
    let lt = pair_law(&wt, 12);
    assert!((lt.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    let loops = loop_law(&wt, 12);
    assert!((loops.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    assert!(loops.iter().skip(1).step_by(2).all(|&p| p == 0.0));
}
