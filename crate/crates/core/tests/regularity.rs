use edge_reconnect::dynamics::{step, ChainParams};
use edge_reconnect::harness::erdos_renyi;
use edge_reconnect::rngcore::RngStream;

/// Mean of `(D(T + n^2) - D(T))^2` over vertices and seeds, `D = d / n`.
fn degree_increment_second_moment(n: usize, seeds: u64) -> f64 {
    let mut total = 0.0;
    for seed in 0..seeds {
        let mut rng = RngStream::new(seed, n as u64);
        let mut state = erdos_renyi(n, 1.0, &mut rng).unwrap();
        let params = ChainParams::new(2.0, state.rho(), seed).unwrap();
        let before = state.degree().to_vec();
        for _ in 0..n * n {
            step(&mut state, &params, &mut rng).unwrap();
        }
        let nf = n as f64;
        total += state
            .degree()
            .iter()
            .zip(&before)
            .map(|(&a, &b)| ((a as f64 - b as f64) / nf).powi(2))
            .sum::<f64>()
            / nf;
    }
    total / seeds as f64
}

#[test]
fn degree_increments_shrink_like_one_over_n() {
    let moments: Vec<f64> = [250, 500, 1000].iter().map(|&n| degree_increment_second_moment(n, 50)).collect();
    for pair in moments.windows(2) {
        let ratio = pair[1] / pair[0];
        assert!((0.3..=0.8).contains(&ratio), "moments {moments:?}, ratio {ratio}");
    }
}
