//! Desk-scale experiments for the two limit theorems, subaging, the queue
//! coupling and the edge-moment bound. Each returns a [`ReportBundle`].

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::config::{ExperimentConfig, InitialGraph};
use super::generators::near_regular;
use super::gof::{chi_square_gof, chi_square_two_sample, histogram, ks_statistic, GofReport};
use super::stats::{log_tail_fit, ols_slope, SlopeFit};
use crate::distributions::QuantileDistribution;
use crate::dynamics::{step, ChainParams};
use crate::error::{Error, Result};
use crate::limits::{loop_law, pair_law, stationary_hat, DegreeScaleLimit, Multigraphon};
use crate::multigraph::MultigraphState;
use crate::processes::{agreement_conditioned_step, coupled_step, CoupledWindow};
use crate::rngcore::RngStream;

/// Largest histogram cell before the tail cell.
const KMAX: usize = 40;

/// Stream slots: experiment tag in the high half, seed index in the low half.
const TAG_EDGE: u32 = 1;
const TAG_DEGREE: u32 = 2;
const TAG_LONG: u32 = 3;
const TAG_SUBAGING: u32 = 4;
const TAG_NULL: u32 = 5;
const TAG_COUPLING: u32 = 6;
const TAG_CONDITIONED: u32 = 7;
const TAG_MOMENT: u32 = 8;
const GRAPH_REPLICA: u32 = u32::MAX;

fn stream(master: u64, tag: u32, seed: usize, replica: u32) -> RngStream {
    RngStream::replica(master, (tag << 16) | seed as u32, replica)
}

/// Named pass/fail outcome; `calibrated` marks thresholds that are
/// desk-scale choices rather than consequences of the limit theorems.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
    pub calibrated: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsRecord {
    pub name: String,
    pub samples: usize,
    pub statistic: f64,
    pub p_value: f64,
}

/// Machine-readable result of one experiment run. Serialization is
/// deterministic: maps are ordered and no wall-clock data is recorded.
#[derive(Debug, Clone, Serialize)]
pub struct ReportBundle {
    pub experiment: String,
    pub master_seed: u64,
    pub seed_policy: String,
    pub config: ExperimentConfig,
    pub gof: Vec<GofReport>,
    pub ks: Vec<KsRecord>,
    pub fits: BTreeMap<String, SlopeFit>,
    pub metrics: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl ReportBundle {
    fn new(experiment: &str, config: &ExperimentConfig) -> Self {
        Self {
            experiment: experiment.to_string(),
            master_seed: config.master_seed,
            seed_policy: "stream id = (tag << 48) | (seed << 32) | replica under the master seed".into(),
            config: config.clone(),
            gof: Vec::new(),
            ks: Vec::new(),
            fits: BTreeMap::new(),
            metrics: BTreeMap::new(),
            checks: Vec::new(),
            pass: false,
        }
    }

    fn check(&mut self, name: &str, pass: bool, value: f64, threshold: f64, calibrated: bool, detail: String) {
        self.checks.push(Check { name: name.to_string(), pass, value, threshold, calibrated, detail });
    }

    fn finish(mut self) -> Self {
        self.pass = !self.checks.is_empty() && self.checks.iter().all(|c| c.pass);
        self
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `report.json` plus `cells.csv` with every pooled chi-square cell.
    pub fn write<P: AsRef<Path>>(&self, dir: P) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join("report.json");
        fs::write(&path, self.to_json()).map_err(|e| Error::io(&path, e))?;
        let mut w = csv::Writer::from_path(dir.join("cells.csv"))?;
        w.write_record(["test", "lo", "hi", "observed", "expected"])?;
        for r in &self.gof {
            for c in &r.pooled {
                w.write_record([r.name.clone(), c.lo.to_string(), c.hi.to_string(), c.observed.to_string(), c.expected.to_string()])?;
            }
        }
        w.flush().map_err(|e| Error::io(dir.join("cells.csv"), e))?;
        Ok(())
    }
}

fn advance<R: Rng + ?Sized>(state: &mut MultigraphState, params: &ChainParams, target: u64, rng: &mut R) -> Result<()> {
    while state.steps() < target {
        step(state, params, rng)?;
    }
    Ok(())
}

/// Goodness of fit that tolerates a point-mass reference: if pooling
/// leaves a single cell the test passes iff every observation lies in it.
fn gof_or_exact(name: &str, observed: &[u64], expected: &[f64], pooling_min: f64, alpha: f64) -> Result<GofReport> {
    match chi_square_gof(name, observed, expected, pooling_min) {
        Ok(r) => Ok(r.with_alpha(alpha)),
        Err(Error::TooFewCells(_)) => {
            let support: Vec<usize> = (0..expected.len()).filter(|&i| expected[i] > 1e-12).collect();
            let inside: u64 = support.iter().map(|&i| observed.get(i).copied().unwrap_or(0)).sum();
            let total: u64 = observed.iter().sum();
            let p = if inside == total { 1.0 } else { 0.0 };
            Ok(GofReport { name: name.to_string(), statistic: 0.0, dof: 1, p_value: p, pooled: Vec::new(), alpha, pass: p > alpha })
        }
        Err(e) => Err(e),
    }
}

fn distinct_sorted(ts: &[f64]) -> Vec<f64> {
    let mut v = ts.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn fraction(passes: &[bool]) -> f64 {
    passes.iter().filter(|&&p| p).count() as f64 / passes.len().max(1) as f64
}

/// Counts of `X(i, j)` over a uniformly random perfect matching of the
/// vertices (the last vertex is dropped when `n` is odd).
fn matched_pair_counts<R: Rng + ?Sized>(state: &MultigraphState, rng: &mut R) -> Vec<u64> {
    let mut perm: Vec<u32> = (0..state.n() as u32).collect();
    perm.shuffle(rng);
    let counts = state.pair_counts();
    perm.chunks_exact(2)
        .map(|p| u64::from(counts.get(&(p[0].min(p[1]), p[0].max(p[1]))).copied().unwrap_or(0)))
        .collect()
}

fn rescaled_degrees(state: &MultigraphState) -> Vec<f64> {
    let n = state.n() as f64;
    state.degree().iter().map(|&d| d as f64 / n).collect()
}

fn graph_stream(cfg: &ExperimentConfig, tag: u32) -> RngStream {
    stream(cfg.master_seed, tag, 0, GRAPH_REPLICA)
}

/// Edge time scale: watched entries `X(T, 1, 2)` and `X(T, 1, 1)` at
/// `T = floor(t rho n^2 / 2)` across relabeled replicas, against the
/// laws of `W_t` built on the initial step multigraphon. Also measures
/// the mean change of rescaled degrees at `T = floor(rho n^2 / 2)`.
pub fn experiment_edge_scale(cfg: &ExperimentConfig) -> Result<ReportBundle> {
    cfg.validate()?;
    let mut bundle = ReportBundle::new("edge-scale", cfg);
    let base = cfg.initial.build(cfg.n, cfg.kappa, &mut graph_stream(cfg, TAG_EDGE))?;
    let params = ChainParams::new(cfg.kappa, base.rho(), cfg.master_seed)?;
    let w0 = Multigraphon::step(&base);
    let times = distinct_sorted(&cfg.edge_times);
    if times.is_empty() {
        return Err(Error::Config("edge-scale experiment needs edge_times".into()));
    }
    let mut laws = Vec::new();
    for &t in &times {
        let w = if t == 0.0 { w0.clone() } else { Multigraphon::edge_evolved(&w0, t)? };
        laws.push((pair_law(&w, KMAX), loop_law(&w, KMAX)));
    }
    let freeze_step = params.edge_scale_steps(1.0, cfg.n);
    let mut schedule: Vec<u64> = times.iter().map(|&t| params.edge_scale_steps(t, cfg.n)).collect();
    schedule.push(freeze_step);
    schedule.sort_unstable();
    schedule.dedup();

    let p = &cfg.policy;
    let mut per_t_pass = vec![Vec::new(); times.len()];
    let (mut freeze_sum, mut freeze_count) = (0.0, 0usize);
    for s in 0..cfg.seeds {
        let mut pairs = vec![Vec::with_capacity(cfg.replicas); times.len()];
        let mut loops = vec![Vec::with_capacity(cfg.replicas); times.len()];
        for r in 0..cfg.replicas {
            let mut rng = stream(cfg.master_seed, TAG_EDGE, s, r as u32);
            let mut state = base.shuffle_labels(&mut rng);
            state.watch(2)?;
            let d0 = state.degree().to_vec();
            for &target in &schedule {
                advance(&mut state, &params, target, &mut rng)?;
                let w = state.window().expect("watched").counts();
                for (i, &t) in times.iter().enumerate() {
                    if params.edge_scale_steps(t, cfg.n) == target {
                        pairs[i].push(u64::from(w.get(0, 1)));
                        loops[i].push(u64::from(w.get(0, 0)));
                    }
                }
                if target == freeze_step {
                    let n = cfg.n as f64;
                    freeze_sum += state.degree().iter().zip(&d0).map(|(&a, &b)| (a as f64 - b as f64).abs() / n).sum::<f64>();
                    freeze_count += cfg.n;
                }
            }
        }
        for (i, &t) in times.iter().enumerate() {
            let (pl, ll) = &laws[i];
            let rp = gof_or_exact(&format!("t={t} seed={s} X(1,2)"), &histogram(pairs[i].iter().copied(), KMAX + 1), pl, p.pooling_min, p.alpha)?;
            let rl = gof_or_exact(&format!("t={t} seed={s} X(1,1)"), &histogram(loops[i].iter().copied(), KMAX + 1), ll, p.pooling_min, p.alpha)?;
            per_t_pass[i].push(rp.pass && rl.pass);
            bundle.gof.push(rp);
            bundle.gof.push(rl);
        }
    }
    for (i, &t) in times.iter().enumerate() {
        let f = fraction(&per_t_pass[i]);
        bundle.metrics.insert(format!("pass_fraction t={t}"), f);
        bundle.check(
            &format!("W_t law t={t}"),
            f >= p.seed_pass_fraction,
            f,
            p.seed_pass_fraction,
            true,
            format!("seeds with both watched entries passing chi-square at p > {}", p.alpha),
        );
    }
    let mean_delta = freeze_sum / freeze_count.max(1) as f64;
    bundle.metrics.insert("mean |dD| at T=rho n^2/2".into(), mean_delta);
    bundle.check("degrees frozen", mean_delta < 0.05, mean_delta, 0.05, true, "mean |d(T,i) - d(0,i)| / n over vertices and replicas".into());
    Ok(bundle.finish())
}

/// Degree time scale: `d(T, .) / n` against `F_t` (KS) and matched pair
/// counts against `W-hat_t` (chi-square) at `T = floor(t rho n^3)`, an
/// optional long run against the stationary laws, and a log-linear tail
/// fit of the running maximal degree.
pub fn experiment_degree_scale(cfg: &ExperimentConfig) -> Result<ReportBundle> {
    cfg.validate()?;
    let mut bundle = ReportBundle::new("degree-scale", cfg);
    let base = cfg.initial.build(cfg.n, cfg.kappa, &mut graph_stream(cfg, TAG_DEGREE))?;
    let rho = base.rho();
    let params = ChainParams::new(cfg.kappa, rho, cfg.master_seed)?;
    let f0 = QuantileDistribution::empirical(&rescaled_degrees(&base))?;
    let times: Vec<f64> = distinct_sorted(&cfg.degree_times).into_iter().filter(|&t| t > 0.0).collect();
    let limits: Vec<DegreeScaleLimit> =
        times.iter().map(|&t| DegreeScaleLimit::new(cfg.kappa, rho, &f0, t)).collect::<Result<_>>()?;
    let laws: Vec<Vec<f64>> = limits.iter().map(|l| pair_law(l.multigraphon(), KMAX)).collect();
    let p = &cfg.policy;
    let n = cfg.n as f64;
    let n2 = (cfg.n * cfg.n) as u64;

    let mut d_sum = vec![0.0; times.len()];
    let mut chi_pass = vec![Vec::new(); times.len()];
    let mut maxima = Vec::new();
    for s in 0..cfg.seeds {
        let mut rng = stream(cfg.master_seed, TAG_DEGREE, s, 0);
        let mut probe = stream(cfg.master_seed, TAG_DEGREE, s, 1);
        let mut state = base.shuffle_labels(&mut rng);
        for (i, &t) in times.iter().enumerate() {
            let target = params.degree_scale_steps(t, cfg.n);
            while state.steps() < target {
                let next = (state.steps() + n2).min(target);
                advance(&mut state, &params, next, &mut rng)?;
                maxima.push(*state.degree().iter().max().expect("n >= 2") as f64 / n);
            }
            let ft = limits[i].ft();
            let (d, pv) = ks_statistic(&rescaled_degrees(&state), &|z| ft.cdf(z))?;
            d_sum[i] += d;
            bundle.ks.push(KsRecord { name: format!("t={t} seed={s} degrees vs F_t"), samples: cfg.n, statistic: d, p_value: pv });
            let obs = histogram(matched_pair_counts(&state, &mut probe), KMAX + 1);
            let r = gof_or_exact(&format!("t={t} seed={s} matched pairs vs W-hat_t"), &obs, &laws[i], p.pooling_min, p.alpha)?;
            chi_pass[i].push(r.pass);
            bundle.gof.push(r);
        }
    }
    for (i, &t) in times.iter().enumerate() {
        let mean_d = d_sum[i] / cfg.seeds as f64;
        bundle.metrics.insert(format!("mean KS D t={t}"), mean_d);
        bundle.check(&format!("F_t degrees t={t}"), mean_d < 0.10, mean_d, 0.10, true, "KS statistic averaged over seeds".into());
        let f = fraction(&chi_pass[i]);
        bundle.metrics.insert(format!("pass_fraction t={t}"), f);
        bundle.check(&format!("W-hat_t law t={t}"), f >= p.seed_pass_fraction, f, p.seed_pass_fraction, true, format!("seeds passing chi-square at p > {}", p.alpha));
    }

    if maxima.len() >= 10 {
        let mut sorted = maxima.clone();
        sorted.sort_by(f64::total_cmp);
        let lo = sorted[sorted.len() / 2];
        let hi = sorted[(sorted.len() * 19) / 20];
        if hi > lo {
            let grid: Vec<f64> = (0..12).map(|j| lo + (hi - lo) * j as f64 / 11.0).collect();
            let fit = log_tail_fit(&maxima, &grid, 0.95)?;
            bundle.check("maximal degree tail", fit.ci.1 < 0.0, fit.slope, 0.0, false, "slope of ln P(max d/n > z) in z, upper CI below 0".into());
            bundle.fits.insert("max degree log tail".into(), fit);
        }
    }

    if let Some(t_long) = cfg.long_time {
        let gamma = QuantileDistribution::gamma(cfg.kappa, cfg.kappa / rho)?;
        let law = pair_law(&stationary_hat(cfg.kappa, rho)?, KMAX);
        let target = params.degree_scale_steps(t_long, cfg.n);
        let mut passes = Vec::new();
        for s in 0..cfg.long_seeds {
            let mut rng = stream(cfg.master_seed, TAG_LONG, s, 0);
            let mut probe = stream(cfg.master_seed, TAG_LONG, s, 1);
            let mut state = base.shuffle_labels(&mut rng);
            advance(&mut state, &params, target, &mut rng)?;
            let (d, pv) = ks_statistic(&rescaled_degrees(&state), &|z| gamma.cdf(z))?;
            bundle.ks.push(KsRecord { name: format!("t={t_long} seed={s} degrees vs Gamma"), samples: cfg.n, statistic: d, p_value: pv });
            let obs = histogram(matched_pair_counts(&state, &mut probe), KMAX + 1);
            let r = gof_or_exact(&format!("t={t_long} seed={s} matched pairs vs W-hat_inf"), &obs, &law, p.pooling_min, p.alpha)?;
            passes.push(pv > p.alpha && r.pass);
            bundle.gof.push(r);
        }
        let f = fraction(&passes);
        bundle.metrics.insert(format!("pass_fraction long t={t_long}"), f);
        bundle.check("stationary limit", f >= p.seed_pass_fraction, f, p.seed_pass_fraction, true, format!("seeds passing KS vs Gamma and chi-square vs W-hat_inf at p > {}", p.alpha));
    }
    Ok(bundle.finish())
}

/// Matched pair counts at each probe offset of the window starting at
/// `anchor`, with a fresh matching per probe.
fn window_probes<R: Rng + ?Sized, P: Rng + ?Sized>(
    state: &mut MultigraphState,
    params: &ChainParams,
    anchor: u64,
    offsets: &[f64],
    rng: &mut R,
    probe: &mut P,
) -> Result<Vec<Vec<u64>>> {
    let n2 = (state.n() * state.n()) as f64;
    let mut out = Vec::new();
    for &s in offsets {
        advance(state, params, anchor + (s * n2).floor() as u64, rng)?;
        out.push(histogram(matched_pair_counts(state, probe), KMAX + 1));
    }
    Ok(out)
}

fn pooled(hists: &[Vec<u64>]) -> Vec<u64> {
    let mut acc = vec![0u64; KMAX + 1];
    for h in hists {
        for (a, v) in acc.iter_mut().zip(h) {
            *a += v;
        }
    }
    acc
}

/// Two windows `T_i + s n^2` at `T_i = floor(t_i rho n^3)`: edge laws are
/// stable inside a window but differ across windows; from a stationary
/// start they agree across windows too.
pub fn experiment_subaging(cfg: &ExperimentConfig) -> Result<ReportBundle> {
    cfg.validate()?;
    let sub = &cfg.subaging;
    let find = |s: f64| sub.offsets.iter().position(|&o| o == s);
    let (ia, ib) = match (find(sub.within.0), find(sub.within.1)) {
        (Some(a), Some(b)) if a != b => (a, b),
        _ => return Err(Error::Config("subaging.within must name two distinct entries of subaging.offsets".into())),
    };
    let mut sorted = sub.offsets.clone();
    sorted.sort_by(f64::total_cmp);
    if sorted != sub.offsets || sorted.iter().any(|&o| !(0.0..=1.0).contains(&o)) {
        return Err(Error::Config("subaging.offsets must be increasing within [0, 1]".into()));
    }
    let mut bundle = ReportBundle::new("subaging", cfg);
    let p = &cfg.policy;
    let base = cfg.initial.build(cfg.n, cfg.kappa, &mut graph_stream(cfg, TAG_SUBAGING))?;
    let rho = base.rho();
    let null_init = InitialGraph::Stationary { rho };

    let mut within_pass = Vec::new();
    let mut across_reject = Vec::new();
    let mut null_keep = Vec::new();
    let runs: &[(u32, bool)] = if sub.null_check { &[(TAG_SUBAGING, false), (TAG_NULL, true)] } else { &[(TAG_SUBAGING, false)] };
    for &(tag, null) in runs {
        for s in 0..cfg.seeds {
            let mut rng = stream(cfg.master_seed, tag, s, 0);
            let mut probe = stream(cfg.master_seed, tag, s, 1);
            let mut state = if null {
                null_init.build(cfg.n, cfg.kappa, &mut stream(cfg.master_seed, tag, s, 2))?
            } else {
                base.shuffle_labels(&mut rng)
            };
            let params = ChainParams::new(cfg.kappa, state.rho(), cfg.master_seed)?;
            let t1 = params.degree_scale_steps(sub.t1, cfg.n);
            let t2 = params.degree_scale_steps(sub.t2, cfg.n);
            let w1 = window_probes(&mut state, &params, t1, &sub.offsets, &mut rng, &mut probe)?;
            let w2 = window_probes(&mut state, &params, t2, &sub.offsets, &mut rng, &mut probe)?;
            let label = if null { "null" } else { "main" };
            if !null {
                let mut ok = true;
                for (wi, w) in [(1, &w1), (2, &w2)] {
                    let r = chi_square_two_sample(&format!("{label} seed={s} window {wi} s={} vs s={}", sub.within.0, sub.within.1), &w[ia], &w[ib], p.pooling_min)?
                        .with_alpha(p.alpha);
                    ok &= r.pass;
                    bundle.gof.push(r);
                }
                within_pass.push(ok);
            }
            let r = chi_square_two_sample(&format!("{label} seed={s} window 1 vs window 2"), &pooled(&w1), &pooled(&w2), p.pooling_min)?;
            if null {
                let r = r.with_alpha(p.alpha);
                null_keep.push(r.pass);
                bundle.gof.push(r);
            } else {
                let r = r.expect_rejection(p.alpha);
                across_reject.push(r.pass);
                bundle.gof.push(r);
            }
        }
    }
    let f = fraction(&within_pass);
    bundle.metrics.insert("within-window pass fraction".into(), f);
    bundle.check("within-window stationarity", f >= p.seed_pass_fraction, f, p.seed_pass_fraction, true, format!("two-sample chi-square p > {} in both windows", p.alpha));
    let f = fraction(&across_reject);
    bundle.metrics.insert("across-window rejection fraction".into(), f);
    bundle.check("across-window change", f >= p.seed_pass_fraction, f, p.seed_pass_fraction, true, format!("two-sample chi-square p < {}", p.alpha));
    if sub.null_check {
        let f = fraction(&null_keep);
        bundle.metrics.insert("null across-window keep fraction".into(), f);
        bundle.check("stationary start keeps", f >= p.seed_pass_fraction, f, p.seed_pass_fraction, true, format!("two-sample chi-square p > {} from a stationary start", p.alpha));
    }
    Ok(bundle.finish())
}

/// Coupling of the watched window with independent queues over
/// `T <= n^nu` steps, started from near-regular graphs of density
/// `coupling.rho`. For every size it records the fraction of seeds whose
/// coupled run never disagrees, and an estimate of the same probability
/// from agreement-conditioned paths (product of per-step overlap masses,
/// averaged over `coupling.paths` paths per seed).
pub fn experiment_coupling(cfg: &ExperimentConfig) -> Result<ReportBundle> {
    cfg.validate()?;
    let c = &cfg.coupling;
    let mut bundle = ReportBundle::new("coupling", cfg);
    let mut estimates = Vec::new();
    for &n in &c.sizes {
        let horizon = (n as f64).powf(c.nu).floor() as u64;
        let m = ((c.rho * (n * n) as f64) / 2.0).round() as usize;
        let (mut held, mut tv_sum, mut folded_max) = (0usize, 0.0, 0.0f64);
        let mut conditioned = 0.0;
        for s in 0..cfg.seeds {
            let graph = near_regular(n, m, &mut stream(cfg.master_seed, TAG_COUPLING, s, (n as u32) << 1))?;
            let mut rng = stream(cfg.master_seed, TAG_COUPLING, s, ((n as u32) << 1) | 1);
            let mut state = graph.clone();
            state.watch(c.window)?;
            let mut cw = CoupledWindow::new(&state, c.window)?;
            let mut agree = true;
            for _ in 0..horizon {
                let out = coupled_step(&mut state, &mut cw, cfg.kappa, &mut rng)?;
                tv_sum += out.tv;
                if !out.agreement {
                    agree = false;
                    break;
                }
            }
            held += usize::from(agree);
            folded_max = folded_max.max(cw.folded_max);
            let mut seed_mean = 0.0;
            for path in 0..c.paths {
                let mut rng = stream(cfg.master_seed, TAG_CONDITIONED, s, ((n as u32) << 8) | path as u32);
                let mut state = graph.clone();
                state.watch(c.window)?;
                let mut cw = CoupledWindow::new(&state, c.window)?;
                let mut log_p = 0.0;
                for _ in 0..horizon {
                    log_p += agreement_conditioned_step(&mut state, &mut cw, cfg.kappa, &mut rng)?.ln();
                }
                seed_mean += log_p.exp();
                folded_max = folded_max.max(cw.folded_max);
            }
            conditioned += seed_mean / c.paths as f64;
        }
        let raw = held as f64 / cfg.seeds as f64;
        let est = conditioned / cfg.seeds as f64;
        bundle.metrics.insert(format!("n={n} full-horizon agreement fraction"), raw);
        bundle.metrics.insert(format!("n={n} agreement probability estimate"), est);
        bundle.metrics.insert(format!("n={n} horizon"), horizon as f64);
        bundle.metrics.insert(format!("n={n} mean summed tv until first disagreement"), tv_sum / cfg.seeds as f64);
        bundle.metrics.insert(format!("n={n} max folded mass"), folded_max);
        estimates.push((n, est, raw));
    }
    estimates.sort_by_key(|e| e.0);
    let increasing = estimates.windows(2).all(|w| w[1].1 > w[0].1);
    let raw_nondecreasing = estimates.windows(2).all(|w| w[1].2 >= w[0].2);
    let detail = estimates.iter().map(|(n, e, r)| format!("n={n}: {e:.4} (raw {r:.2})")).collect::<Vec<_>>().join(", ");
    let gain = estimates.last().map_or(0.0, |l| l.1) - estimates.first().map_or(0.0, |f| f.1);
    bundle.check("agreement increases with n", increasing, gain, 0.0, true, detail);
    bundle.metrics.insert("raw fraction non-decreasing".into(), f64::from(u8::from(raw_nondecreasing)));
    Ok(bundle.finish())
}

/// Second moment of an off-diagonal entry along `T <= 2 m n t`: one
/// independent chain per grid point, each from a fresh `W`-random start
/// from the configured initial graph, averaging `X(T, i, j)^2` over all
/// pairs. Passes when the 95% interval of the regression slope contains 0.
pub fn experiment_edge_moment(cfg: &ExperimentConfig, t: f64, points: usize) -> Result<ReportBundle> {
    cfg.validate()?;
    if points < 3 || !(t > 0.0) {
        return Err(Error::Config("edge-moment experiment needs t > 0 and at least 3 points".into()));
    }
    let mut bundle = ReportBundle::new("edge-moment", cfg);
    let n = cfg.n;
    let pairs = (n * (n - 1) / 2) as f64;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for j in 0..points {
        let mut rng = stream(cfg.master_seed, TAG_MOMENT, j, 0);
        let mut state = cfg.initial.build(n, cfg.kappa, &mut rng)?;
        let params = ChainParams::new(cfg.kappa, state.rho(), cfg.master_seed)?;
        let horizon = 2.0 * state.m() as f64 * n as f64 * t;
        let frac = j as f64 / (points - 1) as f64;
        advance(&mut state, &params, (frac * horizon).floor() as u64, &mut rng)?;
        let second: f64 = state
            .pair_counts()
            .iter()
            .filter(|((a, b), _)| a != b)
            .map(|(_, &c)| (c as f64).powi(2))
            .sum::<f64>()
            / pairs;
        xs.push(frac);
        ys.push(second);
    }
    let fit = ols_slope(&xs, &ys, 0.95)?;
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    bundle.metrics.insert("mean E[X(1,2)^2]".into(), mean);
    bundle.metrics.insert("max E[X(1,2)^2]".into(), ys.iter().copied().fold(f64::MIN, f64::max));
    bundle.check(
        "edge second moment flat",
        fit.ci_contains(0.0),
        fit.slope,
        0.0,
        false,
        format!("slope over T / (2mnt) in [0, 1], 95% CI [{:.4}, {:.4}]", fit.ci.0, fit.ci.1),
    );
    bundle.fits.insert("second moment vs time".into(), fit);
    Ok(bundle.finish())
}
