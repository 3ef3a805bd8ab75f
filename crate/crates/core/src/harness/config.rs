//! TOML configuration for runs and experiments.

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::generators::{erdos_renyi, near_regular, two_block, w_random};
use crate::error::{Error, Result};
use crate::limits::stationary_hat;
use crate::multigraph::{import_edge_list, snapshot_load, MultigraphState};

/// Named generator or file source for the initial multigraph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialGraph {
    TwoBlock { c11: u32, c12: u32, c22: u32 },
    NearRegular { m: usize },
    ErdosRenyi { rho: f64 },
    /// `W`-random graph from the stationary Poisson-profile multigraphon
    /// with the run's `kappa`.
    Stationary { rho: f64 },
    Snapshot { path: PathBuf },
    EdgeList { path: PathBuf },
}

impl InitialGraph {
    pub fn build<R: Rng + ?Sized>(&self, n: usize, kappa: f64, rng: &mut R) -> Result<MultigraphState> {
        let state = match self {
            InitialGraph::TwoBlock { c11, c12, c22 } => two_block(n, *c11, *c12, *c22)?,
            InitialGraph::NearRegular { m } => near_regular(n, *m, rng)?,
            InitialGraph::ErdosRenyi { rho } => erdos_renyi(n, *rho, rng)?,
            InitialGraph::Stationary { rho } => w_random(&stationary_hat(kappa, *rho)?, n, rng)?,
            InitialGraph::Snapshot { path } => snapshot_load(path)?.0,
            InitialGraph::EdgeList { path } => import_edge_list(path, Some(n))?,
        };
        if state.n() != n {
            return Err(Error::Config(format!("initial graph has {} vertices, config says {n}", state.n())));
        }
        if state.m() == 0 {
            return Err(Error::NoEdges);
        }
        Ok(state)
    }

    /// Whether `build` ignores the random stream.
    pub fn is_deterministic(&self) -> bool {
        !matches!(
            self,
            InitialGraph::NearRegular { .. } | InitialGraph::ErdosRenyi { .. } | InitialGraph::Stationary { .. }
        )
    }
}

/// `simulate` subcommand input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub kappa: f64,
    pub seed: u64,
    /// Number of chain steps; alternatively `t_edge` (units of `rho n^2 / 2`)
    /// or `t_degree` (units of `rho n^3`).
    #[serde(default)]
    pub steps: Option<u64>,
    #[serde(default)]
    pub t_edge: Option<f64>,
    #[serde(default)]
    pub t_degree: Option<f64>,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_cadence")]
    pub cadence: u64,
    #[serde(default)]
    pub trajectory: Option<PathBuf>,
    #[serde(default)]
    pub snapshot_dir: Option<PathBuf>,
    #[serde(default)]
    pub snapshot_cadence: Option<u64>,
    #[serde(default)]
    pub final_snapshot: Option<PathBuf>,
    pub initial: InitialGraph,
}

fn default_window() -> usize {
    2
}

fn default_cadence() -> u64 {
    1000
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        check_common(self.n, self.kappa)?;
        let given = [self.steps.is_some(), self.t_edge.is_some(), self.t_degree.is_some()];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(Error::Config("give exactly one of steps, t_edge, t_degree".into()));
        }
        if self.window == 0 || self.window > self.n {
            return Err(Error::Config(format!("window {} outside 1..={}", self.window, self.n)));
        }
        if self.cadence == 0 {
            return Err(Error::Config("cadence must be positive".into()));
        }
        Ok(())
    }

    /// Step count for a state with edge density `rho`.
    pub fn total_steps(&self, rho: f64) -> u64 {
        let n = self.n as f64;
        match (self.steps, self.t_edge, self.t_degree) {
            (Some(s), _, _) => s,
            (_, Some(t), _) => (t * rho * n * n / 2.0).floor() as u64,
            (_, _, Some(t)) => (t * rho * n * n * n).floor() as u64,
            _ => 0,
        }
    }
}

/// Significance level and chi-square pooling threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestPolicy {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_pooling")]
    pub pooling_min: f64,
    /// Fraction of seeds that must pass a per-seed test.
    #[serde(default = "default_fraction")]
    pub seed_pass_fraction: f64,
}

fn default_alpha() -> f64 {
    0.01
}

fn default_pooling() -> f64 {
    5.0
}

fn default_fraction() -> f64 {
    0.8
}

impl Default for TestPolicy {
    fn default() -> Self {
        Self { alpha: default_alpha(), pooling_min: default_pooling(), seed_pass_fraction: default_fraction() }
    }
}

/// Subaging anchors `t1 < t2` and the within-window probe points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubagingConfig {
    #[serde(default = "default_t1")]
    pub t1: f64,
    #[serde(default = "default_t2")]
    pub t2: f64,
    /// Probe offsets in units of `n^2` inside each window.
    #[serde(default = "default_offsets")]
    pub offsets: Vec<f64>,
    /// Offsets compared by the within-window test.
    #[serde(default = "default_within")]
    pub within: (f64, f64),
    /// Run the stationary-start null configuration as well.
    #[serde(default = "default_true")]
    pub null_check: bool,
}

fn default_t1() -> f64 {
    0.5
}
fn default_t2() -> f64 {
    4.0
}
fn default_offsets() -> Vec<f64> {
    vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
}
fn default_within() -> (f64, f64) {
    (0.2, 0.8)
}
fn default_true() -> bool {
    true
}

impl Default for SubagingConfig {
    fn default() -> Self {
        Self {
            t1: default_t1(),
            t2: default_t2(),
            offsets: default_offsets(),
            within: default_within(),
            null_check: true,
        }
    }
}

/// Graph sizes and horizon exponent for the coupling trend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    #[serde(default = "default_ns")]
    pub sizes: Vec<usize>,
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default = "default_window")]
    pub window: usize,
    /// Edge density of the near-regular starting graphs.
    #[serde(default = "default_rho")]
    pub rho: f64,
    /// Agreement-conditioned paths per seed.
    #[serde(default = "default_paths")]
    pub paths: usize,
}

fn default_rho() -> f64 {
    1.0
}
fn default_paths() -> usize {
    16
}

fn default_ns() -> Vec<usize> {
    vec![125, 250, 500]
}
fn default_nu() -> f64 {
    2.2
}

impl Default for CouplingConfig {
    fn default() -> Self {
        Self { sizes: default_ns(), nu: default_nu(), window: default_window(), rho: default_rho(), paths: default_paths() }
    }
}

/// Input of the `experiment` subcommands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub kappa: f64,
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Independent chains per seed (edge-scale experiment).
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    pub initial: InitialGraph,
    /// Times in units of `rho n^2 / 2`.
    #[serde(default)]
    pub edge_times: Vec<f64>,
    /// Times in units of `rho n^3`.
    #[serde(default)]
    pub degree_times: Vec<f64>,
    /// Long run compared with the stationary limit, with its own seed count.
    #[serde(default)]
    pub long_time: Option<f64>,
    #[serde(default = "default_long_seeds")]
    pub long_seeds: usize,
    #[serde(default)]
    pub policy: TestPolicy,
    #[serde(default)]
    pub subaging: SubagingConfig,
    #[serde(default)]
    pub coupling: CouplingConfig,
    /// Directory for the report and CSV outputs.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_seeds() -> usize {
    10
}
fn default_replicas() -> usize {
    200
}
fn default_long_seeds() -> usize {
    5
}

fn check_common(n: usize, kappa: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::Config(format!("n must be at least 2, got {n}")));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::Config(format!("kappa must be positive, got {kappa}")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        check_common(self.n, self.kappa)?;
        let p = &self.policy;
        if !(p.alpha > 0.0 && p.alpha < 1.0) {
            return Err(Error::Config(format!("significance {} outside (0, 1)", p.alpha)));
        }
        if !(p.pooling_min > 0.0) || !(0.0..=1.0).contains(&p.seed_pass_fraction) {
            return Err(Error::Config("pooling_min must be positive and seed_pass_fraction in [0, 1]".into()));
        }
        if self.seeds == 0 || self.replicas == 0 {
            return Err(Error::Config("seeds and replicas must be positive".into()));
        }
        if self.edge_times.iter().chain(&self.degree_times).any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(Error::Config("times must be finite and non-negative".into()));
        }
        let s = &self.subaging;
        if !(0.0 < s.t1 && s.t1 < s.t2) {
            return Err(Error::Config("subaging needs 0 < t1 < t2".into()));
        }
        let c = &self.coupling;
        if !(c.nu > 2.0 && c.nu < 2.5) {
            return Err(Error::Config(format!("coupling exponent {} outside (2, 2.5)", c.nu)));
        }
        if c.window == 0 || c.paths == 0 || !(c.rho > 0.0) || c.sizes.iter().any(|&n| n < c.window.max(2)) {
            return Err(Error::Config("coupling needs window >= 1, paths >= 1, rho > 0 and sizes >= window".into()));
        }
        Ok(())
    }
}

fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

pub fn load_run_config<P: AsRef<Path>>(path: P) -> Result<RunConfig> {
    let path = path.as_ref();
    let cfg: RunConfig = parse(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_experiment_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = parse(text)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_experiment_config<P: AsRef<Path>>(path: P) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    parse_experiment_config(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rngcore::RngStream;

    #[test]
    fn experiment_config_round_trip() {
        let text = r#"
n = 40
kappa = 2.0
seeds = 3
edge_times = [0.25, 1.0]

[initial]
kind = "two-block"
c11 = 2
c12 = 1
c22 = 0

[policy]
alpha = 0.05
"#;
        let cfg = parse_experiment_config(text).unwrap();
        assert_eq!(cfg.initial, InitialGraph::TwoBlock { c11: 2, c12: 1, c22: 0 });
        assert_eq!(cfg.policy.pooling_min, 5.0);
        assert_eq!(cfg.coupling.sizes, vec![125, 250, 500]);
        let again = parse_experiment_config(&toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(again, cfg);
        let mut rng = RngStream::new(0, 0);
        assert_eq!(cfg.initial.build(40, 2.0, &mut rng).unwrap().m(), 2 * 190 + 400);
    }

    #[test]
    fn invalid_configs_are_refused() {
        let base = "kappa = 1.0\n[initial]\nkind = \"erdos-renyi\"\nrho = 1.0\n";
        assert!(parse_experiment_config(&format!("n = 1\n{base}")).is_err());
        assert!(parse_experiment_config(&format!("n = 10\n{base}[policy]\nalpha = 1.5\n")).is_err());
        assert!(parse_experiment_config(&format!("n = 10\nbogus = 3\n{base}")).is_err());
        assert!(parse_experiment_config(&format!("n = 10\n{base}")).is_ok());
    }

    #[test]
    fn run_config_step_modes() {
        let text = "n = 10\nkappa = 1.0\nseed = 4\nt_edge = 2.0\n[initial]\nkind = \"near-regular\"\nm = 25\n";
        let cfg: RunConfig = toml::from_str(text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.total_steps(0.5), 50);
        let both: RunConfig = toml::from_str(&format!("steps = 3\n{text}")).unwrap();
        assert!(both.validate().is_err());
    }
}
