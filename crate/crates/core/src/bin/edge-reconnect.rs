use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use edge_reconnect::distributions::{cir_transition_density, queue_kernel, CirParams, QuantileDistribution, QueueKernelParams};
use edge_reconnect::dynamics::{run, ChainParams, Observer, SnapshotWriter, TrajectoryRecorder};
use edge_reconnect::harness::{
    chi_square_gof, experiment_coupling, experiment_degree_scale, experiment_edge_scale, experiment_subaging,
    load_experiment_config, load_run_config, ReportBundle,
};
use edge_reconnect::limits::{w_hat_infty_eval, DegreeScaleLimit, Multigraphon};
use edge_reconnect::multigraph::{snapshot_load, snapshot_save, SnapshotMeta};
use edge_reconnect::rngcore::RngStream;
use edge_reconnect::{Error, Result};

#[derive(Parser)]
#[command(name = "edge-reconnect", version, about = "Edge reconnecting multigraphs and their limits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the chain from a TOML run config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate limit objects and kernels as CSV on stdout.
    LimitsEval {
        #[command(subcommand)]
        what: LimitsCommand,
    },
    /// Run a desk-scale experiment from a TOML experiment config.
    Experiment {
        kind: ExperimentKind,
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Chi-square test of a count histogram against a reference law.
    Gof(GofArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentKind {
    EdgeScale,
    DegreeScale,
    Subaging,
    Coupling,
}

#[derive(Subcommand)]
enum LimitsCommand {
    /// `q(t, h, k, mu)` for k in 0..=kmax.
    Queue {
        #[arg(long)]
        t: f64,
        #[arg(long)]
        h: u64,
        #[arg(long)]
        mu: f64,
        #[arg(long, default_value_t = 20)]
        kmax: u64,
    },
    /// CIR transition density on a grid of `points` over (0, zmax].
    Cir {
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        z: f64,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 5.0)]
        zmax: f64,
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
    /// `W_t(x, y, k)` for the step multigraphon of a snapshot.
    Edge {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
        #[arg(long, default_value_t = 20)]
        kmax: u64,
    },
    /// `W-hat_t(x, y, k)` from an initial degree law given as `z:w,z:w,...`.
    Degree {
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        f0: String,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
        #[arg(long, default_value_t = 20)]
        kmax: u64,
    },
    /// `W-hat_inf(x, y, k)`.
    Stationary {
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
        #[arg(long, default_value_t = 20)]
        kmax: u64,
    },
}

#[derive(Args)]
struct GofArgs {
    /// Counts, one per line (line k holds the count of value k).
    #[arg(long)]
    observed: PathBuf,
    /// Reference probabilities, one per line.
    #[arg(long, conflicts_with = "poisson")]
    expected: Option<PathBuf>,
    /// Poisson reference with this mean.
    #[arg(long)]
    poisson: Option<f64>,
    #[arg(long, default_value_t = 5.0)]
    pooling_min: f64,
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
}

fn read_column(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.parse::<f64>().map_err(|e| Error::InvalidParameter(format!("{}: {l}: {e}", path.display()))))
        .collect()
}

fn parse_atoms(spec: &str) -> Result<QuantileDistribution> {
    let mut atoms = Vec::new();
    for part in spec.split(',') {
        let (z, w) = part
            .split_once(':')
            .ok_or_else(|| Error::InvalidParameter(format!("atom `{part}` is not z:w")))?;
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::InvalidParameter(format!("`{s}`: {e}")));
        atoms.push((parse(z)?, parse(w)?));
    }
    QuantileDistribution::from_atoms(&atoms)
}

fn simulate(config: &Path) -> Result<bool> {
    let cfg = load_run_config(config)?;
    let mut init_rng = RngStream::new(cfg.seed, u64::MAX);
    let mut state = cfg.initial.build(cfg.n, cfg.kappa, &mut init_rng)?;
    let params = ChainParams::new(cfg.kappa, state.rho(), cfg.seed)?;
    let steps = cfg.total_steps(state.rho());
    state.watch(cfg.window)?;
    let mut rng = RngStream::new(cfg.seed, 0);
    let mut traj = TrajectoryRecorder::new(cfg.window, cfg.cadence);
    let meta = SnapshotMeta { kappa: Some(cfg.kappa), seed: Some(cfg.seed) };
    let mut snaps = cfg
        .snapshot_dir
        .as_ref()
        .map(|d| SnapshotWriter::new(d, cfg.snapshot_cadence.unwrap_or(cfg.cadence), meta));
    let summary = {
        let mut observers: Vec<&mut dyn Observer> = vec![&mut traj];
        if let Some(s) = snaps.as_mut() {
            observers.push(s);
        }
        run(&mut state, &params, steps, &mut rng, &mut observers)?
    };
    if let Some(path) = &cfg.trajectory {
        traj.write_csv(path)?;
    }
    if let Some(path) = &cfg.final_snapshot {
        snapshot_save(&state, meta, path)?;
    }
    info!("ran {} steps, {} moves", summary.steps, summary.moves);
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(true)
}

fn print_law(head: &str, values: impl Iterator<Item = (u64, f64)>) -> Result<()> {
    let mut out = io::stdout().lock();
    let io_err = |e| Error::Io { path: PathBuf::from("<stdout>"), source: e };
    writeln!(out, "{head}").map_err(io_err)?;
    for (k, v) in values {
        writeln!(out, "{k},{v:.12e}").map_err(io_err)?;
    }
    Ok(())
}

fn limits_eval(what: LimitsCommand) -> Result<bool> {
    match what {
        LimitsCommand::Queue { t, h, mu, kmax } => {
            let p = QueueKernelParams::new(t, h, mu)?;
            print_law("k,q", (0..=kmax).map(|k| (k, queue_kernel(p, k))))?;
        }
        LimitsCommand::Cir { kappa, rho, z, t, zmax, points } => {
            let params = CirParams::new(kappa, rho)?;
            println!("y,density");
            for i in 1..=points {
                let y = zmax * i as f64 / points as f64;
                println!("{y},{:.12e}", cir_transition_density(params, t, z, y)?);
            }
        }
        LimitsCommand::Edge { snapshot, t, x, y, kmax } => {
            let (state, _) = snapshot_load(&snapshot)?;
            let w = Multigraphon::edge_evolved(&Multigraphon::step(&state), t)?;
            print_law("k,w", (0..=kmax).map(|k| (k, w.eval(x, y, k))))?;
        }
        LimitsCommand::Degree { kappa, rho, f0, t, x, y, kmax } => {
            let lim = DegreeScaleLimit::new(kappa, rho, &parse_atoms(&f0)?, t)?;
            print_law("k,w", (0..=kmax).map(|k| (k, lim.eval(x, y, k))))?;
        }
        LimitsCommand::Stationary { kappa, rho, x, y, kmax } => {
            let values: Result<Vec<(u64, f64)>> =
                (0..=kmax).map(|k| Ok((k, w_hat_infty_eval(kappa, rho, x, y, k)?))).collect();
            print_law("k,w", values?.into_iter())?;
        }
    }
    Ok(true)
}

fn experiment(kind: ExperimentKind, config: &Path, out: Option<PathBuf>) -> Result<bool> {
    let cfg = load_experiment_config(config)?;
    let bundle: ReportBundle = match kind {
        ExperimentKind::EdgeScale => experiment_edge_scale(&cfg)?,
        ExperimentKind::DegreeScale => experiment_degree_scale(&cfg)?,
        ExperimentKind::Subaging => experiment_subaging(&cfg)?,
        ExperimentKind::Coupling => experiment_coupling(&cfg)?,
    };
    if let Some(dir) = out.or(cfg.output.clone()) {
        bundle.write(&dir)?;
        info!("report written to {}", dir.display());
    }
    for c in &bundle.checks {
        println!("{} {}: {:.6} (threshold {}) {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.threshold, c.detail);
    }
    Ok(bundle.pass)
}

fn gof(args: GofArgs) -> Result<bool> {
    let observed: Vec<u64> = read_column(&args.observed)?.into_iter().map(|v| v.round().max(0.0) as u64).collect();
    let expected = match (&args.expected, args.poisson) {
        (Some(path), _) => read_column(path)?,
        (None, Some(lambda)) => {
            let mut law: Vec<f64> =
                (0..observed.len() as u64).map(|k| edge_reconnect::distributions::poisson_pmf(k, lambda)).collect();
            let head: f64 = law.iter().sum();
            if let Some(last) = law.last_mut() {
                *last += (1.0 - head).max(0.0);
            }
            law
        }
        (None, None) => return Err(Error::InvalidParameter("give --expected or --poisson".into())),
    };
    let report = chi_square_gof("gof", &observed, &expected, args.pooling_min)?.with_alpha(args.alpha);
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(report.pass)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate { config } => simulate(&config),
        Command::LimitsEval { what } => limits_eval(what),
        Command::Experiment { kind, config, out } => experiment(kind, &config, out),
        Command::Gof(args) => gof(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
