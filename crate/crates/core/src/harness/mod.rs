//! Experiments reproducing the limit theorems at desk scale, together with
//! the statistical tests and initial-graph generators they need.

mod config;
mod experiments;
mod generators;
pub mod gof;
mod stats;

pub use config::{
    load_experiment_config, load_run_config, parse_experiment_config, CouplingConfig, ExperimentConfig, InitialGraph,
    RunConfig, SubagingConfig, TestPolicy,
};
pub use generators::{erdos_renyi, moment_condition_check, near_regular, two_block, w_random};
pub use gof::{
    chi_square_gof, chi_square_two_sample, histogram, ks_statistic, ks_two_sample, GofReport, PooledCell,
    DEFAULT_ALPHA,
};
pub use stats::{log_tail_fit, ols_slope, SlopeFit};
pub use experiments::{
    experiment_coupling, experiment_degree_scale, experiment_edge_moment, experiment_edge_scale, experiment_subaging,
    Check, KsRecord, ReportBundle,
};
