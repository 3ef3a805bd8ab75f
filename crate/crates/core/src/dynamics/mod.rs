//! The edge reconnecting chain: single steps, long runs with observers,
//! and exact one-step laws of the watched window.

mod chain;
mod oracle;
mod run;

pub use chain::{
    apply_event, preferential_sample, preferential_sample_degrees, sample_event, step, ChainParams, StepEvent,
};
pub use oracle::{
    pair, preferential_probabilities, transition_oracle, window_move_law, Pair, TransitionLaw, WindowMove,
    ORACLE_MAX_M, ORACLE_MAX_N,
};
pub use run::{run, DegreeRecorder, Observer, RunSummary, SnapshotWriter, TrajectoryRecorder, TrajectoryRow};
