//! Limit processes: M/M/inf queues, the CIR diffusion and the chain-to-queue
//! coupling.

mod cir;
mod coupling;
mod queue;

pub use cir::{cir_euler, cir_euler_path, cir_sample_exact, EulerNoise};
pub use coupling::{agreement_conditioned_step, coupled_step, maximal_coupling, sample_event_given_move, CoupledOutcome, CoupledWindow};
pub use queue::{
    queue_mixing_bound_check, queue_simulate, queue_transition_sample, MixingCheck, QueueState, QueueTrajectory,
};
