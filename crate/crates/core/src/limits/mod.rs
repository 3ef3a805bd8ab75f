//! Multigraphons and the limit objects of the chain: `W_t` on the edge
//! time scale, `W-hat_t` on the degree time scale and the stationary
//! `W-hat_inf`.

mod multigraphon;
mod ops;
#[cfg(test)]
mod tests;

pub use multigraphon::{EdgeEvolvedKernel, Multigraphon, PoissonKernel, Profile, StepKernel, Variant};
pub use ops::{
    degree_function, edge_density, export_slice_csv, loop_law, mean_of, motif_density_w, pair_law, sample_w_random,
    state_from_adjacency, stationary_hat, step_multigraphon, w_hat_infty_eval, w_hat_t_eval, w_t_eval,
    DegreeScaleLimit, WRandomSample,
};
