//! Multigraph state, adjacency accounting, relabeling, snapshots and
//! induced homomorphism densities.

mod matrix;
mod motif;
mod snapshot;
mod state;

pub use matrix::SquareMatrix;
pub use motif::{induced_density_exact, induced_density_mc, FiniteMotif};
pub use snapshot::{
    import_edge_list, parse_snapshot, read_edge_list, snapshot_load, snapshot_save, snapshot_string, SnapshotMeta,
};
pub use state::{MultigraphState, WatchedWindow};
