//! The edge reconnecting model: a preferential-attachment edge rewiring
//! chain on dense multigraphs, its queue and diffusion limits, and the
//! statistics used to compare the two.

pub mod distributions;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod limits;
pub mod multigraph;
pub mod numeric;
pub mod processes;
pub mod rngcore;

pub use error::{Error, Result};
