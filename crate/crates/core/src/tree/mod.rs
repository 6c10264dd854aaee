//! Exact evolution of the depth-2 neighborhood law on the infinite
//! `d`-regular tree.

pub mod engine;
pub mod io;
pub mod kernel;
pub mod measure;
pub mod space;
pub mod state;

pub use engine::{
    bihole_fraction, conflict_degree, cut_per_vertex, cut_statistics, improved_cut,
    miscolored_and_eligible_measures, step_thresholds, CutStatistics, Mode, Phase1, TreeEngine,
    TreeReport, DEFAULT_PRUNE_THRESHOLD,
};
pub use measure::Measure;
pub use space::{enumerate_states, StateSpace};
pub use state::{NeighborDescriptor, RootStatus, TreeState};

use crate::types::{StepParamsError, VertexType};

#[derive(Debug, thiserror::Error)]
pub enum TreeError {
    #[error("degree {0} is outside the supported range")]
    UnsupportedDegree(usize),
    #[error("state `{0}` does not fit the degree")]
    InvalidState(String),
    #[error("negative or non-finite mass {0}")]
    NegativeMass(f64),
    #[error("eps must lie in (0, 1), got {0}")]
    InvalidEps(f64),
    #[error("dominant type {dominant} has mass {mass} < eps = {eps}")]
    DominantUnderMassed { dominant: VertexType, mass: f64, eps: f64 },
    #[error("no uncolored edge left to normalize q_hat")]
    ZeroDenominator,
    #[error(transparent)]
    Threshold(#[from] StepParamsError),
    #[error("no bihole constant for maximum degree {0}")]
    UnsupportedDelta(u8),
    #[error("greedy phase did not stop within {0} steps")]
    TooManySteps(usize),
}
