//! Local bisection and max-cut algorithm for random regular graphs.

pub mod coloring;
pub mod config;
pub mod graph;
pub mod harness;
pub mod partition;
pub mod recolor;
pub mod rng;
pub mod tree;
pub mod types;
