//! Multi-agent reinforcement learning in a dynamic 3D grid world, with
//! actions drawn from a simulated RY-rotation circuit.
//!
//! The crate is organized bottom-up:
//!
//! - [`quantum`]: statevector simulation of the action circuit
//! - [`env`]: the grid world, obstacles and extrinsic reward
//! - [`memory`]: short-term, long-term and shared memories with attention
//! - [`agent`]: action selection, intrinsic/cooperative reward, plasticity
//! - [`meta`]: the adapter that tunes learning rate and curiosity
//! - [`baseline`]: tabular Q-learning for comparison runs
//! - [`trainer`]: the staged training loop and episode records
//! - [`stats`]: summaries, Savitzky-Golay smoothing, Mann-Whitney U
//! - [`output`]: the run-directory file formats
//! - [`plot`]: SVG learning curves and histograms
//! - [`cli`]: the `run`, `compare` and `plot` commands

pub mod agent;
pub mod baseline;
pub mod cli;
pub mod config;
pub mod env;
pub mod error;
pub mod memory;
pub mod meta;
pub mod output;
pub mod plot;
pub mod quantum;
pub mod stats;
pub mod trainer;

pub use config::{Learner, RunConfig};
pub use error::{Error, Result};
pub use trainer::{run_experiment, EpisodeRecord, RunSummary, Trainer};
