//! Information self-locking laboratory: belief-tracking agents in
//! deterministic-feedback active-reasoning games, the capability diagnostics
//! `I_th` and `C_BT`, directional critiques with advantage reweighting, and
//! the PPO/GRPO/GSPO trainers that use them.

pub mod agent;
pub mod belief;
pub mod config;
pub mod critique;
pub mod diagnostics;
pub mod env;
pub mod error;
pub mod reference;
pub mod rng;
pub mod stats;
pub mod trainers;
pub mod verify;

pub use agent::{Agent, AgentParams, Channel, Trajectory, UpdateOperator};
pub use belief::{Belief, ObservationFn, TurnContext};
pub use config::ExperimentConfig;
pub use critique::CritiqueConfig;
pub use env::{EnvConfig, EnvFamily, Episode};
pub use error::{Error, Result};
pub use stats::Estimate;
pub use trainers::{MetricsRecord, TrainConfig, TrainSetup, TrainingRun};
