//! The reference self-locking setup: a 4-state hypothesis game with one null
//! query and three balanced binary splits, and an agent initialized inside the
//! low-information, low-tracking regime.

use crate::agent::{init_deficient, Agent, DeficientInit, UpdateOperator};
use crate::env::{EnvConfig, EnvFamily, HypothesisConfig};
use crate::error::Result;
use crate::trainers::{ArewMode, TrainConfig};

/// Table seed whose three random splits are balanced and jointly identify every state.
pub const REFERENCE_ENV_SEED: u64 = 6;

pub fn reference_env_config() -> EnvConfig {
    EnvConfig::Hypothesis(HypothesisConfig {
        num_states: 4,
        num_queries: 4,
        alphabet: 2,
        horizon: 3,
        null_query: true,
        identity_query: false,
    })
}

pub fn reference_family() -> Result<EnvFamily> {
    reference_env_config().build(REFERENCE_ENV_SEED)
}

pub fn reference_agent(family: &EnvFamily) -> Result<Agent> {
    let ops = UpdateOperator::default_slate();
    let params = init_deficient(&DeficientInit::default(), &family.template(), &ops)?;
    Agent::new(params, ops)
}

pub fn reference_train_config(mode: ArewMode) -> TrainConfig {
    TrainConfig {
        arew_mode: mode,
        ..TrainConfig::default()
    }
}
