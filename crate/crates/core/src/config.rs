//! JSON experiment configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agent::{init_deficient, Agent, AgentParams, DeficientInit, UpdateOperator};
use crate::critique::CritiqueConfig;
use crate::env::{EnvConfig, EnvFamily};
use crate::error::{Error, Result};
use crate::reference::{reference_env_config, reference_train_config, REFERENCE_ENV_SEED};
use crate::rng;
use crate::trainers::{ArewMode, TrainConfig};

/// Environment kind and size, plus the seed that draws its query table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvBlock {
    #[serde(default)]
    pub seed: u64,
    #[serde(flatten)]
    pub config: EnvConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AgentInit {
    Zeros,
    Deficient(DeficientInit),
    /// Uniform weights in `[−scale, scale]` drawn from `seed`.
    Random { scale: f64, seed: u64 },
}

impl Default for AgentInit {
    fn default() -> Self {
        AgentInit::Deficient(DeficientInit::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AgentConfig {
    pub ops: Vec<UpdateOperator>,
    pub init: AgentInit,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            ops: UpdateOperator::default_slate(),
            init: AgentInit::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsConfig {
    pub n_rollouts: usize,
    pub delta: f64,
    pub epsilon: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            n_rollouts: 1000,
            delta: 0.05,
            epsilon: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: EnvBlock,
    #[serde(default)]
    pub agent: AgentConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub critique: CritiqueConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    pub seeds: Vec<u64>,
    /// Also train the AReW-off counterpart on the same seeds and report the reward gap.
    #[serde(default)]
    pub compare_vanilla: bool,
}

fn default_output_dir() -> String {
    "out".into()
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.env.config.validate()?;
        if self.agent.ops.is_empty() {
            return Err(Error::config("agent.ops", "needs at least one operator"));
        }
        for op in &self.agent.ops {
            op.validate()?;
        }
        match &self.agent.init {
            AgentInit::Random { scale, .. } if !(scale.is_finite() && *scale >= 0.0) => {
                return Err(Error::config("agent.init.scale", "must be finite and nonnegative"));
            }
            AgentInit::Deficient(d)
                if ![d.query_bias, d.identity_bias, d.toward_uniform_bias].iter().all(|x| x.is_finite()) =>
            {
                return Err(Error::config("agent.init", "biases must be finite"));
            }
            _ => {}
        }
        self.train.validate()?;
        self.critique.validate()?;
        let d = &self.diagnostics;
        if d.n_rollouts == 0 {
            return Err(Error::config("diagnostics.n_rollouts", "must be at least 1"));
        }
        if !(d.delta > 0.0 && d.epsilon > 0.0) {
            return Err(Error::config("diagnostics", "delta and epsilon must be positive"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "seed list must be nonempty"));
        }
        Ok(())
    }

    /// Parses and validates.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::config("<json>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn family(&self) -> Result<EnvFamily> {
        self.env.config.build(self.env.seed)
    }

    pub fn initial_agent(&self, family: &EnvFamily) -> Result<Agent> {
        let ep = family.template();
        let ops = self.agent.ops.clone();
        let params = match &self.agent.init {
            AgentInit::Zeros => AgentParams::zeros(ep.num_queries(), ops.len(), ep.num_symbols()),
            AgentInit::Deficient(d) => init_deficient(d, &ep, &ops)?,
            AgentInit::Random { scale, seed } => AgentParams::random(
                ep.num_queries(),
                ops.len(),
                ep.num_symbols(),
                *scale,
                &mut rng::stream(*seed, rng::streams::INIT),
            ),
        };
        Agent::new(params, ops)
    }

    /// Config with every default written out, as stored in run manifests.
    pub fn to_json_value(&self) -> Result<serde_json::Value> {
        Ok(serde_json::to_value(self)?)
    }
}

/// The reference self-locking experiment over seeds `0..5`.
pub fn reference_experiment(mode: ArewMode) -> ExperimentConfig {
    ExperimentConfig {
        env: EnvBlock {
            seed: REFERENCE_ENV_SEED,
            config: reference_env_config(),
        },
        agent: AgentConfig::default(),
        train: reference_train_config(mode),
        critique: CritiqueConfig::default(),
        diagnostics: DiagnosticsConfig::default(),
        output_dir: default_output_dir(),
        seeds: (0..5).collect(),
        compare_vanilla: mode != ArewMode::Off,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "env": {"kind": "hypothesis", "seed": 6, "num_states": 4, "num_queries": 4, "alphabet": 2, "horizon": 3, "null_query": true},
        "seeds": [0, 1]
    }"#;

    #[test]
    fn minimal_fills_defaults() {
        let cfg = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.env.seed, 6);
        assert_eq!(cfg.train, TrainConfig::default());
        assert_eq!(cfg.agent, AgentConfig::default());
        assert_eq!(cfg.output_dir, "out");
        let back: ExperimentConfig = serde_json::from_value(cfg.to_json_value().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn reference_matches_reference_family() {
        let cfg = reference_experiment(ArewMode::Off);
        cfg.validate().unwrap();
        let fam = cfg.family().unwrap();
        assert_eq!(fam.template(), crate::reference::reference_family().unwrap().template());
        let a = cfg.initial_agent(&fam).unwrap();
        assert_eq!(a, crate::reference::reference_agent(&fam).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        let no_seeds = MINIMAL.replace("[0, 1]", "[]");
        assert!(matches!(ExperimentConfig::from_json(&no_seeds), Err(Error::Config { field, .. }) if field == "seeds"));
        let unknown_env = MINIMAL.replace("\"horizon\": 3", "\"horizon\": 3, \"bogus\": 1");
        assert!(matches!(ExperimentConfig::from_json(&unknown_env), Err(Error::Config { .. })));
        let unknown_top = MINIMAL.replace("\"seeds\"", "\"bogus\": 0, \"seeds\"");
        assert!(matches!(ExperimentConfig::from_json(&unknown_top), Err(Error::Config { .. })));
        let bad_lr = MINIMAL.replace("\"seeds\"", "\"train\": {\"learning_rate\": -1}, \"seeds\"");
        assert!(matches!(
            ExperimentConfig::from_json(&bad_lr),
            Err(Error::Config { field, .. }) if field == "train.learning_rate"
        ));
        let bad_alpha = MINIMAL.replace("\"seeds\"", "\"critique\": {\"flip_alpha\": 2}, \"seeds\"");
        assert!(ExperimentConfig::from_json(&bad_alpha).is_err());
    }
}
