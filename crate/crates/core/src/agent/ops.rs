use serde::{Deserialize, Serialize};

use crate::belief::{bayes_update, Belief, ObservationFn};
use crate::error::{Error, Result};

/// Candidate belief-update operator in the update kernel's slate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UpdateOperator {
    Identity,
    BayesFull,
    /// `(1 − ρ)·b + ρ·BayesUpd(b)`.
    BayesPartial { rate: f64 },
    /// `(1 − ρ)·b + ρ·uniform`.
    TowardUniform { rate: f64 },
    /// Moves a `ρ` fraction of the consistent mass onto inconsistent states.
    AntiBayes { rate: f64 },
}

impl UpdateOperator {
    pub fn default_slate() -> Vec<UpdateOperator> {
        vec![
            UpdateOperator::Identity,
            UpdateOperator::BayesFull,
            UpdateOperator::BayesPartial { rate: 0.5 },
            UpdateOperator::TowardUniform { rate: 0.5 },
            UpdateOperator::AntiBayes { rate: 0.5 },
        ]
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            UpdateOperator::BayesPartial { rate } | UpdateOperator::TowardUniform { rate }
                if !(0.0..=1.0).contains(&rate) =>
            {
                Err(Error::config("agent.ops", format!("rate {rate} outside [0, 1]")))
            }
            // ρ = 1 could strip all mass from the true state.
            UpdateOperator::AntiBayes { rate } if !(0.0..1.0).contains(&rate) => {
                Err(Error::config("agent.ops", format!("anti_bayes rate {rate} outside [0, 1)")))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            UpdateOperator::Identity => "identity",
            UpdateOperator::BayesFull => "bayes_full",
            UpdateOperator::BayesPartial { .. } => "bayes_partial",
            UpdateOperator::TowardUniform { .. } => "toward_uniform",
            UpdateOperator::AntiBayes { .. } => "anti_bayes",
        }
    }

    /// Apply to `belief` after observing `symbol` for `query`.
    pub fn apply(&self, belief: &Belief, query: usize, symbol: u16, obs_fn: &ObservationFn) -> Result<Belief> {
        let uninformative = query >= obs_fn.num_queries() || symbol == obs_fn.null_symbol();
        if uninformative && !matches!(self, UpdateOperator::TowardUniform { .. }) {
            return Ok(belief.clone());
        }
        let out = match *self {
            UpdateOperator::Identity => belief.clone(),
            UpdateOperator::BayesFull => condition(belief, query, symbol, obs_fn)?,
            UpdateOperator::BayesPartial { rate } => {
                let post = condition(belief, query, symbol, obs_fn)?;
                mix(belief, &post, rate)
            }
            UpdateOperator::TowardUniform { rate } => mix(belief, &Belief::uniform(belief.num_states()), rate),
            UpdateOperator::AntiBayes { rate } => anti_bayes(belief, query, symbol, obs_fn, rate),
        };
        debug_assert!(Belief::new(out.probs().to_vec()).is_ok());
        Ok(out)
    }
}

/// States consistent with the observation. The null symbol and invalid
/// queries carry no information.
pub fn consistency_mask(num_states: usize, query: usize, symbol: u16, obs_fn: &ObservationFn) -> Vec<bool> {
    if query >= obs_fn.num_queries() || symbol == obs_fn.null_symbol() {
        return vec![true; num_states];
    }
    (0..num_states).map(|s| obs_fn.observe(s, query) == symbol).collect()
}

fn condition(belief: &Belief, query: usize, symbol: u16, obs_fn: &ObservationFn) -> Result<Belief> {
    if query >= obs_fn.num_queries() || symbol == obs_fn.null_symbol() {
        return Ok(belief.clone());
    }
    bayes_update(belief, query, symbol, obs_fn)
}

fn mix(a: &Belief, b: &Belief, rate: f64) -> Belief {
    if rate == 0.0 {
        return a.clone();
    }
    if rate == 1.0 {
        return b.clone();
    }
    let mass = a
        .probs()
        .iter()
        .zip(b.probs())
        .map(|(x, y)| (1.0 - rate) * x + rate * y)
        .collect();
    Belief::from_mass(mass).expect("convex mixture of beliefs has unit mass")
}

fn anti_bayes(belief: &Belief, query: usize, symbol: u16, obs_fn: &ObservationFn, rate: f64) -> Belief {
    let mask = consistency_mask(belief.num_states(), query, symbol, obs_fn);
    let inconsistent: Vec<usize> = (0..mask.len()).filter(|s| !mask[*s]).collect();
    if inconsistent.is_empty() || rate == 0.0 {
        return belief.clone();
    }
    let p = belief.probs();
    let moved: f64 = (0..p.len()).filter(|s| mask[*s]).map(|s| rate * p[s]).sum();
    let inc_mass: f64 = inconsistent.iter().map(|s| p[*s]).sum();
    let mut mass: Vec<f64> = p.to_vec();
    for (s, m) in mass.iter_mut().enumerate() {
        if mask[s] {
            *m *= 1.0 - rate;
        } else if inc_mass > 0.0 {
            *m += moved * p[s] / inc_mass;
        } else {
            *m += moved / inconsistent.len() as f64;
        }
    }
    Belief::from_mass(mass).expect("mass is conserved")
}
