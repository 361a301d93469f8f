//! Deterministic-feedback active-reasoning environments.

pub mod hypothesis;
pub mod pref;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::belief::{Belief, Feedback, ObservationFn};
use crate::error::{Error, Result};

pub use hypothesis::{
    belief_margin, hyp_as_proxy, hyp_bt_proxy, hyp_observe, hyp_reset, hyp_reward, HypothesisConfig,
    HypothesisEnv, HypothesisFamily,
};
pub use pref::{
    cosine, pref_as_indicator, pref_bt_proxy, pref_feedback, pref_reset, pref_reward, PrefAnswer, PrefConfig,
    PrefEnv, PrefFamily, PrefQuery,
};

/// Environment block of an experiment config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvConfig {
    Hypothesis(HypothesisConfig),
    Pref(PrefConfig),
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            EnvConfig::Hypothesis(c) => c.validate(),
            EnvConfig::Pref(c) => c.validate(),
        }
    }

    pub fn horizon(&self) -> usize {
        match self {
            EnvConfig::Hypothesis(c) => c.horizon,
            EnvConfig::Pref(c) => c.horizon,
        }
    }

    pub fn build(&self, seed: u64) -> Result<EnvFamily> {
        Ok(match self {
            EnvConfig::Hypothesis(c) => EnvFamily::Hypothesis(HypothesisFamily::new(c.clone(), seed)?),
            EnvConfig::Pref(c) => EnvFamily::Pref(PrefFamily::new(c.clone(), seed)?),
        })
    }
}

/// Human-readable description of a query, recorded in step logs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QueryDescriptor {
    Index(usize),
    Pref(PrefQuery),
}

/// One episode: a fixed query table plus a hidden state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Episode {
    Hypothesis(HypothesisEnv),
    Pref(PrefEnv),
}

impl Feedback for Episode {
    fn obs_fn(&self) -> &ObservationFn {
        match self {
            Episode::Hypothesis(e) => &e.obs_fn,
            Episode::Pref(e) => &e.obs_fn,
        }
    }

    fn true_state(&self) -> usize {
        match self {
            Episode::Hypothesis(e) => e.true_state,
            Episode::Pref(e) => e.true_state,
        }
    }
}

impl Episode {
    pub fn horizon(&self) -> usize {
        match self {
            Episode::Hypothesis(e) => e.horizon,
            Episode::Pref(e) => e.horizon,
        }
    }

    pub fn set_horizon(&mut self, horizon: usize) {
        match self {
            Episode::Hypothesis(e) => e.horizon = horizon,
            Episode::Pref(e) => e.horizon = horizon,
        }
    }

    pub fn num_states(&self) -> usize {
        self.obs_fn().num_states()
    }

    pub fn num_queries(&self) -> usize {
        self.obs_fn().num_queries()
    }

    pub fn num_symbols(&self) -> usize {
        self.obs_fn().num_symbols()
    }

    pub fn null_symbol(&self) -> u16 {
        self.obs_fn().null_symbol()
    }

    pub fn prior(&self) -> Belief {
        Belief::uniform(self.num_states())
    }

    /// Feedback for a valid query.
    pub fn observe(&self, query: usize) -> Result<u16> {
        if query >= self.num_queries() {
            return Err(Error::usage(format!("query {query} out of range")));
        }
        Ok(self.obs_fn().observe(self.true_state(), query))
    }

    /// Feedback with invalid queries mapped to the null response.
    pub fn respond(&self, query: usize) -> u16 {
        self.observe(query).unwrap_or(self.null_symbol())
    }

    /// Queries whose response never depends on the hidden state.
    pub fn is_null_query(&self, query: usize) -> bool {
        query >= self.num_queries() || !self.obs_fn().is_informative(query)
    }

    pub fn null_queries(&self) -> Vec<usize> {
        (0..self.num_queries()).filter(|q| self.is_null_query(*q)).collect()
    }

    pub fn describe(&self, query: usize) -> QueryDescriptor {
        match self {
            Episode::Pref(e) => e
                .queries
                .get(query)
                .cloned()
                .map(QueryDescriptor::Pref)
                .unwrap_or(QueryDescriptor::Index(query)),
            Episode::Hypothesis(_) => QueryDescriptor::Index(query),
        }
    }

    /// Terminal outcome reward of a final belief.
    pub fn reward(&self, final_belief: &Belief) -> f64 {
        match self {
            Episode::Hypothesis(e) => hyp_reward(e, final_belief),
            Episode::Pref(e) => {
                let w_init = e.estimate(&self.prior());
                pref_reward(e, &e.estimate(final_belief), &w_init).expect("estimates are nonzero")
            }
        }
    }

    /// Scalar truth-aligned confidence readout used for belief critiques.
    pub fn readout(&self, belief: &Belief) -> f64 {
        match self {
            Episode::Hypothesis(e) => belief.get(e.true_state),
            Episode::Pref(e) => e.readout(belief),
        }
    }

    /// Per-turn action-selection proxy.
    pub fn as_proxy(&self, support_before: &[bool], query: usize, symbol: u16) -> f64 {
        match self {
            Episode::Hypothesis(e) => hyp_as_proxy(e, support_before, symbol, query),
            Episode::Pref(e) => f64::from(u8::from(e.as_indicator(query))),
        }
    }

    /// Per-turn belief-tracking proxy.
    pub fn bt_proxy(&self, before: &Belief, after: &Belief) -> f64 {
        match self {
            Episode::Hypothesis(e) => hyp_bt_proxy(before, after, e.true_state),
            Episode::Pref(e) => pref_bt_proxy(&e.estimate(before), &e.estimate(after), &e.latent_pref)
                .expect("estimates are nonzero"),
        }
    }
}

/// Distribution over episodes sharing one query table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvFamily {
    Hypothesis(HypothesisFamily),
    Pref(PrefFamily),
    /// Always the same episode.
    Fixed(Box<Episode>),
}

impl EnvFamily {
    pub fn sample(&self, rng: &mut impl Rng) -> Episode {
        match self {
            EnvFamily::Hypothesis(f) => Episode::Hypothesis(f.sample(rng)),
            EnvFamily::Pref(f) => Episode::Pref(f.sample(rng)),
            EnvFamily::Fixed(e) => (**e).clone(),
        }
    }

    /// Every episode of the family; the family draws them uniformly.
    pub fn instances(&self) -> Vec<Episode> {
        match self {
            EnvFamily::Hypothesis(f) => (0..f.config.num_states)
                .map(|s| Episode::Hypothesis(f.with_true_state(s)))
                .collect(),
            EnvFamily::Pref(f) => (0..f.candidates.len())
                .map(|s| Episode::Pref(f.with_true_state(s)))
                .collect(),
            EnvFamily::Fixed(e) => vec![(**e).clone()],
        }
    }

    /// A representative episode (hidden state 0).
    pub fn template(&self) -> Episode {
        self.instances().swap_remove(0)
    }

    pub fn horizon(&self) -> usize {
        self.template().horizon()
    }
}
