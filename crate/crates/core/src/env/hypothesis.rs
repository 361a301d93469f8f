//! Finite hypothesis-identification game: a hidden state, a fixed table of
//! deterministic query responses, and a terminal 0/1 reward for naming the
//! hidden state.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::belief::{Belief, Feedback, ObservationFn, MAX_STATES};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesisConfig {
    pub num_states: usize,
    /// Total query count, including the null and identity queries.
    pub num_queries: usize,
    /// Informative symbols per query; the null symbol comes on top.
    pub alphabet: u16,
    pub horizon: usize,
    /// Query 0 always answers with the null symbol.
    #[serde(default)]
    pub null_query: bool,
    /// The next query reports `state mod alphabet`.
    #[serde(default)]
    pub identity_query: bool,
}

impl HypothesisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_states < 2 || self.num_states > MAX_STATES {
            return Err(Error::config("env.num_states", "must be in [2, 64]"));
        }
        if self.num_queries < 1 {
            return Err(Error::config("env.num_queries", "must be at least 1"));
        }
        let reserved = usize::from(self.null_query) + usize::from(self.identity_query);
        if self.num_queries < reserved.max(usize::from(self.null_query) + 1) {
            return Err(Error::config(
                "env.num_queries",
                "needs room for the reserved null/identity slots and one non-null query",
            ));
        }
        if self.alphabet < 2 {
            return Err(Error::config(
                "env.alphabet",
                "alphabet of size 1 admits no informative query",
            ));
        }
        if self.alphabet >= u16::MAX {
            return Err(Error::config("env.alphabet", "too large"));
        }
        Ok(())
    }

    /// Index of the identity query, when enabled.
    pub fn identity_index(&self) -> Option<usize> {
        self.identity_query.then_some(usize::from(self.null_query))
    }
}

/// Query structure shared by every episode of a family; only the hidden state
/// varies between episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisFamily {
    pub config: HypothesisConfig,
    pub obs_fn: ObservationFn,
}

impl HypothesisFamily {
    /// Build the query table from `seed`. Deterministic.
    pub fn new(config: HypothesisConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut r = rng::stream(seed, rng::streams::ENV);
        let null = config.alphabet;
        let n = config.num_states;
        let first_random = usize::from(config.null_query) + usize::from(config.identity_query);
        let mut columns: Vec<Vec<u16>> = Vec::with_capacity(config.num_queries);
        if config.null_query {
            columns.push(vec![null; n]);
        }
        if config.identity_query {
            columns.push((0..n).map(|s| (s % config.alphabet as usize) as u16).collect());
        }
        let has_informative = |cols: &[Vec<u16>]| cols.iter().any(|c| c.iter().any(|o| *o != c[0]));
        // Redraw the random columns until at least one query splits the states.
        loop {
            let mut cols = columns.clone();
            for _ in first_random..config.num_queries {
                cols.push((0..n).map(|_| r.random_range(0..config.alphabet)).collect());
            }
            if has_informative(&cols) {
                columns = cols;
                break;
            }
        }
        let table = (0..n).map(|s| columns.iter().map(|c| c[s]).collect()).collect();
        let obs_fn = ObservationFn::new(config.alphabet + 1, table)?;
        Ok(Self { config, obs_fn })
    }

    pub fn with_true_state(&self, true_state: usize) -> HypothesisEnv {
        assert!(true_state < self.config.num_states);
        HypothesisEnv {
            obs_fn: self.obs_fn.clone(),
            true_state,
            horizon: self.config.horizon,
            null_query: self.config.null_query,
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> HypothesisEnv {
        self.with_true_state(rng.random_range(0..self.config.num_states))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisEnv {
    pub obs_fn: ObservationFn,
    pub true_state: usize,
    pub horizon: usize,
    /// Whether query 0 is the designated null query.
    pub null_query: bool,
}

impl HypothesisEnv {
    pub fn num_states(&self) -> usize {
        self.obs_fn.num_states()
    }

    pub fn num_queries(&self) -> usize {
        self.obs_fn.num_queries()
    }

    pub fn is_null_query(&self, q: usize) -> bool {
        q < self.num_queries() && !self.obs_fn.is_informative(q)
    }
}

impl Feedback for HypothesisEnv {
    fn obs_fn(&self) -> &ObservationFn {
        &self.obs_fn
    }
    fn true_state(&self) -> usize {
        self.true_state
    }
}

/// Table and hidden state drawn from `seed`.
pub fn hyp_reset(config: &HypothesisConfig, seed: u64) -> Result<HypothesisEnv> {
    let family = HypothesisFamily::new(config.clone(), seed)?;
    let mut r = rng::stream(seed, rng::streams::ENV + 100);
    Ok(family.sample(&mut r))
}

pub fn hyp_observe(env: &HypothesisEnv, query: usize) -> Result<u16> {
    if query >= env.num_queries() {
        return Err(Error::usage(format!(
            "query {query} out of range for {} queries",
            env.num_queries()
        )));
    }
    Ok(env.obs_fn.observe(env.true_state, query))
}

/// 1 when the final belief's argmax (lowest index on ties) is the hidden state.
pub fn hyp_reward(env: &HypothesisEnv, final_belief: &Belief) -> f64 {
    if final_belief.argmax() == env.true_state {
        1.0
    } else {
        0.0
    }
}

/// Number of still-consistent states that the observation rules out. The null
/// symbol rules out nothing.
pub fn hyp_as_proxy(env: &HypothesisEnv, support_before: &[bool], symbol: u16, query: usize) -> f64 {
    if query >= env.num_queries() || symbol == env.obs_fn.null_symbol() {
        return 0.0;
    }
    support_before
        .iter()
        .enumerate()
        .filter(|(s, alive)| **alive && env.obs_fn.observe(*s, query) != symbol)
        .count() as f64
}

/// Margin of the true state over its strongest competitor.
pub fn belief_margin(belief: &Belief, true_state: usize) -> f64 {
    let rival = belief
        .probs()
        .iter()
        .enumerate()
        .filter(|(s, _)| *s != true_state)
        .map(|(_, p)| *p)
        .fold(f64::NEG_INFINITY, f64::max);
    belief.get(true_state) - rival
}

/// Change in the true-state margin across one update.
pub fn hyp_bt_proxy(before: &Belief, after: &Belief, true_state: usize) -> f64 {
    belief_margin(after, true_state) - belief_margin(before, true_state)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> HypothesisConfig {
        HypothesisConfig {
            num_states: 4,
            num_queries: 4,
            alphabet: 4,
            horizon: 3,
            null_query: true,
            identity_query: true,
        }
    }

    #[test]
    fn reset_is_deterministic() {
        assert_eq!(hyp_reset(&cfg(), 11).unwrap(), hyp_reset(&cfg(), 11).unwrap());
    }

    #[test]
    fn identity_query_reveals_state() {
        for seed in 0..20 {
            let env = hyp_reset(&cfg(), seed).unwrap();
            assert_eq!(hyp_observe(&env, 1).unwrap() as usize, env.true_state);
            assert_eq!(hyp_observe(&env, 0).unwrap(), 4);
            assert!(env.is_null_query(0));
        }
    }

    #[test]
    fn observe_out_of_range() {
        let env = hyp_reset(&cfg(), 1).unwrap();
        assert!(matches!(hyp_observe(&env, 9), Err(Error::Usage(_))));
    }

    #[test]
    fn degenerate_alphabet_rejected() {
        let mut c = cfg();
        c.alphabet = 1;
        assert!(matches!(hyp_reset(&c, 0), Err(Error::Config { .. })));
    }

    #[test]
    fn every_family_has_an_informative_query() {
        let c = HypothesisConfig {
            num_states: 2,
            num_queries: 2,
            alphabet: 2,
            horizon: 1,
            null_query: true,
            identity_query: false,
        };
        for seed in 0..50 {
            let f = HypothesisFamily::new(c.clone(), seed).unwrap();
            assert!(f.obs_fn.is_informative(1));
        }
    }

    #[test]
    fn reward_tie_break_is_lowest_index() {
        let mut env = hyp_reset(&cfg(), 3).unwrap();
        env.true_state = 2;
        assert_eq!(hyp_reward(&env, &Belief::point_mass(4, 2)), 1.0);
        assert_eq!(hyp_reward(&env, &Belief::point_mass(4, 1)), 0.0);
        let tie = Belief::new(vec![0.0, 0.5, 0.5, 0.0]).unwrap();
        assert_eq!(hyp_reward(&env, &tie), 0.0);
    }

    #[test]
    fn as_proxy_counts_eliminations() {
        let table = vec![vec![2, 0], vec![2, 0], vec![2, 1], vec![2, 1]];
        let env = HypothesisEnv {
            obs_fn: ObservationFn::new(3, table).unwrap(),
            true_state: 0,
            horizon: 2,
            null_query: true,
        };
        let all = [true; 4];
        assert_eq!(hyp_as_proxy(&env, &all, 2, 0), 0.0);
        assert_eq!(hyp_as_proxy(&env, &all, 0, 1), 2.0);
        let after = [true, true, false, false];
        assert_eq!(hyp_as_proxy(&env, &after, 0, 1), 0.0);
    }

    #[test]
    fn bt_proxy_margin_change() {
        let u = Belief::uniform(4);
        assert_eq!(hyp_bt_proxy(&u, &u, 0), 0.0);
        let after = Belief::new(vec![0.7, 0.1, 0.1, 0.1]).unwrap();
        assert!((hyp_bt_proxy(&u, &after, 0) - 0.6).abs() < 1e-12);
        assert!(hyp_bt_proxy(&after, &u, 0) < 0.0);
    }
}
