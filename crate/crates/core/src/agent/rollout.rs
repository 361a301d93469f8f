use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ops::consistency_mask;
use super::Agent;
use crate::belief::{Belief, Feedback, ObservationFn, TurnContext};
use crate::env::{Episode, QueryDescriptor};
use crate::error::Result;

/// Source of both per-turn decisions. [`Agent`] is the trainable one; scripted
/// controllers are used in tests and diagnostics.
pub trait Controller {
    /// Returns the query and its log-probability.
    fn choose_query(&self, belief: &Belief, ctx: TurnContext, num_queries: usize, rng: &mut dyn rand::RngCore)
        -> Result<(usize, f64)>;

    /// Returns the operator index, its log-probability and the next belief.
    fn choose_update(
        &self,
        belief: &Belief,
        ctx: TurnContext,
        query: usize,
        symbol: u16,
        obs_fn: &ObservationFn,
        rng: &mut dyn rand::RngCore,
    ) -> Result<(usize, f64, Belief)>;
}

impl Controller for Agent {
    fn choose_query(
        &self,
        belief: &Belief,
        ctx: TurnContext,
        num_queries: usize,
        mut rng: &mut dyn rand::RngCore,
    ) -> Result<(usize, f64)> {
        let slate: Vec<usize> = (0..num_queries).collect();
        self.select_query(belief, ctx, &slate, &mut rng)
    }

    fn choose_update(
        &self,
        belief: &Belief,
        ctx: TurnContext,
        query: usize,
        symbol: u16,
        obs_fn: &ObservationFn,
        mut rng: &mut dyn rand::RngCore,
    ) -> Result<(usize, f64, Belief)> {
        self.select_update(belief, ctx, query, symbol, obs_fn, &mut rng)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RolloutOptions {
    /// Replace every observation with the null symbol.
    pub nullify: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub turn: usize,
    pub query: usize,
    pub descriptor: QueryDescriptor,
    pub observation: u16,
    /// Index into the agent's operator slate.
    pub op: usize,
    pub logp_query: f64,
    pub logp_update: f64,
    pub belief_before: Belief,
    pub belief_after: Belief,
    /// Oracle consistent set before this turn's observation.
    pub support_before: Vec<bool>,
    pub as_proxy: f64,
    pub bt_proxy: f64,
    pub readout_before: f64,
    pub readout_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub true_state: usize,
    pub horizon: usize,
    pub prior: Belief,
    pub steps: Vec<StepRecord>,
    pub final_belief: Belief,
    pub reward: f64,
}

impl Trajectory {
    pub fn log_likelihood(&self) -> f64 {
        self.steps.iter().map(|s| s.logp_query + s.logp_update).sum()
    }

    pub fn as_proxy_total(&self) -> f64 {
        self.steps.iter().map(|s| s.as_proxy).sum()
    }

    pub fn bt_proxy_total(&self) -> f64 {
        self.steps.iter().map(|s| s.bt_proxy).sum()
    }

    pub fn queries(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.query).collect()
    }

    pub fn observations(&self) -> Vec<u16> {
        self.steps.iter().map(|s| s.observation).collect()
    }

    /// Positive parts of the model's own one-step potential changes.
    pub fn absorbed_progress(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| (s.belief_after.get(self.true_state) - s.belief_before.get(self.true_state)).max(0.0))
            .sum()
    }

    pub fn to_json_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

pub fn rollout<R: Rng>(agent: &Agent, env: &Episode, rng: &mut R) -> Result<Trajectory> {
    rollout_with(agent, env, RolloutOptions::default(), rng)
}

/// `H` alternating query/update rounds from the uniform prior.
pub fn rollout_with<C, R>(controller: &C, env: &Episode, options: RolloutOptions, rng: &mut R) -> Result<Trajectory>
where
    C: Controller + ?Sized,
    R: Rng,
{
    run(controller, env, options, None, rng)
}

/// Replays a fixed query/observation sequence, sampling only the update channel.
pub fn replay<C, R>(controller: &C, env: &Episode, queries: &[usize], observations: &[u16], rng: &mut R) -> Result<Trajectory>
where
    C: Controller + ?Sized,
    R: Rng,
{
    if queries.len() != env.horizon() || observations.len() != env.horizon() {
        return Err(crate::error::Error::usage("replay sequence length differs from the horizon"));
    }
    let scripted = Scripted {
        inner: controller,
        queries,
    };
    run(&scripted, env, RolloutOptions::default(), Some(observations), rng)
}

fn run<C, R>(
    controller: &C,
    env: &Episode,
    options: RolloutOptions,
    observations: Option<&[u16]>,
    rng: &mut R,
) -> Result<Trajectory>
where
    C: Controller + ?Sized,
    R: Rng,
{
    let horizon = env.horizon();
    let obs_fn = env.obs_fn();
    let n = env.num_states();
    let prior = env.prior();
    let mut belief = prior.clone();
    let mut support = vec![true; n];
    let mut steps = Vec::with_capacity(horizon);
    for turn in 0..horizon {
        let ctx = TurnContext { turn, horizon };
        let (query, logp_query) = controller.choose_query(&belief, ctx, env.num_queries(), rng)?;
        let observation = match observations {
            Some(obs) => obs[turn],
            None if options.nullify => env.null_symbol(),
            None => env.respond(query),
        };
        let (op, logp_update, next) = controller.choose_update(&belief, ctx, query, observation, obs_fn, rng)?;
        let as_proxy = env.as_proxy(&support, query, observation);
        let mask = consistency_mask(n, query, observation, obs_fn);
        let support_after: Vec<bool> = support.iter().zip(&mask).map(|(a, b)| *a && *b).collect();
        steps.push(StepRecord {
            turn,
            query,
            descriptor: env.describe(query),
            observation,
            op,
            logp_query,
            logp_update,
            bt_proxy: env.bt_proxy(&belief, &next),
            readout_before: env.readout(&belief),
            readout_after: env.readout(&next),
            belief_before: belief,
            belief_after: next.clone(),
            support_before: std::mem::replace(&mut support, support_after),
            as_proxy,
        });
        belief = next;
    }
    let reward = env.reward(&belief);
    Ok(Trajectory {
        true_state: env.true_state(),
        horizon,
        prior,
        steps,
        final_belief: belief,
        reward,
    })
}

struct Scripted<'a, C: ?Sized> {
    inner: &'a C,
    queries: &'a [usize],
}

impl<C: Controller + ?Sized> Controller for Scripted<'_, C> {
    fn choose_query(&self, _: &Belief, ctx: TurnContext, _: usize, _: &mut dyn rand::RngCore) -> Result<(usize, f64)> {
        Ok((self.queries[ctx.turn], 0.0))
    }

    fn choose_update(
        &self,
        belief: &Belief,
        ctx: TurnContext,
        query: usize,
        symbol: u16,
        obs_fn: &ObservationFn,
        rng: &mut dyn rand::RngCore,
    ) -> Result<(usize, f64, Belief)> {
        self.inner.choose_update(belief, ctx, query, symbol, obs_fn, rng)
    }
}
