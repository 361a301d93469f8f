//! Parametric agent factored into a belief-conditioned softmax query policy
//! (action selection) and a softmax over a slate of belief-update operators
//! (belief tracking).
//!
//! Query scores are `query_weights[q] · φ(b, t)` and operator scores are
//! `update_weights[k] · [onehot(o), φ(b, t)]`, where `φ` is the coarse belief
//! summary `[1, max prob, normalized entropy, t / H]`.

pub mod grad;
pub mod ops;
pub mod rollout;

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::belief::{sample_index, Belief, ObservationFn, QueryPolicy, TurnContext};
use crate::env::{Episode, PrefQuery};
use crate::error::{Error, Result};

pub use grad::{
    accumulate_query_grad, accumulate_update_grad, logprob_grad, query_logprob_grad, trajectory_logprob,
    update_logprob_grad,
};
pub use ops::{consistency_mask, UpdateOperator};
pub use rollout::{replay, rollout, rollout_with, Controller, RolloutOptions, StepRecord, Trajectory};

/// Length of the belief summary `φ`.
pub const SUMMARY_LEN: usize = 4;

pub fn belief_summary(belief: &Belief, ctx: TurnContext) -> [f64; SUMMARY_LEN] {
    let progress = if ctx.horizon == 0 {
        0.0
    } else {
        ctx.turn as f64 / ctx.horizon as f64
    };
    [1.0, belief.max_prob(), belief.normalized_entropy(), progress]
}

pub fn update_features(belief: &Belief, ctx: TurnContext, symbol: u16, num_symbols: usize) -> Vec<f64> {
    let mut f = vec![0.0; num_symbols + SUMMARY_LEN];
    if (symbol as usize) < num_symbols {
        f[symbol as usize] = 1.0;
    }
    f[num_symbols..].copy_from_slice(&belief_summary(belief, ctx));
    f
}

/// Numerically stable log-softmax.
pub fn log_softmax(scores: &[f64]) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::usage("softmax over an empty slate"));
    }
    if let Some(s) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::Numeric(format!("non-finite score {s}")));
    }
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
    Ok(scores.iter().map(|s| s - lse).collect())
}

/// Query-channel and update-channel weight blocks. Gradients share the type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "FlatParams", try_from = "FlatParams")]
pub struct AgentParams {
    /// `|Q| × SUMMARY_LEN`.
    pub query_weights: Array2<f64>,
    /// `|ops| × (|symbols| + SUMMARY_LEN)`.
    pub update_weights: Array2<f64>,
}

/// Wire format: a flat value array behind a shape header.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlatParams {
    pub query_shape: [usize; 2],
    pub update_shape: [usize; 2],
    pub values: Vec<f64>,
}

impl From<AgentParams> for FlatParams {
    fn from(p: AgentParams) -> Self {
        let q = p.query_weights.dim();
        let u = p.update_weights.dim();
        FlatParams {
            query_shape: [q.0, q.1],
            update_shape: [u.0, u.1],
            values: p.query_weights.iter().chain(p.update_weights.iter()).copied().collect(),
        }
    }
}

impl TryFrom<FlatParams> for AgentParams {
    type Error = Error;
    fn try_from(f: FlatParams) -> Result<Self> {
        let nq = f.query_shape[0] * f.query_shape[1];
        let nu = f.update_shape[0] * f.update_shape[1];
        if f.values.len() != nq + nu {
            return Err(Error::usage(format!(
                "parameter array has {} values, header implies {}",
                f.values.len(),
                nq + nu
            )));
        }
        if f.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite parameter".into()));
        }
        let query_weights = Array2::from_shape_vec((f.query_shape[0], f.query_shape[1]), f.values[..nq].to_vec())
            .map_err(|e| Error::usage(e.to_string()))?;
        let update_weights = Array2::from_shape_vec((f.update_shape[0], f.update_shape[1]), f.values[nq..].to_vec())
            .map_err(|e| Error::usage(e.to_string()))?;
        Ok(AgentParams {
            query_weights,
            update_weights,
        })
    }
}

impl AgentParams {
    pub fn zeros(num_queries: usize, num_ops: usize, num_symbols: usize) -> Self {
        Self {
            query_weights: Array2::zeros((num_queries, SUMMARY_LEN)),
            update_weights: Array2::zeros((num_ops, num_symbols + SUMMARY_LEN)),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            query_weights: Array2::zeros(self.query_weights.raw_dim()),
            update_weights: Array2::zeros(self.update_weights.raw_dim()),
        }
    }

    pub fn random(num_queries: usize, num_ops: usize, num_symbols: usize, scale: f64, rng: &mut impl Rng) -> Self {
        let mut p = Self::zeros(num_queries, num_ops, num_symbols);
        p.query_weights.mapv_inplace(|_| scale * (2.0 * rng.random::<f64>() - 1.0));
        p.update_weights.mapv_inplace(|_| scale * (2.0 * rng.random::<f64>() - 1.0));
        p
    }

    pub fn len(&self) -> usize {
        self.query_weights.len() + self.update_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn query_len(&self) -> usize {
        self.query_weights.len()
    }

    /// Row-major flat access: query block first, then update block.
    pub fn get_flat(&self, i: usize) -> f64 {
        let nq = self.query_len();
        if i < nq {
            self.query_weights.as_slice().expect("standard layout")[i]
        } else {
            self.update_weights.as_slice().expect("standard layout")[i - nq]
        }
    }

    pub fn set_flat(&mut self, i: usize, v: f64) {
        let nq = self.query_len();
        if i < nq {
            self.query_weights.as_slice_mut().expect("standard layout")[i] = v;
        } else {
            self.update_weights.as_slice_mut().expect("standard layout")[i - nq] = v;
        }
    }

    /// `self += scale · other`.
    pub fn add_scaled(&mut self, other: &AgentParams, scale: f64) {
        self.query_weights.scaled_add(scale, &other.query_weights);
        self.update_weights.scaled_add(scale, &other.update_weights);
    }

    pub fn query_norm(&self) -> f64 {
        self.query_weights.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn update_norm(&self) -> f64 {
        self.update_weights.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.query_weights.iter().chain(self.update_weights.iter()).all(|x| x.is_finite())
    }

    /// Keep only one channel's block.
    pub fn project(&self, channel: Channel) -> AgentParams {
        let mut out = self.zeros_like();
        match channel {
            Channel::Query => out.query_weights.assign(&self.query_weights),
            Channel::Update => out.update_weights.assign(&self.update_weights),
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// The two decision channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    /// Action selection (`Q`).
    #[serde(alias = "q")]
    Query,
    /// Belief tracking (`U`).
    #[serde(alias = "u")]
    Update,
}

/// Agent parameters together with its update-operator slate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub params: AgentParams,
    pub ops: Vec<UpdateOperator>,
}

impl Agent {
    pub fn new(params: AgentParams, ops: Vec<UpdateOperator>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::config("agent.ops", "operator slate is empty"));
        }
        for op in &ops {
            op.validate()?;
        }
        if params.update_weights.nrows() != ops.len() {
            return Err(Error::usage("update weights do not match the operator slate"));
        }
        if params.update_weights.ncols() < SUMMARY_LEN || params.query_weights.ncols() != SUMMARY_LEN {
            return Err(Error::usage("weight blocks have the wrong feature width"));
        }
        Ok(Self { params, ops })
    }

    /// Zero-weight agent sized for `episode`.
    pub fn zeros_for(episode: &Episode, ops: Vec<UpdateOperator>) -> Result<Self> {
        let params = AgentParams::zeros(episode.num_queries(), ops.len(), episode.num_symbols());
        Self::new(params, ops)
    }

    pub fn num_queries(&self) -> usize {
        self.params.query_weights.nrows()
    }

    pub fn num_symbols(&self) -> usize {
        self.params.update_weights.ncols() - SUMMARY_LEN
    }

    /// Copy with the update slate replaced (weights reset to zero).
    pub fn with_ops(&self, ops: Vec<UpdateOperator>) -> Result<Self> {
        let mut params = AgentParams::zeros(self.num_queries(), ops.len(), self.num_symbols());
        params.query_weights.assign(&self.params.query_weights);
        Agent::new(params, ops)
    }

    pub fn query_scores(&self, belief: &Belief, ctx: TurnContext, slate: &[usize]) -> Result<Vec<f64>> {
        let phi = belief_summary(belief, ctx);
        slate
            .iter()
            .map(|q| {
                if *q >= self.num_queries() {
                    return Err(Error::usage(format!("query {q} outside the agent's slate")));
                }
                Ok(self.params.query_weights.row(*q).iter().zip(&phi).map(|(w, x)| w * x).sum())
            })
            .collect()
    }

    pub fn query_log_probs(&self, belief: &Belief, ctx: TurnContext) -> Result<Vec<f64>> {
        let slate: Vec<usize> = (0..self.num_queries()).collect();
        log_softmax(&self.query_scores(belief, ctx, &slate)?)
    }

    /// Sample a query from `slate`; returns the query and its exact log-probability.
    pub fn select_query(
        &self,
        belief: &Belief,
        ctx: TurnContext,
        slate: &[usize],
        rng: &mut impl Rng,
    ) -> Result<(usize, f64)> {
        let logp = log_softmax(&self.query_scores(belief, ctx, slate)?)?;
        let probs: Vec<f64> = logp.iter().map(|l| l.exp()).collect();
        let i = sample_index(&probs, rng);
        Ok((slate[i], logp[i]))
    }

    pub fn update_log_probs(&self, belief: &Belief, ctx: TurnContext, symbol: u16) -> Result<Vec<f64>> {
        let feats = update_features(belief, ctx, symbol, self.num_symbols());
        let scores: Vec<f64> = self
            .params
            .update_weights
            .rows()
            .into_iter()
            .map(|row| row.iter().zip(&feats).map(|(w, x)| w * x).sum())
            .collect();
        log_softmax(&scores)
    }

    /// Sample an update operator and apply it. Returns the operator index, its
    /// log-probability, and the next belief.
    pub fn select_update(
        &self,
        belief: &Belief,
        ctx: TurnContext,
        query: usize,
        symbol: u16,
        obs_fn: &ObservationFn,
        rng: &mut impl Rng,
    ) -> Result<(usize, f64, Belief)> {
        let logp = self.update_log_probs(belief, ctx, symbol)?;
        let probs: Vec<f64> = logp.iter().map(|l| l.exp()).collect();
        let k = sample_index(&probs, rng);
        let next = self.ops[k].apply(belief, query, symbol, obs_fn)?;
        Ok((k, logp[k], next))
    }
}

impl QueryPolicy for Agent {
    fn num_queries(&self) -> usize {
        Agent::num_queries(self)
    }

    fn query_probs(&self, belief: &Belief, ctx: TurnContext) -> Result<Vec<f64>> {
        Ok(self.query_log_probs(belief, ctx)?.into_iter().map(f64::exp).collect())
    }
}

/// Bias strengths that place an agent inside the low-information, low-tracking regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeficientInit {
    /// Added to the constant-feature score of uninformative queries.
    #[serde(default = "DeficientInit::default_query_bias")]
    pub query_bias: f64,
    /// Added to the constant-feature score of the identity operator.
    #[serde(default = "DeficientInit::default_identity_bias")]
    pub identity_bias: f64,
    /// Added to the constant-feature score of toward-uniform operators.
    #[serde(default = "DeficientInit::default_toward_uniform_bias")]
    pub toward_uniform_bias: f64,
}

impl DeficientInit {
    fn default_query_bias() -> f64 {
        4.5
    }
    fn default_identity_bias() -> f64 {
        3.0
    }
    fn default_toward_uniform_bias() -> f64 {
        3.0
    }
}

impl Default for DeficientInit {
    fn default() -> Self {
        Self {
            query_bias: Self::default_query_bias(),
            identity_bias: Self::default_identity_bias(),
            toward_uniform_bias: Self::default_toward_uniform_bias(),
        }
    }
}

/// Queries that reveal nothing (null responses) or, in preference tasks,
/// comparisons whose answer follows from dominance alone.
pub fn low_information_queries(episode: &Episode) -> Vec<usize> {
    match episode {
        Episode::Hypothesis(_) => episode.null_queries(),
        Episode::Pref(e) => (0..e.queries.len())
            .filter(|q| matches!(e.queries[*q], PrefQuery::Null) || !e.as_indicator(*q))
            .collect(),
    }
}

/// Parameters biased toward uninformative queries and toward the identity and
/// toward-uniform operators.
pub fn init_deficient(config: &DeficientInit, episode: &Episode, ops: &[UpdateOperator]) -> Result<AgentParams> {
    let targets = low_information_queries(episode);
    if targets.is_empty() {
        return Err(Error::config(
            "agent.init",
            "deficient init needs at least one uninformative query in the slate",
        ));
    }
    let mut p = AgentParams::zeros(episode.num_queries(), ops.len(), episode.num_symbols());
    let bias_col = episode.num_symbols();
    for q in targets {
        p.query_weights[[q, 0]] = config.query_bias;
    }
    for (k, op) in ops.iter().enumerate() {
        match op {
            UpdateOperator::Identity => p.update_weights[[k, bias_col]] = config.identity_bias,
            UpdateOperator::TowardUniform { .. } => p.update_weights[[k, bias_col]] = config.toward_uniform_bias,
            _ => {}
        }
    }
    Ok(p)
}
