//! Score-function gradients of the factored trajectory likelihood.

use super::rollout::{StepRecord, Trajectory};
use super::{belief_summary, update_features, Agent, AgentParams};
use crate::belief::{Belief, TurnContext};
use crate::error::{Error, Result};

/// `grad += scale · ∇ log π^Q(chosen | b, t)`. Returns `‖∇ log π^Q‖²`.
pub fn accumulate_query_grad(
    agent: &Agent,
    grad: &mut AgentParams,
    belief: &Belief,
    ctx: TurnContext,
    chosen: usize,
    scale: f64,
) -> Result<f64> {
    let phi = belief_summary(belief, ctx);
    let logp = agent.query_log_probs(belief, ctx)?;
    let phi_sq: f64 = phi.iter().map(|x| x * x).sum();
    let mut norm_sq = 0.0;
    for (k, lp) in logp.iter().enumerate() {
        let coeff = f64::from(u8::from(k == chosen)) - lp.exp();
        norm_sq += coeff * coeff * phi_sq;
        if scale != 0.0 {
            for (w, x) in grad.query_weights.row_mut(k).iter_mut().zip(&phi) {
                *w += scale * coeff * x;
            }
        }
    }
    Ok(norm_sq)
}

/// `grad += scale · ∇ log π^U(op | b, t, o)`. Returns `‖∇ log π^U‖²`.
pub fn accumulate_update_grad(
    agent: &Agent,
    grad: &mut AgentParams,
    belief: &Belief,
    ctx: TurnContext,
    symbol: u16,
    op: usize,
    scale: f64,
) -> Result<f64> {
    let feats = update_features(belief, ctx, symbol, agent.num_symbols());
    let logp = agent.update_log_probs(belief, ctx, symbol)?;
    let f_sq: f64 = feats.iter().map(|x| x * x).sum();
    let mut norm_sq = 0.0;
    for (k, lp) in logp.iter().enumerate() {
        let coeff = f64::from(u8::from(k == op)) - lp.exp();
        norm_sq += coeff * coeff * f_sq;
        if scale != 0.0 {
            for (w, x) in grad.update_weights.row_mut(k).iter_mut().zip(&feats) {
                *w += scale * coeff * x;
            }
        }
    }
    Ok(norm_sq)
}

fn ctx(traj: &Trajectory, step: &StepRecord) -> TurnContext {
    TurnContext {
        turn: step.turn,
        horizon: traj.horizon,
    }
}

/// `∇ log π^Q` of one step.
pub fn query_logprob_grad(agent: &Agent, traj: &Trajectory, t: usize) -> Result<AgentParams> {
    let step = traj.steps.get(t).ok_or_else(|| Error::usage("step index out of range"))?;
    let mut g = agent.params.zeros_like();
    accumulate_query_grad(agent, &mut g, &step.belief_before, ctx(traj, step), step.query, 1.0)?;
    Ok(g)
}

/// `∇ log π^U` of one step.
pub fn update_logprob_grad(agent: &Agent, traj: &Trajectory, t: usize) -> Result<AgentParams> {
    let step = traj.steps.get(t).ok_or_else(|| Error::usage("step index out of range"))?;
    let mut g = agent.params.zeros_like();
    accumulate_update_grad(agent, &mut g, &step.belief_before, ctx(traj, step), step.observation, step.op, 1.0)?;
    Ok(g)
}

/// `∇ log p(τ)`: the sum of both channels' per-step score functions.
pub fn logprob_grad(agent: &Agent, traj: &Trajectory) -> Result<AgentParams> {
    check_shape(agent, traj)?;
    let mut g = agent.params.zeros_like();
    for step in &traj.steps {
        let c = ctx(traj, step);
        accumulate_query_grad(agent, &mut g, &step.belief_before, c, step.query, 1.0)?;
        accumulate_update_grad(agent, &mut g, &step.belief_before, c, step.observation, step.op, 1.0)?;
    }
    Ok(g)
}

/// Log-likelihood of the recorded decisions under `agent`.
pub fn trajectory_logprob(agent: &Agent, traj: &Trajectory) -> Result<f64> {
    check_shape(agent, traj)?;
    let mut total = 0.0;
    for step in &traj.steps {
        let c = ctx(traj, step);
        total += agent.query_log_probs(&step.belief_before, c)?[step.query];
        total += agent.update_log_probs(&step.belief_before, c, step.observation)?[step.op];
    }
    Ok(total)
}

fn check_shape(agent: &Agent, traj: &Trajectory) -> Result<()> {
    for step in &traj.steps {
        if step.query >= agent.num_queries() || step.op >= agent.ops.len() {
            return Err(Error::usage("trajectory does not match the agent's slates"));
        }
    }
    Ok(())
}
