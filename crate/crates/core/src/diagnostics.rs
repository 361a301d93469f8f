//! Capability estimators, the enumeration oracle for `I_th`, locking-regime
//! tests, channel-projected drift and the interaction analyses.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::{
    accumulate_query_grad, accumulate_update_grad, replay, rollout, rollout_with, Agent, AgentParams, Channel,
    RolloutOptions, UpdateOperator,
};
use crate::belief::{bayes_update, oracle_rollout, Belief, Feedback, QueryPolicy, TurnContext};
use crate::critique::{margin_coeffs, oracle_label};
use crate::env::{EnvFamily, Episode};
use crate::error::{Error, Result};
use crate::rng::{self, LabRng};
use crate::stats::{self, Estimate};

pub const ENUM_MAX_STATES: usize = 5;
pub const ENUM_MAX_QUERIES: usize = 4;
pub const ENUM_MAX_HORIZON: usize = 4;
/// Largest query tree evaluated exactly when computing oracle advantages.
pub const ORACLE_TREE_BUDGET: usize = 1 << 18;
/// Monte Carlo continuations per query when the tree is too large.
pub const ORACLE_MC_SAMPLES: usize = 256;

/// Runs `f` on `n` independent child generators in parallel; results keep draw order.
pub fn par_samples<T, F>(n: usize, rng: &mut impl Rng, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut LabRng) -> Result<T> + Sync,
{
    let seeds = rng::child_seeds(rng, n);
    seeds.into_par_iter().map(|s| f(&mut rng::child(s))).collect()
}

/// Oracle-belief progress `Ψ(b^B_H) − Ψ(b^B_0)` of one rollout.
fn oracle_sample(agent: &Agent, family: &EnvFamily, r: &mut LabRng) -> Result<f64> {
    let ep = family.sample(r);
    let traj = oracle_rollout(agent, &ep, &ep.prior(), ep.horizon(), r)?;
    let total = traj.total_progress();
    let net = traj.net_progress();
    assert!((total - net).abs() <= 1e-12, "telescoping identity violated: {total} vs {net}");
    Ok(net)
}

#[allow(non_snake_case)]
pub fn estimate_I_th(agent: &Agent, family: &EnvFamily, n: usize, rng: &mut impl Rng) -> Result<Estimate> {
    if n == 0 {
        return Err(Error::usage("need at least one rollout"));
    }
    let xs = par_samples(n, rng, |r| oracle_sample(agent, family, r))?;
    Ok(Estimate::from_samples(&xs))
}

#[allow(non_snake_case)]
pub fn estimate_C_BT(agent: &Agent, family: &EnvFamily, n: usize, rng: &mut impl Rng) -> Result<Estimate> {
    if n == 0 {
        return Err(Error::usage("need at least one rollout"));
    }
    let xs = par_samples(n, rng, |r| {
        let ep = family.sample(r);
        Ok(rollout(agent, &ep, r)?.absorbed_progress())
    })?;
    Ok(Estimate::from_samples(&xs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapabilityEstimate {
    pub i_th: Estimate,
    pub c_bt: Estimate,
    pub n_rollouts: usize,
    pub seed: u64,
}

/// Both indices; `seed` fully determines the rollouts.
pub fn estimate_capability(agent: &Agent, family: &EnvFamily, n: usize, seed: u64) -> Result<CapabilityEstimate> {
    let i_th = estimate_I_th(agent, family, n, &mut rng::stream(seed, rng::streams::DIAGNOSTICS))?;
    let c_bt = estimate_C_BT(agent, family, n, &mut rng::stream(seed, rng::streams::DIAGNOSTICS + 1))?;
    Ok(CapabilityEstimate {
        i_th,
        c_bt,
        n_rollouts: n,
        seed,
    })
}

fn check_enumerable(ep: &Episode) -> Result<()> {
    if ep.num_states() > ENUM_MAX_STATES || ep.num_queries() > ENUM_MAX_QUERIES || ep.horizon() > ENUM_MAX_HORIZON {
        return Err(Error::Size(format!(
            "|S|={}, |Q|={}, H={} exceeds |S|<={ENUM_MAX_STATES}, |Q|<={ENUM_MAX_QUERIES}, H<={ENUM_MAX_HORIZON}",
            ep.num_states(),
            ep.num_queries(),
            ep.horizon()
        )));
    }
    Ok(())
}

/// Expected terminal potential `E[Ψ(b^B_H) | b^B_t = belief]` in the oracle-belief MDP.
fn oracle_value<P: QueryPolicy + ?Sized>(policy: &P, ep: &Episode, belief: &Belief, turn: usize) -> Result<f64> {
    let horizon = ep.horizon();
    if turn == horizon {
        return Ok(belief.get(ep.true_state()));
    }
    let probs = policy.query_probs(belief, TurnContext { turn, horizon })?;
    let mut v = 0.0;
    for (q, p) in probs.iter().enumerate() {
        if *p > 0.0 {
            v += p * oracle_q_value(policy, ep, belief, turn, q)?;
        }
    }
    Ok(v)
}

fn oracle_q_value<P: QueryPolicy + ?Sized>(
    policy: &P,
    ep: &Episode,
    belief: &Belief,
    turn: usize,
    q: usize,
) -> Result<f64> {
    let o = ep.observe(q)?;
    let next = bayes_update(belief, q, o, ep.obs_fn())?;
    oracle_value(policy, ep, &next, turn + 1)
}

/// Exact `I_th` for one episode by enumerating every query sequence.
#[allow(non_snake_case)]
pub fn exact_I_th(agent: &Agent, ep: &Episode) -> Result<f64> {
    check_enumerable(ep)?;
    let prior = ep.prior();
    Ok(oracle_value(agent, ep, &prior, 0)? - prior.get(ep.true_state()))
}

/// Exact `I_th` averaged over the family's (uniformly drawn) episodes.
#[allow(non_snake_case)]
pub fn exact_I_th_family(agent: &Agent, family: &EnvFamily) -> Result<f64> {
    let eps = family.instances();
    let mut total = 0.0;
    for ep in &eps {
        total += exact_I_th(agent, ep)?;
    }
    Ok(total / eps.len() as f64)
}

/// `m_t(b, q) = E[Ψ(b^B_H) | b^B_t = b, q_t = q]` for every query. Exact when the
/// remaining query tree fits [`ORACLE_TREE_BUDGET`], Monte Carlo otherwise.
pub fn oracle_q_values(agent: &Agent, ep: &Episode, belief: &Belief, turn: usize, rng: &mut impl Rng) -> Result<Vec<f64>> {
    let nq = ep.num_queries();
    let remaining = ep.horizon().saturating_sub(turn + 1);
    let tree = (nq as f64).powi(remaining as i32);
    (0..nq)
        .map(|q| {
            if tree <= ORACLE_TREE_BUDGET as f64 {
                return oracle_q_value(agent, ep, belief, turn, q);
            }
            let o = ep.observe(q)?;
            let next = bayes_update(belief, q, o, ep.obs_fn())?;
            let mut sum = 0.0;
            for _ in 0..ORACLE_MC_SAMPLES {
                let mut b = next.clone();
                for t in (turn + 1)..ep.horizon() {
                    let probs = agent.query_probs(&b, TurnContext { turn: t, horizon: ep.horizon() })?;
                    let q2 = crate::belief::sample_index(&probs, rng);
                    b = bayes_update(&b, q2, ep.observe(q2)?, ep.obs_fn())?;
                }
                sum += b.get(ep.true_state());
            }
            Ok(sum / ORACLE_MC_SAMPLES as f64)
        })
        .collect()
}

/// Oracle action-selection advantage `A^B_t(b, q) = m_t(b, q) − E_{q'~π}[m_t(b, q')]`.
pub fn oracle_advantage(agent: &Agent, ep: &Episode, belief: &Belief, turn: usize, query: usize, rng: &mut impl Rng) -> Result<f64> {
    let m = oracle_q_values(agent, ep, belief, turn, rng)?;
    let probs = agent.query_probs(belief, TurnContext { turn, horizon: ep.horizon() })?;
    let base: f64 = probs.iter().zip(&m).map(|(p, v)| p * v).sum();
    Ok(m[query] - base)
}

/// One-step update-channel advantage: `Ψ(op(b)) − E_{op'~π^U}[Ψ(op'(b))]`.
pub fn update_advantage(agent: &Agent, ep: &Episode, belief: &Belief, ctx: TurnContext, query: usize, symbol: u16, op: usize) -> Result<f64> {
    let logp = agent.update_log_probs(belief, ctx, symbol)?;
    let s = ep.true_state();
    let mut base = 0.0;
    let mut chosen = 0.0;
    for (k, lp) in logp.iter().enumerate() {
        let v = agent.ops[k].apply(belief, query, symbol, ep.obs_fn())?.get(s);
        base += lp.exp() * v;
        if k == op {
            chosen = v;
        }
    }
    Ok(chosen - base)
}

pub fn in_locking_regime(i_th: f64, c_bt: f64, delta: f64, epsilon: f64) -> Result<bool> {
    if delta <= 0.0 || epsilon <= 0.0 {
        return Err(Error::usage("locking thresholds must be positive"));
    }
    Ok(i_th <= delta && c_bt <= epsilon)
}

/// Monte Carlo outcome-advantage gradient of one channel's block, with a
/// mean-reward baseline.
pub fn channel_gradient(agent: &Agent, family: &EnvFamily, channel: Channel, n: usize, rng: &mut impl Rng) -> Result<AgentParams> {
    if n < 2 {
        return Err(Error::usage("channel gradient needs at least two rollouts"));
    }
    let trajs = par_samples(n, rng, |r| {
        let ep = family.sample(r);
        rollout(agent, &ep, r)
    })?;
    let baseline = stats::mean(&trajs.iter().map(|t| t.reward).collect::<Vec<_>>());
    let mut g = agent.params.zeros_like();
    for t in &trajs {
        let adv = (t.reward - baseline) / n as f64;
        for step in &t.steps {
            let ctx = TurnContext { turn: step.turn, horizon: t.horizon };
            match channel {
                Channel::Query => {
                    accumulate_query_grad(agent, &mut g, &step.belief_before, ctx, step.query, adv)?;
                }
                Channel::Update => {
                    accumulate_update_grad(agent, &mut g, &step.belief_before, ctx, step.observation, step.op, adv)?;
                }
            }
        }
    }
    if !g.is_finite() {
        return Err(Error::Numeric("non-finite channel gradient".into()));
    }
    Ok(g.project(channel))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub channel: Channel,
    pub eta: f64,
    pub before: CapabilityEstimate,
    pub after: CapabilityEstimate,
    pub drift_i_th: f64,
    pub drift_c_bt: f64,
    pub positive_drift_i_th: f64,
    pub positive_drift_c_bt: f64,
    /// Unpaired standard errors of the two drifts.
    pub stderr_i_th: f64,
    pub stderr_c_bt: f64,
    pub grad_norm: f64,
}

/// Applies `ω' = ω + η·g` to one channel's block and re-measures both indices.
/// Before and after share rollout seeds.
pub fn projected_drift(agent: &Agent, family: &EnvFamily, channel: Channel, eta: f64, n: usize, rng: &mut impl Rng) -> Result<DriftReport> {
    let grad_seed: u64 = rng.random();
    let eval_seed: u64 = rng.random();
    let g = channel_gradient(agent, family, channel, n, &mut rng::child(grad_seed))?;
    let mut moved = agent.clone();
    moved.params.add_scaled(&g, eta);
    let before = estimate_capability(agent, family, n, eval_seed)?;
    let after = estimate_capability(&moved, family, n, eval_seed)?;
    let di = after.i_th.mean - before.i_th.mean;
    let dc = after.c_bt.mean - before.c_bt.mean;
    Ok(DriftReport {
        channel,
        eta,
        drift_i_th: di,
        drift_c_bt: dc,
        positive_drift_i_th: di.max(0.0),
        positive_drift_c_bt: dc.max(0.0),
        stderr_i_th: before.i_th.stderr.hypot(after.i_th.stderr),
        stderr_c_bt: before.c_bt.stderr.hypot(after.c_bt.stderr),
        grad_norm: match channel {
            Channel::Query => g.query_norm(),
            Channel::Update => g.update_norm(),
        },
        before,
        after,
    })
}

/// Theorem constants; none of them is observable, so they are supplied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeConstants {
    pub alpha: f64,
    pub beta_i: f64,
    pub beta_c: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeBound {
    pub constants: EscapeConstants,
    pub m: f64,
    pub eta: f64,
    pub epsilon: f64,
    pub i_th0: f64,
    pub k: u64,
}

/// `K = ⌊(1/(ηm))·ln((ε + Cη)/(I_th(ω_0) + Cη))⌋₊` with `m = max(α, β_I + β_C)`.
pub fn escape_bound(i_th0: f64, constants: EscapeConstants, eta: f64, epsilon: f64) -> Result<EscapeBound> {
    let m = constants.alpha.max(constants.beta_i + constants.beta_c);
    if eta <= 0.0 || m <= 0.0 {
        return Err(Error::usage("escape bound needs η > 0 and m > 0"));
    }
    let num = epsilon + constants.c * eta;
    let den = i_th0 + constants.c * eta;
    let k = if den <= 0.0 {
        return Err(Error::usage("I_th(ω_0) + Cη must be positive"));
    } else {
        let raw = (num / den).ln() / (eta * m);
        if raw.is_finite() && raw > 0.0 {
            raw.floor() as u64
        } else {
            0
        }
    };
    Ok(EscapeBound {
        constants,
        m,
        eta,
        epsilon,
        i_th0,
        k,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionSensitivity {
    pub reward_normal: f64,
    pub reward_nullified: f64,
    /// Share of normal episodes whose final decision equals the prior's argmax.
    pub belief_consistency: f64,
    /// The same share over the nullified episodes.
    pub belief_consistency_nullified: f64,
    pub n: usize,
}

/// Normal versus all-null-feedback rollouts on shared seeds.
pub fn interaction_sensitivity(agent: &Agent, family: &EnvFamily, n: usize, rng: &mut impl Rng) -> Result<InteractionSensitivity> {
    if n == 0 {
        return Err(Error::usage("need at least one rollout"));
    }
    let rows = par_samples(n, rng, |r| {
        let ep = family.sample(r);
        let seed: u64 = r.random();
        let normal = rollout_with(agent, &ep, RolloutOptions::default(), &mut rng::child(seed))?;
        let null = rollout_with(agent, &ep, RolloutOptions { nullify: true }, &mut rng::child(seed))?;
        let prior_choice = ep.prior().argmax();
        Ok([
            normal.reward,
            null.reward,
            f64::from(u8::from(normal.final_belief.argmax() == prior_choice)),
            f64::from(u8::from(null.final_belief.argmax() == prior_choice)),
        ])
    })?;
    let col = |i: usize| stats::mean(&rows.iter().map(|r| r[i]).collect::<Vec<_>>());
    Ok(InteractionSensitivity {
        reward_normal: col(0),
        reward_nullified: col(1),
        belief_consistency: col(2),
        belief_consistency_nullified: col(3),
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BtMode {
    /// Replay through the agent's own update kernel.
    Model,
    /// Replay through exact Bayesian conditioning.
    Oracle,
}

/// Episode-level (total AS proxy, reward) pairs after replaying model-generated
/// action sequences under `mode`.
pub fn replayed_outcomes(agent: &Agent, family: &EnvFamily, mode: BtMode, n: usize, rng: &mut impl Rng) -> Result<Vec<(f64, f64)>> {
    par_samples(n, rng, |r| {
        let ep = family.sample(r);
        let source = rollout(agent, &ep, r)?;
        let replay_seed: u64 = r.random();
        let replayed = match mode {
            BtMode::Model => replay(agent, &ep, &source.queries(), &source.observations(), &mut rng::child(replay_seed))?,
            BtMode::Oracle => {
                let bayes = Agent::zeros_for(&ep, vec![UpdateOperator::BayesFull])?;
                replay(&bayes, &ep, &source.queries(), &source.observations(), &mut rng::child(replay_seed))?
            }
        };
        Ok((replayed.as_proxy_total(), replayed.reward))
    })
}

/// Pearson correlation between per-episode total AS proxy and reward.
pub fn reward_as_correlation(agent: &Agent, family: &EnvFamily, mode: BtMode, n: usize, rng: &mut impl Rng) -> Result<f64> {
    if n < 10 {
        return Err(Error::usage("correlation needs at least 10 episodes"));
    }
    let pairs = replayed_outcomes(agent, family, mode, n, rng)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    stats::pearson(&xs, &ys)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyCurveSpec {
    pub acc_grid: Vec<f64>,
    pub eta: f64,
    pub lambda_inj: f64,
    /// Oracle trajectories per replicate.
    pub n: usize,
    pub replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyEffect {
    pub accuracy: f64,
    pub effect: Estimate,
    pub ci95: (f64, f64),
    pub per_replicate: Vec<f64>,
    /// Realized weighted accuracy of the constructed labels, averaged over replicates.
    pub realized_accuracy: f64,
}

/// Per replicate: oracle trajectories with exact labels `y_t`; labels at target
/// accuracy `a` agree with `y_t` when a shared uniform draw falls below `a`. The
/// effect is `I_th(ω + η(g_J + λ g_u)) − I_th(ω + η g_J)` on the query block,
/// measured exactly by enumeration.
pub fn accuracy_effect_curve(agent: &Agent, family: &EnvFamily, spec: &AccuracyCurveSpec, rng: &mut impl Rng) -> Result<Vec<AccuracyEffect>> {
    if spec.acc_grid.iter().any(|a| !(0.0..=1.0).contains(a)) {
        return Err(Error::usage("accuracy grid must lie in [0, 1]"));
    }
    if spec.replicates == 0 || spec.n == 0 {
        return Err(Error::usage("need at least one replicate and one trajectory"));
    }
    check_enumerable(&family.template())?;
    let seeds = rng::child_seeds(rng, spec.replicates);
    let per_rep: Vec<Vec<(f64, f64)>> = seeds
        .into_par_iter()
        .map(|s| accuracy_replicate(agent, family, spec, s))
        .collect::<Result<_>>()?;
    Ok(spec
        .acc_grid
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let xs: Vec<f64> = per_rep.iter().map(|r| r[i].0).collect();
            let accs: Vec<f64> = per_rep.iter().map(|r| r[i].1).filter(|x| x.is_finite()).collect();
            let effect = Estimate::from_samples(&xs);
            AccuracyEffect {
                accuracy: *a,
                effect,
                ci95: effect.confidence_interval(0.95),
                per_replicate: xs,
                realized_accuracy: if accs.is_empty() { f64::NAN } else { stats::mean(&accs) },
            }
        })
        .collect())
}

struct OracleStep {
    belief: Belief,
    turn: usize,
    query: usize,
    label: i8,
    weight_base: f64,
}

fn accuracy_replicate(agent: &Agent, family: &EnvFamily, spec: &AccuracyCurveSpec, seed: u64) -> Result<Vec<(f64, f64)>> {
    let mut r = rng::child(seed);
    let mut g_j = agent.params.zeros_like();
    let mut episodes: Vec<(Vec<OracleStep>, Vec<f64>)> = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let ep = family.sample(&mut r);
        let traj = oracle_rollout(agent, &ep, &ep.prior(), ep.horizon(), &mut r)?;
        let mut steps = Vec::with_capacity(traj.queries.len());
        for (t, q) in traj.queries.iter().enumerate() {
            let b = &traj.beliefs[t];
            let ctx = TurnContext { turn: t, horizon: ep.horizon() };
            let adv = oracle_advantage(agent, &ep, b, t, *q, &mut r)?;
            let norm_sq = accumulate_query_grad(agent, &mut g_j, b, ctx, *q, adv / spec.n as f64)?;
            steps.push(OracleStep {
                belief: b.clone(),
                turn: t,
                query: *q,
                label: oracle_label(adv),
                weight_base: adv.abs() * norm_sq,
            });
        }
        let draws: Vec<f64> = steps.iter().map(|_| r.random::<f64>()).collect();
        episodes.push((steps, draws));
    }
    let g_j = g_j.project(Channel::Query);
    let mut base = agent.clone();
    base.params.add_scaled(&g_j, spec.eta);
    let i_base = exact_I_th_family(&base, family)?;
    let horizon = family.horizon();
    spec.acc_grid
        .iter()
        .map(|a| {
            let mut g_u = agent.params.zeros_like();
            let mut hit = 0.0;
            let mut total = 0.0;
            for (steps, draws) in &episodes {
                let labels: Vec<i8> = steps
                    .iter()
                    .zip(draws)
                    .map(|(s, u)| if *u < *a { s.label } else { -s.label })
                    .collect();
                let coeffs = margin_coeffs(&labels);
                for ((s, u), z) in steps.iter().zip(&coeffs).zip(&labels) {
                    if *u == 0.0 {
                        continue;
                    }
                    let ctx = TurnContext { turn: s.turn, horizon };
                    accumulate_query_grad(agent, &mut g_u, &s.belief, ctx, s.query, u / spec.n as f64)?;
                    let w = u.abs() * s.weight_base;
                    total += w;
                    if *z == s.label {
                        hit += w;
                    }
                }
            }
            let mut shaped = base.clone();
            shaped.params.add_scaled(&g_u.project(Channel::Query), spec.eta * spec.lambda_inj);
            let effect = exact_I_th_family(&shaped, family)? - i_base;
            Ok((effect, if total > 0.0 { hit / total } else { f64::NAN }))
        })
        .collect()
}

/// Diagnostics document keyed by operation name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate_capability: Option<CapabilityEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub in_locking_regime: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projected_drift: Option<Vec<DriftReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interaction_sensitivity: Option<InteractionSensitivity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reward_as_correlation: Option<CorrelationPair>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationPair {
    pub model: Option<f64>,
    pub oracle: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{EnvConfig, HypothesisConfig};

    fn identity_family(states: usize) -> EnvFamily {
        EnvConfig::Hypothesis(HypothesisConfig {
            num_states: states,
            num_queries: 2,
            alphabet: states as u16,
            horizon: 1,
            null_query: true,
            identity_query: true,
        })
        .build(0)
        .unwrap()
    }

    #[test]
    fn exact_uniform_null_identity_two_states() {
        let fam = identity_family(2);
        let agent = Agent::zeros_for(&fam.template(), vec![UpdateOperator::BayesFull]).unwrap();
        assert!((exact_I_th_family(&agent, &fam).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn identity_policy_four_states() {
        let mut fam = identity_family(4);
        if let EnvFamily::Hypothesis(f) = &mut fam {
            f.config.horizon = 1;
        }
        let mut agent = Agent::zeros_for(&fam.template(), vec![UpdateOperator::BayesFull]).unwrap();
        agent.params.query_weights[[1, 0]] = 1e4;
        let est = estimate_I_th(&agent, &fam, 200, &mut rng::stream(0, 0)).unwrap();
        assert_eq!(est.mean, 0.75);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn null_policy_and_identity_kernel_are_exact_zero() {
        let fam = identity_family(3);
        let mut agent = Agent::zeros_for(&fam.template(), vec![UpdateOperator::Identity]).unwrap();
        agent.params.query_weights[[0, 0]] = 1e4;
        let cap = estimate_capability(&agent, &fam, 100, 3).unwrap();
        assert_eq!(cap.i_th.mean, 0.0);
        assert_eq!(cap.c_bt.mean, 0.0);
    }

    #[test]
    fn enumeration_size_limit() {
        let fam = EnvConfig::Hypothesis(HypothesisConfig {
            num_states: 6,
            num_queries: 2,
            alphabet: 2,
            horizon: 1,
            null_query: false,
            identity_query: false,
        })
        .build(0)
        .unwrap();
        let agent = Agent::zeros_for(&fam.template(), vec![UpdateOperator::BayesFull]).unwrap();
        assert!(matches!(exact_I_th(&agent, &fam.template()), Err(Error::Size(_))));
    }

    #[test]
    fn locking_regime_boundary() {
        assert!(in_locking_regime(0.0, 0.0, 0.1, 0.1).unwrap());
        assert!(in_locking_regime(0.1, 0.0, 0.1, 0.1).unwrap());
        assert!(!in_locking_regime(0.2, 0.0, 0.1, 0.1).unwrap());
        assert!(in_locking_regime(0.0, 0.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn escape_bound_cases() {
        let c = EscapeConstants {
            alpha: 1.0,
            beta_i: 0.5,
            beta_c: 0.25,
            c: 2.0,
        };
        assert_eq!(escape_bound(0.2, c, 0.1, 0.1).unwrap().k, 0);
        let b = escape_bound(0.0, c, 0.01, 0.1).unwrap();
        assert_eq!(b.m, 1.0);
        assert_eq!(b.k, ((0.12f64 / 0.02).ln() / 0.01).floor() as u64);
        assert!(escape_bound(0.0, c, 0.02, 0.1).unwrap().k <= b.k);
    }

    #[test]
    fn zero_step_drift_is_zero() {
        let fam = identity_family(3);
        let agent = Agent::zeros_for(&fam.template(), UpdateOperator::default_slate()).unwrap();
        let d = projected_drift(&agent, &fam, Channel::Query, 0.0, 50, &mut rng::stream(1, 1)).unwrap();
        assert_eq!(d.drift_i_th, 0.0);
        assert_eq!(d.positive_drift_c_bt, 0.0);
    }
}
