//! Outcome-reward policy-gradient trainers with optional critique-based
//! advantage reweighting.

pub mod algebra;
pub mod metrics;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::{accumulate_query_grad, accumulate_update_grad, rollout, Agent, AgentParams, Trajectory};
use crate::belief::{bayes_update, Belief, TurnContext};
use crate::critique::{
    accuracy_weight, critique_track, margin_coeffs, oracle_label, perturb, CritiqueConfig, CritiqueTrack,
};
use crate::diagnostics::{estimate_I_th, oracle_advantage, update_advantage};
use crate::env::{EnvFamily, Episode};
use crate::error::{Error, Result};
use crate::rng::{self, streams};
use crate::stats;

pub use algebra::{arew_shape, gae, grpo_advantages, gspo_ratio};
pub use metrics::{read_metrics, MetricsRecord, MetricsWriter, METRICS_COLUMNS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    #[default]
    Ppo,
    Grpo,
    Gspo,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ppo => "ppo",
            Algorithm::Grpo => "grpo",
            Algorithm::Gspo => "gspo",
        }
    }

    pub fn is_grouped(self) -> bool {
        !matches!(self, Algorithm::Ppo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArewMode {
    #[default]
    Off,
    AsOnly,
    AsBt,
}

impl ArewMode {
    pub fn name(self) -> &'static str {
        match self {
            ArewMode::Off => "off",
            ArewMode::AsOnly => "as_only",
            ArewMode::AsBt => "as_bt",
        }
    }
}

/// Injection-strength schedule over training steps.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LambdaSchedule {
    #[default]
    Constant,
    /// Linear interpolation from `lambda_inj` to `end` over the run.
    Linear { end: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub algorithm: Algorithm,
    pub learning_rate: f64,
    /// PPO/GRPO ratio clip.
    pub clip: f64,
    pub clip_low: f64,
    pub clip_high: f64,
    pub gae_lambda: f64,
    pub gamma: f64,
    pub group_size: usize,
    pub arew_mode: ArewMode,
    pub lambda_inj: f64,
    pub lambda_schedule: LambdaSchedule,
    pub steps: usize,
    /// Trajectories per step (a multiple of `group_size` for group methods).
    pub batch_size: usize,
    /// EMA decay of the per-turn value baseline.
    pub baseline_decay: f64,
    /// Oracle rollouts per step for the `I_th_est` column; 0 disables it.
    pub metric_rollouts: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Ppo,
            learning_rate: 0.3,
            clip: 0.2,
            clip_low: 3e-4,
            clip_high: 4e-4,
            gae_lambda: 1.0,
            gamma: 1.0,
            group_size: 3,
            arew_mode: ArewMode::Off,
            lambda_inj: 0.5,
            lambda_schedule: LambdaSchedule::Constant,
            steps: 200,
            batch_size: 48,
            baseline_decay: 0.9,
            metric_rollouts: 64,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, field: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("train.{field}"), "must be positive and finite"))
            }
        };
        positive(self.learning_rate, "learning_rate")?;
        positive(self.clip, "clip")?;
        positive(self.clip_low, "clip_low")?;
        positive(self.clip_high, "clip_high")?;
        if !(self.lambda_inj >= 0.0 && self.lambda_inj.is_finite()) {
            return Err(Error::config("train.lambda_inj", "must be nonnegative"));
        }
        if let LambdaSchedule::Linear { end } = self.lambda_schedule {
            if !(end >= 0.0 && end.is_finite()) {
                return Err(Error::config("train.lambda_schedule.end", "must be nonnegative"));
            }
        }
        for (v, f) in [(self.gae_lambda, "gae_lambda"), (self.gamma, "gamma"), (self.baseline_decay, "baseline_decay")] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(format!("train.{f}"), "must lie in [0, 1]"));
            }
        }
        if self.batch_size == 0 {
            return Err(Error::config("train.batch_size", "must be at least 1"));
        }
        if self.algorithm.is_grouped() {
            if self.group_size < 2 {
                return Err(Error::config("train.group_size", "group methods need at least 2"));
            }
            if self.batch_size % self.group_size != 0 {
                return Err(Error::config("train.batch_size", "must be a multiple of group_size"));
            }
        }
        Ok(())
    }

    /// Injection strength at `step`.
    pub fn lambda_at(&self, step: usize) -> f64 {
        match self.lambda_schedule {
            LambdaSchedule::Constant => self.lambda_inj,
            LambdaSchedule::Linear { end } => {
                let frac = step as f64 / self.steps.saturating_sub(1).max(1) as f64;
                self.lambda_inj + (end - self.lambda_inj) * frac
            }
        }
    }
}

/// One trajectory with its per-channel (possibly shaped) advantages.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSample {
    pub traj: Trajectory,
    pub adv_q: Vec<f64>,
    pub adv_u: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepMetrics {
    pub surrogate: f64,
    pub clip_frac: f64,
    pub grad_norm_q: f64,
    pub grad_norm_u: f64,
}

fn clipped(ratio: f64, adv: f64, low: f64, high: f64) -> bool {
    (adv > 0.0 && ratio > 1.0 + high) || (adv < 0.0 && ratio < 1.0 - low)
}

/// One clipped-surrogate ascent step on the supplied advantages.
pub fn policy_step(agent: &Agent, batch: &[TrainSample], config: &TrainConfig) -> Result<(Agent, StepMetrics)> {
    if batch.is_empty() {
        return Err(Error::usage("empty training batch"));
    }
    let mut grad = agent.params.zeros_like();
    let b = batch.len() as f64;
    let (low, high) = match config.algorithm {
        Algorithm::Gspo => (config.clip_low, config.clip_high),
        _ => (config.clip, config.clip),
    };
    let mut decisions = 0usize;
    let mut clipped_count = 0usize;
    let mut surrogate = 0.0;
    for sample in batch {
        let traj = &sample.traj;
        if sample.adv_q.len() != traj.steps.len() || sample.adv_u.len() != traj.steps.len() {
            return Err(Error::usage("advantages do not match the trajectory length"));
        }
        if traj.steps.is_empty() {
            continue;
        }
        let mut new_q = Vec::with_capacity(traj.steps.len());
        let mut new_u = Vec::with_capacity(traj.steps.len());
        for s in &traj.steps {
            let ctx = TurnContext { turn: s.turn, horizon: traj.horizon };
            new_q.push(agent.query_log_probs(&s.belief_before, ctx)?[s.query]);
            new_u.push(agent.update_log_probs(&s.belief_before, ctx, s.observation)?[s.op]);
        }
        // Per-decision ratios (PPO/GRPO) or one length-normalized sequence ratio (GSPO).
        let seq_ratio = if config.algorithm == Algorithm::Gspo {
            let new: Vec<f64> = new_q.iter().chain(&new_u).copied().collect();
            let old: Vec<f64> = traj
                .steps
                .iter()
                .map(|s| s.logp_query)
                .chain(traj.steps.iter().map(|s| s.logp_update))
                .collect();
            Some(gspo_ratio(&new, &old)?)
        } else {
            None
        };
        let norm = if seq_ratio.is_some() {
            b * (2 * traj.steps.len()) as f64
        } else {
            b
        };
        for (t, s) in traj.steps.iter().enumerate() {
            let ctx = TurnContext { turn: s.turn, horizon: traj.horizon };
            for (channel_q, adv, new, old) in [
                (true, sample.adv_q[t], new_q[t], s.logp_query),
                (false, sample.adv_u[t], new_u[t], s.logp_update),
            ] {
                decisions += 1;
                let ratio = seq_ratio.unwrap_or_else(|| (new - old).exp());
                let clipped_ratio = ratio.clamp(1.0 - low, 1.0 + high);
                surrogate += (ratio * adv).min(clipped_ratio * adv) / norm;
                if clipped(ratio, adv, low, high) {
                    clipped_count += 1;
                    continue;
                }
                if adv == 0.0 {
                    continue;
                }
                let scale = ratio * adv / norm;
                if channel_q {
                    accumulate_query_grad(agent, &mut grad, &s.belief_before, ctx, s.query, scale)?;
                } else {
                    accumulate_update_grad(agent, &mut grad, &s.belief_before, ctx, s.observation, s.op, scale)?;
                }
            }
        }
    }
    if !grad.is_finite() {
        return Err(Error::Numeric(format!(
            "non-finite policy gradient (query norm {}, update norm {})",
            grad.query_norm(),
            grad.update_norm()
        )));
    }
    let mut next = agent.clone();
    next.params.add_scaled(&grad, config.learning_rate);
    Ok((
        next,
        StepMetrics {
            surrogate,
            clip_frac: if decisions == 0 { 0.0 } else { clipped_count as f64 / decisions as f64 },
            grad_norm_q: grad.query_norm(),
            grad_norm_u: grad.update_norm(),
        },
    ))
}

/// Everything a training run needs besides the environment and initial agent.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainSetup {
    pub train: TrainConfig,
    pub critique: CritiqueConfig,
    /// Keep a copy of the parameters after every step.
    #[serde(default)]
    pub record_params: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRun {
    pub metrics: Vec<MetricsRecord>,
    pub final_agent: Agent,
    /// Initial parameters followed by the parameters after each step, when recorded.
    pub param_history: Vec<AgentParams>,
}

pub fn train(setup: &TrainSetup, family: &EnvFamily, init: &Agent, seed: u64) -> Result<TrainingRun> {
    train_with(setup, family, init, seed, |_| Ok(()))
}

/// Like [`train`], handing each metrics row to `sink` as soon as it exists.
pub fn train_with<F>(setup: &TrainSetup, family: &EnvFamily, init: &Agent, seed: u64, mut sink: F) -> Result<TrainingRun>
where
    F: FnMut(&MetricsRecord) -> Result<()>,
{
    let cfg = &setup.train;
    cfg.validate()?;
    setup.critique.validate()?;
    let mut rollout_rng = rng::stream(seed, streams::ROLLOUT);
    let mut critique_rng = rng::stream(seed, streams::CRITIQUE);
    let mut diag_rng = rng::stream(seed, streams::DIAGNOSTICS);
    let mut agent = init.clone();
    let mut baseline: Option<Vec<f64>> = None;
    let mut metrics = Vec::with_capacity(cfg.steps);
    let mut history = Vec::new();
    if setup.record_params {
        history.push(agent.params.clone());
    }
    for step in 0..cfg.steps {
        let (episodes, trajs) = collect_batch(&agent, family, cfg, &mut rollout_rng)?;
        let outcome_adv = outcome_advantages(&trajs, cfg, &mut baseline)?;
        let tracks: Vec<CritiqueTrack> = episodes
            .iter()
            .zip(&trajs)
            .map(|(ep, t)| {
                let clean = critique_track(ep, t, setup.critique.as_rule);
                if setup.critique.flip_alpha > 0.0 {
                    perturb(&clean, setup.critique.flip_alpha, &mut critique_rng)
                } else {
                    Ok(clean)
                }
            })
            .collect::<Result<_>>()?;
        let lambda = cfg.lambda_at(step);
        let mut batch = Vec::with_capacity(trajs.len());
        let mut coeffs = Vec::with_capacity(trajs.len());
        for ((traj, adv), track) in trajs.iter().zip(&outcome_adv).zip(&tracks) {
            let u_q = margin_coeffs(&track.z_q);
            let u_u = margin_coeffs(&track.z_u);
            let adv_q = match cfg.arew_mode {
                ArewMode::Off => adv.clone(),
                ArewMode::AsOnly | ArewMode::AsBt => arew_shape(adv, &u_q, lambda)?,
            };
            let adv_u = match cfg.arew_mode {
                ArewMode::AsBt => arew_shape(adv, &u_u, lambda)?,
                _ => adv.clone(),
            };
            batch.push(TrainSample {
                traj: traj.clone(),
                adv_q,
                adv_u,
            });
            coeffs.push((u_q, u_u));
        }
        let (acc_q, acc_u) = critique_accuracy(&agent, &episodes, &trajs, &tracks, &coeffs, &mut diag_rng)?;
        let i_th_est = if cfg.metric_rollouts > 0 {
            estimate_I_th(&agent, family, cfg.metric_rollouts, &mut diag_rng)?.mean
        } else {
            f64::NAN
        };
        let (next, sm) = policy_step(&agent, &batch, cfg)?;
        let per_turn = |f: &dyn Fn(&Trajectory) -> f64| {
            stats::mean(
                &trajs
                    .iter()
                    .map(|t| if t.steps.is_empty() { 0.0 } else { f(t) / t.steps.len() as f64 })
                    .collect::<Vec<_>>(),
            )
        };
        let record = MetricsRecord {
            step,
            algorithm: cfg.algorithm.name().into(),
            arew_mode: cfg.arew_mode.name().into(),
            lambda_inj: lambda,
            flip_alpha: setup.critique.flip_alpha,
            mean_reward: stats::mean(&trajs.iter().map(|t| t.reward).collect::<Vec<_>>()),
            as_proxy_mean: per_turn(&|t| t.as_proxy_total()),
            bt_proxy_mean: per_turn(&|t| t.bt_proxy_total()),
            i_th_est,
            c_bt_est: stats::mean(&trajs.iter().map(|t| t.absorbed_progress()).collect::<Vec<_>>()),
            acc_q,
            acc_u,
            clip_frac: sm.clip_frac,
            grad_norm_q: sm.grad_norm_q,
            grad_norm_u: sm.grad_norm_u,
            seed,
        };
        sink(&record)?;
        metrics.push(record);
        agent = next;
        if setup.record_params {
            history.push(agent.params.clone());
        }
    }
    Ok(TrainingRun {
        metrics,
        final_agent: agent,
        param_history: history,
    })
}

/// Samples episodes (one per group for group methods) and rolls them out in parallel.
fn collect_batch(
    agent: &Agent,
    family: &EnvFamily,
    cfg: &TrainConfig,
    rng: &mut impl Rng,
) -> Result<(Vec<Episode>, Vec<Trajectory>)> {
    let mut episodes = Vec::with_capacity(cfg.batch_size);
    if cfg.algorithm.is_grouped() {
        for _ in 0..cfg.batch_size / cfg.group_size {
            let ep = family.sample(rng);
            for _ in 0..cfg.group_size {
                episodes.push(ep.clone());
            }
        }
    } else {
        for _ in 0..cfg.batch_size {
            episodes.push(family.sample(rng));
        }
    }
    let seeds = rng::child_seeds(rng, episodes.len());
    let trajs = episodes
        .par_iter()
        .zip(seeds)
        .map(|(ep, s)| rollout(agent, ep, &mut rng::child(s)))
        .collect::<Result<Vec<_>>>()?;
    Ok((episodes, trajs))
}

/// Per-turn outcome advantages shared by both channels.
fn outcome_advantages(trajs: &[Trajectory], cfg: &TrainConfig, baseline: &mut Option<Vec<f64>>) -> Result<Vec<Vec<f64>>> {
    match cfg.algorithm {
        Algorithm::Ppo => {
            let horizon = trajs.iter().map(|t| t.steps.len()).max().unwrap_or(0);
            let returns_to_go = |t: &Trajectory| -> Vec<f64> {
                let h = t.steps.len();
                (0..h).map(|i| cfg.gamma.powi((h - 1 - i) as i32) * t.reward).collect()
            };
            let mut batch_mean = vec![0.0; horizon];
            let mut counts = vec![0usize; horizon];
            for t in trajs {
                for (i, g) in returns_to_go(t).into_iter().enumerate() {
                    batch_mean[i] += g;
                    counts[i] += 1;
                }
            }
            for (m, c) in batch_mean.iter_mut().zip(&counts) {
                if *c > 0 {
                    *m /= *c as f64;
                }
            }
            let values = baseline.get_or_insert_with(|| batch_mean.clone());
            if values.len() < horizon {
                values.resize(horizon, 0.0);
            }
            let mut out = Vec::with_capacity(trajs.len());
            for t in trajs {
                let h = t.steps.len();
                let mut rewards = vec![0.0; h];
                if h > 0 {
                    rewards[h - 1] = t.reward;
                }
                let mut v: Vec<f64> = values[..h].to_vec();
                v.push(0.0);
                out.push(gae(&rewards, &v, cfg.gae_lambda, cfg.gamma)?);
            }
            let d = cfg.baseline_decay;
            for (v, m) in values.iter_mut().zip(&batch_mean) {
                *v = d * *v + (1.0 - d) * m;
            }
            Ok(out)
        }
        Algorithm::Grpo | Algorithm::Gspo => {
            let mut out = Vec::with_capacity(trajs.len());
            for group in trajs.chunks(cfg.group_size) {
                let rewards: Vec<f64> = group.iter().map(|t| t.reward).collect();
                let adv = grpo_advantages(&rewards)?;
                for (t, a) in group.iter().zip(adv) {
                    out.push(vec![a; t.steps.len()]);
                }
            }
            Ok(out)
        }
    }
}

/// Weighted accuracy of the (possibly perturbed) labels against oracle
/// direction labels, per channel. `NaN` when no step carries weight.
fn critique_accuracy(
    agent: &Agent,
    episodes: &[Episode],
    trajs: &[Trajectory],
    tracks: &[CritiqueTrack],
    coeffs: &[(Vec<f64>, Vec<f64>)],
    rng: &mut impl Rng,
) -> Result<(f64, f64)> {
    let seeds = rng::child_seeds(rng, trajs.len());
    let parts = (0..trajs.len())
        .into_par_iter()
        .map(|i| {
            let mut r = rng::child(seeds[i]);
            let (ep, traj, track) = (&episodes[i], &trajs[i], &tracks[i]);
            let (u_q, u_u) = &coeffs[i];
            let mut acc = [0.0f64; 4];
            let mut oracle: Belief = traj.prior.clone();
            let mut scratch = agent.params.zeros_like();
            for (t, s) in traj.steps.iter().enumerate() {
                let ctx = TurnContext { turn: t, horizon: traj.horizon };
                if u_q[t] != 0.0 {
                    let a = oracle_advantage(agent, ep, &oracle, t, s.query, &mut r)?;
                    let g = accumulate_query_grad(agent, &mut scratch, &oracle, ctx, s.query, 0.0)?;
                    let w = accuracy_weight(u_q[t], a, g);
                    acc[1] += w;
                    if track.z_q[t] == oracle_label(a) {
                        acc[0] += w;
                    }
                }
                if u_u[t] != 0.0 {
                    let a = update_advantage(agent, ep, &s.belief_before, ctx, s.query, s.observation, s.op)?;
                    let g = accumulate_update_grad(agent, &mut scratch, &s.belief_before, ctx, s.observation, s.op, 0.0)?;
                    let w = accuracy_weight(u_u[t], a, g);
                    acc[3] += w;
                    if track.z_u[t] == oracle_label(a) {
                        acc[2] += w;
                    }
                }
                if s.query < ep.num_queries() && s.observation != ep.null_symbol() {
                    oracle = bayes_update(&oracle, s.query, s.observation, crate::belief::Feedback::obs_fn(ep))?;
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = [0.0f64; 4];
    for p in parts {
        for (t, x) in total.iter_mut().zip(p) {
            *t += x;
        }
    }
    let ratio = |hit: f64, w: f64| if w > 0.0 { hit / w } else { f64::NAN };
    Ok((ratio(total[0], total[1]), ratio(total[2], total[3])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{AgentParams, UpdateOperator};
    use crate::env::{EnvConfig, HypothesisConfig};

    fn family(horizon: usize) -> EnvFamily {
        EnvConfig::Hypothesis(HypothesisConfig {
            num_states: 4,
            num_queries: 4,
            alphabet: 2,
            horizon,
            null_query: true,
            identity_query: false,
        })
        .build(5)
        .unwrap()
    }

    fn agent(fam: &EnvFamily) -> Agent {
        let ep = fam.template();
        let p = AgentParams::random(4, 5, ep.num_symbols(), 0.5, &mut rng::stream(1, streams::INIT));
        Agent::new(p, UpdateOperator::default_slate()).unwrap()
    }

    #[test]
    fn zero_steps_return_initial_agent() {
        let fam = family(3);
        let a = agent(&fam);
        let setup = TrainSetup {
            train: TrainConfig { steps: 0, ..TrainConfig::default() },
            ..TrainSetup::default()
        };
        let run = train(&setup, &fam, &a, 1).unwrap();
        assert!(run.metrics.is_empty());
        assert_eq!(run.final_agent, a);
    }

    #[test]
    fn zero_advantages_leave_params() {
        let fam = family(3);
        let a = agent(&fam);
        let ep = fam.template();
        let traj = rollout(&a, &ep, &mut rng::stream(0, 0)).unwrap();
        let sample = TrainSample {
            adv_q: vec![0.0; 3],
            adv_u: vec![0.0; 3],
            traj,
        };
        let (next, m) = policy_step(&a, &[sample], &TrainConfig::default()).unwrap();
        assert_eq!(next.params, a.params);
        assert_eq!(m.grad_norm_q, 0.0);
    }

    #[test]
    fn one_turn_hand_computed_update() {
        let fam = family(1);
        let a = agent(&fam);
        let ep = fam.template();
        let traj = rollout(&a, &ep, &mut rng::stream(2, 0)).unwrap();
        let (adv, u, lambda) = (0.3, -1.0, 0.5);
        let sample = TrainSample {
            adv_q: vec![adv + lambda * u],
            adv_u: vec![adv],
            traj: traj.clone(),
        };
        let cfg = TrainConfig { learning_rate: 0.1, ..TrainConfig::default() };
        let (next, m) = policy_step(&a, &[sample], &cfg).unwrap();
        assert_eq!(m.clip_frac, 0.0);
        let gq = crate::agent::query_logprob_grad(&a, &traj, 0).unwrap();
        let gu = crate::agent::update_logprob_grad(&a, &traj, 0).unwrap();
        let mut expect = a.params.clone();
        expect.add_scaled(&gq, 0.1 * (adv + lambda * u));
        expect.add_scaled(&gu, 0.1 * adv);
        for i in 0..expect.len() {
            assert!((expect.get_flat(i) - next.params.get_flat(i)).abs() < 1e-14);
        }
    }

    #[test]
    fn training_is_seed_deterministic() {
        let fam = family(3);
        let a = agent(&fam);
        let setup = TrainSetup {
            train: TrainConfig {
                steps: 3,
                batch_size: 12,
                arew_mode: ArewMode::AsBt,
                ..TrainConfig::default()
            },
            critique: CritiqueConfig {
                flip_alpha: 0.2,
                ..CritiqueConfig::default()
            },
            record_params: true,
        };
        let x = train(&setup, &fam, &a, 9).unwrap();
        let y = train(&setup, &fam, &a, 9).unwrap();
        assert_eq!(x.param_history, y.param_history);
        assert_eq!(x.param_history.len(), 4);
        assert_eq!(format!("{:?}", x.metrics), format!("{:?}", y.metrics));
    }

    #[test]
    fn config_validation() {
        let bad = TrainConfig {
            algorithm: Algorithm::Grpo,
            batch_size: 10,
            ..TrainConfig::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Config { .. })));
        let neg = TrainConfig { lambda_inj: -1.0, ..TrainConfig::default() };
        assert!(neg.validate().is_err());
        let sched = TrainConfig {
            steps: 5,
            lambda_inj: 1.0,
            lambda_schedule: LambdaSchedule::Linear { end: 0.0 },
            ..TrainConfig::default()
        };
        assert_eq!(sched.lambda_at(0), 1.0);
        assert_eq!(sched.lambda_at(4), 0.0);
    }
}
