//! Inputs shared by the benchmarks.

use sellock::reference::{reference_agent, reference_family};
use sellock::trainers::{ArewMode, TrainSample};
use sellock::{rng, Agent, EnvFamily, TrainConfig};

pub fn reference() -> (EnvFamily, Agent) {
    let family = reference_family().expect("reference family builds");
    let agent = reference_agent(&family).expect("reference agent builds");
    (family, agent)
}

/// A batch of rollouts with unit advantages, sized like a default training step.
pub fn batch(family: &EnvFamily, agent: &Agent, size: usize) -> Vec<TrainSample> {
    let mut r = rng::stream(0, rng::streams::ROLLOUT);
    (0..size)
        .map(|i| {
            let ep = family.sample(&mut r);
            let traj = sellock::agent::rollout(agent, &ep, &mut r).expect("rollout");
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let adv = vec![sign; traj.steps.len()];
            TrainSample {
                traj,
                adv_q: adv.clone(),
                adv_u: adv,
            }
        })
        .collect()
}

pub fn train_config() -> TrainConfig {
    TrainConfig {
        arew_mode: ArewMode::AsBt,
        ..TrainConfig::default()
    }
}
