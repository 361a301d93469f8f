//! Stepwise directional critiques, likelihood-margin coefficients and the
//! weighted critique accuracy.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agent::{StepRecord, Trajectory};
use crate::env::{Episode, PrefQuery, QueryDescriptor};
use crate::error::{Error, Result};

/// Readout changes at or below this size count as no change.
pub const BT_ZERO_TOL: f64 = 1e-12;

/// Rule for action-selection critiques in the hypothesis environment.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AsRule {
    /// +1 when a fresh query eliminates a still-consistent state.
    #[default]
    Elimination,
    /// Binary answers: yes (symbol 1) → +1, no (symbol 0) → 0, unknown → −1.
    ThreeWay,
}

/// Critique block of an experiment config.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CritiqueConfig {
    /// Probability of negating each nonzero label.
    pub flip_alpha: f64,
    #[serde(alias = "mode")]
    pub as_rule: AsRule,
}

impl CritiqueConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.flip_alpha) {
            return Err(Error::config("critique.flip_alpha", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CritiqueTrack {
    pub z_q: Vec<i8>,
    pub z_u: Vec<i8>,
    pub flipped_q: Vec<bool>,
    pub flipped_u: Vec<bool>,
}

impl CritiqueTrack {
    pub fn new(z_q: Vec<i8>, z_u: Vec<i8>) -> Self {
        let flipped_q = vec![false; z_q.len()];
        let flipped_u = vec![false; z_u.len()];
        Self {
            z_q,
            z_u,
            flipped_q,
            flipped_u,
        }
    }

    pub fn len(&self) -> usize {
        self.z_q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z_q.is_empty()
    }
}

fn is_repeat(step: &StepRecord, history: &[StepRecord]) -> bool {
    history.iter().any(|h| h.descriptor == step.descriptor)
}

/// Action-selection critique for `step`, given the earlier steps of its episode.
pub fn as_critique(env: &Episode, step: &StepRecord, history: &[StepRecord], rule: AsRule) -> i8 {
    if step.query >= env.num_queries() || is_repeat(step, history) {
        return -1;
    }
    match env {
        Episode::Hypothesis(_) => match rule {
            AsRule::Elimination => {
                if step.observation != env.null_symbol() && step.as_proxy > 0.0 {
                    1
                } else {
                    -1
                }
            }
            AsRule::ThreeWay => match step.observation {
                o if o == env.null_symbol() => -1,
                1 => 1,
                _ => 0,
            },
        },
        Episode::Pref(e) => match &step.descriptor {
            QueryDescriptor::Pref(PrefQuery::Compare { .. }) if e.as_indicator(step.query) => 1,
            _ => -1,
        },
    }
}

/// `Sign(Ψ̂_{t+1} − Ψ̂_t)`, with `Sign(0) = 0`.
pub fn bt_critique(readout_before: f64, readout_after: f64) -> i8 {
    let d = readout_after - readout_before;
    if d > BT_ZERO_TOL {
        1
    } else if d < -BT_ZERO_TOL {
        -1
    } else {
        0
    }
}

pub fn critique_track(env: &Episode, traj: &Trajectory, rule: AsRule) -> CritiqueTrack {
    let z_q = (0..traj.steps.len())
        .map(|t| as_critique(env, &traj.steps[t], &traj.steps[..t], rule))
        .collect();
    let z_u = traj
        .steps
        .iter()
        .map(|s| bt_critique(s.readout_before, s.readout_after))
        .collect();
    CritiqueTrack::new(z_q, z_u)
}

/// Negate each nonzero label independently with probability `alpha`.
pub fn perturb(track: &CritiqueTrack, alpha: f64, rng: &mut impl Rng) -> Result<CritiqueTrack> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::config("critique.flip_alpha", format!("{alpha} outside [0, 1]")));
    }
    let mut out = track.clone();
    for (z, f) in out
        .z_q
        .iter_mut()
        .zip(out.flipped_q.iter_mut())
        .chain(out.z_u.iter_mut().zip(out.flipped_u.iter_mut()))
    {
        if *z != 0 && rng.random::<f64>() < alpha {
            *z = -*z;
            *f = !*f;
        }
    }
    Ok(out)
}

/// Per-step coefficients `1/|P|`, `−1/|N|`, `0`; all zero unless both classes occur.
pub fn margin_coeffs(labels: &[i8]) -> Vec<f64> {
    let pos = labels.iter().filter(|z| **z > 0).count();
    let neg = labels.iter().filter(|z| **z < 0).count();
    if pos == 0 || neg == 0 {
        return vec![0.0; labels.len()];
    }
    labels
        .iter()
        .map(|z| match z.signum() {
            1 => 1.0 / pos as f64,
            -1 => -1.0 / neg as f64,
            _ => 0.0,
        })
        .collect()
}

/// Mean log-probability over positive steps minus mean over negative steps.
pub fn margin_objective(logprobs: &[f64], labels: &[i8]) -> Result<f64> {
    if logprobs.len() != labels.len() {
        return Err(Error::usage("log-probabilities and labels differ in length"));
    }
    Ok(margin_coeffs(labels).iter().zip(logprobs).map(|(u, l)| u * l).sum())
}

/// Oracle direction label; a zero advantage maps to +1.
pub fn oracle_label(advantage: f64) -> i8 {
    if advantage < 0.0 {
        -1
    } else {
        1
    }
}

/// `|u_t| · |A^B_t| · ‖∇ log π^Q_t‖²`.
pub fn accuracy_weight(u: f64, oracle_advantage: f64, grad_norm_sq: f64) -> f64 {
    u.abs() * oracle_advantage.abs() * grad_norm_sq
}

/// `Σ w·1{z = y} / Σ w`.
pub fn weighted_accuracy(labels: &[i8], oracle_labels: &[i8], weights: &[f64]) -> Result<f64> {
    if labels.len() != oracle_labels.len() || labels.len() != weights.len() {
        return Err(Error::usage("accuracy inputs differ in length"));
    }
    if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
        return Err(Error::usage("accuracy weights must be finite and nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::UndefinedAccuracy);
    }
    let hit: f64 = labels
        .iter()
        .zip(oracle_labels)
        .zip(weights)
        .filter(|((z, y), _)| z == y)
        .map(|(_, w)| w)
        .sum();
    Ok(hit / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn margin_coeff_examples() {
        assert_eq!(margin_coeffs(&[1, 0, -1, 1, -1]), vec![0.5, 0.0, -0.5, 0.5, -0.5]);
        assert_eq!(margin_coeffs(&[1, 1]), vec![0.0, 0.0]);
        assert_eq!(margin_coeffs(&[1, -1, 1]), vec![0.5, -1.0, 0.5]);
        assert_eq!(margin_coeffs(&[]), Vec::<f64>::new());
    }

    #[test]
    fn margin_objective_examples() {
        assert_eq!(margin_objective(&[-1.0, -2.0], &[0, 0]).unwrap(), 0.0);
        assert_eq!(margin_objective(&[-1.0, -2.0], &[1, -1]).unwrap(), 1.0);
        assert!(margin_objective(&[-1.0], &[1, -1]).is_err());
    }

    #[test]
    fn bt_critique_signs() {
        assert_eq!(bt_critique(0.4, 0.6), 1);
        assert_eq!(bt_critique(0.6, 0.4), -1);
        assert_eq!(bt_critique(0.5, 0.5), 0);
    }

    #[test]
    fn perturb_extremes() {
        let t = CritiqueTrack::new(vec![1, 0, -1], vec![0, 1, 1]);
        let mut r = rng::stream(0, 0);
        assert_eq!(perturb(&t, 0.0, &mut r).unwrap(), t);
        let all = perturb(&t, 1.0, &mut r).unwrap();
        assert_eq!(all.z_q, vec![-1, 0, 1]);
        assert_eq!(all.z_u, vec![0, -1, -1]);
        assert_eq!(all.flipped_q, vec![true, false, true]);
        assert!(perturb(&t, 1.5, &mut r).is_err());
    }

    #[test]
    fn accuracy_edges() {
        let y = [1, -1, 1];
        let w = [1.0, 2.0, 3.0];
        assert_eq!(weighted_accuracy(&y, &y, &w).unwrap(), 1.0);
        assert_eq!(weighted_accuracy(&[-1, 1, -1], &y, &w).unwrap(), 0.0);
        assert!(matches!(
            weighted_accuracy(&y, &y, &[0.0; 3]),
            Err(Error::UndefinedAccuracy)
        ));
        assert_eq!(oracle_label(0.0), 1);
    }
}
