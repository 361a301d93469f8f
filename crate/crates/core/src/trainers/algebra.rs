//! Advantage estimators and importance ratios shared by the trainers.

use crate::error::{Error, Result};
use crate::stats;

/// Generalized advantage estimation over one episode. `values` carries one
/// entry per turn plus the terminal bootstrap.
pub fn gae(rewards: &[f64], values: &[f64], lambda: f64, gamma: f64) -> Result<Vec<f64>> {
    if values.len() != rewards.len() + 1 {
        return Err(Error::usage(format!(
            "values has length {}, expected turns + 1 = {}",
            values.len(),
            rewards.len() + 1
        )));
    }
    let mut adv = vec![0.0; rewards.len()];
    let mut running = 0.0;
    for t in (0..rewards.len()).rev() {
        let delta = rewards[t] + gamma * values[t + 1] - values[t];
        running = delta + gamma * lambda * running;
        adv[t] = running;
    }
    Ok(adv)
}

/// `(r_i − mean) / std` with the population std; a degenerate group maps to zeros.
pub fn grpo_advantages(group_rewards: &[f64]) -> Result<Vec<f64>> {
    if group_rewards.len() < 2 {
        return Err(Error::usage("group size must be at least 2"));
    }
    // Checked on the values: the mean of equal floats can be off by an ulp.
    if group_rewards.iter().all(|r| *r == group_rewards[0]) {
        return Ok(vec![0.0; group_rewards.len()]);
    }
    let m = stats::mean(group_rewards);
    let sd = stats::population_std(group_rewards);
    if sd == 0.0 || !sd.is_finite() {
        return Ok(vec![0.0; group_rewards.len()]);
    }
    Ok(group_rewards.iter().map(|r| (r - m) / sd).collect())
}

/// Length-normalized sequence ratio `exp(mean(new − old))`.
pub fn gspo_ratio(new_logprobs: &[f64], old_logprobs: &[f64]) -> Result<f64> {
    if new_logprobs.is_empty() {
        return Err(Error::usage("sequence ratio of an empty sequence"));
    }
    if new_logprobs.len() != old_logprobs.len() {
        return Err(Error::usage("log-probability sequences differ in length"));
    }
    let diff: f64 = new_logprobs.iter().zip(old_logprobs).map(|(n, o)| n - o).sum();
    Ok((diff / new_logprobs.len() as f64).exp())
}

/// `Â_t = A_t + λ·u_t`.
pub fn arew_shape(advantages: &[f64], coeffs: &[f64], lambda_inj: f64) -> Result<Vec<f64>> {
    if advantages.len() != coeffs.len() {
        return Err(Error::usage("advantages and margin coefficients differ in length"));
    }
    Ok(advantages.iter().zip(coeffs).map(|(a, u)| a + lambda_inj * u).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gae_examples() {
        assert_eq!(gae(&[0.0; 3], &[0.0; 4], 1.0, 1.0).unwrap(), vec![0.0; 3]);
        assert_eq!(gae(&[0.0, 0.0, 1.0], &[0.0; 4], 1.0, 1.0).unwrap(), vec![1.0; 3]);
        let r = [0.5, 1.0];
        let v = [0.2, 0.3, 9.0];
        assert_eq!(gae(&r, &v, 0.7, 0.0).unwrap(), vec![0.5 - 0.2, 1.0 - 0.3]);
        assert!(gae(&r, &[0.0; 2], 1.0, 1.0).is_err());
    }

    #[test]
    fn gae_unit_parameters_are_return_to_go_minus_value() {
        let r = [0.1, -0.3, 0.7];
        let v = [0.4, 0.2, -0.1, 0.0];
        let a = gae(&r, &v, 1.0, 1.0).unwrap();
        let expect = [0.5 - 0.4, 0.4 - 0.2, 0.7 + 0.1];
        for (x, y) in a.iter().zip(expect) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn grpo_examples() {
        let a = grpo_advantages(&[1.0, 0.0, 1.0]).unwrap();
        let s = 2f64.sqrt();
        assert!((a[0] - 1.0 / s).abs() < 1e-15 && (a[1] + s).abs() < 1e-15 && (a[2] - 1.0 / s).abs() < 1e-15);
        assert_eq!(grpo_advantages(&[0.3; 3]).unwrap(), vec![0.0; 3]);
        assert!(grpo_advantages(&[1.0]).is_err());
    }

    #[test]
    fn gspo_examples() {
        assert_eq!(gspo_ratio(&[-1.0, -2.0], &[-1.0, -2.0]).unwrap(), 1.0);
        let r = gspo_ratio(&[4f64.ln(), 0.0], &[0.0, 0.0]).unwrap();
        assert!((r - 2.0).abs() < 1e-15);
        assert!(gspo_ratio(&[], &[]).is_err());
    }

    #[test]
    fn shaping_examples() {
        assert_eq!(arew_shape(&[0.2, -0.1], &[1.0, -1.0], 0.0).unwrap(), vec![0.2, -0.1]);
        let s = arew_shape(&[0.2, -0.1], &[1.0, -1.0], 0.5).unwrap();
        assert!((s[0] - 0.7).abs() < 1e-15 && (s[1] + 0.6).abs() < 1e-15);
    }
}
