use proptest::prelude::*;

use sellock::agent::{rollout, UpdateOperator};
use sellock::belief::{bayes_update, one_step_progress, potential, Feedback, NORM_TOL};
use sellock::critique::{margin_coeffs, margin_objective, perturb, CritiqueTrack};
use sellock::env::HypothesisConfig;
use sellock::trainers::{arew_shape, gae, grpo_advantages, gspo_ratio};
use sellock::{rng, stats, Agent, AgentParams, Belief, EnvConfig, ObservationFn};

fn belief_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.001f64..1.0], n)
}

fn table_strategy(n: usize, q: usize, alphabet: u16) -> impl Strategy<Value = Vec<Vec<u16>>> {
    prop::collection::vec(prop::collection::vec(0..alphabet, q), n)
}

fn normalized(w: &[f64], keep: usize) -> Belief {
    let mut w = w.to_vec();
    w[keep] += 0.01;
    let total: f64 = w.iter().sum();
    Belief::new(w.iter().map(|x| x / total).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn bayes_update_is_a_belief_on_the_consistent_support(
        w in belief_strategy(6),
        table in table_strategy(6, 4, 3),
        s in 0usize..6,
        q in 0usize..4,
    ) {
        let b = normalized(&w, s);
        let obs = ObservationFn::new(4, table).unwrap();
        let o = obs.observe(s, q);
        let post = bayes_update(&b, q, o, &obs).unwrap();
        prop_assert!((post.probs().iter().sum::<f64>() - 1.0).abs() <= NORM_TOL);
        for i in 0..6 {
            if obs.observe(i, q) != o {
                prop_assert_eq!(post.get(i), 0.0);
            }
        }
        prop_assert!(post.get(s) >= b.get(s) - 1e-15);
    }

    #[test]
    fn every_operator_returns_a_valid_belief(
        w in belief_strategy(5),
        table in table_strategy(5, 3, 2),
        s in 0usize..5,
        q in 0usize..3,
        rate in 0.0f64..0.99,
    ) {
        let b = normalized(&w, s);
        let obs = ObservationFn::new(3, table).unwrap();
        let o = obs.observe(s, q);
        for op in [
            UpdateOperator::Identity,
            UpdateOperator::BayesFull,
            UpdateOperator::BayesPartial { rate },
            UpdateOperator::TowardUniform { rate },
            UpdateOperator::AntiBayes { rate },
        ] {
            let next = op.apply(&b, q, o, &obs).unwrap();
            prop_assert!((next.probs().iter().sum::<f64>() - 1.0).abs() <= NORM_TOL);
            prop_assert!(next.probs().iter().all(|p| *p >= 0.0));
        }
        prop_assert_eq!(UpdateOperator::Identity.apply(&b, q, o, &obs).unwrap(), b.clone());
        // The null symbol is uninformative.
        prop_assert_eq!(UpdateOperator::BayesFull.apply(&b, q, obs.null_symbol(), &obs).unwrap(), b);
    }

    #[test]
    fn progress_splits_into_absorbed_and_destructive(
        a in belief_strategy(4),
        b in belief_strategy(4),
        s in 0usize..4,
    ) {
        let (x, y) = (normalized(&a, s), normalized(&b, s));
        let p = one_step_progress(&x, &y, s).unwrap();
        prop_assert!((p.delta - (potential(&y, s).unwrap() - potential(&x, s).unwrap())).abs() < 1e-15);
        prop_assert!(p.absorbed >= 0.0 && p.destructive >= 0.0);
        prop_assert!((p.absorbed - p.destructive - p.delta).abs() < 1e-15);
    }

    #[test]
    fn margin_coefficients_center_and_score(labels in prop::collection::vec(-1i8..=1, 0..30)) {
        let u = margin_coeffs(&labels);
        prop_assert!(u.iter().sum::<f64>().abs() <= 1e-12);
        let pos = labels.iter().filter(|z| **z > 0).count();
        let neg = labels.iter().filter(|z| **z < 0).count();
        if pos == 0 || neg == 0 {
            prop_assert!(u.iter().all(|x| *x == 0.0));
        } else {
            prop_assert!((u.iter().filter(|x| **x > 0.0).sum::<f64>() - 1.0).abs() < 1e-12);
            // Constant log-probabilities give a zero margin.
            prop_assert!(margin_objective(&vec![-0.7; labels.len()], &labels).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn perturb_only_negates_nonzero_labels(
        z_q in prop::collection::vec(-1i8..=1, 1..10),
        alpha in 0.0f64..=1.0,
        seed in any::<u64>(),
    ) {
        let t = CritiqueTrack::new(z_q.clone(), z_q.clone());
        let p = perturb(&t, alpha, &mut rng::stream(seed, 3)).unwrap();
        for (i, z) in z_q.iter().enumerate() {
            prop_assert_eq!(p.z_q[i].abs(), z.abs());
            prop_assert_eq!(p.flipped_q[i], p.z_q[i] != *z);
        }
    }

    #[test]
    fn shaping_with_zero_strength_is_identity(
        adv in prop::collection::vec(-5.0f64..5.0, 1..8),
        seed in any::<u64>(),
    ) {
        let coeffs: Vec<f64> = rng::child_seeds(&mut rng::stream(seed, 0), adv.len()).iter().map(|s| (*s % 7) as f64 - 3.0).collect();
        prop_assert_eq!(arew_shape(&adv, &coeffs, 0.0).unwrap(), adv.clone());
        let shaped = arew_shape(&adv, &coeffs, 0.5).unwrap();
        for i in 0..adv.len() {
            prop_assert!((shaped[i] - adv[i] - 0.5 * coeffs[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn grpo_normalizes_each_group(rewards in prop::collection::vec(-3.0f64..3.0, 2..20)) {
        let a = grpo_advantages(&rewards).unwrap();
        if rewards.iter().all(|r| *r == rewards[0]) {
            prop_assert!(a.iter().all(|x| *x == 0.0));
        } else {
            prop_assert!(stats::mean(&a).abs() < 1e-9);
            prop_assert!((stats::population_std(&a) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn gspo_ratio_ignores_duplication(
        pairs in prop::collection::vec((-4.0f64..0.0, -0.3f64..0.3), 1..10),
        k in 2usize..5,
    ) {
        let new: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let old: Vec<f64> = pairs.iter().map(|p| p.0 + p.1).collect();
        let dup = |xs: &[f64]| xs.iter().flat_map(|x| std::iter::repeat_n(*x, k)).collect::<Vec<_>>();
        let r = gspo_ratio(&new, &old).unwrap();
        prop_assert!((gspo_ratio(&dup(&new), &dup(&old)).unwrap() - r).abs() <= 1e-12 * r);
    }

    #[test]
    fn gae_with_unit_discount_is_return_minus_value(
        rewards in prop::collection::vec(-1.0f64..1.0, 1..8),
        values in prop::collection::vec(-1.0f64..1.0, 9),
    ) {
        let h = rewards.len();
        let mut v = values[..h].to_vec();
        v.push(0.0);
        let adv = gae(&rewards, &v, 1.0, 1.0).unwrap();
        for t in 0..h {
            let ret: f64 = rewards[t..].iter().sum();
            prop_assert!((adv[t] - (ret - v[t])).abs() < 1e-12);
        }
    }

    #[test]
    fn params_round_trip_through_json(seed in any::<u64>(), q in 1usize..6, ops in 1usize..6, sym in 2usize..5) {
        let p = AgentParams::random(q, ops, sym, 3.0, &mut rng::stream(seed, 5));
        prop_assert_eq!(AgentParams::from_json(&p.to_json().unwrap()).unwrap(), p);
    }

    #[test]
    fn rollouts_are_seed_deterministic_and_logged_consistently(
        seed in any::<u64>(),
        states in 2usize..7,
        horizon in 1usize..5,
    ) {
        let fam = EnvConfig::Hypothesis(HypothesisConfig {
            num_states: states,
            num_queries: 4,
            alphabet: 2,
            horizon,
            null_query: true,
            identity_query: false,
        })
        .build(seed)
        .unwrap();
        let ep = fam.template();
        let ops = UpdateOperator::default_slate();
        let params = AgentParams::random(4, ops.len(), ep.num_symbols(), 1.0, &mut rng::stream(seed, 5));
        let agent = Agent::new(params, ops).unwrap();
        let a = rollout(&agent, &ep, &mut rng::stream(seed, 2)).unwrap();
        let b = rollout(&agent, &ep, &mut rng::stream(seed, 2)).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.steps.len(), horizon);
        for (t, s) in a.steps.iter().enumerate() {
            prop_assert_eq!(s.observation, ep.obs_fn().observe(ep.true_state(), s.query));
            if t + 1 < a.steps.len() {
                prop_assert_eq!(&s.belief_after, &a.steps[t + 1].belief_before);
            }
        }
        prop_assert!(a.reward == 0.0 || a.reward == 1.0);
    }
}
