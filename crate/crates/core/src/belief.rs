//! Beliefs over a finite latent-state set, the truth-aligned potential, exact
//! Bayesian conditioning under deterministic feedback, and oracle-belief
//! rollouts that measure how informative a query policy is independently of
//! any agent's own belief-update mechanism.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported latent-state set.
pub const MAX_STATES: usize = 64;

/// Normalization tolerance for belief vectors.
pub const NORM_TOL: f64 = 1e-9;

/// Probability vector over latent-state indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Belief {
    probs: Vec<f64>,
}

impl Belief {
    /// Validate and wrap a probability vector.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::usage("belief over an empty state set"));
        }
        if probs.len() > MAX_STATES {
            return Err(Error::usage(format!(
                "belief over {} states exceeds the supported maximum of {MAX_STATES}",
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0 || **p > 1.0 + NORM_TOL) {
            return Err(Error::usage(format!("belief entry {p} outside [0, 1]")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::usage(format!("belief sums to {total}, expected 1")));
        }
        Ok(Self { probs })
    }

    /// Renormalize a nonnegative mass vector. Fails when the mass is zero.
    pub(crate) fn from_mass(mass: Vec<f64>) -> Option<Self> {
        let total: f64 = mass.iter().sum();
        if total <= 0.0 || !total.is_finite() {
            return None;
        }
        Some(Self {
            probs: mass.into_iter().map(|m| m / total).collect(),
        })
    }

    pub fn uniform(num_states: usize) -> Self {
        assert!(num_states > 0 && num_states <= MAX_STATES);
        Self {
            probs: vec![1.0 / num_states as f64; num_states],
        }
    }

    pub fn point_mass(num_states: usize, state: usize) -> Self {
        assert!(state < num_states && num_states <= MAX_STATES);
        let mut probs = vec![0.0; num_states];
        probs[state] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn num_states(&self) -> usize {
        self.probs.len()
    }

    pub fn get(&self, state: usize) -> f64 {
        self.probs[state]
    }

    /// Indices with positive mass.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(s, _)| s)
    }

    /// Most likely state, ties broken by lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (s, p) in self.probs.iter().enumerate() {
            if *p > self.probs[best] {
                best = s;
            }
        }
        best
    }

    pub fn max_prob(&self) -> f64 {
        self.probs.iter().copied().fold(0.0, f64::max)
    }

    /// Shannon entropy divided by `ln |S|` (0 for a single state).
    pub fn normalized_entropy(&self) -> f64 {
        let n = self.probs.len();
        if n < 2 {
            return 0.0;
        }
        let h: f64 = self
            .probs
            .iter()
            .filter(|p| **p > 0.0)
            .map(|p| -p * p.ln())
            .sum();
        (h / (n as f64).ln()).clamp(0.0, 1.0)
    }
}

impl TryFrom<Vec<f64>> for Belief {
    type Error = Error;
    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Belief::new(probs)
    }
}

impl From<Belief> for Vec<f64> {
    fn from(b: Belief) -> Self {
        b.probs
    }
}

/// Truth-aligned potential: the belief mass on the true state.
pub fn potential(belief: &Belief, true_state: usize) -> Result<f64> {
    belief.probs.get(true_state).copied().ok_or_else(|| {
        Error::usage(format!(
            "true state {true_state} out of range for {} states",
            belief.num_states()
        ))
    })
}

/// Deterministic observation table `(state, query) -> symbol`.
///
/// The last symbol of the alphabet is reserved as the null ("unknown")
/// response returned by uninformative and invalid queries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationFn {
    num_symbols: u16,
    /// One row per state, one column per query.
    table: Vec<Vec<u16>>,
}

impl ObservationFn {
    pub fn new(num_symbols: u16, table: Vec<Vec<u16>>) -> Result<Self> {
        if table.is_empty() || table.len() > MAX_STATES {
            return Err(Error::usage("observation table needs between 1 and 64 states"));
        }
        let width = table[0].len();
        if width == 0 {
            return Err(Error::usage("observation table has no queries"));
        }
        if table.iter().any(|row| row.len() != width) {
            return Err(Error::usage("observation table is ragged"));
        }
        if num_symbols < 2 {
            return Err(Error::usage("alphabet needs at least one symbol plus the null symbol"));
        }
        if table.iter().flatten().any(|o| *o >= num_symbols) {
            return Err(Error::usage("observation symbol outside the alphabet"));
        }
        Ok(Self { num_symbols, table })
    }

    pub fn num_states(&self) -> usize {
        self.table.len()
    }

    pub fn num_queries(&self) -> usize {
        self.table[0].len()
    }

    /// Alphabet size including the null symbol.
    pub fn num_symbols(&self) -> usize {
        self.num_symbols as usize
    }

    pub fn null_symbol(&self) -> u16 {
        self.num_symbols - 1
    }

    pub fn observe(&self, state: usize, query: usize) -> u16 {
        self.table[state][query]
    }

    pub fn rows(&self) -> &[Vec<u16>] {
        &self.table
    }

    /// A query is informative when it partitions the states nontrivially.
    pub fn is_informative(&self, query: usize) -> bool {
        let first = self.table[0][query];
        self.table.iter().any(|row| row[query] != first)
    }
}

/// Exact Bayesian conditioning on a deterministic observation.
pub fn bayes_update(belief: &Belief, query: usize, symbol: u16, obs_fn: &ObservationFn) -> Result<Belief> {
    if query >= obs_fn.num_queries() {
        return Err(Error::usage(format!("query {query} out of range")));
    }
    if belief.num_states() != obs_fn.num_states() {
        return Err(Error::usage("belief and observation table disagree on |S|"));
    }
    let mass: Vec<f64> = belief
        .probs
        .iter()
        .enumerate()
        .map(|(s, p)| if obs_fn.observe(s, query) == symbol { *p } else { 0.0 })
        .collect();
    Belief::from_mass(mass).ok_or(Error::Inconsistent { query, symbol })
}

/// Signed potential change split into its absorbed and destructive parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Progress {
    pub delta: f64,
    pub absorbed: f64,
    pub destructive: f64,
}

pub fn one_step_progress(before: &Belief, after: &Belief, true_state: usize) -> Result<Progress> {
    if before.num_states() != after.num_states() {
        return Err(Error::usage("beliefs over different state sets"));
    }
    let delta = potential(after, true_state)? - potential(before, true_state)?;
    Ok(Progress {
        delta,
        absorbed: delta.max(0.0),
        destructive: (-delta).max(0.0),
    })
}

/// Position within an episode, exposed to belief-conditioned policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TurnContext {
    pub turn: usize,
    pub horizon: usize,
}

/// A belief-conditioned distribution over the query slate.
pub trait QueryPolicy {
    fn num_queries(&self) -> usize;

    /// Probabilities over all queries (sums to 1).
    fn query_probs(&self, belief: &Belief, ctx: TurnContext) -> Result<Vec<f64>>;
}

/// Source of deterministic feedback for one episode.
pub trait Feedback {
    fn obs_fn(&self) -> &ObservationFn;
    fn true_state(&self) -> usize;
}

/// Inverse-CDF draw from a probability vector. Zero-probability entries are
/// never returned.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p <= 0.0 {
            continue;
        }
        last_positive = i;
        acc += p;
        if u < acc {
            return i;
        }
    }
    last_positive
}

/// Oracle-belief trajectory: the agent's query policy conditioned on the
/// Bayesian belief, with beliefs evolving by exact conditioning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleTrajectory {
    pub true_state: usize,
    pub beliefs: Vec<Belief>,
    pub queries: Vec<usize>,
    pub observations: Vec<u16>,
    /// One-step oracle progress `Ψ(b_{t+1}) − Ψ(b_t)`.
    pub progress: Vec<f64>,
}

impl OracleTrajectory {
    pub fn total_progress(&self) -> f64 {
        self.progress.iter().sum()
    }

    /// `Ψ(b_H) − Ψ(b_0)`.
    pub fn net_progress(&self) -> f64 {
        let first = self.beliefs.first().expect("oracle trajectory has a prior");
        let last = self.beliefs.last().expect("oracle trajectory has a prior");
        last.get(self.true_state) - first.get(self.true_state)
    }

    /// One JSON object, no trailing newline.
    pub fn to_json_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

pub fn oracle_rollout<P, E, R>(
    policy: &P,
    env: &E,
    prior: &Belief,
    horizon: usize,
    rng: &mut R,
) -> Result<OracleTrajectory>
where
    P: QueryPolicy + ?Sized,
    E: Feedback + ?Sized,
    R: Rng + ?Sized,
{
    let obs_fn = env.obs_fn();
    let s_star = env.true_state();
    if potential(prior, s_star)? <= 0.0 {
        return Err(Error::usage("prior assigns zero mass to the true state"));
    }
    let mut beliefs = Vec::with_capacity(horizon + 1);
    let mut queries = Vec::with_capacity(horizon);
    let mut observations = Vec::with_capacity(horizon);
    let mut progress = Vec::with_capacity(horizon);
    beliefs.push(prior.clone());
    for turn in 0..horizon {
        let current = &beliefs[turn];
        let probs = policy.query_probs(current, TurnContext { turn, horizon })?;
        let q = sample_index(&probs, rng);
        let o = obs_fn.observe(s_star, q);
        let next = bayes_update(current, q, o, obs_fn)
            .expect("on-policy observation is consistent with the true state");
        progress.push(next.get(s_star) - current.get(s_star));
        queries.push(q);
        observations.push(o);
        beliefs.push(next);
    }
    Ok(OracleTrajectory {
        true_state: s_star,
        beliefs,
        queries,
        observations,
        progress,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn potential_reads_true_state_mass() {
        assert!(close(potential(&Belief::uniform(4), 3).unwrap(), 0.25));
        assert_eq!(potential(&Belief::point_mass(3, 1), 1).unwrap(), 1.0);
        let b = Belief::new(vec![0.6, 0.3, 0.1]).unwrap();
        assert!(close(potential(&b, 1).unwrap(), 0.3));
        assert!(matches!(potential(&b, 3), Err(Error::Usage(_))));
    }

    #[test]
    fn belief_validation() {
        assert!(Belief::new(vec![]).is_err());
        assert!(Belief::new(vec![0.5, 0.6]).is_err());
        assert!(Belief::new(vec![-0.1, 1.1]).is_err());
        assert!(Belief::new(vec![0.5, 0.5]).is_ok());
        assert_eq!(Belief::new(vec![0.2, 0.4, 0.4]).unwrap().argmax(), 1);
    }

    fn table(rows: Vec<Vec<u16>>, symbols: u16) -> ObservationFn {
        ObservationFn::new(symbols, rows).unwrap()
    }

    #[test]
    fn bayes_uninformative_query_leaves_belief() {
        let f = table(vec![vec![1]; 4], 3);
        let b = Belief::uniform(4);
        assert_eq!(bayes_update(&b, 0, 1, &f).unwrap(), b);
    }

    #[test]
    fn bayes_symmetric_elimination() {
        let f = table(vec![vec![0], vec![0], vec![1], vec![1]], 3);
        let b = bayes_update(&Belief::uniform(4), 0, 0, &f).unwrap();
        assert_eq!(b.probs(), &[0.5, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn bayes_elimination_of_one_state() {
        let f = table(vec![vec![0], vec![0], vec![1]], 3);
        let b = Belief::new(vec![0.6, 0.3, 0.1]).unwrap();
        let post = bayes_update(&b, 0, 0, &f).unwrap();
        assert!(close(post.get(0), 2.0 / 3.0));
        assert!(close(post.get(1), 1.0 / 3.0));
        assert_eq!(post.get(2), 0.0);
    }

    #[test]
    fn bayes_inconsistent_observation() {
        let f = table(vec![vec![0], vec![0], vec![1]], 3);
        let b = Belief::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(bayes_update(&b, 0, 0, &f), Err(Error::Inconsistent { .. })));
        assert!(matches!(bayes_update(&b, 4, 0, &f), Err(Error::Usage(_))));
    }

    #[test]
    fn progress_parts() {
        let mk = |p: f64| Belief::new(vec![p, 1.0 - p]).unwrap();
        let p = one_step_progress(&mk(0.25), &mk(0.40), 0).unwrap();
        assert!(close(p.delta, 0.15) && close(p.absorbed, 0.15) && p.destructive == 0.0);
        let p = one_step_progress(&mk(0.4), &mk(0.4), 0).unwrap();
        assert_eq!((p.delta, p.absorbed, p.destructive), (0.0, 0.0, 0.0));
        let p = one_step_progress(&mk(0.5), &mk(0.2), 0).unwrap();
        assert!(close(p.delta, -0.3) && p.absorbed == 0.0 && close(p.destructive, 0.3));
    }

    struct Fixed(Vec<f64>);
    impl QueryPolicy for Fixed {
        fn num_queries(&self) -> usize {
            self.0.len()
        }
        fn query_probs(&self, _: &Belief, _: TurnContext) -> Result<Vec<f64>> {
            Ok(self.0.clone())
        }
    }
    struct Env(ObservationFn, usize);
    impl Feedback for Env {
        fn obs_fn(&self) -> &ObservationFn {
            &self.0
        }
        fn true_state(&self) -> usize {
            self.1
        }
    }

    #[test]
    fn oracle_rollout_edge_cases() {
        let mut r = rng::stream(1, 0);
        let env = Env(table(vec![vec![0], vec![1]], 3), 1);
        let empty = oracle_rollout(&Fixed(vec![1.0]), &env, &Belief::uniform(2), 0, &mut r).unwrap();
        assert_eq!(empty.beliefs.len(), 1);
        assert!(empty.progress.is_empty());

        let one = oracle_rollout(&Fixed(vec![1.0]), &env, &Belief::uniform(2), 1, &mut r).unwrap();
        assert_eq!(one.progress, vec![0.5]);
        assert_eq!(one.beliefs[1].get(1), 1.0);

        let flat = Env(table(vec![vec![2, 2]; 3], 3), 0);
        let t = oracle_rollout(&Fixed(vec![0.5, 0.5]), &flat, &Belief::uniform(3), 4, &mut r).unwrap();
        assert!(t.progress.iter().all(|p| *p == 0.0));
    }

    #[test]
    fn oracle_rollout_rejects_zero_prior_on_truth() {
        let env = Env(table(vec![vec![0], vec![1]], 3), 1);
        let prior = Belief::point_mass(2, 0);
        let mut r = rng::stream(1, 0);
        assert!(oracle_rollout(&Fixed(vec![1.0]), &env, &prior, 1, &mut r).is_err());
    }

    #[test]
    fn sample_index_skips_zero_mass() {
        let mut r = rng::stream(3, 0);
        for _ in 0..1000 {
            let i = sample_index(&[0.0, 0.3, 0.0, 0.7, 0.0], &mut r);
            assert!(i == 1 || i == 3);
        }
    }

    #[test]
    fn belief_serializes_as_plain_array() {
        let b = Belief::new(vec![0.25, 0.75]).unwrap();
        assert_eq!(serde_json::to_string(&b).unwrap(), "[0.25,0.75]");
        assert!(serde_json::from_str::<Belief>("[0.5,0.6]").is_err());
    }
}
