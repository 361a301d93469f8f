//! Rule-based preference estimation.
//!
//! Items carry known attribute vectors; the user holds a hidden preference
//! vector `w*`. Each query names an attribute subset and an item pair, and the
//! user answers which item scores higher on that subset. Gated tasks restrict
//! the subset size below the attribute count; full tasks expose every
//! attribute.
//!
//! For belief tracking the hidden preference is drawn from a finite grid of
//! candidate vectors, which turns the task into a deterministic-feedback game
//! over candidate indices. The running preference estimate is the posterior
//! mean over candidates.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::belief::{Belief, Feedback, ObservationFn, MAX_STATES};
use crate::error::{Error, Result};
use crate::rng;

/// Dead-zone inside which the user answers `Equal`.
pub const EQUAL_TOL: f64 = 1e-9;

/// Minimum similarity improvement for a gated-task success.
pub const GATED_THRESHOLD: f64 = 0.03;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrefConfig {
    /// Attribute dimension `D`.
    pub dims: usize,
    /// Item count `N`.
    pub items: usize,
    /// Attributes visible per query `k`; `k == D` gives the full task.
    pub subset_size: usize,
    pub horizon: usize,
    /// Per-coordinate levels of the candidate preference grid on `[0, 1]`.
    #[serde(default = "default_grid_levels")]
    pub grid_levels: usize,
    #[serde(default)]
    pub null_query: bool,
}

fn default_grid_levels() -> usize {
    3
}

impl PrefConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dims < 1 {
            return Err(Error::config("env.dims", "must be at least 1"));
        }
        if self.items < 2 {
            return Err(Error::config("env.items", "need at least two items"));
        }
        if self.subset_size < 1 || self.subset_size > self.dims {
            return Err(Error::config("env.subset_size", "must be in [1, dims]"));
        }
        if self.grid_levels < 2 {
            return Err(Error::config("env.grid_levels", "must be at least 2"));
        }
        let count = (self.grid_levels as f64).powi(self.dims as i32) - 1.0;
        if count > MAX_STATES as f64 {
            return Err(Error::config(
                "env.grid_levels",
                format!("candidate grid has {count} vectors, above the {MAX_STATES}-state limit"),
            ));
        }
        Ok(())
    }

    pub fn is_gated(&self) -> bool {
        self.subset_size < self.dims
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrefAnswer {
    Yes,
    No,
    Equal,
}

impl PrefAnswer {
    pub fn symbol(self) -> u16 {
        match self {
            PrefAnswer::Yes => 0,
            PrefAnswer::No => 1,
            PrefAnswer::Equal => 2,
        }
    }
}

/// Symbol for the null response; the answer alphabet is `Yes, No, Equal`.
pub const PREF_NULL_SYMBOL: u16 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrefQuery {
    Null,
    Compare { subset: Vec<usize>, pair: (usize, usize) },
}

/// Item attributes, candidate grid and query slate shared by a task family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefFamily {
    pub config: PrefConfig,
    pub items: Vec<Vec<f64>>,
    pub candidates: Vec<Vec<f64>>,
    pub queries: Vec<PrefQuery>,
    pub obs_fn: ObservationFn,
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn candidate_grid(dims: usize, levels: usize) -> Vec<Vec<f64>> {
    let total = levels.pow(dims as u32);
    (1..total)
        .map(|mut code| {
            (0..dims)
                .map(|_| {
                    let level = code % levels;
                    code /= levels;
                    level as f64 / (levels - 1) as f64
                })
                .collect()
        })
        .collect()
}

fn answer(w: &[f64], items: &[Vec<f64>], subset: &[usize], i: usize, j: usize) -> PrefAnswer {
    let score: f64 = subset.iter().map(|d| w[*d] * (items[i][*d] - items[j][*d])).sum();
    if score > EQUAL_TOL {
        PrefAnswer::Yes
    } else if score < -EQUAL_TOL {
        PrefAnswer::No
    } else {
        PrefAnswer::Equal
    }
}

impl PrefFamily {
    pub fn new(config: PrefConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut r = rng::stream(seed, rng::streams::ENV);
        let items: Vec<Vec<f64>> = (0..config.items)
            .map(|_| {
                (0..config.dims)
                    .map(|_| (r.random::<f64>() * 100.0).round() / 100.0)
                    .collect()
            })
            .collect();
        let candidates = candidate_grid(config.dims, config.grid_levels);
        let mut queries = Vec::new();
        if config.null_query {
            queries.push(PrefQuery::Null);
        }
        for subset in combinations(config.dims, config.subset_size) {
            for i in 0..config.items {
                for j in (i + 1)..config.items {
                    queries.push(PrefQuery::Compare {
                        subset: subset.clone(),
                        pair: (i, j),
                    });
                }
            }
        }
        let table = candidates
            .iter()
            .map(|w| {
                queries
                    .iter()
                    .map(|q| match q {
                        PrefQuery::Null => PREF_NULL_SYMBOL,
                        PrefQuery::Compare { subset, pair } => answer(w, &items, subset, pair.0, pair.1).symbol(),
                    })
                    .collect()
            })
            .collect();
        let obs_fn = ObservationFn::new(PREF_NULL_SYMBOL + 1, table)?;
        Ok(Self {
            config,
            items,
            candidates,
            queries,
            obs_fn,
        })
    }

    pub fn with_true_state(&self, true_state: usize) -> PrefEnv {
        assert!(true_state < self.candidates.len());
        PrefEnv {
            items: self.items.clone(),
            candidates: self.candidates.clone(),
            queries: self.queries.clone(),
            obs_fn: self.obs_fn.clone(),
            latent_pref: self.candidates[true_state].clone(),
            true_state,
            subset_size: self.config.subset_size,
            horizon: self.config.horizon,
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> PrefEnv {
        self.with_true_state(rng.random_range(0..self.candidates.len()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefEnv {
    pub items: Vec<Vec<f64>>,
    pub candidates: Vec<Vec<f64>>,
    pub queries: Vec<PrefQuery>,
    pub obs_fn: ObservationFn,
    pub latent_pref: Vec<f64>,
    pub true_state: usize,
    pub subset_size: usize,
    pub horizon: usize,
}

impl PrefEnv {
    pub fn dims(&self) -> usize {
        self.latent_pref.len()
    }

    pub fn is_gated(&self) -> bool {
        self.subset_size < self.dims()
    }

    /// Posterior-mean preference estimate.
    pub fn estimate(&self, belief: &Belief) -> Vec<f64> {
        let mut w = vec![0.0; self.dims()];
        for (p, c) in belief.probs().iter().zip(&self.candidates) {
            for (wd, cd) in w.iter_mut().zip(c) {
                *wd += p * cd;
            }
        }
        w
    }

    /// `cos(w_t, w*)` for the estimate implied by `belief`.
    pub fn readout(&self, belief: &Belief) -> f64 {
        cosine(&self.estimate(belief), &self.latent_pref).expect("estimates and candidates are nonzero")
    }

    pub fn as_indicator(&self, query: usize) -> bool {
        match self.queries.get(query) {
            Some(PrefQuery::Compare { subset, pair }) => {
                pref_as_indicator(subset, &self.items[pair.0], &self.items[pair.1])
            }
            _ => false,
        }
    }
}

impl Feedback for PrefEnv {
    fn obs_fn(&self) -> &ObservationFn {
        &self.obs_fn
    }
    fn true_state(&self) -> usize {
        self.true_state
    }
}

/// Items, candidate grid and hidden preference drawn from `seed`.
pub fn pref_reset(config: &PrefConfig, seed: u64) -> Result<PrefEnv> {
    let family = PrefFamily::new(config.clone(), seed)?;
    let mut r = rng::stream(seed, rng::streams::ENV + 100);
    Ok(family.sample(&mut r))
}

pub fn pref_feedback(env: &PrefEnv, subset: &[usize], pair: (usize, usize)) -> Result<PrefAnswer> {
    let d = env.dims();
    if subset.len() != env.subset_size {
        return Err(Error::usage(format!(
            "subset has {} attributes, expected {}",
            subset.len(),
            env.subset_size
        )));
    }
    let mut seen = vec![false; d];
    for k in subset {
        if *k >= d || std::mem::replace(&mut seen[*k], true) {
            return Err(Error::usage("subset indices must be distinct and in range"));
        }
    }
    let (i, j) = pair;
    if i == j || i >= env.items.len() || j >= env.items.len() {
        return Err(Error::usage("pair must name two distinct valid items"));
    }
    Ok(answer(&env.latent_pref, &env.items, subset, i, j))
}

/// True when neither item dominates the other on `subset`.
pub fn pref_as_indicator(subset: &[usize], a_i: &[f64], a_j: &[f64]) -> bool {
    let wins = subset.iter().any(|k| a_i[*k] > a_j[*k]);
    let losses = subset.iter().any(|k| a_i[*k] < a_j[*k]);
    wins && losses
}

pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::usage("cosine of vectors with different dimensions"));
    }
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Similarity);
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok(dot / (na * nb))
}

pub fn pref_bt_proxy(w_before: &[f64], w_after: &[f64], w_star: &[f64]) -> Result<f64> {
    Ok(cosine(w_after, w_star)? - cosine(w_before, w_star)?)
}

/// Gated tasks: 1 when the similarity gain over the initial guess strictly
/// exceeds 0.03. Full tasks: the gain clamped to `[0, 1]`.
pub fn pref_reward(env: &PrefEnv, w_final: &[f64], w_init: &[f64]) -> Result<f64> {
    let gain = pref_bt_proxy(w_init, w_final, &env.latent_pref)?;
    Ok(if env.is_gated() {
        gated_reward(gain)
    } else {
        gain.clamp(0.0, 1.0)
    })
}

/// Binary success rule of the gated task (strict inequality).
pub fn gated_reward(gain: f64) -> f64 {
    if gain > GATED_THRESHOLD {
        1.0
    } else {
        0.0
    }
}
