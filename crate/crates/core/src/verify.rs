//! Acceptance checks A1–A10 plus the metrics-schema check, grouped into the
//! `core`, `theory` and `arew` suites.

use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::agent::{
    init_deficient, log_softmax, logprob_grad, rollout, trajectory_logprob, Agent, AgentParams, DeficientInit,
    UpdateOperator,
};
use crate::belief::{bayes_update, oracle_rollout, Belief, ObservationFn, TurnContext};
use crate::critique::{margin_coeffs, CritiqueConfig};
use crate::diagnostics::{
    accuracy_effect_curve, estimate_I_th, exact_I_th_family, interaction_sensitivity, projected_drift,
    reward_as_correlation, AccuracyCurveSpec, BtMode,
};
use crate::env::{EnvConfig, EnvFamily, HypothesisConfig, PrefConfig};
use crate::error::{Error, Result};
use crate::reference::{reference_agent, reference_family, reference_train_config, REFERENCE_ENV_SEED};
use crate::rng::{self, LabRng};
use crate::stats;
use crate::trainers::{
    grpo_advantages, gspo_ratio, read_metrics, train, ArewMode, MetricsRecord, MetricsWriter, TrainConfig,
    TrainSetup, TrainingRun, METRICS_COLUMNS,
};

/// Steps averaged for the "initial" and "final" values of a training curve.
pub const CURVE_WINDOW: usize = 20;
pub const FD_STEP: f64 = 1e-6;
/// Gradients below this magnitude are compared on an absolute scale.
pub const FD_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: String,
    pub title: String,
    pub passed: bool,
    pub seconds: f64,
    pub budget_seconds: f64,
    pub measured: Value,
    pub detail: String,
}

impl CriterionResult {
    /// One-line summary for terminals and test logs.
    pub fn line(&self) -> String {
        format!(
            "{:<10} {} {:>8.2}s / {:>5.0}s  {} | {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.budget_seconds,
            self.title,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Core,
    Theory,
    Arew,
    All,
}

impl Suite {
    pub fn criteria(self) -> Vec<&'static str> {
        match self {
            Suite::Core => vec!["A1", "A2", "A10", "csv_schema"],
            Suite::Theory => vec!["A4", "A6", "A7"],
            Suite::Arew => vec!["A3", "A5", "A8", "A9"],
            Suite::All => [Suite::Core, Suite::Theory, Suite::Arew]
                .into_iter()
                .flat_map(|s| s.criteria())
                .collect(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Core => "core",
            Suite::Theory => "theory",
            Suite::Arew => "arew",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "core" => Ok(Suite::Core),
            "theory" => Ok(Suite::Theory),
            "arew" => Ok(Suite::Arew),
            "all" => Ok(Suite::All),
            other => Err(Error::usage(format!(
                "unknown suite `{other}`; expected core, theory, arew or all"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub passed: bool,
    pub results: Vec<CriterionResult>,
}

/// Runs a suite in order, handing each result to `on_result` as it completes.
pub fn run_suite(suite: Suite, mut on_result: impl FnMut(&CriterionResult)) -> VerifyReport {
    let results: Vec<CriterionResult> = suite
        .criteria()
        .into_iter()
        .map(|id| {
            let r = run_criterion(id).expect("suite lists only known criteria");
            on_result(&r);
            r
        })
        .collect();
    VerifyReport {
        suite,
        passed: results.iter().all(|r| r.passed),
        results,
    }
}

struct Outcome {
    passed: bool,
    measured: Value,
    detail: String,
}

/// Runs one criterion by id. A runtime error inside a check is a failure, not an `Err`.
pub fn run_criterion(id: &str) -> Result<CriterionResult> {
    let (title, budget, check): (&str, f64, fn() -> Result<Outcome>) = match id {
        "A1" => ("exactness: normalization, telescoping, centering, softmax", 10.0, a1),
        "A2" => ("analytic log-likelihood gradient vs central differences", 60.0, a2),
        "A3" => ("lambda=0 and single-class labels reproduce vanilla training", 30.0, a3),
        "A4" => ("enumeration oracle agrees with Monte Carlo I_th", 120.0, a4),
        "A5" => ("self-locking under vanilla PPO and repair by AReW", 600.0, a5),
        "A6" => ("Q-channel drift with identity and bayes_full kernels", 300.0, a6),
        "A7" => ("oracle vs model reward-AS correlation; nullified feedback", 300.0, a7),
        "A8" => ("critique accuracy vs shaping effect on I_th", 600.0, a8),
        "A9" => ("flip_alpha robustness sweep", 900.0, a9),
        "A10" => ("GRPO normalization and GSPO duplication invariance", 10.0, a10),
        "csv_schema" => ("metrics CSV header matches the declared columns", 10.0, csv_schema),
        other => return Err(Error::usage(format!("unknown criterion `{other}`"))),
    };
    let start = Instant::now();
    let outcome = check();
    let seconds = start.elapsed().as_secs_f64();
    let (passed, measured, mut detail) = match outcome {
        Ok(o) => (o.passed, o.measured, o.detail),
        Err(e) => (false, Value::Null, format!("error: {e}")),
    };
    if seconds > budget {
        detail = format!("{detail}; over time budget");
    }
    Ok(CriterionResult {
        id: id.into(),
        title: title.into(),
        passed: passed && seconds <= budget,
        seconds,
        budget_seconds: budget,
        measured,
        detail,
    })
}

fn random_hypothesis(r: &mut LabRng, max_states: usize, max_queries: usize, max_horizon: usize) -> HypothesisConfig {
    let null_query = r.random_bool(0.5);
    let min_queries = 1 + usize::from(null_query);
    HypothesisConfig {
        num_states: r.random_range(2..=max_states),
        num_queries: r.random_range(min_queries..=max_queries.max(min_queries)),
        alphabet: r.random_range(2..=3),
        horizon: r.random_range(1..=max_horizon),
        null_query,
        identity_query: false,
    }
}

fn random_agent(family: &EnvFamily, scale: f64, r: &mut LabRng) -> Result<Agent> {
    let ep = family.template();
    let ops = UpdateOperator::default_slate();
    let params = AgentParams::random(ep.num_queries(), ops.len(), ep.num_symbols(), scale, r);
    Agent::new(params, ops)
}

fn a1() -> Result<Outcome> {
    let mut r = rng::stream(11, rng::streams::DIAGNOSTICS);

    let mut norm_err: f64 = 0.0;
    let mut support_ok = true;
    for _ in 0..5000 {
        let n = r.random_range(2..=12);
        let nq = r.random_range(1..=6);
        let alphabet: u16 = r.random_range(2..=4);
        let table: Vec<Vec<u16>> = (0..n)
            .map(|_| (0..nq).map(|_| r.random_range(0..alphabet)).collect())
            .collect();
        let obs = ObservationFn::new(alphabet + 1, table)?;
        let mut w: Vec<f64> = (0..n).map(|_| if r.random_bool(0.2) { 0.0 } else { r.random::<f64>() }).collect();
        let s = r.random_range(0..n);
        w[s] += 1e-3;
        let total: f64 = w.iter().sum();
        let b = Belief::new(w.iter().map(|x| x / total).collect())?;
        let q = r.random_range(0..nq);
        let o = obs.observe(s, q);
        let post = bayes_update(&b, q, o, &obs)?;
        norm_err = norm_err.max((post.probs().iter().sum::<f64>() - 1.0).abs());
        for (i, p) in post.probs().iter().enumerate() {
            if (obs.observe(i, q) != o || b.get(i) == 0.0) && *p != 0.0 {
                support_ok = false;
            }
        }
    }

    let mut telescoping_err: f64 = 0.0;
    let mut trajectories = 0;
    for _ in 0..200 {
        let cfg = random_hypothesis(&mut r, 8, 6, 6);
        let family = EnvConfig::Hypothesis(cfg).build(r.random())?;
        let agent = random_agent(&family, 1.0, &mut r)?;
        for _ in 0..10 {
            let ep = family.sample(&mut r);
            let t = oracle_rollout(&agent, &ep, &ep.prior(), ep.horizon(), &mut r)?;
            telescoping_err = telescoping_err.max((t.total_progress() - t.net_progress()).abs());
            trajectories += 1;
        }
    }

    let mut centering_err: f64 = 0.0;
    for _ in 0..20000 {
        let len = r.random_range(1..=24);
        let labels: Vec<i8> = (0..len).map(|_| r.random_range(-1..=1)).collect();
        centering_err = centering_err.max(margin_coeffs(&labels).iter().sum::<f64>().abs());
    }

    let mut softmax_err: f64 = 0.0;
    for _ in 0..2000 {
        let k = r.random_range(1..=10);
        let scale = [0.1, 1.0, 10.0, 100.0][r.random_range(0..4)];
        let scores: Vec<f64> = (0..k).map(|_| scale * (2.0 * r.random::<f64>() - 1.0)).collect();
        let lp = log_softmax(&scores)?;
        softmax_err = softmax_err.max((lp.iter().map(|x| x.exp()).sum::<f64>() - 1.0).abs());
        // Shift-invariant reference computed on the centered scores.
        let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = scores.iter().map(|s| (s - m).exp()).sum();
        for (s, l) in scores.iter().zip(&lp) {
            softmax_err = softmax_err.max((l - ((s - m) - z.ln())).abs());
        }
    }
    for _ in 0..100 {
        let family = EnvConfig::Hypothesis(random_hypothesis(&mut r, 6, 5, 4)).build(r.random())?;
        let agent = random_agent(&family, 2.0, &mut r)?;
        let ep = family.sample(&mut r);
        let t = rollout(&agent, &ep, &mut r)?;
        for s in &t.steps {
            let ctx = TurnContext { turn: s.turn, horizon: t.horizon };
            let lq = agent.query_log_probs(&s.belief_before, ctx)?[s.query];
            let lu = agent.update_log_probs(&s.belief_before, ctx, s.observation)?[s.op];
            softmax_err = softmax_err.max((lq - s.logp_query).abs()).max((lu - s.logp_update).abs());
        }
    }

    let passed = norm_err <= 1e-9 && support_ok && telescoping_err <= 1e-12 && centering_err <= 1e-12 && softmax_err <= 1e-10;
    Ok(Outcome {
        passed,
        measured: json!({
            "bayes_normalization_max_err": norm_err,
            "bayes_support_ok": support_ok,
            "telescoping_max_err": telescoping_err,
            "telescoping_trajectories": trajectories,
            "centering_max_abs_sum": centering_err,
            "softmax_max_err": softmax_err,
        }),
        detail: format!(
            "norm {norm_err:.1e}, telescoping {telescoping_err:.1e}, centering {centering_err:.1e}, softmax {softmax_err:.1e}"
        ),
    })
}

fn a2() -> Result<Outcome> {
    let mut r = rng::stream(12, rng::streams::DIAGNOSTICS);
    let cases = 120;
    let mut worst: f64 = 0.0;
    let mut coords = 0usize;
    for case in 0..cases {
        let cfg = if case % 4 == 3 {
            EnvConfig::Pref(PrefConfig {
                dims: 2,
                items: 3,
                subset_size: r.random_range(1..=2),
                horizon: r.random_range(1..=3),
                grid_levels: 3,
                null_query: r.random_bool(0.5),
            })
        } else {
            EnvConfig::Hypothesis(random_hypothesis(&mut r, 6, 5, 4))
        };
        let family = cfg.build(r.random())?;
        let agent = random_agent(&family, 1.0, &mut r)?;
        let ep = family.sample(&mut r);
        let traj = rollout(&agent, &ep, &mut r)?;
        let analytic = logprob_grad(&agent, &traj)?;
        let mut probe = agent.clone();
        for i in 0..agent.params.len() {
            let w = agent.params.get_flat(i);
            probe.params.set_flat(i, w + FD_STEP);
            let up = trajectory_logprob(&probe, &traj)?;
            probe.params.set_flat(i, w - FD_STEP);
            let down = trajectory_logprob(&probe, &traj)?;
            probe.params.set_flat(i, w);
            let fd = (up - down) / (2.0 * FD_STEP);
            let a = analytic.get_flat(i);
            let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(FD_FLOOR);
            worst = worst.max(rel);
            coords += 1;
        }
    }
    Ok(Outcome {
        passed: worst < 1e-4,
        measured: json!({"pairs": cases, "coordinates": coords, "max_rel_err": worst, "h": FD_STEP}),
        detail: format!("{cases} pairs, {coords} coordinates, max rel err {worst:.2e}"),
    })
}

fn quick_config(mode: ArewMode, lambda: f64) -> TrainConfig {
    TrainConfig {
        arew_mode: mode,
        lambda_inj: lambda,
        steps: 25,
        batch_size: 24,
        metric_rollouts: 8,
        ..TrainConfig::default()
    }
}

fn history(cfg: TrainConfig, family: &EnvFamily, agent: &Agent, seed: u64) -> Result<Vec<AgentParams>> {
    let setup = TrainSetup {
        train: cfg,
        critique: CritiqueConfig::default(),
        record_params: true,
    };
    Ok(train(&setup, family, agent, seed)?.param_history)
}

fn a3() -> Result<Outcome> {
    let family = reference_family()?;
    let agent = reference_agent(&family)?;
    let mut lambda_zero = true;
    for seed in 0..2 {
        let vanilla = history(quick_config(ArewMode::Off, 0.5), &family, &agent, seed)?;
        for mode in [ArewMode::AsOnly, ArewMode::AsBt] {
            lambda_zero &= history(quick_config(mode, 0.0), &family, &agent, seed)? == vanilla;
        }
    }

    // One turn per episode: a single label per channel can never span both classes.
    let one_turn = EnvConfig::Hypothesis(HypothesisConfig {
        num_states: 4,
        num_queries: 4,
        alphabet: 2,
        horizon: 1,
        null_query: true,
        identity_query: false,
    })
    .build(REFERENCE_ENV_SEED)?;
    let one_turn_agent = reference_agent(&one_turn)?;
    let mut single_class = true;
    for seed in 0..2 {
        let vanilla = history(quick_config(ArewMode::Off, 0.5), &one_turn, &one_turn_agent, seed)?;
        for lambda in [0.5, 4.0] {
            single_class &= history(quick_config(ArewMode::AsBt, lambda), &one_turn, &one_turn_agent, seed)? == vanilla;
        }
    }
    Ok(Outcome {
        passed: lambda_zero && single_class,
        measured: json!({"lambda_zero_identical": lambda_zero, "single_class_identical": single_class}),
        detail: format!("lambda=0 identical: {lambda_zero}, single-class identical: {single_class}"),
    })
}

fn a4() -> Result<Outcome> {
    let mut r = rng::stream(14, rng::streams::DIAGNOSTICS);
    let n = 5000;
    let mut rows = Vec::new();
    let mut passed = true;
    for _ in 0..12 {
        let cfg = random_hypothesis(&mut r, 5, 4, 4);
        let family = EnvConfig::Hypothesis(cfg.clone()).build(r.random())?;
        let agent = random_agent(&family, 1.5, &mut r)?;
        let exact = exact_I_th_family(&agent, &family)?;
        let est = estimate_I_th(&agent, &family, n, &mut r)?;
        // Deterministic progress has zero stderr; allow rounding only.
        let tol = (3.0 * est.stderr).max(1e-12);
        let ok = (exact - est.mean).abs() <= tol;
        passed &= ok;
        rows.push(json!({
            "states": cfg.num_states, "queries": cfg.num_queries, "horizon": cfg.horizon,
            "exact": exact, "estimate": est.mean, "stderr": est.stderr, "z": (est.mean - exact) / est.stderr, "ok": ok,
        }));
    }
    let worst_z = rows
        .iter()
        .filter_map(|v| v["z"].as_f64())
        .map(f64::abs)
        .fold(0.0, f64::max);
    Ok(Outcome {
        passed,
        measured: json!({"n": n, "envs": rows}),
        detail: format!("{} envs, worst |z| {worst_z:.2}", rows.len()),
    })
}

/// Per-seed averages of a metrics column over the first and last [`CURVE_WINDOW`] steps.
pub fn curve_ends(run: &TrainingRun, column: fn(&MetricsRecord) -> f64) -> (f64, f64) {
    let m = &run.metrics;
    let w = CURVE_WINDOW.min(m.len());
    let avg = |rows: &[MetricsRecord]| stats::mean(&rows.iter().map(column).collect::<Vec<_>>());
    (avg(&m[..w]), avg(&m[m.len() - w..]))
}

fn reference_runs(mode: ArewMode, flip_alpha: f64, seeds: std::ops::Range<u64>) -> Result<Vec<TrainingRun>> {
    let family = reference_family()?;
    let agent = reference_agent(&family)?;
    let setup = TrainSetup {
        train: reference_train_config(mode),
        critique: CritiqueConfig {
            flip_alpha,
            ..CritiqueConfig::default()
        },
        record_params: false,
    };
    seeds.map(|s| train(&setup, &family, &agent, s)).collect()
}

fn a5() -> Result<Outcome> {
    let seeds = 0..5;
    let vanilla = reference_runs(ArewMode::Off, 0.0, seeds.clone())?;
    let arew = reference_runs(ArewMode::AsBt, 0.0, seeds)?;
    let ends = |runs: &[TrainingRun], f: fn(&MetricsRecord) -> f64| -> Vec<(f64, f64)> {
        runs.iter().map(|r| curve_ends(r, f)).collect()
    };
    let v_as = ends(&vanilla, |m| m.as_proxy_mean);
    let v_bt = ends(&vanilla, |m| m.bt_proxy_mean);
    let v_rw = ends(&vanilla, |m| m.mean_reward);
    let a_as = ends(&arew, |m| m.as_proxy_mean);
    let a_bt = ends(&arew, |m| m.bt_proxy_mean);
    let a_rw = ends(&arew, |m| m.mean_reward);
    let mean_of = |xs: &[(f64, f64)], last: bool| stats::mean(&xs.iter().map(|p| if last { p.1 } else { p.0 }).collect::<Vec<_>>());
    let as_shift = mean_of(&v_as, true) - mean_of(&v_as, false);
    let wins = v_rw.iter().zip(&a_rw).filter(|(v, a)| a.1 >= v.1 + 0.15).count();
    let as_higher = mean_of(&a_as, true) > mean_of(&v_as, true);
    let bt_higher = mean_of(&a_bt, true) > mean_of(&v_bt, true);
    let passed = as_shift.abs() <= 0.02 && wins >= 4 && as_higher && bt_higher;
    Ok(Outcome {
        passed,
        measured: json!({
            "window": CURVE_WINDOW,
            "vanilla": {"as_proxy": v_as, "bt_proxy": v_bt, "reward": v_rw},
            "arew_as_bt": {"as_proxy": a_as, "bt_proxy": a_bt, "reward": a_rw},
            "vanilla_as_shift": as_shift,
            "reward_wins": wins,
        }),
        detail: format!(
            "vanilla AS shift {as_shift:+.4}; reward {:.3} vs {:.3}, {wins}/5 seeds +0.15; AS {:.3} vs {:.3}; BT {:.3} vs {:.3}",
            mean_of(&a_rw, true),
            mean_of(&v_rw, true),
            mean_of(&a_as, true),
            mean_of(&v_as, true),
            mean_of(&a_bt, true),
            mean_of(&v_bt, true),
        ),
    })
}

/// Reference family with a uniform query policy and a single-operator kernel.
fn uniform_query_agent(family: &EnvFamily, op: UpdateOperator) -> Result<Agent> {
    Agent::zeros_for(&family.template(), vec![op])
}

pub const DRIFT_ETA: f64 = 1.0;
pub const DRIFT_ROLLOUTS: usize = 2000;

fn a6() -> Result<Outcome> {
    let family = reference_family()?;
    let identity = uniform_query_agent(&family, UpdateOperator::Identity)?;
    let bayes = uniform_query_agent(&family, UpdateOperator::BayesFull)?;
    let mut id_rows = Vec::new();
    let mut bayes_rows = Vec::new();
    let mut id_ok = true;
    let mut positive = 0;
    for seed in 0..5 {
        let d = projected_drift(&identity, &family, crate::agent::Channel::Query, DRIFT_ETA, DRIFT_ROLLOUTS, &mut rng::stream(seed, rng::streams::DIAGNOSTICS))?;
        id_ok &= d.drift_i_th.abs() <= 2.0 * d.stderr_i_th && d.after.c_bt.mean == 0.0;
        id_rows.push(json!({"seed": seed, "drift": d.drift_i_th, "stderr": d.stderr_i_th, "c_bt": d.after.c_bt.mean}));
        let d = projected_drift(&bayes, &family, crate::agent::Channel::Query, DRIFT_ETA, DRIFT_ROLLOUTS, &mut rng::stream(seed, rng::streams::DIAGNOSTICS))?;
        if d.drift_i_th > 0.0 {
            positive += 1;
        }
        bayes_rows.push(json!({"seed": seed, "drift": d.drift_i_th, "stderr": d.stderr_i_th}));
    }
    let max_ratio = id_rows
        .iter()
        .map(|v| v["drift"].as_f64().unwrap_or(f64::NAN).abs() / v["stderr"].as_f64().unwrap_or(f64::NAN))
        .fold(0.0, f64::max);
    Ok(Outcome {
        passed: id_ok && positive >= 4,
        measured: json!({"eta": DRIFT_ETA, "n": DRIFT_ROLLOUTS, "identity": id_rows, "bayes_full": bayes_rows}),
        detail: format!("identity max |drift|/stderr {max_ratio:.2}; bayes_full positive on {positive}/5 seeds"),
    })
}

/// Uniform query policy over the deficient update kernel.
fn weak_tracking_agent(family: &EnvFamily) -> Result<Agent> {
    let ops = UpdateOperator::default_slate();
    let mut params = init_deficient(&DeficientInit::default(), &family.template(), &ops)?;
    params.query_weights.fill(0.0);
    Agent::new(params, ops)
}

fn a7() -> Result<Outcome> {
    let family = reference_family()?;
    let agent = weak_tracking_agent(&family)?;
    let n = 1000;
    let mut rows = Vec::new();
    let mut wins = 0;
    for seed in 0..5 {
        // Same seed in both modes: identical source action sequences.
        let model = reward_as_correlation(&agent, &family, BtMode::Model, n, &mut rng::stream(seed, rng::streams::DIAGNOSTICS))?;
        let oracle = reward_as_correlation(&agent, &family, BtMode::Oracle, n, &mut rng::stream(seed, rng::streams::DIAGNOSTICS))?;
        if oracle > model {
            wins += 1;
        }
        rows.push(json!({"seed": seed, "model": model, "oracle": oracle}));
    }
    let identity = uniform_query_agent(&family, UpdateOperator::Identity)?;
    let sens = interaction_sensitivity(&identity, &family, n, &mut rng::stream(0, rng::streams::DIAGNOSTICS))?;
    let exact = sens.reward_normal == sens.reward_nullified && sens.belief_consistency == 1.0;
    Ok(Outcome {
        passed: wins >= 4 && exact,
        measured: json!({"n": n, "correlations": rows, "identity_sensitivity": sens}),
        detail: format!(
            "oracle > model on {wins}/5 seeds; identity kernel reward {:.4} vs {:.4}, consistency {}",
            sens.reward_normal, sens.reward_nullified, sens.belief_consistency
        ),
    })
}

/// Two-turn variant of the reference game.
pub fn two_turn_family() -> Result<EnvFamily> {
    EnvConfig::Hypothesis(HypothesisConfig {
        num_states: 4,
        num_queries: 4,
        alphabet: 2,
        horizon: 2,
        null_query: true,
        identity_query: false,
    })
    .build(REFERENCE_ENV_SEED)
}

pub fn accuracy_curve_spec() -> AccuracyCurveSpec {
    AccuracyCurveSpec {
        acc_grid: vec![0.0, 0.25, 0.5, 0.75, 1.0],
        eta: 0.5,
        lambda_inj: 1.0,
        n: 200,
        replicates: 8,
    }
}

fn a8() -> Result<Outcome> {
    let family = two_turn_family()?;
    let agent = uniform_query_agent(&family, UpdateOperator::BayesFull)?;
    let spec = accuracy_curve_spec();
    let curve = accuracy_effect_curve(&agent, &family, &spec, &mut rng::stream(8, rng::streams::DIAGNOSTICS))?;
    let means: Vec<f64> = curve.iter().map(|c| c.effect.mean).collect();
    let rho = stats::spearman(&spec.acc_grid, &means)?;
    let at = |a: f64| curve.iter().find(|c| c.accuracy == a).ok_or_else(|| Error::usage("grid point missing"));
    let (_, hi0) = at(0.0)?.ci95;
    let (lo5, hi5) = at(0.5)?.ci95;
    let (lo1, _) = at(1.0)?.ci95;
    let passed = rho == 1.0 && lo1 > 0.0 && hi0 < 0.0 && lo5 <= 0.0 && hi5 >= 0.0;
    Ok(Outcome {
        passed,
        measured: json!({"spec": spec, "curve": curve, "spearman": rho}),
        detail: format!(
            "spearman {rho:.2}; effect {}; CI(0.5) [{lo5:.2e}, {hi5:.2e}]",
            means.iter().map(|m| format!("{m:+.2e}")).collect::<Vec<_>>().join(" ")
        ),
    })
}

pub const FLIP_GRID: [f64; 6] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];

fn a9() -> Result<Outcome> {
    let seeds = 0..5;
    let final_reward = |runs: &[TrainingRun]| stats::mean(&runs.iter().map(|r| curve_ends(r, |m| m.mean_reward).1).collect::<Vec<_>>());
    let vanilla = final_reward(&reference_runs(ArewMode::Off, 0.0, seeds.clone())?);
    let mut table = Vec::new();
    for alpha in FLIP_GRID {
        table.push((alpha, final_reward(&reference_runs(ArewMode::AsBt, alpha, seeds.clone())?)));
    }
    let r0 = table[0].1;
    let r5 = table[FLIP_GRID.len() - 1].1;
    Ok(Outcome {
        passed: r0 > r5 && r5 >= vanilla - 0.05,
        measured: json!({"vanilla": vanilla, "rows": table.iter().map(|(a, r)| json!({"flip_alpha": a, "final_reward": r})).collect::<Vec<_>>()}),
        detail: format!(
            "final reward by alpha {}; vanilla {vanilla:.3}",
            table.iter().map(|(a, r)| format!("{a}:{r:.3}")).collect::<Vec<_>>().join(" ")
        ),
    })
}

fn a10() -> Result<Outcome> {
    let mut r = rng::stream(20, rng::streams::DIAGNOSTICS);
    let cases = 20000;
    let mut mean_err: f64 = 0.0;
    let mut std_err: f64 = 0.0;
    let mut degenerate = 0;
    let mut degenerate_ok = true;
    for i in 0..cases {
        let g = r.random_range(2..=16);
        let rewards: Vec<f64> = if i % 5 == 0 {
            vec![r.random::<f64>(); g]
        } else {
            (0..g).map(|_| if r.random_bool(0.5) { f64::from(u8::from(r.random_bool(0.5))) } else { 10.0 * r.random::<f64>() - 5.0 }).collect()
        };
        let a = grpo_advantages(&rewards)?;
        if rewards.iter().all(|x| *x == rewards[0]) {
            degenerate += 1;
            degenerate_ok &= a.iter().all(|x| *x == 0.0);
        } else {
            mean_err = mean_err.max(stats::mean(&a).abs());
            std_err = std_err.max((stats::population_std(&a) - 1.0).abs());
        }
    }
    let mut dup_err: f64 = 0.0;
    for _ in 0..cases {
        let len = r.random_range(1..=12);
        let new: Vec<f64> = (0..len).map(|_| -3.0 * r.random::<f64>()).collect();
        let old: Vec<f64> = new.iter().map(|x| x + 0.2 * (r.random::<f64>() - 0.5)).collect();
        let k = r.random_range(2..=4);
        let rep = |xs: &[f64]| xs.iter().flat_map(|x| std::iter::repeat_n(*x, k)).collect::<Vec<_>>();
        let base = gspo_ratio(&new, &old)?;
        let dup = gspo_ratio(&rep(&new), &rep(&old))?;
        dup_err = dup_err.max((base - dup).abs() / base);
    }
    let passed = mean_err <= 1e-12 && std_err <= 1e-12 && degenerate_ok && dup_err <= 1e-12;
    Ok(Outcome {
        passed,
        measured: json!({
            "grpo_cases": cases, "degenerate_cases": degenerate, "max_abs_mean": mean_err,
            "max_std_err": std_err, "degenerate_zero": degenerate_ok, "gspo_cases": cases, "gspo_max_rel_err": dup_err,
        }),
        detail: format!("GRPO mean {mean_err:.1e}, std {std_err:.1e}, {degenerate} degenerate; GSPO dup {dup_err:.1e}"),
    })
}

fn csv_schema() -> Result<Outcome> {
    let family = reference_family()?;
    let agent = reference_agent(&family)?;
    let setup = TrainSetup {
        train: TrainConfig {
            steps: 3,
            batch_size: 8,
            metric_rollouts: 4,
            ..TrainConfig::default()
        },
        critique: CritiqueConfig::default(),
        record_params: false,
    };
    let mut w = MetricsWriter::new(Vec::new())?;
    let run = crate::trainers::train_with(&setup, &family, &agent, 0, |m| w.write(m))?;
    let bytes = w.into_inner()?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| Error::usage(e.to_string()))?;
    let header = text.lines().next().unwrap_or_default().to_string();
    let header_ok = header == METRICS_COLUMNS.join(",");
    let rows = read_metrics(bytes.as_slice())?;
    // Debug text compares NaN cells as equal.
    let round_trip = format!("{rows:?}") == format!("{:?}", run.metrics);
    Ok(Outcome {
        passed: header_ok && round_trip,
        measured: json!({"header": header, "expected": METRICS_COLUMNS, "round_trip": round_trip}),
        detail: format!("header matches: {header_ok}, round trip: {round_trip}"),
    })
}
