//! One experiment: every seed of a config, its summary and its manifest.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sellock::diagnostics::{estimate_capability, in_locking_regime, CapabilityEstimate};
use sellock::trainers::{train_with, ArewMode, MetricsWriter};
use sellock::verify::CURVE_WINDOW;
use sellock::{Agent, EnvFamily, Estimate, ExperimentConfig, MetricsRecord, TrainSetup};

use crate::Failure;

pub const CODE_VERSION: &str = concat!("sellock ", env!("CARGO_PKG_VERSION"));
pub const SUMMARY_FILE: &str = "summary.json";
pub const MANIFEST_FILE: &str = "manifest.json";

/// SHA-256 of the config's canonical JSON (defaults filled in, keys sorted).
pub fn config_hash(cfg: &ExperimentConfig) -> Result<String, Failure> {
    let canonical = serde_json::to_string(&cfg.to_json_value().map_err(Failure::runtime)?).map_err(Failure::runtime)?;
    let digest = Sha256::digest(canonical.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    pub n: usize,
}

impl Stat {
    pub fn of(xs: &[f64]) -> Self {
        let e = Estimate::from_samples(xs);
        Stat {
            mean: e.mean,
            stderr: e.stderr,
            ci95: e.confidence_interval(0.95),
            n: e.n,
        }
    }
}

/// Means over the last few training steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowMeans {
    pub steps: usize,
    pub mean_reward: f64,
    pub as_proxy_mean: f64,
    pub bt_proxy_mean: f64,
}

impl WindowMeans {
    pub fn last(metrics: &[MetricsRecord]) -> Option<Self> {
        if metrics.is_empty() {
            return None;
        }
        let w = CURVE_WINDOW.min(metrics.len());
        let tail = &metrics[metrics.len() - w..];
        let avg = |f: fn(&MetricsRecord) -> f64| tail.iter().map(f).sum::<f64>() / w as f64;
        Some(WindowMeans {
            steps: w,
            mean_reward: avg(|m| m.mean_reward),
            as_proxy_mean: avg(|m| m.as_proxy_mean),
            bt_proxy_mean: avg(|m| m.bt_proxy_mean),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub initial: CapabilityEstimate,
    pub initial_in_locking_regime: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_window: Option<WindowMeans>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_capability: Option<CapabilityEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vanilla_final_window: Option<WindowMeans>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VanillaGap {
    pub vanilla_final_reward: Stat,
    /// Final reward minus the vanilla run's, per seed.
    pub reward_gap: Stat,
    pub per_seed_gap: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config_hash: String,
    pub algorithm: String,
    pub arew_mode: String,
    pub lambda_inj: f64,
    pub flip_alpha: f64,
    pub steps: usize,
    pub seeds: Vec<SeedSummary>,
    /// Statistics across seeds, keyed by quantity.
    pub across_seeds: BTreeMap<String, Stat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vanilla_gap: Option<VanillaGap>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedArtifacts {
    pub seed: u64,
    pub metrics: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vanilla_metrics: Option<String>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub code_version: String,
    /// The config with every default filled in.
    pub config: serde_json::Value,
    pub threads: usize,
    /// Paths relative to the output directory.
    pub seeds: Vec<SeedArtifacts>,
    pub summary: Option<String>,
    pub total_seconds: f64,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(Failure::runtime)?;
    fs::write(path, text + "\n").map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

/// Trains one seed, streaming its metrics CSV into `out`.
fn train_to_csv(
    setup: &TrainSetup,
    family: &EnvFamily,
    init: &Agent,
    seed: u64,
    out: &Path,
    name: &str,
) -> Result<sellock::TrainingRun, Failure> {
    let path = out.join(name);
    let file = File::create(&path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    let mut writer = MetricsWriter::new(BufWriter::new(file)).map_err(Failure::runtime)?;
    let run = train_with(setup, family, init, seed, |m| writer.write(m)).map_err(|e| Failure::Runtime(format!("seed {seed}: {e}")))?;
    writer.into_inner().map_err(Failure::runtime)?;
    Ok(run)
}

fn run_seed(
    cfg: &ExperimentConfig,
    family: &EnvFamily,
    init: &Agent,
    seed: u64,
    out: &Path,
) -> Result<(SeedSummary, SeedArtifacts), Failure> {
    let start = Instant::now();
    let diag = &cfg.diagnostics;
    let initial = estimate_capability(init, family, diag.n_rollouts, seed).map_err(Failure::runtime)?;
    let locked = in_locking_regime(initial.i_th.mean, initial.c_bt.mean, diag.delta, diag.epsilon).map_err(Failure::runtime)?;
    let setup = TrainSetup {
        train: cfg.train.clone(),
        critique: cfg.critique.clone(),
        record_params: false,
    };
    let metrics_name = format!("metrics_seed{seed}.csv");
    let run = train_to_csv(&setup, family, init, seed, out, &metrics_name)?;
    let trained = cfg.train.steps > 0;
    let mut artifacts = SeedArtifacts {
        seed,
        metrics: metrics_name,
        params: None,
        vanilla_metrics: None,
        seconds: 0.0,
    };
    let mut summary = SeedSummary {
        seed,
        initial,
        initial_in_locking_regime: locked,
        final_window: WindowMeans::last(&run.metrics),
        final_capability: None,
        vanilla_final_window: None,
    };
    if trained {
        let params_name = format!("params_seed{seed}.json");
        let json = run.final_agent.params.to_json().map_err(Failure::runtime)?;
        fs::write(out.join(&params_name), json).map_err(Failure::runtime)?;
        artifacts.params = Some(params_name);
        summary.final_capability =
            Some(estimate_capability(&run.final_agent, family, diag.n_rollouts, seed).map_err(Failure::runtime)?);
    }
    if trained && cfg.compare_vanilla && cfg.train.arew_mode != ArewMode::Off {
        let mut vanilla = setup.clone();
        vanilla.train.arew_mode = ArewMode::Off;
        let name = format!("metrics_seed{seed}_vanilla.csv");
        let base = train_to_csv(&vanilla, family, init, seed, out, &name)?;
        summary.vanilla_final_window = WindowMeans::last(&base.metrics);
        artifacts.vanilla_metrics = Some(name);
    }
    artifacts.seconds = start.elapsed().as_secs_f64();
    Ok((summary, artifacts))
}

pub fn summarize(cfg: &ExperimentConfig, hash: &str, seeds: Vec<SeedSummary>) -> Summary {
    let mut across = BTreeMap::new();
    let mut put = |key: &str, xs: Vec<f64>| {
        if !xs.is_empty() {
            across.insert(key.to_string(), Stat::of(&xs));
        }
    };
    put("initial_I_th", seeds.iter().map(|s| s.initial.i_th.mean).collect());
    put("initial_C_BT", seeds.iter().map(|s| s.initial.c_bt.mean).collect());
    let windows: Vec<&WindowMeans> = seeds.iter().filter_map(|s| s.final_window.as_ref()).collect();
    put("final_reward", windows.iter().map(|w| w.mean_reward).collect());
    put("final_as_proxy", windows.iter().map(|w| w.as_proxy_mean).collect());
    put("final_bt_proxy", windows.iter().map(|w| w.bt_proxy_mean).collect());
    let caps: Vec<&CapabilityEstimate> = seeds.iter().filter_map(|s| s.final_capability.as_ref()).collect();
    put("final_I_th", caps.iter().map(|c| c.i_th.mean).collect());
    put("final_C_BT", caps.iter().map(|c| c.c_bt.mean).collect());
    let pairs: Vec<(f64, f64)> = seeds
        .iter()
        .filter_map(|s| Some((s.final_window.as_ref()?.mean_reward, s.vanilla_final_window.as_ref()?.mean_reward)))
        .collect();
    let vanilla_gap = (!pairs.is_empty()).then(|| {
        let gaps: Vec<f64> = pairs.iter().map(|(a, v)| a - v).collect();
        VanillaGap {
            vanilla_final_reward: Stat::of(&pairs.iter().map(|p| p.1).collect::<Vec<_>>()),
            reward_gap: Stat::of(&gaps),
            per_seed_gap: gaps,
        }
    });
    Summary {
        config_hash: hash.to_string(),
        algorithm: cfg.train.algorithm.name().into(),
        arew_mode: cfg.train.arew_mode.name().into(),
        lambda_inj: cfg.train.lambda_inj,
        flip_alpha: cfg.critique.flip_alpha,
        steps: cfg.train.steps,
        seeds,
        across_seeds: across,
        vanilla_gap,
    }
}

/// Runs all seeds concurrently; writes per-seed files, `summary.json` and
/// `manifest.json` into `out`. A failing seed still leaves the other seeds'
/// files and a manifest marked `failed`.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path, threads: usize) -> Result<(RunManifest, Option<Summary>), Failure> {
    let start = Instant::now();
    fs::create_dir_all(out).map_err(|e| Failure::Runtime(format!("{}: {e}", out.display())))?;
    let hash = config_hash(cfg)?;
    let mut manifest = RunManifest {
        config_hash: hash.clone(),
        code_version: CODE_VERSION.into(),
        config: cfg.to_json_value().map_err(Failure::runtime)?,
        threads,
        seeds: Vec::new(),
        summary: None,
        total_seconds: 0.0,
        status: "running".into(),
        error: None,
    };
    let outcome = (|| {
        let family = cfg.family().map_err(Failure::runtime)?;
        let init = cfg.initial_agent(&family).map_err(Failure::runtime)?;
        let results: Vec<Result<(SeedSummary, SeedArtifacts), Failure>> =
            cfg.seeds.par_iter().map(|s| run_seed(cfg, &family, &init, *s, out)).collect();
        let mut summaries = Vec::new();
        let mut first_error = None;
        for r in results {
            match r {
                Ok((s, a)) => {
                    summaries.push(s);
                    manifest.seeds.push(a);
                }
                Err(e) => {
                    first_error.get_or_insert(e);
                }
            }
        }
        if let Some(e) = first_error {
            return Err(e);
        }
        let summary = summarize(cfg, &hash, summaries);
        write_json(&out.join(SUMMARY_FILE), &summary)?;
        Ok(summary)
    })();
    manifest.total_seconds = start.elapsed().as_secs_f64();
    let summary = match outcome {
        Ok(s) => {
            manifest.status = "ok".into();
            manifest.summary = Some(SUMMARY_FILE.into());
            Some(s)
        }
        Err(e) => {
            manifest.status = "failed".into();
            manifest.error = Some(e.to_string());
            write_json(&out.join(MANIFEST_FILE), &manifest)?;
            return Err(e);
        }
    };
    write_json(&out.join(MANIFEST_FILE), &manifest)?;
    Ok((manifest, summary))
}

pub fn run(cfg: &ExperimentConfig, out: &Path, threads: usize) -> Result<RunManifest, Failure> {
    Ok(run_experiment(cfg, out, threads)?.0)
}
