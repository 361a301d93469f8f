//! Grid sweeps over training and critique settings.

use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use sellock::trainers::{Algorithm, ArewMode};
use sellock::ExperimentConfig;

use crate::experiment::{config_hash, run_experiment, Summary, CODE_VERSION, MANIFEST_FILE};
use crate::Failure;

/// Axes left out are not swept; a listed axis must be nonempty.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flip_alpha: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_inj: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arew_mode: Option<Vec<ArewMode>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<Vec<Algorithm>>,
}

/// Setting of every swept axis for one cell.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flip_alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_inj: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arew_mode: Option<ArewMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<Algorithm>,
}

impl GridSpec {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
    }

    /// Cross product in axis order flip_alpha, lambda_inj, arew_mode, algorithm.
    pub fn cells(&self) -> Result<Vec<Cell>, Failure> {
        fn axis<T: Clone>(v: &Option<Vec<T>>, name: &str) -> Result<Vec<Option<T>>, Failure> {
            match v {
                None => Ok(vec![None]),
                Some(xs) if xs.is_empty() => Err(Failure::Usage(format!("grid axis `{name}` is empty"))),
                Some(xs) => Ok(xs.iter().cloned().map(Some).collect()),
            }
        }
        if self.flip_alpha.is_none() && self.lambda_inj.is_none() && self.arew_mode.is_none() && self.algorithm.is_none() {
            return Err(Failure::Usage("grid has no axes".into()));
        }
        let mut cells = Vec::new();
        for flip_alpha in axis(&self.flip_alpha, "flip_alpha")? {
            for lambda_inj in axis(&self.lambda_inj, "lambda_inj")? {
                for arew_mode in axis(&self.arew_mode, "arew_mode")? {
                    for algorithm in axis(&self.algorithm, "algorithm")? {
                        cells.push(Cell {
                            flip_alpha,
                            lambda_inj,
                            arew_mode,
                            algorithm,
                        });
                    }
                }
            }
        }
        Ok(cells)
    }
}

impl Cell {
    pub fn apply(&self, base: &ExperimentConfig) -> Result<ExperimentConfig, Failure> {
        let mut cfg = base.clone();
        if let Some(a) = self.flip_alpha {
            cfg.critique.flip_alpha = a;
        }
        if let Some(l) = self.lambda_inj {
            cfg.train.lambda_inj = l;
        }
        if let Some(m) = self.arew_mode {
            cfg.train.arew_mode = m;
        }
        if let Some(a) = self.algorithm {
            cfg.train.algorithm = a;
        }
        cfg.validate().map_err(|e| Failure::Usage(format!("grid cell {self:?}: {e}")))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRow {
    pub cell: usize,
    pub dir: String,
    pub settings: Cell,
    pub config_hash: String,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepManifest {
    pub code_version: String,
    pub base_config_hash: String,
    pub grid: GridSpec,
    pub threads: usize,
    pub cells: Vec<CellRow>,
    pub table: String,
    pub total_seconds: f64,
}

pub const TABLE_FILE: &str = "sweep_summary.csv";
pub const TABLE_COLUMNS: [&str; 14] = [
    "cell",
    "flip_alpha",
    "lambda_inj",
    "arew_mode",
    "algorithm",
    "seeds",
    "final_reward_mean",
    "final_reward_ci_low",
    "final_reward_ci_high",
    "final_as_proxy_mean",
    "final_bt_proxy_mean",
    "final_I_th_mean",
    "final_C_BT_mean",
    "reward_gap_vs_vanilla",
];

fn stat_mean(s: &Summary, key: &str) -> f64 {
    s.across_seeds.get(key).map_or(f64::NAN, |x| x.mean)
}

fn write_table(path: &Path, rows: &[CellRow]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(path).map_err(Failure::runtime)?;
    w.write_record(TABLE_COLUMNS).map_err(Failure::runtime)?;
    for r in rows {
        let s = &r.summary;
        let ci = s.across_seeds.get("final_reward").map_or((f64::NAN, f64::NAN), |x| x.ci95);
        let gap = s.vanilla_gap.as_ref().map_or(f64::NAN, |g| g.reward_gap.mean);
        w.write_record([
            r.cell.to_string(),
            s.flip_alpha.to_string(),
            s.lambda_inj.to_string(),
            s.arew_mode.clone(),
            s.algorithm.clone(),
            s.seeds.len().to_string(),
            stat_mean(s, "final_reward").to_string(),
            ci.0.to_string(),
            ci.1.to_string(),
            stat_mean(s, "final_as_proxy").to_string(),
            stat_mean(s, "final_bt_proxy").to_string(),
            stat_mean(s, "final_I_th").to_string(),
            stat_mean(s, "final_C_BT").to_string(),
            gap.to_string(),
        ])
        .map_err(Failure::runtime)?;
    }
    w.flush().map_err(Failure::runtime)
}

/// Each cell runs as a full experiment in `out/cell_NNN`; the table has one row per cell.
pub fn run(base: &ExperimentConfig, grid: &GridSpec, out: &Path, threads: usize) -> Result<SweepManifest, Failure> {
    let start = Instant::now();
    let cells = grid.cells()?;
    let configs: Vec<ExperimentConfig> = cells.iter().map(|c| c.apply(base)).collect::<Result<_, _>>()?;
    fs::create_dir_all(out).map_err(|e| Failure::Runtime(format!("{}: {e}", out.display())))?;
    let mut rows = Vec::with_capacity(cells.len());
    for (i, (cell, cfg)) in cells.into_iter().zip(&configs).enumerate() {
        let dir = format!("cell_{i:03}");
        let (manifest, summary) = run_experiment(cfg, &out.join(&dir), threads)?;
        rows.push(CellRow {
            cell: i,
            dir,
            settings: cell,
            config_hash: manifest.config_hash,
            summary: summary.expect("successful runs carry a summary"),
        });
    }
    write_table(&out.join(TABLE_FILE), &rows)?;
    let manifest = SweepManifest {
        code_version: CODE_VERSION.into(),
        base_config_hash: config_hash(base)?,
        grid: grid.clone(),
        threads,
        cells: rows,
        table: TABLE_FILE.into(),
        total_seconds: start.elapsed().as_secs_f64(),
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(Failure::runtime)?;
    fs::write(out.join(MANIFEST_FILE), text + "\n").map_err(Failure::runtime)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_follow_axis_order() {
        let grid: GridSpec = serde_json::from_str(r#"{"arew_mode": ["off", "as_bt"], "flip_alpha": [0.0, 0.5]}"#).unwrap();
        let cells = grid.cells().unwrap();
        assert_eq!(cells.len(), 4);
        assert_eq!(cells[1].flip_alpha, Some(0.0));
        assert_eq!(cells[1].arew_mode, Some(ArewMode::AsBt));
        assert_eq!(cells[2].flip_alpha, Some(0.5));
        assert!(cells.iter().all(|c| c.lambda_inj.is_none() && c.algorithm.is_none()));
    }

    #[test]
    fn empty_grids_are_rejected() {
        assert!(GridSpec::default().cells().is_err());
        let grid = GridSpec {
            lambda_inj: Some(vec![]),
            ..GridSpec::default()
        };
        assert!(matches!(grid.cells(), Err(Failure::Usage(_))));
    }

    #[test]
    fn invalid_cells_are_usage_errors() {
        let base = sellock::config::reference_experiment(ArewMode::Off);
        let cell = Cell {
            flip_alpha: Some(1.5),
            ..Cell::default()
        };
        assert!(matches!(cell.apply(&base), Err(Failure::Usage(_))));
    }
}
