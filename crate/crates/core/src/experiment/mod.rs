//! Trial runner for the experiment grid: model variant x method x
//! perception condition, each repeated over seeded trials.
//!
//! Trial `t` of a run with seed `s` always uses stream `(s, t)`: the dataset
//! and the game are forked from it, so the same trial index sees the same
//! data in every cell of the grid.

mod config;
mod output;
mod reference;

use std::path::Path;

pub use config::{parse_config, parse_config_str, Condition, ConfigOverrides, ExperimentConfig};
pub use output::{format_sig6, load_summary, write_detail_csv, write_summary_csv, DETAIL_HEADER, SUMMARY_HEADER};
pub use reference::{compare_to_reference, reference_for, ReferenceRow, REFERENCE};

use crate::agent::Variant;
use crate::datagen::generate_dataset;
use crate::error::{Error, Result};
use crate::game::{run_game, CommunicationMode};
use crate::metrics::{summarize, MetricsRecord};
use crate::par::{map_indexed, Parallelism};
use crate::stochastic::RngStream;

const TAG_DATA: u64 = 0xDA7A;
const TAG_GAME: u64 = 0x6A3E;

pub const DETAIL_FILE: &str = "detail.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const REPORT_FILE: &str = "comparison.md";

/// Identifies one grid cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellKey {
    pub variant: Variant,
    pub method: CommunicationMode,
    pub condition: Condition,
}

impl CellKey {
    /// The 24 cells in canonical order.
    pub fn grid() -> Vec<CellKey> {
        let mut cells = Vec::with_capacity(24);
        for variant in Variant::ALL {
            for method in CommunicationMode::ALL {
                for condition in Condition::ALL {
                    cells.push(CellKey {
                        variant,
                        method,
                        condition,
                    });
                }
            }
        }
        cells
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub sd: f64,
}

impl Stat {
    fn of(values: &[f64]) -> Result<Stat> {
        let (mean, sd) = summarize(values)?;
        Ok(Stat { mean, sd })
    }
}

/// Per-iteration metrics of every trial in a cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub key: CellKey,
    pub trials: Vec<Vec<MetricsRecord>>,
}

/// Across-trial mean and SD of the final-iteration metrics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellSummary {
    pub key: CellKey,
    pub ari_a: Stat,
    pub ari_b: Stat,
    pub kappa: Option<Stat>,
}

impl CellResult {
    pub fn final_records(&self) -> impl Iterator<Item = &MetricsRecord> {
        self.trials.iter().filter_map(|t| t.last())
    }

    pub fn summary(&self) -> Result<CellSummary> {
        let last: Vec<&MetricsRecord> = self.final_records().collect();
        let ari_a: Vec<f64> = last.iter().map(|r| r.ari_a).collect();
        let ari_b: Vec<f64> = last.iter().map(|r| r.ari_b).collect();
        let kappas: Vec<f64> = last.iter().filter_map(|r| r.kappa).collect();
        Ok(CellSummary {
            key: self.key,
            ari_a: Stat::of(&ari_a)?,
            ari_b: Stat::of(&ari_b)?,
            kappa: if kappas.is_empty() {
                None
            } else {
                Some(Stat::of(&kappas)?)
            },
        })
    }
}

impl ExperimentConfig {
    pub fn cell(&self) -> CellKey {
        CellKey {
            variant: self.variant,
            method: self.method,
            condition: self.condition,
        }
    }

    /// Same settings, another grid cell.
    pub fn with_cell(&self, key: CellKey) -> ExperimentConfig {
        ExperimentConfig {
            variant: key.variant,
            method: key.method,
            condition: key.condition,
            ..self.clone()
        }
    }
}

/// Plays one trial: fresh dataset, fresh agents, full game.
pub fn run_trial(cfg: &ExperimentConfig, trial: usize) -> Result<Vec<MetricsRecord>> {
    let trial_rng = RngStream::new(cfg.seed, trial as u64);
    let (mask_a, mask_b) = cfg.condition.masks();
    let dataset = generate_dataset(&cfg.synthetic, mask_a, mask_b, &trial_rng.fork(TAG_DATA))?;
    let (_, records) = run_game(
        cfg.variant,
        cfg.method,
        &cfg.hyperparams,
        &dataset,
        cfg.iterations,
        &trial_rng.fork(TAG_GAME),
    )?;
    Ok(records)
}

/// Runs every trial of the configured cell without touching the disk.
pub fn run_cell(cfg: &ExperimentConfig, parallelism: Parallelism) -> Result<CellResult> {
    cfg.validate()?;
    let trials = map_indexed(cfg.trials, parallelism, |t| run_trial(cfg, t))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(CellResult {
        key: cfg.cell(),
        trials,
    })
}

/// Runs several cells, parallel over every (cell, trial) pair.
pub fn run_cells(base: &ExperimentConfig, cells: &[CellKey], parallelism: Parallelism) -> Result<Vec<CellResult>> {
    base.validate()?;
    let per_cell = base.trials;
    let flat = map_indexed(cells.len() * per_cell, parallelism, |i| {
        run_trial(&base.with_cell(cells[i / per_cell]), i % per_cell)
    });
    let mut flat = flat.into_iter();
    cells
        .iter()
        .map(|&key| {
            let trials = flat.by_ref().take(per_cell).collect::<Result<Vec<_>>>()?;
            Ok(CellResult { key, trials })
        })
        .collect()
}

fn write_outputs(dir: &Path, results: &[CellResult]) -> Result<Vec<CellSummary>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_detail_csv(&dir.join(DETAIL_FILE), results)?;
    let summaries = results.iter().map(CellResult::summary).collect::<Result<Vec<_>>>()?;
    write_summary_csv(&dir.join(SUMMARY_FILE), &summaries)?;
    Ok(summaries)
}

/// Runs the configured cell and writes `detail.csv` and `summary.csv` into
/// `cfg.output`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<CellSummary> {
    let result = run_cell(cfg, Parallelism::from_jobs(cfg.jobs))?;
    let summaries = write_outputs(&cfg.output, std::slice::from_ref(&result))?;
    Ok(summaries[0])
}

/// Runs all 24 cells with `base`'s trial count, iterations and seed.
pub fn run_full(base: &ExperimentConfig) -> Result<Vec<CellSummary>> {
    let results = run_cells(base, &CellKey::grid(), Parallelism::from_jobs(base.jobs))?;
    write_outputs(&base.output, &results)
}

/// Reads `summary.csv` from `dir` and renders the comparison report, also
/// saving it as `comparison.md`.
pub fn compare_dir(dir: &Path) -> Result<String> {
    let summaries = load_summary(&dir.join(SUMMARY_FILE))?;
    let report = compare_to_reference(&summaries);
    let path = dir.join(REPORT_FILE);
    std::fs::write(&path, &report).map_err(|e| Error::io(path, e))?;
    Ok(report)
}
