//! Experiment harness: run grids of app cells and emit machine-readable CSV.
//!
//! Every `(cell, repetition)` produces one raw row; each cell adds one
//! aggregate row with `rep = -1`, the winsorized mean of `wall_ms` (5% per
//! tail, clamped to the 5th/95th percentile values) and the interquartile
//! range in `extra` as `iqr_ms=<v>`. Cells that fail validation are skipped
//! with a warning row (`rep = -2`, reason in `extra`). All counter columns
//! are deterministic for a fixed seed; only `wall_ms` varies between
//! repetitions.

use std::io::Write;

use crate::apps::{run_app, AppConfig, AppReport, Mode};
use crate::error::Result;

pub const CSV_HEADER: &str = "app,mode,workers,threads_per_worker,blocks_per_worker,block_rows,\
dims,seed,rep,wall_ms,map_tasks,total_tasks,bytes_transferred,transfers,locality_hits,\
accounted_overhead_ns,virtual_transfer_ns,result_checksum,extra";

fn extra_string(pairs: &[(String, String)]) -> String {
    pairs
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn csv_prefix(cfg: &AppConfig, rep: i64) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        cfg.app,
        cfg.mode,
        cfg.workers,
        cfg.threads_per_worker,
        cfg.blocks_per_worker,
        cfg.block_rows,
        cfg.dims,
        cfg.seed,
        rep
    )
}

/// One raw CSV row.
pub fn csv_row(cfg: &AppConfig, rep: i64, report: &AppReport) -> String {
    format!(
        "{},{:.3},{},{},{},{},{},{},{},{:016x},{}",
        csv_prefix(cfg, rep),
        report.wall_ms,
        report.map_tasks,
        report.metrics.tasks_submitted,
        report.metrics.bytes_transferred,
        report.metrics.transfers,
        report.metrics.locality_hits,
        report.metrics.accounted_overhead_ns,
        report.metrics.virtual_transfer_ns,
        report.result_checksum,
        extra_string(&report.extra)
    )
}

/// Nearest-rank percentile of an ascending-sorted sample.
pub fn percentile(sorted: &[f64], pct: f64) -> f64 {
    assert!(!sorted.is_empty());
    let n = sorted.len();
    let rank = ((pct / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Mean after clamping each sample into the 5th..95th percentile values.
pub fn winsorized_mean(samples: &[f64]) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let lo = percentile(&sorted, 5.0);
    let hi = percentile(&sorted, 95.0);
    let sum: f64 = samples.iter().map(|&x| x.clamp(lo, hi)).sum();
    sum / samples.len() as f64
}

/// Interquartile range (75th minus 25th percentile, nearest rank).
pub fn iqr(samples: &[f64]) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    percentile(&sorted, 75.0) - percentile(&sorted, 25.0)
}

/// Axes of an experiment grid; remaining knobs come from `template`.
#[derive(Clone, Debug)]
pub struct Grid {
    pub template: AppConfig,
    pub modes: Vec<Mode>,
    pub workers: Vec<usize>,
    pub blocks_per_worker: Vec<usize>,
    pub seeds: Vec<u64>,
    pub reps: usize,
}

impl Grid {
    /// Single-cell grid from one config.
    pub fn single(cfg: AppConfig, reps: usize) -> Self {
        Self {
            modes: vec![cfg.mode],
            workers: vec![cfg.workers],
            blocks_per_worker: vec![cfg.blocks_per_worker],
            seeds: vec![cfg.seed],
            reps,
            template: cfg,
        }
    }

    /// Cells in a fixed order: mode, workers, blocks, seed.
    pub fn cells(&self) -> Vec<AppConfig> {
        let mut out = Vec::new();
        for &mode in &self.modes {
            for &workers in &self.workers {
                for &bpw in &self.blocks_per_worker {
                    for &seed in &self.seeds {
                        let mut cfg = self.template.clone();
                        cfg.mode = mode;
                        cfg.workers = workers;
                        cfg.blocks_per_worker = bpw;
                        cfg.seed = seed;
                        out.push(cfg);
                    }
                }
            }
        }
        out
    }
}

/// Run every cell of the grid, writing the header, raw rows, aggregate rows,
/// and warning rows for skipped cells.
pub fn run_experiment<W: Write>(grid: &Grid, out: &mut W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for cfg in grid.cells() {
        if let Err(e) = cfg.validate() {
            let reason = e.to_string().replace([',', '\n'], " ");
            writeln!(
                out,
                "{},0.000,0,0,0,0,0,0,0,{:016x},skipped={}",
                csv_prefix(&cfg, -2),
                0,
                reason
            )?;
            continue;
        }
        let mut walls = Vec::with_capacity(grid.reps);
        let mut last: Option<AppReport> = None;
        for rep in 0..grid.reps {
            let report = run_app(&cfg)?;
            writeln!(out, "{}", csv_row(&cfg, rep as i64, &report))?;
            walls.push(report.wall_ms);
            last = Some(report);
        }
        if let Some(mut agg) = last {
            agg.wall_ms = winsorized_mean(&walls);
            agg.extra
                .push(("iqr_ms".into(), format!("{:.3}", iqr(&walls))));
            writeln!(out, "{}", csv_row(&cfg, -1, &agg))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apps::AppKind;

    #[test]
    fn percentiles_use_nearest_rank() {
        let s: Vec<f64> = (1..=20).map(|v| v as f64).collect();
        assert_eq!(percentile(&s, 5.0), 1.0);
        assert_eq!(percentile(&s, 95.0), 19.0);
        assert_eq!(percentile(&s, 50.0), 10.0);
        assert_eq!(percentile(&s, 100.0), 20.0);
    }

    #[test]
    fn winsorizing_clamps_outliers() {
        // 19 ones and one huge outlier: the outlier clamps to p95 = 1.
        let mut s = vec![1.0; 19];
        s.push(1000.0);
        assert_eq!(winsorized_mean(&s), 1.0);
    }

    #[test]
    fn constant_samples_aggregate_to_the_constant() {
        let s = vec![7.5; 6];
        assert_eq!(winsorized_mean(&s), 7.5);
        assert_eq!(iqr(&s), 0.0);
    }

    #[test]
    fn single_cell_three_reps_plus_aggregate() {
        let mut cfg = AppConfig::new(AppKind::Histogram, Mode::Spliter);
        cfg.workers = 1;
        cfg.blocks_per_worker = 2;
        cfg.block_rows = 16;
        cfg.dims = 1;
        cfg.bins = 4;
        let grid = Grid::single(cfg, 3);
        let mut buf = Vec::new();
        run_experiment(&grid, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 1 + 3 + 1);
        assert!(lines[4].contains("iqr_ms="));
        // rep column of the aggregate row is -1.
        assert_eq!(lines[4].split(',').nth(8), Some("-1"));
    }

    #[test]
    fn counters_identical_across_reps() {
        let mut cfg = AppConfig::new(AppKind::Kmeans, Mode::Baseline);
        cfg.workers = 2;
        cfg.blocks_per_worker = 2;
        cfg.block_rows = 32;
        cfg.dims = 2;
        cfg.k = 2;
        cfg.iters = 3;
        let a = run_app(&cfg).unwrap();
        let b = run_app(&cfg).unwrap();
        assert_eq!(a.metrics, b.metrics);
        assert_eq!(a.result_checksum, b.result_checksum);
        assert_eq!(a.map_tasks, b.map_tasks);
    }

    #[test]
    fn invalid_cell_writes_warning_row() {
        let mut cfg = AppConfig::new(AppKind::Kmeans, Mode::Baseline);
        cfg.workers = 1;
        cfg.blocks_per_worker = 1;
        cfg.block_rows = 4;
        cfg.k = 100; // > n_rows
        let grid = Grid::single(cfg, 2);
        let mut buf = Vec::new();
        run_experiment(&grid, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].contains("skipped="));
        assert_eq!(lines[1].split(',').nth(8), Some("-2"));
    }
}
