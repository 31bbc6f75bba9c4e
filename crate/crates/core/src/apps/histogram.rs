//! n-dimensional histogram over a blocked point set.

use super::{tree_reduce, wait_all, AppConfig, AppReport, Mode, Stopwatch};
use crate::blocked::{checksum_u64s, create_array, Generator, PlacementPolicy};
use crate::error::{Error, Result};
use crate::kernels::{histogramdd, sum_counts, Histogram, HistogramSpec};
use crate::rechunk::{balanced_block_rows, rechunk};
use crate::runtime::{Runtime, TaskFn, Value};
use crate::spliter::split;

#[derive(Debug)]
pub struct HistogramRun {
    pub histogram: Histogram,
    pub report: AppReport,
}

fn block_task(spec: HistogramSpec) -> TaskFn {
    Box::new(move |inputs| {
        let block = inputs[0].as_block()?;
        Ok(Value::Histogram(histogramdd(&block.data, &spec)))
    })
}

/// Per-partition map: histogram each member block, pre-sum locally.
fn partition_task(spec: HistogramSpec) -> TaskFn {
    Box::new(move |inputs| {
        let mut partials = Vec::with_capacity(inputs.len());
        for v in inputs {
            let block = v.as_block()?;
            partials.push(histogramdd(&block.data, &spec));
        }
        let refs: Vec<&Histogram> = partials.iter().collect();
        Ok(Value::Histogram(sum_counts(&refs)))
    })
}

fn merge_task() -> TaskFn {
    Box::new(|inputs| {
        let parts = inputs
            .iter()
            .map(|v| v.as_histogram())
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Value::Histogram(sum_counts(&parts)))
    })
}

pub fn run_histogram(cfg: &AppConfig) -> Result<HistogramRun> {
    cfg.validate()?;
    let rt = Runtime::start(cfg.runtime_config())?;
    let arr = create_array(
        &rt,
        cfg.n_rows(),
        cfg.dims,
        cfg.block_rows,
        &PlacementPolicy::RoundRobin,
        &Generator::UniformCube,
        cfg.seed,
    )?;
    let spec = HistogramSpec::unit(cfg.dims, cfg.bins);
    spec.validate()?;

    let watch = Stopwatch::start();
    let arr = match cfg.mode {
        Mode::Rechunk => rechunk(&rt, &arr, balanced_block_rows(&rt, arr.n_rows))?,
        _ => arr,
    };

    let before_map = rt.metrics();
    let futures = match cfg.mode {
        Mode::Spliter => {
            let parts = split(&rt, &arr, cfg.partitions_per_worker)?;
            parts
                .iter()
                .map(|p| {
                    rt.submit(
                        "histogram_map",
                        &p.block_refs,
                        Some(p.worker),
                        partition_task(spec.clone()),
                    )
                })
                .collect()
        }
        _ => arr
            .blocks
            .iter()
            .map(|b| {
                rt.submit(
                    "histogram_map",
                    std::slice::from_ref(b),
                    None,
                    block_task(spec.clone()),
                )
            })
            .collect(),
    };
    let partial_refs = wait_all(&rt, futures)?;
    let after_map = rt.metrics();

    let root = tree_reduce(&rt, "histogram_merge", partial_refs, merge_task)?;
    let histogram = match rt.fetch(root)? {
        Value::Histogram(h) => h,
        _ => return Err(Error::InvalidArgument("unexpected merge payload".into())),
    };
    let wall_ms = watch.ms();

    let metrics = rt.metrics();
    let report = AppReport {
        map_tasks: metrics.kind_count("histogram_map"),
        map_bytes: after_map.bytes_transferred - before_map.bytes_transferred,
        result_checksum: checksum_u64s(&histogram.counts),
        wall_ms,
        extra: vec![
            ("total".into(), histogram.total().to_string()),
            ("discarded".into(), histogram.discarded.to_string()),
        ],
        metrics,
    };
    Ok(HistogramRun { histogram, report })
}
