//! Lloyd k-means over a blocked point set.
//!
//! The split (or rechunk) happens once, before the loop; every iteration
//! reuses it. Partials merge in a fixed tree, so center arithmetic is
//! reproducible run to run.

use super::{tree_reduce, wait_all, AppConfig, AppReport, Mode, Stopwatch};
use crate::blocked::{checksum_f64s, create_array, generate_row, Generator, PlacementPolicy};
use crate::error::{Error, Result};
use crate::kernels::{assignment_inertia, kmeans_merge, kmeans_partial, kmeans_recompute};
use crate::rechunk::{balanced_block_rows, rechunk};
use crate::runtime::{KMeansUpdate, Runtime, TaskFn, Value};
use crate::spliter::split;

#[derive(Debug)]
pub struct KMeansRun {
    /// Flat `k x dims` centers after the last iteration.
    pub centers: Vec<f64>,
    /// Assignment inertia observed at each iteration, against that
    /// iteration's input centers.
    pub inertia_trace: Vec<f64>,
    pub report: AppReport,
}

fn block_task(centers: Vec<f64>, dims: usize) -> TaskFn {
    Box::new(move |inputs| {
        let block = inputs[0].as_block()?;
        let partial = kmeans_partial(&block.data, &centers, dims);
        let inertia = assignment_inertia(&block.data, &centers, dims);
        Ok(Value::KMeansUpdate(KMeansUpdate { partial, inertia }))
    })
}

/// Per-partition map with the local pre-merge, in ascending block order.
fn partition_task(centers: Vec<f64>, dims: usize) -> TaskFn {
    Box::new(move |inputs| {
        let mut partials = Vec::with_capacity(inputs.len());
        let mut inertia = 0.0;
        for v in inputs {
            let block = v.as_block()?;
            partials.push(kmeans_partial(&block.data, &centers, dims));
            inertia += assignment_inertia(&block.data, &centers, dims);
        }
        let refs: Vec<_> = partials.iter().collect();
        Ok(Value::KMeansUpdate(KMeansUpdate {
            partial: kmeans_merge(&refs),
            inertia,
        }))
    })
}

fn merge_task() -> TaskFn {
    Box::new(|inputs| {
        let updates = inputs
            .iter()
            .map(|v| v.as_kmeans_update())
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let partials: Vec<_> = updates.iter().map(|u| &u.partial).collect();
        Ok(Value::KMeansUpdate(KMeansUpdate {
            partial: kmeans_merge(&partials),
            inertia: updates.iter().map(|u| u.inertia).sum(),
        }))
    })
}

pub fn run_kmeans(cfg: &AppConfig) -> Result<KMeansRun> {
    cfg.validate()?;
    let rt = Runtime::start(cfg.runtime_config())?;
    let gen = Generator::UniformCube;
    let arr = create_array(
        &rt,
        cfg.n_rows(),
        cfg.dims,
        cfg.block_rows,
        &PlacementPolicy::RoundRobin,
        &gen,
        cfg.seed,
    )?;

    // First k generated points seed the centers.
    let mut centers: Vec<f64> = (0..cfg.k)
        .flat_map(|r| generate_row(&gen, cfg.seed, r, cfg.dims))
        .collect();

    let watch = Stopwatch::start();
    let arr = match cfg.mode {
        Mode::Rechunk => rechunk(&rt, &arr, balanced_block_rows(&rt, arr.n_rows))?,
        _ => arr,
    };
    // One split, reused by every iteration.
    let partitions = match cfg.mode {
        Mode::Spliter => split(&rt, &arr, cfg.partitions_per_worker)?,
        _ => Vec::new(),
    };

    let mut inertia_trace = Vec::with_capacity(cfg.iters);
    let mut map_tasks = 0u64;
    let mut map_bytes = 0u64;
    for _ in 0..cfg.iters {
        let before = rt.metrics();
        let futures = match cfg.mode {
            Mode::Spliter => partitions
                .iter()
                .map(|p| {
                    rt.submit(
                        "kmeans_map",
                        &p.block_refs,
                        Some(p.worker),
                        partition_task(centers.clone(), cfg.dims),
                    )
                })
                .collect(),
            _ => arr
                .blocks
                .iter()
                .map(|b| {
                    rt.submit(
                        "kmeans_map",
                        std::slice::from_ref(b),
                        None,
                        block_task(centers.clone(), cfg.dims),
                    )
                })
                .collect(),
        };
        let partial_refs = wait_all(&rt, futures)?;
        let after = rt.metrics();
        map_tasks += after.kind_count("kmeans_map") - before.kind_count("kmeans_map");
        map_bytes += after.bytes_transferred - before.bytes_transferred;

        let root = tree_reduce(&rt, "kmeans_merge", partial_refs, merge_task)?;
        let update = match rt.fetch(root)? {
            Value::KMeansUpdate(u) => u,
            _ => return Err(Error::InvalidArgument("unexpected merge payload".into())),
        };
        centers = kmeans_recompute(&update.partial, &centers, cfg.dims);
        inertia_trace.push(update.inertia);
    }
    let wall_ms = watch.ms();

    let metrics = rt.metrics();
    let report = AppReport {
        map_tasks,
        map_bytes,
        result_checksum: checksum_f64s(&centers),
        wall_ms,
        extra: vec![(
            "inertia".into(),
            format!("{:.6}", inertia_trace.last().copied().unwrap_or(0.0)),
        )],
        metrics,
    };
    Ok(KMeansRun {
        centers,
        inertia_trace,
        report,
    })
}
