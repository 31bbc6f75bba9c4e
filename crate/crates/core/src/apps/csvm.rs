//! Cascade SVM: binary merge tree of SVM trainings, iterated to a fixpoint.
//!
//! Points and labels are parallel blocked arrays with the same blocking, so
//! a group's labels are found by block index alignment; partitions align via
//! their tracked indexes. Each cascade level trains on the union of its
//! children's support vectors; the whole cascade repeats with the final
//! support set fed back into every level-0 group (deduplicated by global row
//! index) until that set stops changing or `cascade_max_iter` is reached.

use std::collections::HashSet;

use super::{wait_all, AppConfig, AppReport, Mode, Stopwatch};
use crate::blocked::{checksum_u64s, create_array, BlockedArray, Generator, PlacementPolicy};
use crate::error::{Error, Result};
use crate::kernels::{smo_train, svm_predict, SmoParams, SvmModel};
use crate::rechunk::{balanced_block_rows, rechunk};
use crate::runtime::{DataRef, Runtime, TaskFn, TaskFuture, Value, WorkerId};
use crate::spliter::split;

#[derive(Debug)]
pub struct CsvmRun {
    pub model: SvmModel,
    /// Training accuracy of the final model.
    pub accuracy: f64,
    /// Cascade iterations actually executed.
    pub cascade_iters: usize,
    pub report: AppReport,
}

/// One level-0 training group: co-located point and label blocks plus the
/// global row id of every point.
struct TrainGroup {
    x_refs: Vec<DataRef>,
    y_refs: Vec<DataRef>,
    global_ids: Vec<u64>,
    hint: Option<WorkerId>,
}

/// Support set carried between cascade iterations, sorted by global id.
#[derive(Clone, Default)]
struct Feedback {
    ids: Vec<u64>,
    points: Vec<f64>,
    labels: Vec<f64>,
}

impl Feedback {
    fn from_model(model: &SvmModel) -> Self {
        let mut order: Vec<usize> = (0..model.n_support()).collect();
        order.sort_unstable_by_key(|&i| model.support_global_indexes[i]);
        let mut out = Feedback::default();
        for i in order {
            out.ids.push(model.support_global_indexes[i]);
            out.points
                .extend_from_slice(&model.support_points[i * model.dims..(i + 1) * model.dims]);
            out.labels.push(model.support_labels[i]);
        }
        out
    }
}

fn level0_task(
    x_count: usize,
    global_ids: Vec<u64>,
    feedback: Feedback,
    dims: usize,
    params: SmoParams,
) -> TaskFn {
    Box::new(move |inputs| {
        let mut points = Vec::new();
        let mut labels = Vec::new();
        for v in &inputs[..x_count] {
            points.extend_from_slice(&v.as_block()?.data);
        }
        for v in &inputs[x_count..] {
            let block = v.as_block()?;
            // Label blocks are one value per row; extra columns are padding.
            for r in 0..block.rows {
                labels.push(block.row(r)[0]);
            }
        }
        if labels.len() != global_ids.len() {
            return Err(format!(
                "label rows {} do not match ids {}",
                labels.len(),
                global_ids.len()
            ));
        }
        let mut ids = global_ids.clone();
        let known: HashSet<u64> = ids.iter().copied().collect();
        for (i, &id) in feedback.ids.iter().enumerate() {
            if !known.contains(&id) {
                ids.push(id);
                points.extend_from_slice(&feedback.points[i * dims..(i + 1) * dims]);
                labels.push(feedback.labels[i]);
            }
        }
        let model = smo_train(&points, &labels, dims, &ids, &params).map_err(|e| e.to_string())?;
        Ok(Value::Svm(model))
    })
}

/// Merge two child models: union their support sets (dedup by global id,
/// ascending) and retrain.
fn merge_task(dims: usize, params: SmoParams) -> TaskFn {
    Box::new(move |inputs| {
        let mut rows: Vec<(u64, Vec<f64>, f64)> = Vec::new();
        for v in inputs {
            let m = v.as_svm()?;
            for i in 0..m.n_support() {
                rows.push((
                    m.support_global_indexes[i],
                    m.support_points[i * m.dims..(i + 1) * m.dims].to_vec(),
                    m.support_labels[i],
                ));
            }
        }
        rows.sort_by_key(|(id, _, _)| *id);
        rows.dedup_by_key(|(id, _, _)| *id);
        let ids: Vec<u64> = rows.iter().map(|(id, _, _)| *id).collect();
        let points: Vec<f64> = rows.iter().flat_map(|(_, p, _)| p.iter().copied()).collect();
        let labels: Vec<f64> = rows.iter().map(|(_, _, y)| *y).collect();
        let model = smo_train(&points, &labels, dims, &ids, &params).map_err(|e| e.to_string())?;
        Ok(Value::Svm(model))
    })
}

fn accuracy_task(x_count: usize, model: SvmModel) -> TaskFn {
    Box::new(move |inputs| {
        let mut correct = 0u64;
        let mut total = 0u64;
        for (xv, yv) in inputs[..x_count].iter().zip(&inputs[x_count..]) {
            let xb = xv.as_block()?;
            let yb = yv.as_block()?;
            let pred = svm_predict(&model, &xb.data);
            for (r, p) in pred.iter().enumerate() {
                total += 1;
                if *p == yb.row(r)[0] {
                    correct += 1;
                }
            }
        }
        Ok(Value::U64s(vec![correct, total]))
    })
}

/// Deterministic per-task seed from the cell seed and the task position.
/// Cascade iterations reuse the same seeds: when feedback stops changing a
/// group's input, its training replays bit-identically.
fn task_seed(base: u64, stage: u64, level: u64, pos: u64) -> u64 {
    base ^ (stage << 56) ^ (level << 24) ^ pos
}

fn build_groups(
    rt: &Runtime,
    cfg: &AppConfig,
    x: &BlockedArray,
    y: &BlockedArray,
) -> Result<Vec<TrainGroup>> {
    let groups: Vec<TrainGroup> = match cfg.mode {
        Mode::Spliter => {
            let parts = split(rt, x, cfg.partitions_per_worker)?;
            parts
                .into_iter()
                .map(|p| TrainGroup {
                    x_refs: p.block_refs.clone(),
                    // Listing-style alignment: label blocks looked up by the
                    // partition's tracked block indexes.
                    y_refs: p.get_indexes().iter().map(|&i| y.blocks[i]).collect(),
                    global_ids: p.get_item_indexes().iter().map(|&i| i as u64).collect(),
                    hint: Some(p.worker),
                })
                .collect()
        }
        _ => (0..x.n_blocks())
            .map(|i| {
                let (start, end) = x.block_row_range(i);
                TrainGroup {
                    x_refs: vec![x.blocks[i]],
                    y_refs: vec![y.blocks[i]],
                    global_ids: (start as u64..end as u64).collect(),
                    hint: None,
                }
            })
            .collect(),
    };
    // Parity labels: a viable group needs both an even and an odd row.
    for (g, group) in groups.iter().enumerate() {
        let has_even = group.global_ids.iter().any(|id| id % 2 == 0);
        let has_odd = group.global_ids.iter().any(|id| id % 2 == 1);
        if !has_even || !has_odd {
            return Err(Error::SingleClassGroup {
                group: format!("level-0 group {g}"),
            });
        }
    }
    Ok(groups)
}

pub fn run_csvm(cfg: &AppConfig) -> Result<CsvmRun> {
    cfg.validate()?;
    let rt = Runtime::start(cfg.runtime_config())?;
    let gen_x = Generator::GaussianBlobs {
        k: 2,
        spread: 1.0,
    };
    let x = create_array(
        &rt,
        cfg.n_rows(),
        cfg.dims,
        cfg.block_rows,
        &PlacementPolicy::RoundRobin,
        &gen_x,
        cfg.seed,
    )?;
    let y = create_array(
        &rt,
        cfg.n_rows(),
        1,
        cfg.block_rows,
        &PlacementPolicy::RoundRobin,
        &Generator::BlobLabels,
        cfg.seed,
    )?;

    let params = SmoParams {
        c: cfg.svm_c,
        ..Default::default()
    };

    let watch = Stopwatch::start();
    let (x, y) = match cfg.mode {
        Mode::Rechunk => {
            let target = balanced_block_rows(&rt, x.n_rows);
            (rechunk(&rt, &x, target)?, rechunk(&rt, &y, target)?)
        }
        _ => (x, y),
    };
    let groups = build_groups(&rt, cfg, &x, &y)?;

    let mut feedback = Feedback::default();
    let mut prev_support: Option<Vec<u64>> = None;
    let mut cascade_iters = 0usize;
    let mut model: Option<SvmModel> = None;
    let mut map_bytes = 0u64;

    for iter in 0..cfg.cascade_max_iter {
        cascade_iters = iter + 1;
        let before = rt.metrics();
        let futures: Vec<TaskFuture> = groups
            .iter()
            .enumerate()
            .map(|(g, group)| {
                let inputs: Vec<DataRef> = group
                    .x_refs
                    .iter()
                    .chain(group.y_refs.iter())
                    .copied()
                    .collect();
                let mut p = params.clone();
                p.seed = task_seed(cfg.seed, 1, 0, g as u64);
                rt.submit(
                    "csvm_train",
                    &inputs,
                    group.hint,
                    level0_task(
                        group.x_refs.len(),
                        group.global_ids.clone(),
                        feedback.clone(),
                        cfg.dims,
                        p,
                    ),
                )
            })
            .collect();
        let mut refs = wait_all(&rt, futures)?;
        map_bytes += rt.metrics().bytes_transferred - before.bytes_transferred;

        // Binary merge tree, ascending order; odd tails carry upward.
        let mut level = 1u64;
        while refs.len() > 1 {
            enum Slot {
                Ready(DataRef),
                Pending(TaskFuture),
            }
            let slots: Vec<Slot> = refs
                .chunks(2)
                .enumerate()
                .map(|(pos, pair)| {
                    if pair.len() == 1 {
                        Slot::Ready(pair[0])
                    } else {
                        let mut p = params.clone();
                        p.seed = task_seed(cfg.seed, 2, level, pos as u64);
                        Slot::Pending(rt.submit("csvm_merge", pair, None, merge_task(cfg.dims, p)))
                    }
                })
                .collect();
            refs = slots
                .into_iter()
                .map(|s| match s {
                    Slot::Ready(r) => Ok(r),
                    Slot::Pending(f) => f.wait(),
                })
                .collect::<Result<Vec<_>>>()?;
            level += 1;
        }

        let final_model = match rt.fetch(refs[0])? {
            Value::Svm(m) => m,
            _ => return Err(Error::InvalidArgument("unexpected cascade payload".into())),
        };
        let mut support: Vec<u64> = final_model.support_global_indexes.clone();
        support.sort_unstable();
        feedback = Feedback::from_model(&final_model);
        model = Some(final_model);
        if prev_support.as_deref() == Some(&support) {
            break;
        }
        prev_support = Some(support);
    }
    let model = model.expect("cascade ran at least once");

    // Training accuracy over the whole dataset, counted group by group.
    let futures: Vec<TaskFuture> = groups
        .iter()
        .map(|group| {
            let inputs: Vec<DataRef> = group
                .x_refs
                .iter()
                .chain(group.y_refs.iter())
                .copied()
                .collect();
            rt.submit(
                "csvm_accuracy",
                &inputs,
                group.hint,
                accuracy_task(group.x_refs.len(), model.clone()),
            )
        })
        .collect();
    let mut correct = 0u64;
    let mut total = 0u64;
    for fut in futures {
        match rt.gather(&fut)? {
            Value::U64s(v) if v.len() == 2 => {
                correct += v[0];
                total += v[1];
            }
            _ => return Err(Error::InvalidArgument("unexpected accuracy payload".into())),
        }
    }
    let accuracy = correct as f64 / total as f64;
    let wall_ms = watch.ms();

    let mut sorted_support = model.support_global_indexes.clone();
    sorted_support.sort_unstable();
    let metrics = rt.metrics();
    let report = AppReport {
        map_tasks: metrics.kind_count("csvm_train"),
        map_bytes,
        result_checksum: checksum_u64s(&sorted_support),
        wall_ms,
        extra: vec![
            ("accuracy".into(), format!("{accuracy:.6}")),
            ("cascade_iters".into(), cascade_iters.to_string()),
            ("support".into(), model.n_support().to_string()),
        ],
        metrics,
    };
    Ok(CsvmRun {
        model,
        accuracy,
        cascade_iters,
        report,
    })
}
