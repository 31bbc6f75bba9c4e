//! Exact k-nearest-neighbors in two stages: build lookup trees over the fit
//! dataset, then resolve every query block against every tree and merge.
//!
//! Tree granularity is the experiment: baseline builds one tree per fit
//! block; spliter consolidates each worker's blocks into a single tree
//! (one partition per worker, no data movement); rechunk materializes one
//! block per worker first and then builds per-block trees. Lookup tasks are
//! pinned to the worker holding the tree, so trees never move; query blocks
//! and candidate lists do.

use super::{wait_all, AppConfig, AppReport, Mode, Stopwatch};
use crate::blocked::{checksum_u64s, create_array, Generator, PlacementPolicy};
use crate::error::{Error, Result};
use crate::kernels::{kdtree_build, kdtree_knn, merge_kqueries};
use crate::rechunk::rechunk;
use crate::runtime::{KdTreeFit, KnnHits, Runtime, TaskFn, TaskFuture, Value};
use crate::spliter::split;

/// Distinct stream for the query dataset of the same cell seed.
const QUERY_SEED_SALT: u64 = 0x9E3779B97F4A7C15;

#[derive(Debug)]
pub struct KnnRun {
    /// For each query row, the global fit-row ids of its `k` nearest
    /// neighbors, ascending by (squared distance, id).
    pub indexes: Vec<Vec<u64>>,
    /// Point-distance evaluations spent in the lookup stage.
    pub distance_evals: u64,
    pub report: AppReport,
}

fn fit_task(global_ids: Vec<u64>) -> TaskFn {
    Box::new(move |inputs| {
        let dims = inputs[0].as_block()?.dims;
        let mut points = Vec::new();
        for v in inputs {
            points.extend_from_slice(&v.as_block()?.data);
        }
        if points.len() != global_ids.len() * dims {
            return Err(format!(
                "fit rows {} do not match ids {}",
                points.len() / dims,
                global_ids.len()
            ));
        }
        Ok(Value::KdTreeFit(KdTreeFit {
            tree: kdtree_build(&points, dims),
            global_ids: global_ids.clone(),
        }))
    })
}

fn lookup_task(k: usize) -> TaskFn {
    Box::new(move |inputs| {
        let fit = inputs[0].as_kdtree_fit()?;
        let queries = inputs[1].as_block()?;
        let mut rows = Vec::with_capacity(queries.rows);
        let mut evals = 0u64;
        for r in 0..queries.rows {
            let res = kdtree_knn(&fit.tree, queries.row(r), k);
            evals += res.evals;
            rows.push(
                res.hits
                    .into_iter()
                    .map(|(d, local)| (d, fit.global_ids[local]))
                    .collect(),
            );
        }
        Ok(Value::KnnHits(KnnHits { rows, evals }))
    })
}

fn merge_task(k: usize) -> TaskFn {
    Box::new(move |inputs| {
        let parts = inputs
            .iter()
            .map(|v| v.as_knn_hits())
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let n_rows = parts.first().map(|p| p.rows.len()).unwrap_or(0);
        let mut rows = Vec::with_capacity(n_rows);
        for r in 0..n_rows {
            let lists: Vec<&[(f64, u64)]> = parts.iter().map(|p| p.rows[r].as_slice()).collect();
            rows.push(merge_kqueries(&lists, k));
        }
        Ok(Value::KnnHits(KnnHits {
            rows,
            evals: parts.iter().map(|p| p.evals).sum(),
        }))
    })
}

pub fn run_knn(cfg: &AppConfig) -> Result<KnnRun> {
    cfg.validate()?;
    let rt = Runtime::start(cfg.runtime_config())?;
    let fit = create_array(
        &rt,
        cfg.n_rows(),
        cfg.dims,
        cfg.block_rows,
        &PlacementPolicy::RoundRobin,
        &Generator::UniformCube,
        cfg.seed,
    )?;
    let n_query_rows = cfg.workers * cfg.query_blocks_per_worker * cfg.block_rows;
    let queries = create_array(
        &rt,
        n_query_rows,
        cfg.dims,
        cfg.block_rows,
        &PlacementPolicy::RoundRobin,
        &Generator::UniformCube,
        cfg.seed ^ QUERY_SEED_SALT,
    )?;

    let watch = Stopwatch::start();

    // Fit stage.
    let before_fit = rt.metrics();
    let fit_futures: Vec<TaskFuture> = match cfg.mode {
        Mode::Spliter => {
            // One consolidated tree per worker.
            let parts = split(&rt, &fit, 1)?;
            parts
                .iter()
                .map(|p| {
                    let ids = p.get_item_indexes().iter().map(|&i| i as u64).collect();
                    rt.submit("knn_fit", &p.block_refs, Some(p.worker), fit_task(ids))
                })
                .collect()
        }
        _ => {
            let fit_arr = match cfg.mode {
                // One block per worker, then per-block trees.
                Mode::Rechunk => rechunk(&rt, &fit, fit.n_rows.div_ceil(rt.num_workers()))?,
                _ => fit.clone(),
            };
            (0..fit_arr.n_blocks())
                .map(|i| {
                    let (start, end) = fit_arr.block_row_range(i);
                    let ids = (start as u64..end as u64).collect();
                    rt.submit(
                        "knn_fit",
                        std::slice::from_ref(&fit_arr.blocks[i]),
                        None,
                        fit_task(ids),
                    )
                })
                .collect()
        }
    };
    let tree_refs = wait_all(&rt, fit_futures)?;
    let after_fit = rt.metrics();
    let tree_workers = rt.who_has(&tree_refs)?;

    // Lookup stage: every query block against every tree, then one merge
    // per query block.
    let mut indexes: Vec<Vec<u64>> = Vec::with_capacity(n_query_rows);
    let mut distance_evals = 0u64;
    let mut merge_futures = Vec::with_capacity(queries.n_blocks());
    for q_ref in &queries.blocks {
        let lookups: Vec<TaskFuture> = tree_refs
            .iter()
            .zip(tree_workers.iter())
            .map(|(t_ref, worker)| {
                rt.submit(
                    "knn_lookup",
                    &[*t_ref, *q_ref],
                    Some(*worker),
                    lookup_task(cfg.knn_k),
                )
            })
            .collect();
        let hit_refs = wait_all(&rt, lookups)?;
        merge_futures.push(rt.submit("knn_merge", &hit_refs, None, merge_task(cfg.knn_k)));
    }
    for fut in &merge_futures {
        match rt.gather(fut)? {
            Value::KnnHits(h) => {
                distance_evals += h.evals;
                indexes.extend(
                    h.rows
                        .into_iter()
                        .map(|row| row.into_iter().map(|(_, id)| id).collect::<Vec<u64>>()),
                );
            }
            _ => return Err(Error::InvalidArgument("unexpected merge payload".into())),
        }
    }
    let wall_ms = watch.ms();

    let flat: Vec<u64> = indexes.iter().flatten().copied().collect();
    let metrics = rt.metrics();
    let report = AppReport {
        map_tasks: metrics.kind_count("knn_fit"),
        map_bytes: after_fit.bytes_transferred - before_fit.bytes_transferred,
        result_checksum: checksum_u64s(&flat),
        wall_ms,
        extra: vec![
            ("distance_evals".into(), distance_evals.to_string()),
            ("trees".into(), tree_refs.len().to_string()),
        ],
        metrics,
    };
    Ok(KnnRun {
        indexes,
        distance_evals,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apps::AppKind;
    use crate::blocked::generate_row;
    use crate::kernels::brute_knn;

    fn cfg(mode: Mode) -> AppConfig {
        let mut cfg = AppConfig::new(AppKind::Knn, mode);
        cfg.workers = 2;
        cfg.blocks_per_worker = 5;
        cfg.block_rows = 100;
        cfg.query_blocks_per_worker = 1;
        cfg.dims = 3;
        cfg.knn_k = 5;
        cfg
    }

    #[test]
    fn matches_brute_force_over_the_full_fit_set() {
        // 5k fit rows, 1k query rows, every query checked against the
        // exhaustive oracle over the regenerated dataset.
        let mut c = cfg(Mode::Baseline);
        c.block_rows = 500;
        let run = run_knn(&c).unwrap();

        let n = c.n_rows();
        assert_eq!(n, 5_000);
        let fit: Vec<f64> = (0..n)
            .flat_map(|r| generate_row(&Generator::UniformCube, c.seed, r, c.dims))
            .collect();
        assert_eq!(run.indexes.len(), 1_000);
        for (qi, got) in run.indexes.iter().enumerate() {
            let q = generate_row(
                &Generator::UniformCube,
                c.seed ^ QUERY_SEED_SALT,
                qi,
                c.dims,
            );
            let expected: Vec<u64> = brute_knn(&fit, c.dims, &q, c.knn_k)
                .hits
                .iter()
                .map(|&(_, i)| i as u64)
                .collect();
            assert_eq!(got, &expected, "query {qi}");
        }
    }

    #[test]
    fn modes_return_identical_index_lists() {
        let base = run_knn(&cfg(Mode::Baseline)).unwrap();
        let spl = run_knn(&cfg(Mode::Spliter)).unwrap();
        let rec = run_knn(&cfg(Mode::Rechunk)).unwrap();
        assert_eq!(base.indexes, spl.indexes);
        assert_eq!(base.indexes, rec.indexes);
    }

    #[test]
    fn task_counts_follow_tree_granularity() {
        let base = run_knn(&cfg(Mode::Baseline)).unwrap();
        let spl = run_knn(&cfg(Mode::Spliter)).unwrap();
        let q_blocks = 2;
        // Baseline: 10 per-block trees; spliter: one tree per worker.
        assert_eq!(base.report.map_tasks, 10);
        assert_eq!(spl.report.map_tasks, 2);
        assert_eq!(
            base.report.metrics.kind_count("knn_lookup"),
            10 * q_blocks
        );
        assert_eq!(spl.report.metrics.kind_count("knn_lookup"), 2 * q_blocks);
    }

    #[test]
    fn spliter_fit_stage_moves_no_fit_bytes() {
        let spl = run_knn(&cfg(Mode::Spliter)).unwrap();
        assert_eq!(spl.report.map_bytes, 0);
    }

    #[test]
    fn consolidated_trees_spend_fewer_distance_evals() {
        let base = run_knn(&cfg(Mode::Baseline)).unwrap();
        let spl = run_knn(&cfg(Mode::Spliter)).unwrap();
        assert!(
            spl.distance_evals <= base.distance_evals,
            "consolidated {} vs fragmented {}",
            spl.distance_evals,
            base.distance_evals
        );
    }

    #[test]
    fn oversized_k_is_rejected() {
        let mut c = cfg(Mode::Baseline);
        c.knn_k = c.n_rows() + 1;
        assert!(run_knn(&c).is_err());
    }
}
