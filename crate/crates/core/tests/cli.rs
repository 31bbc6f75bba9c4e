//! End-to-end checks of the `spliter` binary: subcommands, exit codes, and
//! the CSV contract.

use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_spliter");

const EXPECTED_HEADER: &str = "app,mode,workers,threads_per_worker,blocks_per_worker,block_rows,\
dims,seed,rep,wall_ms,map_tasks,total_tasks,bytes_transferred,transfers,locality_hits,\
accounted_overhead_ns,virtual_transfer_ns,result_checksum,extra";

fn run(args: &[&str]) -> std::process::Output {
    Command::new(BIN).args(args).output().expect("spawn spliter")
}

#[test]
fn verify_confirms_mode_equivalence() {
    let out = run(&[
        "verify",
        "histogram",
        "--workers",
        "2",
        "--blocks-per-worker",
        "8",
        "--block-rows",
        "64",
        "--dims",
        "2",
        "--bins",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("PASS histogram mode equivalence"), "{text}");
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    let out = run(&[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.to_lowercase().contains("usage"), "{err}");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = run(&["bench", "histogram", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_app_is_a_usage_error() {
    let out = run(&["bench", "fourier"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_writes_the_documented_csv_schema() {
    let path = std::env::temp_dir().join(format!("spliter_bench_{}.csv", std::process::id()));
    let out = run(&[
        "bench",
        "kmeans",
        "--mode",
        "spliter",
        "--workers",
        "2",
        "--blocks-per-worker",
        "2",
        "--block-rows",
        "32",
        "--dims",
        "3",
        "--k",
        "2",
        "--iters",
        "2",
        "--reps",
        "3",
        "--csv",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], EXPECTED_HEADER);
    // 3 raw rows plus one aggregate.
    assert_eq!(lines.len(), 5);
    assert!(lines[4].contains("iqr_ms="));
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 19);
        assert!(line.starts_with("kmeans,spliter,2,1,2,32,3,"));
    }
    // Counters (everything between wall_ms and result_checksum) repeat
    // identically across reps.
    let counters = |line: &str| {
        line.split(',')
            .enumerate()
            .filter(|(i, _)| (10..=17).contains(i))
            .map(|(_, v)| v.to_string())
            .collect::<Vec<_>>()
    };
    assert_eq!(counters(lines[1]), counters(lines[2]));
    assert_eq!(counters(lines[1]), counters(lines[3]));
}

#[test]
fn sweep_covers_modes_and_block_counts() {
    let out = run(&[
        "sweep",
        "histogram",
        "--workers",
        "2",
        "--blocks-per-worker",
        "1,2",
        "--block-rows",
        "32",
        "--dims",
        "2",
        "--bins",
        "4",
        "--reps",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    // Header + (3 modes x 2 block counts) x (1 raw + 1 aggregate).
    assert_eq!(lines.len(), 1 + 12);
    for mode in ["baseline", "spliter", "rechunk"] {
        assert!(
            lines.iter().any(|l| l.contains(&format!("histogram,{mode},"))),
            "missing mode {mode}"
        );
    }
}

#[test]
fn invalid_cells_produce_warning_rows() {
    let out = run(&[
        "bench",
        "kmeans",
        "--workers",
        "1",
        "--blocks-per-worker",
        "1",
        "--block-rows",
        "4",
        "--k",
        "100",
        "--reps",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].contains("skipped="), "{}", lines[1]);
}
