use std::path::PathBuf;
use std::process::{Command, Output};

fn mmhm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmhm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mmhm-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn csv_rows(path: &PathBuf) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn run_p1_verify_alternates_beta2() {
    let csv = tmp("p1.csv");
    let out = mmhm(&[
        "run",
        "p1",
        "--method",
        "mmhm",
        "--steps",
        "200",
        "--verify",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = csv_rows(&csv);
    assert_eq!(
        rows[0].join(","),
        "step,method,latency_ns,beta0,beta1,beta2,beta3,rho,recompressed,trigger,gated,touched_columns,critical_total,nnz_total"
    );
    assert_eq!(rows.len(), 202);
    for (i, r) in rows[1..].iter().enumerate() {
        let want = if i % 2 == 0 { "1" } else { "0" };
        assert_eq!(
            (r[3].as_str(), r[4].as_str(), r[5].as_str()),
            ("1", "0", want),
            "step {i}"
        );
    }
}

#[test]
fn run_p2_stays_contractible() {
    let csv = tmp("p2.csv");
    let out = mmhm(&[
        "run",
        "p2",
        "--steps",
        "100",
        "--verify",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for r in &csv_rows(&csv)[1..] {
        assert_eq!(&r[3..7], ["1", "0", "0", "0"]);
    }
}

#[test]
fn periodic_schedule_with_locality_off() {
    let csv = tmp("sched.csv");
    let out = mmhm(&[
        "run",
        "p1",
        "--steps",
        "100",
        "--recompress-every",
        "32",
        "--tau",
        "0.99",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let rows = csv_rows(&csv);
    let rebuilt_steps: Vec<&str> = rows[2..]
        .iter()
        .filter(|r| r[8] == "true")
        .map(|r| r[0].as_str())
        .collect();
    assert_eq!(rebuilt_steps, ["32", "64", "96"]);
}

#[test]
fn compare_four_methods_agree_and_writes_svg() {
    let svg = tmp("cmp.svg");
    let csv = tmp("cmp.csv");
    let out = mmhm(&[
        "compare",
        "p1",
        "mmhm",
        "full",
        "coreduction",
        "static-ph",
        "--steps",
        "40",
        "--svg",
        svg.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("static-ph") && stdout.contains("agree"));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
    assert_eq!(csv_rows(&csv).len(), 1 + 4 * 41);
}

#[test]
fn compare_single_method_is_usage_error() {
    let out = mmhm(&["compare", "p1", "mmhm"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(mmhm(&["run", "p9"]).status.code(), Some(1));
    assert_eq!(
        mmhm(&["run", "p1", "--method", "magic"]).status.code(),
        Some(1)
    );
    assert_eq!(mmhm(&["run", "p1", "--tau", "1.5"]).status.code(), Some(1));
    assert_eq!(
        mmhm(&["run", "p1", "--gates", "beta7"]).status.code(),
        Some(1)
    );
    assert_eq!(mmhm(&["--help"]).status.code(), Some(0));
}

#[test]
fn oracle_size_guard_is_usage_error() {
    let out = mmhm(&[
        "run", "p3", "--method", "oracle", "--subdiv", "6", "--steps", "1",
    ]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn gen_prints_event_log_and_dump() {
    let dump = tmp("init.txt");
    let out = mmhm(&[
        "gen",
        "p3",
        "--ports",
        "2",
        "--subdiv",
        "2",
        "--steps",
        "4",
        "--seed",
        "9",
        "--dump",
        dump.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let log = String::from_utf8_lossy(&out.stdout);
    assert!(log.starts_with("benchmark p3"));
    assert_eq!(log.lines().filter(|l| l.starts_with("event")).count(), 4);
    let text = std::fs::read_to_string(&dump).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("2 ")).count(), 128);
}

#[test]
fn run_dump_writes_final_complex() {
    let dump = tmp("final.txt");
    let out = mmhm(&[
        "run",
        "p1",
        "--steps",
        "3",
        "--dump",
        dump.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&dump).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("2 ")).count(), 6);
}
