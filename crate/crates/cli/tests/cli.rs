use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn mms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mms")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

fn gen(dir: &TempDir, n: &str, m: &str) -> String {
    let p = path(dir, "inst.json");
    let o = mms(&["gen", "--kind", "uniform-additive", "--n", n, "--m", m, "--seed", "11", "--output", &p]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    p
}

#[test]
fn gen_is_deterministic() {
    let a = mms(&["gen", "--kind", "coverage", "--n", "3", "--m", "6", "--seed", "5"]);
    let b = mms(&["gen", "--kind", "coverage", "--n", "3", "--m", "6", "--seed", "5"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).ends_with('\n'));
}

#[test]
fn solve_then_verify_passes() {
    let dir = TempDir::new().unwrap();
    let inst = gen(&dir, "3", "8");
    let alloc = path(&dir, "alloc.json");
    let o = mms(&["solve", "--alg", "threequarters", "--input", &inst, "--output", &alloc]);
    assert_eq!(o.status.code(), Some(0));
    let o = mms(&["verify", "--input", &inst, "--allocation", &alloc, "--alpha", "3/4"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["pass"], true);
}

#[test]
fn verify_fails_with_exit_one() {
    let dir = TempDir::new().unwrap();
    let inst = gen(&dir, "2", "4");
    let alloc = path(&dir, "alloc.json");
    fs::write(&alloc, r#"{"bundles": [[0, 1, 2, 3], []]}"#).unwrap();
    let o = mms(&["verify", "--input", &inst, "--allocation", &alloc, "--alpha", "1/2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn malformed_allocation_is_structural() {
    let dir = TempDir::new().unwrap();
    let inst = gen(&dir, "2", "4");
    let alloc = path(&dir, "alloc.json");
    fs::write(&alloc, r#"{"bundles": [[0, 1, 1], [2]]}"#).unwrap();
    let o = mms(&["verify", "--input", &inst, "--allocation", &alloc]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn wrong_agent_count_is_structural() {
    let dir = TempDir::new().unwrap();
    let inst = gen(&dir, "3", "6");
    let o = mms(&["solve", "--alg", "four-agents", "--input", &inst]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oversized_share_is_capacity() {
    let dir = TempDir::new().unwrap();
    let inst = gen(&dir, "2", "30");
    let o = mms(&["mms", "--input", &inst, "--exact"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn lower_bound_never_exceeds_exact_share() {
    let dir = TempDir::new().unwrap();
    let inst = gen(&dir, "3", "9");
    let exact = mms(&["mms", "--input", &inst, "--agent", "2", "--exact"]);
    let lb = mms(&["mms", "--input", &inst, "--agent", "2", "--lb", "1/20"]);
    let get = |o: &Output| -> (i64, i64) {
        let v: serde_json::Value = serde_json::from_str(&stdout(o)).unwrap();
        let s = v["value"].as_str().unwrap().to_string();
        let (p, q) = s.split_once('/').unwrap_or((&s, "1"));
        (p.parse().unwrap(), q.parse().unwrap())
    };
    let (a, b) = get(&exact);
    let (c, d) = get(&lb);
    assert!(c * b <= a * d);
    assert!(20 * c * b >= 19 * a * d);
}

#[test]
fn extremal_check_reports_ratio() {
    let o = mms(&["extremal", "--family", "submodular", "--n", "2", "--check"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("\"best_min_ratio\": \"3/4\""));
}

#[test]
fn bench_writes_csv_and_records_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = path(&dir, "bench.json");
    fs::write(
        &cfg,
        r#"{"runs": [
            {"algorithm": "half", "generator": "uniform-additive", "n": 2, "m": 5, "trials": 2},
            {"algorithm": "four-agents", "generator": "uniform-additive", "n": 3, "m": 5}
        ]}"#,
    )
    .unwrap();
    let out = path(&dir, "bench.csv");
    let o = mms(&["bench", "--config", &cfg, "--seed", "7", "--output", &out]);
    assert_eq!(o.status.code(), Some(0));
    let mut r = csv::Reader::from_path(Path::new(&out)).unwrap();
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(&rows[0][0], "7");
    assert_eq!(&rows[0][6], "true");
    assert_eq!(&rows[2][6], "false");
    assert!(!rows[2][9].is_empty());
}

#[test]
fn empty_bench_is_header_only() {
    let o = mms(&["bench"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "seed,n,m,algorithm,generator,min_ratio,pass,steps,wall_ms,error\n");
}

#[test]
fn unknown_algorithm_is_rejected() {
    let o = mms(&["solve", "--alg", "nope", "--input", "x.json"]);
    assert!(!o.status.success());
}

fn bench_rows(args: &[&str]) -> Vec<csv::StringRecord> {
    let o = mms(args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let mut r = csv::Reader::from_reader(out.as_bytes());
    r.records().map(|x| x.unwrap()).collect()
}

#[test]
fn threequarters_bench_rows_all_pass() {
    let rows = bench_rows(&["bench", "--alg", "threequarters", "--kind", "uniform-additive", "--n", "3", "--m", "10", "--trials", "10"]);
    assert_eq!(rows.len(), 10);
    for row in &rows {
        assert_eq!(&row[6], "true", "{row:?}");
        assert!(row[9].is_empty());
    }
}

#[test]
fn submodular_bench_steps_within_bound() {
    let rows = bench_rows(&["bench", "--alg", "submodular-third", "--kind", "coverage", "--n", "3", "--m", "8", "--trials", "6"]);
    assert_eq!(rows.len(), 6);
    for row in &rows {
        let steps: usize = row[7].parse().unwrap();
        assert!(steps <= 2 * 3 * 8, "{row:?}");
        assert_eq!(&row[6], "true");
    }
}
