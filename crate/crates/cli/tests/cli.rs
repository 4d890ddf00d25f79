use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const WORKED: &str = "\
run.seed = 11
run.mc_samples = 20000
alloc.total = 100
alloc.beta = 0.5
dist.kind = discrete
dist.atoms = 0.05:0.5, 0.15:0.5
contract.d = 0.10
contract.alpha = 0.2
utility.family = cara
utility.param = 10
";

fn write_config(dir: &TempDir, text: &str) -> PathBuf {
    let path = dir.path().join("run.cfg");
    fs::write(&path, text).unwrap();
    path
}

fn frsr(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frsr"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .env_remove("SOURCE_DATE_EPOCH")
        .output()
        .unwrap()
}

fn run(cmd: &str, text: &str) -> (TempDir, Output) {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, text);
    let out = dir.path().join("out");
    let o = frsr(&[cmd], &cfg, &out);
    (dir, o)
}

/// Header and rows of a CSV without quoted cells.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().map(|l| l.split(',').map(String::from).collect::<Vec<_>>());
    let header = lines.next().unwrap();
    (header, lines.collect())
}

fn cell<'a>(header: &[String], row: &'a [String], name: &str) -> &'a str {
    &row[header.iter().position(|h| h == name).unwrap()]
}

fn num(header: &[String], row: &[String], name: &str) -> f64 {
    cell(header, row, name).parse().unwrap()
}

#[test]
fn solve_worked_scenario() {
    let (dir, o) = run("solve", WORKED);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_csv(&dir.path().join("out/solve.csv"));
    assert_eq!(rows.len(), 1);
    assert!((num(&h, &rows[0], "alpha_star") - 0.25).abs() <= 1e-9);
    assert!((num(&h, &rows[0], "d_star") - 0.10).abs() <= 1e-9);
    assert_eq!(cell(&h, &rows[0], "status"), "ok");
}

#[test]
fn missing_kind_names_the_field() {
    let text = WORKED.replace("dist.kind = discrete\n", "");
    let (_dir, o) = run("solve", &text);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dist.kind"));
}

#[test]
fn low_beta_has_no_root() {
    let (dir, o) = run("solve", &WORKED.replace("alloc.beta = 0.5", "alloc.beta = 0.3"));
    assert_eq!(o.status.code(), Some(2));
    let (h, rows) = read_csv(&dir.path().join("out/solve.csv"));
    assert_eq!(cell(&h, &rows[0], "status"), "no_root");
    assert_eq!(cell(&h, &rows[0], "beta_ge_half"), "false");
}

#[test]
fn non_increasing_quadratic_is_rejected() {
    // b = 10 turns over at x = 0.1, inside the payoff range
    let text = WORKED.replace("utility.family = cara", "utility.family = quadratic");
    let (_dir, o) = run("compare", &text);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("quadratic"));
}

#[test]
fn verify_flags_the_boundary_share() {
    let (dir, o) = run("verify", &WORKED.replace("contract.alpha = 0.2", "contract.alpha = 0.25"));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    let records = report["records"].as_array().unwrap();
    assert_eq!(records.len(), 4);
    let p51 = records.iter().find(|r| r["proposition"] == "P5_1").unwrap();
    assert_eq!(p51["status"], "boundary");
    assert_eq!(p51["premises"]["alpha_off_alpha_star"], false);
    let left = records.iter().find(|r| r["clause"] == "left").unwrap();
    assert_eq!(left["status"], "premise_failure");
    assert!((left["witness"]["mean_gap"].as_f64().unwrap() - 0.05).abs() <= 1e-12);
    assert!(dir.path().join("out/summary.csv").exists());
}

#[test]
fn verify_is_deterministic() {
    let text = format!("{WORKED}\n[scenario more]\nalloc.beta = [0.5, 0.75]\ndist.kind = uniform\ndist.lo = 0\ndist.hi = 1\ncontract.d = [0.1, 0.3]\n");
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, &text);
    let a = frsr(&["verify"], &cfg, &dir.path().join("a"));
    let b = frsr(&["verify", "--jobs", "1"], &cfg, &dir.path().join("b"));
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(b.status.code(), Some(0));
    let ra = fs::read(dir.path().join("a/report.json")).unwrap();
    let rb = fs::read(dir.path().join("b/report.json")).unwrap();
    assert_eq!(ra, rb);
}

#[test]
fn compare_worked_payoffs() {
    let (dir, o) = run("compare", WORKED);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = read_csv(&dir.path().join("out/compare.csv"));
    let r = &rows[0];
    assert!((num(&h, r, "e_p1") - 4.0).abs() <= 1e-12);
    assert!((num(&h, r, "e_p2") - 3.75).abs() <= 1e-12);
    assert!((num(&h, r, "e_y1") - 1.0).abs() <= 1e-12);
    assert!((num(&h, r, "e_y2") - 1.25).abs() <= 1e-12);
    assert!(num(&h, r, "v_p2") < num(&h, r, "v_p1"));
}

#[test]
fn dump_config_round_trips() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, WORKED);
    let out = dir.path().join("out");
    let first = frsr(&["solve", "--dump-config"], &cfg, &out);
    assert_eq!(first.status.code(), Some(0));
    let dumped = write_config(&dir, &String::from_utf8(first.stdout.clone()).unwrap());
    let second = frsr(&["solve", "--dump-config"], &dumped, &out);
    assert_eq!(first.stdout, second.stdout);
    assert!(!out.exists());
}

#[test]
fn flag_overrides_seed() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, WORKED);
    let o = frsr(&["verify", "--seed", "99", "--dump-config"], &cfg, &dir.path().join("out"));
    assert!(String::from_utf8_lossy(&o.stdout).contains("run.seed = 99"));
}

#[test]
fn usage_errors_exit_one() {
    let o = Command::new(env!("CARGO_BIN_EXE_frsr")).args(["solve", "--bogus"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_frsr")).arg("solve").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_frsr")).arg("--help").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
}
