use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn lrss(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lrss"))
        .arg("--state-dir")
        .arg(dir)
        .args(args)
        .env_remove("LRSS_STATE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn setup(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "setup", "--k", "8", "--n", "12", "--m", "3", "--secret", "42", "--seed", "7",
    ];
    args.extend_from_slice(extra);
    let out = lrss(dir, &args);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    out
}

fn snapshot(dir: &Path) -> Vec<(String, String)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read_to_string(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn setup_is_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    setup(a.path(), &[]);
    setup(b.path(), &[]);
    let snap = snapshot(a.path());
    assert_eq!(snap.len(), 13);
    assert_eq!(snap, snapshot(b.path()));
    setup(a.path(), &[]);
    assert_eq!(snap, snapshot(a.path()));
}

#[test]
fn fail_repair_recover() {
    let dir = TempDir::new().unwrap();
    setup(dir.path(), &[]);
    let before = fs::read_to_string(dir.path().join("node-003.json")).unwrap();

    assert_eq!(
        lrss(dir.path(), &["fail", "--node", "3"]).status.code(),
        Some(0)
    );
    assert_ne!(
        fs::read_to_string(dir.path().join("node-003.json")).unwrap(),
        before
    );

    let out = lrss(dir.path(), &["repair", "--node", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text
        .lines()
        .next()
        .unwrap()
        .starts_with("1 | request | P3 |"));
    assert!(text.contains("| delivery | P3 | P3 | share x=3 y="));
    let restored: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("node-003.json")).unwrap())
            .unwrap();
    let original: serde_json::Value = serde_json::from_str(&before).unwrap();
    assert_eq!(restored["y"], original["y"]);
    assert_eq!(restored["sss_subshare"], original["sss_subshare"]);

    let out = lrss(
        dir.path(),
        &["recover", "--participants", "1,2,3,4,5,6,7,8"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "42");
}

#[test]
fn too_few_participants_is_a_protocol_error() {
    let dir = TempDir::new().unwrap();
    setup(dir.path(), &[]);
    let out = lrss(dir.path(), &["recover", "--participants", "1,2,3,4,5,6,7"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out)
        .lines()
        .next()
        .unwrap()
        .starts_with("error: insufficient-shares"));
}

#[test]
fn double_failure_in_group_is_a_protocol_error() {
    let dir = TempDir::new().unwrap();
    setup(dir.path(), &[]);
    lrss(dir.path(), &["fail", "--node", "1"]);
    lrss(dir.path(), &["fail", "--node", "2"]);
    let out = lrss(dir.path(), &["repair", "--node", "1"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).starts_with("error: insufficient-points"));
}

#[test]
fn repairing_a_healthy_node_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    setup(dir.path(), &[]);
    assert_eq!(
        lrss(dir.path(), &["repair", "--node", "5"]).status.code(),
        Some(2)
    );
    assert_eq!(
        lrss(dir.path(), &["fail", "--node", "13"]).status.code(),
        Some(2)
    );
}

#[test]
fn usage_and_io_errors() {
    let dir = TempDir::new().unwrap();
    let missing_seed = lrss(
        dir.path(),
        &[
            "setup", "--k", "8", "--n", "12", "--m", "3", "--secret", "42",
        ],
    );
    assert_eq!(missing_seed.status.code(), Some(2));
    // no system yet
    assert_eq!(
        lrss(dir.path(), &["recover", "--participants", "1"])
            .status
            .code(),
        Some(2)
    );
    let bad_modulus = lrss(
        dir.path(),
        &[
            "setup",
            "--k",
            "2",
            "--n",
            "4",
            "--m",
            "2",
            "--secret",
            "1",
            "--seed",
            "1",
            "--modulus",
            "15",
        ],
    );
    assert_eq!(bad_modulus.status.code(), Some(2));

    setup(dir.path(), &[]);
    fs::write(dir.path().join("registry.json"), "{ not json").unwrap();
    let out = lrss(
        dir.path(),
        &["recover", "--participants", "1,2,3,4,5,6,7,8"],
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn analytic_attack() {
    let dir = TempDir::new().unwrap();
    let out = lrss(dir.path(), &["attack", "--mode", "analytic", "--q", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "q=0.5 p1=0.0625 p2=0.1875");

    let out = lrss(
        dir.path(),
        &[
            "--format", "json", "attack", "--mode", "analytic", "--q", "0.3,0.7",
        ],
    );
    let records: Vec<serde_json::Value> = stdout(&out)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(records.len(), 2);
    assert!((records[0]["p1_exact"].as_f64().unwrap() - 0.0081).abs() < 1e-12);

    assert_eq!(
        lrss(dir.path(), &["attack", "--mode", "analytic", "--q", "1.5"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn monte_carlo_attack() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        lrss(dir.path(), &["attack", "--mode", "mc", "--q", "0.5"])
            .status
            .code(),
        Some(2)
    );
    let args = [
        "--format", "json", "attack", "--mode", "mc", "--q", "0.5", "--trials", "20000", "--seed",
        "3",
    ];
    let out = lrss(dir.path(), &args);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out), stdout(&lrss(dir.path(), &args)));
    for line in stdout(&out).lines() {
        let r: serde_json::Value = serde_json::from_str(line).unwrap();
        let exact = if r["scheme"] == "baseline4" {
            r["p1_exact"].as_f64()
        } else {
            r["p2_exact"].as_f64()
        };
        assert!(
            (r["p_empirical"].as_f64().unwrap() - exact.unwrap()).abs() < 0.02,
            "{line}"
        );
    }
}

#[test]
fn enumeration_attack() {
    let dir = TempDir::new().unwrap();
    setup(dir.path(), &["--placement", "reciprocal"]);
    let out = lrss(
        dir.path(),
        &["--format", "json", "attack", "--mode", "enum"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(r["placement_mode"], "reciprocal");
    assert_eq!(r["min_compromise_size"], 6);
    assert_eq!(r["witness_subset"].as_array().unwrap().len(), 6);

    let out = lrss(
        dir.path(),
        &["attack", "--mode", "enum", "--anti-reciprocal"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(
        stdout(&out).contains("min_compromise_size=7"),
        "{}",
        stdout(&out)
    );

    let big = TempDir::new().unwrap();
    let out = lrss(
        big.path(),
        &[
            "setup", "--k", "12", "--n", "18", "--m", "3", "--secret", "1", "--seed", "1",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let out = lrss(big.path(), &["attack", "--mode", "enum"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error: enumeration-refused"));
}

#[test]
fn state_dir_from_environment() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_lrss"))
        .args([
            "setup", "--k", "4", "--n", "6", "--m", "2", "--secret", "9", "--seed", "2",
        ])
        .env("LRSS_STATE_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("registry.json").exists());
}
