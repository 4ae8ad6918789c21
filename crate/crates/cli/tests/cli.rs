use std::path::PathBuf;
use std::process::{Command, Output};

fn naqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_naqc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("naqc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn sweep_csv_schema_and_verdicts() {
    let o = naqc(&["sweep", "--family", "werner", "--grid", "0.8:0.84:0.02", "--restarts", "4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "family,p,functional,value,exhibits,lower_bound,restarts_agreeing,starts,converged_starts,evaluations"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    for r in rows {
        let value: f64 = r[3].parse().unwrap();
        let exhibits = value > 6f64.sqrt() + 1e-6;
        assert_eq!(r[4], exhibits.to_string());
    }
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let args = ["monogamy", "--mode", "fixed-coherence", "--samples", "2", "--restarts", "2", "--seed", "9"];
    let a = naqc(&[&args[..], &["--jobs", "1"]].concat());
    let b = naqc(&[&args[..], &["--jobs", "2"]].concat());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 5);
}

#[test]
fn outputs_and_summary_sidecar() {
    let out = scratch("scan.jsonl");
    let o = naqc(&[
        "monogamy", "--mode", "fixed-measurement", "--classes", "w-class", "--samples", "1",
        "--restarts", "2", "--format", "jsonl", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let table = std::fs::read_to_string(&out).unwrap();
    let row: serde_json::Value = serde_json::from_str(table.trim()).unwrap();
    assert_eq!(row["class"], "w-class");
    let summary = std::fs::read_to_string(out.with_extension("jsonl.summary.json")).unwrap();
    let summary: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert_eq!(summary["samples"], 1);
}

#[test]
fn compute_from_state_file() {
    let file = scratch("bell.json");
    let h = std::f64::consts::FRAC_1_SQRT_2;
    std::fs::write(&file, format!(r#"{{"amplitudes": [[{h}, 0], [0, 0], [0, 0], [{h}, 0]]}}"#)).unwrap();
    let o = naqc(&["compute", "--state", file.to_str().unwrap(), "--format", "jsonl"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 4);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!((v["value"].as_f64().unwrap() - 3.0).abs() < 1e-4);
    }

    let ghz = scratch("ghz.json");
    std::fs::write(&ghz, r#"{"family": "canonical", "params": {"lambda": [0.7071067811865476, 0, 0, 0, 0.7071067811865476], "beta": 0}}"#).unwrap();
    let o = naqc(&["compute", "--state", ghz.to_str().unwrap(), "--restarts", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("mode,functional,n_ab,n_ac,sum"));
}

#[test]
fn threshold_and_probe() {
    let o = naqc(&["threshold", "--family", "werner", "--functional", "standard", "--restarts", "4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let p: f64 = row[2].parse().unwrap();
    assert!((p - 6f64.sqrt() / 3.0).abs() < 2e-3);

    let o = naqc(&["monogamy", "--mode", "fixed-measurement", "--probe"]);
    let text = stdout(&o);
    let sum: f64 = text.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!((sum - (3.0 + 6f64.sqrt())).abs() < 2e-3);
}

#[test]
fn verify_exit_status() {
    let o = naqc(&["verify", "--suite", "bloch-path", "--trials", "20"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("PASS bloch-path"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["sweep", "--family", "nope"][..],
        &["sweep", "--family", "werner", "--grid", "1:0:0.1"],
        &["compute"],
        &["compute", "--state", "/nonexistent/state.json"],
        &["threshold", "--family", "werner", "--bracket", "0:0.5"],
        &["verify", "--suite", "unknown"],
        &["sweep", "--family", "werner", "--restarts", "0"],
    ] {
        let o = naqc(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}
