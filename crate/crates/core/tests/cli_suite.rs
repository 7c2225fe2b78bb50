use std::process::{Command, Output};

use twostar::report::{sidecar_path, Report};

fn twostar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twostar"))
        .args(args)
        .env_remove("TWOSTAR_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn phase_header_and_critical_cell() {
    let o = twostar(&["phase", "--alpha", "2", "--h", "-2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("alpha,h,n_roots,u_star_1,u_star_2,classification,variance")
    );
    let row = lines.next().unwrap();
    assert!(row.starts_with("2.0,-2.0,"), "{row}");
    assert!(row.ends_with(",,critical,"), "{row}");
    assert!(lines.next().is_none());
}

#[test]
fn verifier_exit_codes() {
    let ok = twostar(&["verify", "ghs", "--n", "3", "--alpha", "0:1:0.5", "--h", "0,1"]);
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );
    assert_eq!(stdout(&ok).lines().count(), 7);
    let bad = twostar(&["verify", "ghs", "--n", "3", "--alpha", "0", "--h", "-1"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains(",fail,"));
}

#[test]
fn usage_and_runtime_errors() {
    assert_eq!(twostar(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(twostar(&["phase", "--alpha", "1:0:0.1"]).status.code(), Some(2));
    assert_eq!(twostar(&["exact", "--n", "8"]).status.code(), Some(2));
    assert_eq!(twostar(&["--help"]).status.code(), Some(0));
}

#[test]
fn reruns_are_byte_identical() {
    let args = [
        "mcmc", "--n", "10", "--sweeps", "1500", "--chains", "3", "--seed", "4",
    ];
    let (a, b) = (twostar(&args), twostar(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = twostar(&[
        "mcmc", "--n", "10", "--sweeps", "1500", "--chains", "3", "--seed", "5",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn json_round_trip() {
    let o = twostar(&["fixpoint", "--alpha", "1", "--h", "0", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let r = Report::from_json(&o.stdout).unwrap();
    assert_eq!(r.meta.command, "fixpoint --alpha 1 --h 0 --format json");
    assert_eq!(r.records.len(), 1);
    assert_eq!(r.to_json().unwrap(), o.stdout);
    let csv = twostar(&["fixpoint", "--alpha", "1", "--h", "0"]);
    assert_eq!(r.to_csv().unwrap(), csv.stdout);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_twostar"))
        .args(["curve", "--alpha", "2.5,3"])
        .env("TWOSTAR_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let path = dir.path().join("curve.csv");
    let body = std::fs::read_to_string(&path).unwrap();
    assert_eq!(body.lines().count(), 3);
    let meta: serde_json::Value =
        serde_json::from_slice(&std::fs::read(sidecar_path(&path)).unwrap()).unwrap();
    assert_eq!(meta["command"], "curve --alpha 2.5,3");
}

#[test]
fn explicit_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/out.json");
    let o = twostar(&[
        "exact",
        "--n",
        "3",
        "--out",
        path.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r = Report::from_json(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(r.records.len(), 1);
    assert!(!sidecar_path(&path).exists());
}
