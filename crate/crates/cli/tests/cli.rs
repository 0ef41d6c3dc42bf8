use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gyrosense(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gyrosense")).args(args).output().expect("binary runs")
}

fn stderr_record(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.lines().last().expect("an error record")).expect("json record")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn ideal_prints_csv() {
    let out = gyrosense(&["ideal"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# experiment=custom schema_version=1\n"));
    let table = gyrosense::csv::CsvTable::parse(&text).unwrap();
    // α = β = 2, G = 0.5 at φ = 0: δφ = √8·e/8
    let dphi = table.column("dphi").unwrap()[0];
    assert!((dphi - 8f64.sqrt() * std::f64::consts::E / 8.0).abs() < 1e-12);
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        write(dir.path(), "unknown.json", r#"{"schema_version":1,"colour":"red"}"#),
        write(dir.path(), "version.json", r#"{"schema_version":7}"#),
        write(dir.path(), "syntax.json", "{not json"),
        write(dir.path(), "range.json", r#"{"schema_version":1,"rotation":-0.1}"#),
        dir.path().join("missing.json").display().to_string(),
    ];
    for path in &cases {
        let out = gyrosense(&["--config", path, "sensitivity"]);
        assert_eq!(out.status.code(), Some(2), "{path}");
        let rec = stderr_record(&out);
        assert_eq!(rec["kind"], "config");
        assert_eq!(rec["exit_code"], 2);
    }
    for args in [
        &["sweep", "--param", "colour", "--values", "1"][..],
        &["sweep", "--param", "G"],
        &["figure", "fig7"],
        &["frobnicate"],
    ] {
        let out = gyrosense(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert_eq!(stderr_record(&out)["status"], "error");
    }
}

#[test]
fn write_failures_exit_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = write(dir.path(), "file", "");
    let out = gyrosense(&["--out", &blocker, "ideal"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_record(&out)["kind"], "io");
}

#[test]
fn figure_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (d, threads) in [(&a, "1"), (&b, "4")] {
        let out = gyrosense(&["--out", d.to_str().unwrap(), "--threads", threads, "--seed", "9", "figure", "fig3b"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(summary["status"], "ok");
    }
    let (x, y) = (fs::read(a.join("fig3b.csv")).unwrap(), fs::read(b.join("fig3b.csv")).unwrap());
    assert!(!x.is_empty());
    assert_eq!(x, y);
}

#[test]
fn sweep_from_config_block() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.json",
        r#"{"schema_version":1,"probe":{"phi1":1.5707963267948966,"phi2":1.5707963267948966},
            "sweep":{"parameter":"G","start":0,"stop":2,"points":5}}"#,
    );
    let out = gyrosense(&["--config", &cfg, "sweep"]);
    assert!(out.status.success());
    let table = gyrosense::csv::CsvTable::parse(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let g = table.column("G").unwrap();
    let r = table.column("ratio_case1").unwrap();
    assert_eq!(g.len(), 5);
    for (x, y) in g.iter().zip(r) {
        assert!((y - (-x).exp()).abs() < 1e-12);
    }
}

#[test]
fn udynamics_writes_both_modes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "u.json",
        r#"{"schema_version":1,"method":"markov","horizon":5,"step":0.5,"baths":[{"gamma":0.05,"omega_c":25,"s":1}]}"#,
    );
    let out_dir = dir.path().join("o");
    let out = gyrosense(&["--config", &cfg, "--out", out_dir.to_str().unwrap(), "udynamics"]);
    assert!(out.status.success());
    let table = gyrosense::csv::CsvTable::parse(&fs::read_to_string(out_dir.join("udynamics.csv")).unwrap()).unwrap();
    assert_eq!(table.rows.len(), 11);
    let kappa = std::f64::consts::PI * 0.05 * 1.1 * (-1.1f64 / 25.0).exp();
    let last = table.column("abs_u1").unwrap()[10];
    assert!((last - (-kappa * 5.0).exp()).abs() < 1e-12);
}
