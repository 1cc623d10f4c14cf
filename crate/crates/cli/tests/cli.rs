use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn sepcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sepcert"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sepcert-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn certify_bell_csv() {
    let out = sepcert(&["certify", "--state", "bell", "--format", "csv", "--vertices", "40"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let head = rdr.headers().unwrap().clone();
    let row = rdr.records().next().unwrap().unwrap();
    let col = |name: &str| &row[head.iter().position(|h| h == name).unwrap()];
    let chi: f64 = col("visibility").parse().unwrap();
    assert!((chi - 1.0 / 3.0).abs() < 1e-4, "{chi}");
    assert_eq!(col("certified"), "0");
    let ppt: f64 = col("ppt_upper").parse().unwrap();
    assert!(chi <= ppt + 1e-6);
}

#[test]
fn certify_json_multiparty() {
    let v = json_of(&sepcert(&[
        "certify",
        "--state",
        "ghz:3x2",
        "--class",
        "bsep",
        "--vertices",
        "40",
    ]));
    let chi = v["visibility"].as_f64().unwrap();
    assert!(chi > 0.3 && chi <= 3.0 / 7.0 + 1e-4, "{chi}");
}

#[test]
fn usage_and_input_errors_exit_2() {
    assert_eq!(sepcert(&["certify"]).status.code(), Some(2));
    assert_eq!(sepcert(&["certify", "--state", "nosuchfamily"]).status.code(), Some(2));
    assert_eq!(
        sepcert(&["certify", "--state", "file:/nonexistent/rho.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        sepcert(&["certify", "--state", "bell", "--class", "sep:A|B|C"])
            .status
            .code(),
        Some(2)
    );
    let out = sepcert(&["certify", "--state", "isotropic:2x2:t=7"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn sweep_rows_follow_grid() {
    let out = sepcert(&[
        "sweep",
        "--state",
        "isotropic:2x2:t=0",
        "--from",
        "0",
        "--to",
        "1",
        "--points",
        "3",
        "--no-outer",
        "--vertices",
        "30",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(&rows[1][0], "0.5");
}

#[test]
fn witness_extract_then_verify() {
    let path = scratch("bell-witness.json");
    let out = sepcert(&[
        "witness",
        "extract",
        "--state",
        "bell",
        "--vertices",
        "40",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["detects"], Value::Bool(true));
    let v = json_of(&sepcert(&[
        "witness",
        "verify",
        "--witness",
        path.to_str().unwrap(),
        "--state",
        "bell",
    ]));
    assert_eq!(v["nonnegative_on_products"], Value::Bool(true));
    assert_eq!(v["detects"], Value::Bool(true));
}

#[test]
fn state_from_matrix_file() {
    let path = scratch("mixed.json");
    std::fs::write(
        &path,
        r#"{"dims":[2,2],"re":[[0.25,0,0,0],[0,0.25,0,0],[0,0,0.25,0],[0,0,0,0.25]]}"#,
    )
    .unwrap();
    let spec = format!("file:{}", path.display());
    let v = json_of(&sepcert(&["certify", "--state", &spec, "--vertices", "30"]));
    assert!(v["visibility"].as_f64().unwrap() >= 1.0);
}
