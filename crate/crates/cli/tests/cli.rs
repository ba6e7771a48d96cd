use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const STANDARD_POLES: [f64; 13] = [
    0.21788344122246012,
    0.9354984090489751,
    2.274537277073521,
    4.323471861197404,
    7.125975596988451,
    10.701046303359455,
    15.057037950335976,
    20.197859113993204,
    26.125475142527932,
    32.840943281468654,
    40.344866943627416,
    48.63760847150312,
    57.71939510962397,
];

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run(args: &[&str], scenario: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slabkernel"))
        .args(args)
        .arg("--scenario")
        .arg(scenario)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn poles_reproduce_the_standard_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["poles"], &scenario("standard_plate.json"), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv(&dir.path().join("poles.csv"));
    assert_eq!(header, ["n", "lambda", "lambda_sq", "norm", "amplitude"]);
    assert_eq!(rows.len(), 13);
    for (row, want) in rows.iter().zip(STANDARD_POLES) {
        let got: f64 = row[2].parse().unwrap();
        assert!(((got - want) / want).abs() < 1e-9, "{got} vs {want}");
    }
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "poles");
    assert_eq!(manifest["outputs"][0], "poles.csv");
}

#[test]
fn zero_amplitude_profile_is_identically_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["profile"], &scenario("zero_amplitude.json"), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv(&dir.path().join("profile.csv"));
    let col = header.iter().position(|c| c == "value").unwrap();
    assert!(!rows.is_empty());
    for row in rows {
        assert_eq!(row[col].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn invalid_scenario_exits_two_with_a_json_record() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"slab": {"alpha": -1, "w": 5, "h1": 1, "h2": 1},
            "source": {"variant": "point_on_off", "center": [0, 0, 9], "amplitudes": {"a0": 1}},
            "request": {"times": [1], "points": [[0, 0, 1]]}}"#,
    )
    .unwrap();
    let out = run(&["profile"], &path, dir.path());
    assert_eq!(out.status.code(), Some(2));
    let record: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["error"], "Validation");
    let codes: Vec<&str> = record["details"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["code"].as_str().unwrap())
        .collect();
    assert!(codes.contains(&"NonPositiveDiffusivity"));
    assert!(codes.contains(&"CenterOutsideSlab"));

    let out = run(&["poles"], &dir.path().join("missing.json"), dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_directory_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let out = run(&["poles"], &scenario("standard_plate.json"), &blocker.join("sub"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = run(&["profile", "--threads", "1"], &scenario("double_ellipsoid.json"), dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["profile.csv", "manifest.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
}

#[test]
fn kernel_rows_agree_with_the_inversion() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["kernel"], &scenario("standard_plate.json"), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv(&dir.path().join("kernel.csv"));
    let at = |name: &str| header.iter().position(|c| c == name).unwrap();
    assert_eq!(rows.len(), 16);
    for row in rows {
        let tbar: f64 = row[at("tbar")].parse().unwrap();
        if tbar < 1.0 {
            continue;
        }
        let value: f64 = row[at("value")].parse().unwrap();
        let ilt: f64 = row[at("ilt")].parse().unwrap();
        assert!((value - ilt).abs() < 1e-9, "{value} vs {ilt}");
    }
}

#[test]
fn limits_table_tracks_both_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["limits", "--format", "json"], &scenario("thin_plate.json"), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("limits.json")).unwrap()).unwrap();
    for row in rows.as_array().unwrap() {
        let mean = row["series_mean"].as_f64().unwrap();
        let plate = row["rosenthal2d"].as_f64().unwrap();
        assert!(((mean - plate) / plate).abs() < 1e-2, "{row}");
    }
}

#[test]
fn compare_reports_small_discrepancies() {
    let dir = tempfile::tempdir().unwrap();
    // The shipped scenario on a coarser mesh keeps the run short.
    let mut doc: Value =
        serde_json::from_str(&std::fs::read_to_string(scenario("gaussian_pulse.json")).unwrap()).unwrap();
    doc["fd"]["dx"] = 0.5.into();
    doc["fd"]["dz"] = 0.25.into();
    doc["fd"]["times"] = serde_json::json!([1.0, 3.0, 4.0]);
    doc["ilt"] = serde_json::json!({"method": "bromwich-line"});
    let path = dir.path().join("coarse.json");
    std::fs::write(&path, doc.to_string()).unwrap();
    let out = run(&["compare"], &path, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("compare.json")).unwrap()).unwrap();
    assert!(report["fd"]["linf_rel"].as_f64().unwrap() < 0.02, "{report}");
    assert!(report["fd"]["l2_rel"].as_f64().unwrap() < 0.01, "{report}");
    assert!(report["ilt"]["max_rel_error"].as_f64().unwrap() < 1e-6, "{report}");
    let (header, rows) = csv(&dir.path().join("compare_overlay.csv"));
    assert_eq!(header, ["t", "x", "y", "z", "analytical", "fd"]);
    assert!(!rows.is_empty());
}
