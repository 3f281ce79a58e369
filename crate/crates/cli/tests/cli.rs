//! End-to-end tests driving the compiled binary: exit codes, output files,
//! schema errors, and byte-reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn pblab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pblab"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, contents: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p.to_string_lossy().into_owned()
}

const TWO_CAP: &str = r#"{
  "kind": "pbeval",
  "version": 1,
  "seed": 1,
  "cover": {
    "version": 1,
    "surface": { "kind": "sphere", "area": 12.566370614359172, "nx": 64, "ny": 64 },
    "capacity": 6.911503837897544,
    "eta": 0.05,
    "cover_kind": "discrete",
    "centers": [[0.0, 0.0], [3.141592653589793, 0.0]],
    "allow_band_overlap": true
  }
}"#;

#[test]
fn pbeval_two_caps_vanishes_and_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "cfg.json", TWO_CAP);
    let out = pblab(&["pbeval", "--config", &cfg, "--out", "run1"], tmp.path());
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let result: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("run1/result.json")).unwrap())
            .unwrap();
    assert_eq!(result["kind"], "pbeval");
    assert_eq!(result["pb"]["value"], 0.0);
    assert_eq!(result["pb"]["zero_certificate"], true);

    // manifest lists every output with a content hash
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("run1/manifest.json")).unwrap(),
    )
    .unwrap();
    let outputs = manifest["outputs"].as_array().unwrap();
    assert!(outputs.iter().any(|o| o["path"] == "result.json"));
    assert!(outputs.iter().any(|o| o["path"] == "bracket_heatmap.csv"));
    for o in outputs {
        assert_eq!(o["sha256"].as_str().unwrap().len(), 64);
    }

    // heat map has one row per grid point plus the header
    let heat = std::fs::read_to_string(tmp.path().join("run1/bracket_heatmap.csv")).unwrap();
    assert_eq!(heat.lines().count(), 1 + 64 * 64);
}

#[test]
fn identical_config_and_seed_reproduce_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "cfg.json", TWO_CAP);
    let a = pblab(&["pbeval", "--config", &cfg, "--out", "a"], tmp.path());
    let b = pblab(&["pbeval", "--config", &cfg, "--out", "b"], tmp.path());
    assert!(a.status.success() && b.status.success());
    let ra = std::fs::read(tmp.path().join("a/result.json")).unwrap();
    let rb = std::fs::read(tmp.path().join("b/result.json")).unwrap();
    assert_eq!(ra, rb, "result.json must be byte-identical");
    let ha = std::fs::read(tmp.path().join("a/bracket_heatmap.csv")).unwrap();
    let hb = std::fs::read(tmp.path().join("b/bracket_heatmap.csv")).unwrap();
    assert_eq!(ha, hb);
}

#[test]
fn missing_seed_on_minimize_exits_one_with_schema_path() {
    let tmp = tempfile::tempdir().unwrap();
    // minimize requires a seed; omitting it is a schema violation
    let cfg = write(
        tmp.path(),
        "bad.json",
        r#"{
  "kind": "minimize",
  "version": 1,
  "cover": {
    "version": 1,
    "surface": { "kind": "torus", "area": 1.0, "nx": 32, "ny": 32 },
    "capacity": 0.6,
    "eta": 0.1,
    "cover_kind": "discrete",
    "centers": [[0.0, 0.0]]
  }
}"#,
    );
    let out = pblab(&["minimize", "--config", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("schema violation") && err.contains("seed"),
        "stderr: {err}"
    );
}

#[test]
fn kind_subcommand_mismatch_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "cfg.json", TWO_CAP);
    let out = pblab(&["sweep", "--config", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/kind"));
}

#[test]
fn half_area_check_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "check.json",
        r#"{ "kind": "check", "version": 1, "seed": 1, "check": "half_area", "grid": 64 }"#,
    );
    let out = pblab(&["check", "--config", &cfg, "--out", "chk"], tmp.path());
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let result: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("chk/result.json")).unwrap())
            .unwrap();
    assert_eq!(result["pass"], true);
}

#[test]
fn failing_check_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    // a sweep table with an injected bump fails the monotonicity check
    let table = serde_json::json!({
        "rows": [
            {"capacity": 0.2, "pb_value": 10.0, "evaluations": 0, "theta": [], "n_sets": 4, "cover_desc": ""},
            {"capacity": 0.3, "pb_value": 12.0, "evaluations": 0, "theta": [], "n_sets": 4, "cover_desc": ""}
        ]
    });
    let table_path = write(tmp.path(), "table.json", &table.to_string());
    let cfg = write(
        tmp.path(),
        "check.json",
        &format!(
            r#"{{ "kind": "check", "version": 1, "seed": 0, "check": "monotonicity", "table": "{}", "tol_rel": 0.05 }}"#,
            table_path.replace('\\', "/")
        ),
    );
    let out = pblab(&["check", "--config", &cfg, "--out", "chk"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn hilbert_export_writes_curve_and_exact_measures() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "h.json",
        r#"{ "kind": "hilbert", "version": 1, "dimension": 2, "order": 4, "samples": 256, "report_level": 2 }"#,
    );
    let out = pblab(&["hilbert", "--config", &cfg, "--out", "h"], tmp.path());
    assert!(out.status.success());
    let curve = std::fs::read_to_string(tmp.path().join("h/curve.csv")).unwrap();
    assert_eq!(curve.lines().count(), 1 + 257);
    assert!(curve.lines().next().unwrap().starts_with("t,x1,x2"));
    let measures: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("h/measures.json")).unwrap())
            .unwrap();
    let arr = measures.as_array().unwrap();
    assert_eq!(arr.len(), 16); // level-2 cells
    for m in arr {
        assert_eq!(m["measure_num"], 1);
        assert_eq!(m["measure_den"], 16);
    }
}

#[test]
fn small_sweep_writes_plot_data() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "sweep.json",
        r#"{
  "kind": "sweep",
  "version": 1,
  "seed": 3,
  "surface": { "kind": "torus", "area": 1.0, "nx": 32, "ny": 32 },
  "capacities": [0.45],
  "template": "torus_lattice",
  "optimizer": { "restarts": 1, "max_evals": 5 }
}"#,
    );
    let out = pblab(&["sweep", "--config", &cfg, "--out", "sw"], tmp.path());
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let dat = std::fs::read_to_string(tmp.path().join("sw/pb_c.dat")).unwrap();
    assert!(dat.starts_with("# capacity"));
    assert_eq!(dat.lines().count(), 2);
    let csv = std::fs::read_to_string(tmp.path().join("sw/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);

    // empty sweep produces the header comment only
    let cfg2 = write(
        tmp.path(),
        "sweep0.json",
        r#"{
  "kind": "sweep",
  "version": 1,
  "seed": 3,
  "surface": { "kind": "torus", "area": 1.0, "nx": 32, "ny": 32 },
  "capacities": [],
  "template": "torus_lattice"
}"#,
    );
    let out = pblab(&["sweep", "--config", &cfg2, "--out", "sw0"], tmp.path());
    assert!(out.status.success());
    let dat = std::fs::read_to_string(tmp.path().join("sw0/pb_c.dat")).unwrap();
    assert_eq!(dat.lines().count(), 1);

    // the written table feeds the monotonicity check and passes
    let table_path = tmp.path().join("sw/result.json");
    let table: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&table_path).unwrap()).unwrap();
    let inner = write(tmp.path(), "table_only.json", &table["table"].to_string());
    let cfg3 = write(
        tmp.path(),
        "mono.json",
        &format!(
            r#"{{ "kind": "check", "version": 1, "seed": 0, "check": "monotonicity", "table": "{}" }}"#,
            inner.replace('\\', "/")
        ),
    );
    let out = pblab(&["check", "--config", &cfg3, "--out", "mono"], tmp.path());
    assert!(out.status.success());
}

#[test]
fn shipped_configs_parse() {
    // every shipped example config deserializes against the typed schema
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) == Some("json") {
            let raw = std::fs::read_to_string(&path).unwrap();
            let parsed: Result<serde_json::Value, _> = serde_json::from_str(&raw);
            assert!(parsed.is_ok(), "{} does not parse", path.display());
            count += 1;
        }
    }
    assert!(count >= 8);
}
