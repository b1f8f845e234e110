use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use carpet_core::HeatTraceModel;
use serde_json::Value;

fn carpet(args: &[&str], out: &Path, cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carpet"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("CARPET_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn summary(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn error_kind(o: &Output) -> String {
    assert_eq!(o.status.code(), Some(2), "stdout: {}", String::from_utf8_lossy(&o.stdout));
    let v: Value = serde_json::from_slice(&o.stderr).expect("stderr is JSON");
    v["error"]["kind"].as_str().unwrap().to_string()
}

#[test]
fn validate_reports_hausdorff_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let v = summary(&carpet(&["validate", "--preset", "MS31"], dir.path(), &dir.path().join("c")));
    assert_eq!(v["valid"], Value::Bool(true));
    let d_h = v["d_h"].as_f64().unwrap();
    assert!((d_h - 20f64.ln() / 3f64.ln()).abs() < 1e-14);
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("carpet/carpet.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["files"][0]["name"], "validation.json");
}

#[test]
fn invalid_carpet_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("lopsided.spec");
    // Not symmetric under reflection.
    std::fs::write(&spec, "dimension = 2\nlength_scale = 3\nmask =\n111\n100\n111\n").unwrap();
    let o = carpet(&["validate", "--spec", spec.to_str().unwrap()], dir.path(), &dir.path().join("c"));
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["valid"], Value::Bool(false));
    assert_eq!(v["conditions"]["symmetry"]["passed"], Value::Bool(false));
}

#[test]
fn oracle_selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let v = summary(&carpet(&["oracle", "selftest"], dir.path(), &dir.path().join("c")));
    assert_eq!(v["passed"], Value::Bool(true));
    assert!(v["tests"].as_array().unwrap().len() >= 5);
}

#[test]
fn spectra_are_byte_identical_and_cached() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["spectrum", "compute", "--preset", "SC31", "--level", "3", "--bc", "dirichlet"];
    let first = summary(&carpet(&args, a.path(), &a.path().join("cache")));
    assert_eq!(first["cached"], Value::Bool(false));
    let count = first["count"].as_u64().unwrap() as usize;
    assert!(count > 0 && count < 512);
    let again = summary(&carpet(&args, a.path(), &a.path().join("cache")));
    assert_eq!(again["cached"], Value::Bool(true));
    summary(&carpet(&args, b.path(), &b.path().join("cache")));
    let read = |d: &Path| std::fs::read(d.join("spectrum/eigenvalues.csv")).unwrap();
    let reference = read(a.path());
    assert_eq!(reference, read(b.path()));
    // Deleting the cache reproduces the same artifacts.
    std::fs::remove_dir_all(a.path().join("cache")).unwrap();
    let fresh = summary(&carpet(&args, a.path(), &a.path().join("cache")));
    assert_eq!(fresh["cached"], Value::Bool(false));
    assert_eq!(reference, read(a.path()));
    let text = String::from_utf8(reference).unwrap();
    assert_eq!(text.lines().count(), count + 1);
    let line = text.lines().nth(1).unwrap();
    // 17 significant digits.
    assert_eq!(line.split(',').nth(1).unwrap().split('e').next().unwrap().len(), 18);
}

#[test]
fn trace_stage_emits_weyl_ratio_and_model() {
    let dir = tempfile::tempdir().unwrap();
    let v = summary(&carpet(&["trace", "analyze", "--preset", "SC31", "--level", "3"], dir.path(), &dir.path().join("c")));
    let d_s = v["fit"]["d_s"].as_f64().unwrap();
    assert!(d_s > 1.5 && d_s < 2.0, "{d_s}");
    let trace = dir.path().join("trace");
    for f in ["heat_trace.csv", "weyl_ratio.csv", "fourier.csv", "plot_weyl_ratio.py", "trace.manifest.json"] {
        assert!(trace.join(f).is_file(), "{f}");
    }
    let csv = std::fs::read_to_string(trace.join("weyl_ratio.csv")).unwrap();
    assert!(csv.starts_with("s,count,weyl_ratio\n"));
    let model = HeatTraceModel::from_json(&std::fs::read_to_string(trace.join("model.json")).unwrap()).unwrap();
    assert_eq!(model.d_s, d_s);
    assert!(model.g00() > 0.0);
}

#[test]
fn interval_casimir_value() {
    let dir = tempfile::tempdir().unwrap();
    let v = summary(&carpet(&["zeta", "eval", "--interval", "--s=-0.5", "--s", "2,0"], dir.path(), &dir.path().join("c")));
    let z = v["values"][0]["value"]["re"].as_f64().unwrap();
    assert!((z + PI / 12.0).abs() < 1e-4, "{z}");
    let z2 = v["values"][1]["value"]["re"].as_f64().unwrap();
    assert!((z2 - 1.0 / 90.0).abs() < 1e-10, "{z2}");
    let c = summary(&carpet(&["zeta", "casimir", "--interval"], dir.path(), &dir.path().join("c")));
    assert!((c["casimir"]["energy"].as_f64().unwrap() + PI / 24.0).abs() < 1e-4);
}

#[test]
fn blackbody_from_euclidean_model() {
    let dir = tempfile::tempdir().unwrap();
    let v = summary(&carpet(&["thermo", "blackbody", "--euclid", "3", "--beta", "2"], dir.path(), &dir.path().join("c")));
    let e = v["blackbody"]["energy_density"].as_f64().unwrap();
    assert!((e / (PI * PI / (30.0 * 16.0)) - 1.0).abs() < 1e-12);
    let p = v["blackbody"]["pressure"].as_f64().unwrap();
    assert_eq!(p, e / 3.0);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "preset = \"MS42\"\nlevel = 1\nbc = \"neumann\"\n\n[solver]\nadjacency = \"face\"\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let v = summary(&carpet(&["graph", "build", "--config", cfg], dir.path(), &dir.path().join("c")));
    assert_eq!(v["vertices"], 32);
    let v = summary(&carpet(&["graph", "build", "--config", cfg, "--level", "2"], dir.path(), &dir.path().join("c")));
    assert_eq!(v["vertices"], 32 * 32);
    let edges = std::fs::read_to_string(dir.path().join("graph/edges.txt")).unwrap();
    assert!(edges.starts_with("# {"));
    assert_eq!(edges.lines().count() - 1, v["edges"].as_u64().unwrap() as usize);
}

#[test]
fn errors_are_machine_readable() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c");
    assert_eq!(error_kind(&carpet(&["info", "--preset", "XX"], dir.path(), &c)), "invalid_argument");
    let bad = dir.path().join("bad.spec");
    std::fs::write(&bad, "dimension = 2\nlength_scale = 3\nmask =\n11\n").unwrap();
    let kind = error_kind(&carpet(&["info", "--spec", bad.to_str().unwrap()], dir.path(), &c));
    assert!(kind == "malformed_spec" || kind == "parse", "{kind}");
    let o = carpet(&["spectrum", "compute", "--preset", "SC31", "--level", "2", "--bc", "periodic"], dir.path(), &c);
    assert_eq!(error_kind(&o), "invalid_argument");
    let bad_cfg = dir.path().join("bad.toml");
    std::fs::write(&bad_cfg, "colour = 3\n").unwrap();
    let o = carpet(&["info", "--config", bad_cfg.to_str().unwrap()], dir.path(), &c);
    assert_eq!(error_kind(&o), "invalid_argument");
    // Neumann zero mode without a shift.
    let o = carpet(&["zeta", "eval", "--preset", "SC31", "--level", "3", "--s", "2"], dir.path(), &c);
    assert_eq!(error_kind(&o), "invalid_argument");
}
