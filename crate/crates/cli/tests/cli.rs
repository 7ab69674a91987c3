use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mcf(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcf"))
        .args(args)
        .current_dir(dir)
        .env_remove("MCF_OUTPUT_ROOT")
        .output()
        .expect("binary runs")
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn decompose_identity() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("id.csv"), "1,0,0,0\n0,1,0,0\n0,0,1,0\n0,0,0,1\n").unwrap();
    let out = mcf(dir.path(), &["decompose", "--input", "id.csv", "--n", "2", "--m", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["signature"], serde_json::json!([2, 2]));
    for key in ["d1", "d2"] {
        for d in v[key].as_array().unwrap() {
            assert!((d.as_f64().unwrap() - 1.0).abs() < 1e-14);
        }
    }
    assert!(v["round_trip_error"].as_f64().unwrap() < 1e-14);
}

#[test]
fn decompose_infers_signature_of_a_boost() {
    let dir = tempfile::tempdir().unwrap();
    let (c, s) = (0.7f64.cosh(), 0.7f64.sinh());
    fs::write(dir.path().join("b.csv"), format!("1,0,0\n0,{c},{s}\n0,{s},{c}\n")).unwrap();
    let out = mcf(dir.path(), &["decompose", "--input", "b.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["signature"], serde_json::json!([2, 1]));
    let d3 = v["d3"][0].as_f64().unwrap();
    assert!((d3.abs() - s).abs() < 1e-12);
}

#[test]
fn decompose_rejects_a_non_member() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("m.csv"), "2,0\n0,1\n").unwrap();
    let out = mcf(dir.path(), &["decompose", "--input", "m.csv", "--n", "1", "--m", "1"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn radial_linear_profile_is_stationary() {
    let dir = tempfile::tempdir().unwrap();
    let out = mcf(dir.path(), &["radial", "--profile", "linear", "--a", "1.0", "--steps", "100", "--out", "r"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("r/radial_monitor.csv"));
    assert_eq!(rows.len(), 101);
    for row in &rows {
        assert!(row[3].parse::<f64>().unwrap() <= 1e-10);
    }
    let first = csv_rows(&dir.path().join("r/profile_initial.csv"));
    let last = csv_rows(&dir.path().join("r/profile_final.csv"));
    for (a, b) in first.iter().zip(&last) {
        let (ha, hb) = (a[1].parse::<f64>().unwrap(), b[1].parse::<f64>().unwrap());
        assert!((ha - hb).abs() <= 1e-10);
    }
}

#[test]
fn small_sine_flow_monitor() {
    let dir = tempfile::tempdir().unwrap();
    let out = mcf(
        dir.path(),
        &["flow", "--ambient", "flat", "--init", "sine", "--eps", "1e-3", "--steps", "200", "--out", "f"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = dir.path().join("f");
    let rows = csv_rows(&run.join("monitor.csv"));
    assert_eq!(rows.len(), 200);
    let sup_v: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(sup_v.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    for f in ["bound_shape.json", "manifest.json", "config.toml"] {
        assert!(run.join(f).exists(), "{f}");
    }
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(run.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["summary"]["steps"], 200);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "[flow]\nmax_stpes = 3\n").unwrap();
    let out = mcf(dir.path(), &["flow", "--config", "bad.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let out = mcf(dir.path(), &["flow", "--config", "missing.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let out = mcf(dir.path(), &["flow", "--ambient", "flat", "--dt", "0", "--steps", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = mcf(dir.path(), &["flow", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unresolvable_step_halts_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("h.toml"),
        "output = \"h\"\n[init]\nfamily = \"sine\"\namplitude = [0.3]\n[flow]\ndt_policy = \"fixed\"\ndt = 50.0\nmax_steps = 3\nmax_retries = 1\n",
    )
    .unwrap();
    let out = mcf(dir.path(), &["flow", "--config", "h.toml"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = fs::read_to_string(dir.path().join("h/manifest.json")).unwrap();
    assert!(manifest.contains("\"status\": \"") && !manifest.contains("\"status\": \"ok\""));
    assert!(dir.path().join("h/monitor.csv").exists());
}

#[test]
fn output_root_env_prefixes_relative_dirs() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_mcf"))
        .args(["radial", "--steps", "3", "--out", "r"])
        .current_dir(dir.path())
        .env("MCF_OUTPUT_ROOT", "root")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("root/r/radial_monitor.csv").exists());
}

#[test]
fn tcc_reports_zero_on_flat_space() {
    let dir = tempfile::tempdir().unwrap();
    let out = mcf(dir.path(), &["tcc", "--ambient", "flat", "--n", "2", "--m", "2", "--samples", "200", "--out", "t"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["k_est"].as_f64().unwrap().abs() <= 1e-12);
    assert!(dir.path().join("t/tcc.json").exists());
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for entry in fs::read_dir(root).unwrap() {
        let path = entry.unwrap().path();
        let cfg = mcf_cli::config::RunConfig::load(&path).unwrap();
        cfg.validate().unwrap();
    }
}

#[test]
fn single_threaded_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec!["--threads", "1", "flow", "--init", "sine", "--eps", "0.2", "--steps", "20", "--nodes", "16", "--snapshot-every", "10", "--out", out]
    };
    assert!(mcf(dir.path(), &args("a")).status.success());
    assert!(mcf(dir.path(), &args("b")).status.success());
    for f in ["monitor.csv", "bound_shape.json", "snapshot_000010.csv", "snapshot_000020.csv"] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}
