use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ofbm::experiment::{ExperimentConfig, Preset};

fn ofbm(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ofbm"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn json_stdout(o: &Output) -> serde_json::Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("summary is JSON")
}

fn error_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stderr).expect("error is JSON")
}

fn small_config(dir: &Path, replicates: usize) -> String {
    let mut c = Preset::Fig2.config();
    c.len = 1 << 12;
    c.replicates = replicates;
    c.out_dir = "mc".into();
    let f = dir.join("small.toml");
    fs::write(&f, c.to_toml()).unwrap();
    f.to_string_lossy().into_owned()
}

#[test]
fn synth_is_deterministic_per_seed() {
    let d = tempfile::tempdir().unwrap();
    let cfg = small_config(d.path(), 1);
    for out in ["a", "b"] {
        json_stdout(&ofbm(&["synth", "--config", &cfg, "--seed", "9", "--out", out], d.path()));
    }
    json_stdout(&ofbm(&["synth", "--config", &cfg, "--seed", "10", "--out", "c"], d.path()));
    let read = |p: &str| fs::read(d.path().join(p).join("path.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));
    let meta = fs::read_to_string(d.path().join("a/path.csv.json")).unwrap();
    assert!(meta.contains("\"seed\": 9"));
}

#[test]
fn binary_and_csv_paths_analyze_identically() {
    let d = tempfile::tempdir().unwrap();
    let cfg = small_config(d.path(), 1);
    json_stdout(&ofbm(&["synth", "--config", &cfg, "--out", "t"], d.path()));
    json_stdout(&ofbm(&["synth", "--config", &cfg, "--out", "t", "--binary"], d.path()));
    let a = json_stdout(&ofbm(&["analyze", "t/path.csv", "--out", "ac"], d.path()));
    let b = json_stdout(&ofbm(&["analyze", "t/path.bin", "--out", "ab"], d.path()));
    assert_eq!(a["entry_slopes"], b["entry_slopes"]);
    let w = |p: &str| fs::read_to_string(d.path().join(p).join("wavelet_variance.json")).unwrap();
    assert_eq!(w("ac"), w("ab"));
}

#[test]
fn analyze_reports_entrywise_slopes_and_coefficients() {
    let d = tempfile::tempdir().unwrap();
    json_stdout(&ofbm(&["synth", "--preset", "fig1", "--out", "p", "--seed", "3"], d.path()));
    let s = json_stdout(&ofbm(&["analyze", "p/path.csv", "--coeffs", "--j-min", "7", "--j-max", "11"], d.path()));
    // Every entry of W is dominated by the larger Hurst eigenvalue.
    for v in s["entry_slopes"].as_array().unwrap() {
        assert!((v.as_f64().unwrap() - 1.7).abs() < 0.4, "{v}");
    }
    let lam1 = s["eigen_slopes"][0].as_f64().unwrap();
    assert!((lam1 - 0.5).abs() < 0.4, "{lam1}");
    let coeffs = fs::read_to_string(d.path().join("p/coeffs.csv")).unwrap();
    assert!(coeffs.starts_with("j,k,component,value\n1,0,1,"));
    let table = fs::read_to_string(d.path().join("p/logscale.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 5);
}

#[test]
fn estimate_prints_a_table_and_writes_json() {
    let d = tempfile::tempdir().unwrap();
    let cfg = small_config(d.path(), 1);
    json_stdout(&ofbm(&["synth", "--config", &cfg, "--out", "p"], d.path()));
    let o = ofbm(&["estimate", "p/path.csv", "--out", "e"], d.path());
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().next().unwrap().contains("theta"));
    let est: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("e/estimates.json")).unwrap()).unwrap();
    let first = &est["scales"][0];
    assert_eq!(first["octave"], 3);
    // The sidecar carries the parameters, so estimates are centered.
    assert!(first["centered"].is_array());
}

#[test]
fn montecarlo_writes_report_tables_and_panels() {
    let d = tempfile::tempdir().unwrap();
    let cfg = small_config(d.path(), 6);
    let s = json_stdout(&ofbm(&["--threads", "2", "montecarlo", "--config", &cfg], d.path()));
    assert_eq!(s["replicates"], 6);
    for f in ["means.csv", "qq.csv", "h1.svg", "h2.svg", "theta.svg", "qq_h2.svg", "report.json"] {
        assert!(d.path().join("mc").join(f).exists(), "{f}");
    }
    let means = fs::read_to_string(d.path().join("mc/means.csv")).unwrap();
    assert!(means.starts_with("octave,count,ok,mean_h1,"));
}

#[test]
fn asymvar_reports_predicted_variances() {
    let d = tempfile::tempdir().unwrap();
    let s = json_stdout(&ofbm(&["asymvar", "--preset", "fig2", "--octaves", "8", "--out", "a"], d.path()));
    let v = &s["octaves"][0];
    assert_eq!(v["octave"], 8);
    assert!(v["var_h"][0].as_f64().unwrap() > 0.0);
    assert!(v["var_theta"].as_f64().unwrap() > 0.0);
    assert!(d.path().join("a/asymvar.json").exists());
}

#[test]
fn reproduce_figure_one_writes_the_log_scale_diagram() {
    let d = tempfile::tempdir().unwrap();
    let s = json_stdout(&ofbm(&["reproduce", "--preset", "fig1", "--out", "f1"], d.path()));
    assert_eq!(s["slopes"]["octaves"], serde_json::json!([3, 12]));
    for f in ["eigen.svg", "entries.svg", "logscale.csv", "slopes.json", "config.toml"] {
        assert!(d.path().join("f1").join(f).exists(), "{f}");
    }
}

#[test]
fn config_subcommand_round_trips() {
    let d = tempfile::tempdir().unwrap();
    let o = ofbm(&["config", "--preset", "n4"], d.path());
    assert!(o.status.success());
    let c = ExperimentConfig::from_toml(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(c, Preset::N4.config());
}

#[test]
fn configuration_errors_exit_with_two() {
    let d = tempfile::tempdir().unwrap();
    let o = ofbm(&["synth", "--preset", "fig9"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["kind"], "InvalidParams");

    fs::write(d.path().join("bad.toml"), "len = \"x\"\n").unwrap();
    let o = ofbm(&["montecarlo", "--config", "bad.toml"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["kind"], "ParseError");

    let o = ofbm(&["analyze", "missing.csv"], d.path());
    assert_eq!(o.status.code(), Some(2));

    let o = ofbm(&["synth", "--seed", "nan"], d.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_errors_exit_with_three() {
    let d = tempfile::tempdir().unwrap();
    let mut csv = String::from("t,x1,x2\n");
    for k in 0..512 {
        csv.push_str(&format!("{k},1,2\n"));
    }
    fs::write(d.path().join("flat.csv"), csv).unwrap();
    let o = ofbm(&["analyze", "flat.csv"], d.path());
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_json(&o)["kind"], "NonPositiveEigenvalue");
}
