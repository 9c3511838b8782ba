use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lyapsize::dynamics::SystemSpec;
use lyapsize::expansivity::{replay_witness, ExpansivityReport, Verdict};
use lyapsize_cli::LyapSummary;
use tempfile::TempDir;

fn lyapsize(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lyapsize")).current_dir(dir).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn size_of_a_singleton_is_zero_plus_tail() {
    let d = TempDir::new().unwrap();
    write(d.path(), "one.csv", "0.25,0.75\n");
    write(d.path(), "cfg.json", r#"{"mode":"size","mu":{"depth":8},"io":{"inputs":["one.csv"]}}"#);
    let o = lyapsize(d.path(), &["size", "--config", "cfg.json"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let (v, tail) = out.trim().split_once(',').unwrap();
    assert_eq!(v, "0");
    // unit square, diameter sqrt(2), depth 8
    assert_eq!(tail.parse::<f64>().unwrap(), 2f64.sqrt() / 256.0);
}

#[test]
fn hausdorff_subcommand_reads_two_files() {
    let d = TempDir::new().unwrap();
    write(d.path(), "a.csv", "0\n1\n");
    write(d.path(), "b.csv", "0\n0.5\n");
    let o = lyapsize(d.path(), &["hausdorff", "a.csv", "b.csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0.5,0\n");
}

#[test]
fn node_audit_writes_decreasing_series_and_exits_clean() {
    let d = TempDir::new().unwrap();
    write(
        d.path(),
        "node.json",
        r#"{"mode":"lyap-asymptotic","system":{"id":"linear_node","params":[-1,-2]},
            "neighborhood":{"r":0.9},"integrate":{"h":0.01,"T_max":20},
            "sampling":{"starts":[[0.5,0.4]],"count":2},"seed":11}"#,
    );
    let o = lyapsize(d.path(), &["lyap", "--config", "node.json", "--out-dir", "out", "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "");
    let csv = fs::read_to_string(d.path().join("out/lyap_000.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,V,mu_plus,mu_minus"));
    let v: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(v.len() > 100);
    // the tail near p is below the audit floor; the first stretch must strictly decrease
    assert!(v[..100].windows(2).all(|w| w[1] < w[0]));
    let summary: LyapSummary =
        serde_json::from_str(&fs::read_to_string(d.path().join("out/summary.json")).unwrap()).unwrap();
    assert_eq!(summary.violations, 0);
    assert_eq!(summary.max_violation, None);
    assert_eq!(summary.depth, 64);
    let raw = fs::read_to_string(d.path().join("out/summary.json")).unwrap();
    assert!(raw.contains("\"violations\":0"));
}

#[test]
fn saddle_audit_reports_violations_with_exit_two() {
    let d = TempDir::new().unwrap();
    write(
        d.path(),
        "sad.json",
        r#"{"mode":"lyap-singularity","system":{"id":"planar_saddle"},"neighborhood":{"r":1.0,"rho":0.5},
            "audit":{"horizon":40},"sampling":{"starts":[[0.2,0.4]]}}"#,
    );
    let o = lyapsize(d.path(), &["lyap", "--config", "sad.json", "--out-dir", "out"]);
    let summary: LyapSummary =
        serde_json::from_str(&fs::read_to_string(d.path().join("out/summary.json")).unwrap()).unwrap();
    let expected = if summary.violations > 0 { 2 } else { 0 };
    assert_eq!(o.status.code(), Some(expected));
    let csv = fs::read_to_string(d.path().join("out/lyap_000.csv")).unwrap();
    let row = csv.lines().nth(1).unwrap();
    assert_eq!(row.split(',').filter(|c| !c.is_empty()).count(), 4, "mu columns filled: {row}");
}

#[test]
fn rotation_is_a_counterexample_with_a_replayable_witness() {
    let d = TempDir::new().unwrap();
    write(d.path(), "cfg.json", r#"{"mode":"expansive","system":{"id":"rotation","params":[0.7]},"sampling":{"count":3}}"#);
    let o = lyapsize(d.path(), &["expansive", "--config", "cfg.json", "--out-dir", "out", "--horizon", "500"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stdout(&o), "counterexample\n");
    let text = fs::read_to_string(d.path().join("out/expansive.json")).unwrap();
    let report: ExpansivityReport<f64> = serde_json::from_str(&text).unwrap();
    assert_eq!(report.verdict, Verdict::Counterexample);
    assert_eq!(serde_json::to_string_pretty(&report).unwrap() + "\n", text);
    let rot = SystemSpec::rotation(0.7).unwrap();
    assert!(replay_witness(&rot, report.delta, report.horizon, report.witness.as_ref().unwrap()).unwrap());
    let csv = fs::read_to_string(d.path().join("out/first_separation.csv")).unwrap();
    assert_eq!(csv, "index,n\n0,\n1,\n2,\n");
}

#[test]
fn cat_map_pairs_and_chains_from_files_separate() {
    let d = TempDir::new().unwrap();
    write(d.path(), "pairs.csv", "0.1,0.1,0.101,0.1\n0.5,0.5,0.5,0.502\n");
    write(d.path(), "chains.csv", "0,0.2,0.2\n0,0.201,0.2\n1,0.7,0.3\n1,0.7,0.301\n");
    let o = lyapsize(d.path(), &["expansive", "--system", "cat_map", "--samples", "pairs.csv", "--out-dir", "p"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = lyapsize(d.path(), &["cw-expansive", "--system", "cat_map", "--samples", "chains.csv", "--out-dir", "c"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: ExpansivityReport<f64> =
        serde_json::from_str(&fs::read_to_string(d.path().join("c/expansive.json")).unwrap()).unwrap();
    assert_eq!(report.first_separation.len(), 2);
    assert!(report.first_separation.iter().all(|n| n.is_some_and(|n| n.abs() <= 8)));
}

#[test]
fn audit_subcommand_flags_flat_steps() {
    let d = TempDir::new().unwrap();
    write(d.path(), "down.csv", "0,3\n1,2\n2,1\n");
    write(d.path(), "flat.csv", "0,1\n1,1\n");
    let o = lyapsize(d.path(), &["audit", "down.csv", "--tol", "0", "--out-dir", "a"]);
    assert_eq!(o.status.code(), Some(0));
    let o = lyapsize(d.path(), &["audit", "flat.csv", "--out-dir", "b"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(fs::read_to_string(d.path().join("b/audit.json")).unwrap(), "{\"violations\":[0],\"tol\":1e-9}\n");
}

#[test]
fn bad_configs_and_missing_files_exit_one_with_a_diagnostic() {
    let d = TempDir::new().unwrap();
    write(d.path(), "typo.json", r#"{"mode":"size","io":{"inputs":["x.csv"]},"mu":{"detph":4}}"#);
    let o = lyapsize(d.path(), &["size", "--config", "typo.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("detph"));

    write(d.path(), "missing.json", r#"{"mode":"size","io":{"inputs":["nope.csv"]}}"#);
    let o = lyapsize(d.path(), &["size", "--config", "missing.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.csv"));

    let o = lyapsize(d.path(), &["lyap", "--config", "typo.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn identical_runs_write_identical_bytes() {
    let d = TempDir::new().unwrap();
    write(
        d.path(),
        "cfg.json",
        r#"{"mode":"cw-expansive","system":{"id":"cat_map"},"sampling":{"count":5,"offset_min":0.001,"offset_max":0.001},"seed":5}"#,
    );
    for out in ["r1", "r2"] {
        let o = lyapsize(d.path(), &["cw-expansive", "--config", "cfg.json", "--out-dir", out]);
        assert_eq!(o.status.code(), Some(0));
    }
    for f in ["expansive.json", "first_separation.csv"] {
        assert_eq!(fs::read(d.path().join("r1").join(f)).unwrap(), fs::read(d.path().join("r2").join(f)).unwrap());
    }
    // a different seed draws different arcs
    let o = lyapsize(d.path(), &["cw-expansive", "--config", "cfg.json", "--out-dir", "r3", "--seed", "6"]);
    assert_eq!(o.status.code(), Some(0));
    assert_ne!(
        fs::read(d.path().join("r1/expansive.json")).unwrap(),
        fs::read(d.path().join("r3/expansive.json")).unwrap()
    );
}
