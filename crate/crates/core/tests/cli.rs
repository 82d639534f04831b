use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_finjet"))
}

fn scenario(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const EUCLID2: &str = r#"{"model": {"kind": "riemannian", "dim": 2, "metric": [["1","0"],["0","1"]]}}"#;

const EUCLID3: &str = r#"{
  "model": {"kind": "riemannian", "dim": 3, "metric": [["1","0","0"],["0","1","0"],["0","0","1"]]},
  "symbols": {"p": {"components": [["1 + x1^2","x2","0.5"],["x2","2 + x3","x1*x3"],["0.5","x1*x3","3 - x2^2"]], "weight": 0.3}},
  "weights": [{"lambda": 0, "mu": 1}],
  "samples": {"seed": 4, "count": 5, "box": [[0.4, 0.9], [-0.6, 0.6], [0.3, 0.8]]}
}"#;

const RANDERS: &str = r#"{
  "model": {"kind": "randers", "dim": 2, "metric": [["1","0"],["0","1"]], "oneform": ["0.5","0"]},
  "diffeos": {"id": {"corpus": "identity"}},
  "symbols": {"p": {"components": [["1 + 0.2*x1^2","0.1*x1*x2"],["0.1*x1*x2","2 - 0.3*x2"]], "weight": 0.3}},
  "params": {"cocycle_pairs": [["id", "id"]]},
  "samples": {"seed": 9, "count": 4}
}"#;

#[test]
fn eval_metric_of_euclidean_model_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), "e.json", EUCLID2);
    let o = run(&["eval", "--config", cfg.to_str().unwrap(), "--point", "x=0.3,0.1;y=0.2,-1", "--quantity", "g"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "1 0\n0 1\n");
    let o = run(&["eval", "--config", cfg.to_str().unwrap(), "--point", "x=0,0;y=1,0", "--quantity", "sasaki"]);
    assert_eq!(stdout(&o), "1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n");
}

#[test]
fn eval_betas_at_the_kinetic_pair() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), "e.json", EUCLID3);
    let o = run(&["eval", "--config", cfg.to_str().unwrap(), "--quantity", "betas"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "1 0 0 0 0 0\n");
}

#[test]
fn eval_prints_seventeen_digits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), "r.json", RANDERS);
    let o = run(&["eval", "--config", cfg.to_str().unwrap(), "--point", "x=0,0;y=0.3,0.4", "--quantity", "F"]);
    // |y| + 0.5 y1 = 0.5 + 0.15
    assert_eq!(stdout(&o).trim().parse::<f64>().unwrap(), 0.65);
    let o = run(&["eval", "--config", cfg.to_str().unwrap(), "--point", "x=0,0;y=1,1", "--quantity", "omega"]);
    let first = stdout(&o).split_whitespace().next().unwrap().to_string();
    assert_eq!(first.trim_start_matches('-').replace('.', "").trim_start_matches('0').len(), 17, "{first}");
}

#[test]
fn eval_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), "e.json", EUCLID2);
    let c = cfg.to_str().unwrap();
    assert_eq!(run(&["eval", "--config", c, "--point", "x=0,0;y=1,0", "--quantity", "torsion"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "--config", "/nonexistent.json", "--quantity", "g"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "--config", c, "--point", "x=0,0;y=0,0", "--quantity", "g"]).status.code(), Some(3));
    let bad = scenario(dir.path(), "bad.json", r#"{"model": {"kind": "riemannian", "dim": 1, "metric": [["log(x1)"]]}}"#);
    let o = run(&["eval", "--config", bad.to_str().unwrap(), "--point", "x=-1;y=1", "--quantity", "g"]);
    assert_eq!(o.status.code(), Some(3));
    let broken = scenario(dir.path(), "broken.json", "{ not json");
    assert_eq!(run(&["eval", "--config", broken.to_str().unwrap(), "--quantity", "betas"]).status.code(), Some(2));
}

fn verify(cfg: &Path, suites: &str, extra: &[&str]) -> (Option<i32>, Value) {
    let out = cfg.with_extension(format!("{}.report.json", suites.replace(',', "_")));
    let mut args = vec!["verify", "--config", cfg.to_str().unwrap(), "--suite", suites, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = run(&args);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    (o.status.code(), report)
}

#[test]
fn sasaki_curvature_record() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), "e3.json", EUCLID3);
    let (code, r) = verify(&cfg, "sasaki-curvature", &[]);
    assert_eq!(code, Some(0));
    assert_eq!(r["schema"], "finjet-report/1");
    let checks = r["checks"].as_array().unwrap();
    let rec = checks.iter().find(|c| c["check"].as_str().unwrap().contains("= -2")).unwrap();
    assert!(rec["max_residual"].as_f64().unwrap() <= 1e-6);
    assert_eq!(rec["pass"], true);
    assert_eq!(rec["samples"], 5);
    assert!(!rec["anchor"].as_str().unwrap().is_empty());
}

#[test]
fn identity_cocycle_and_gated_suite() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), "r.json", RANDERS);
    let (code, r) = verify(&cfg, "cocycle,conformal-vanishing", &[]);
    assert_eq!(code, Some(0));
    let checks = r["checks"].as_array().unwrap();
    for c in checks.iter().filter(|c| c["suite"] == "cocycle") {
        assert_eq!(c["max_residual"].as_f64().unwrap(), 0.0);
    }
    let gated = checks.iter().find(|c| c["suite"] == "conformal-vanishing").unwrap();
    assert_eq!(gated["status"], "not-applicable");
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), "r.json", RANDERS);
    let (code, r) = verify(&cfg, "euler-identities", &["--tol", "0"]);
    assert_eq!(code, Some(1));
    assert!(r["checks"].as_array().unwrap().iter().any(|c| c["pass"] == false));
}

#[test]
fn unknown_suite_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), "r.json", RANDERS);
    let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--suite", "everything"]);
    assert_eq!(o.status.code(), Some(2));
}

fn strip_timestamp(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timestamp");
    v
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), "r.json", RANDERS);
    let suites = "homogeneity,cocycle,kin-formula";
    let a = run(&["verify", "--config", cfg.to_str().unwrap(), "--suite", suites, "--seed", "17"]);
    let b = run(&["verify", "--config", cfg.to_str().unwrap(), "--suite", suites, "--seed", "17"]);
    let (ta, tb) = (stdout(&a), stdout(&b));
    let drop_ts = |s: &str| s.lines().filter(|l| !l.contains("\"timestamp\"")).collect::<Vec<_>>().join("\n");
    assert_eq!(drop_ts(&ta), drop_ts(&tb));
    let va: Value = serde_json::from_str(&ta).unwrap();
    assert_eq!(va["seed"], 17);
    let c = run(&["verify", "--config", cfg.to_str().unwrap(), "--suite", suites, "--seed", "18"]);
    assert_ne!(strip_timestamp(va), strip_timestamp(serde_json::from_str(&stdout(&c)).unwrap()));
}

#[test]
fn diff_identical_improved_regressed_and_mismatched() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), "r.json", RANDERS);
    let base = dir.path().join("a.json");
    run(&["verify", "--config", cfg.to_str().unwrap(), "--suite", "homogeneity", "--out", base.to_str().unwrap()]);
    let b = base.to_str().unwrap();

    let o = run(&["diff", b, b]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "");

    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&base).unwrap()).unwrap();
    let set = |v: &mut Value, r: f64| {
        v["checks"][0]["max_residual"] = serde_json::json!(r);
    };
    set(&mut v, 1e-12);
    let worse = dir.path().join("worse.json");
    std::fs::write(&worse, serde_json::to_string(&v).unwrap()).unwrap();
    set(&mut v, 1e-11);
    let worst = dir.path().join("worst.json");
    std::fs::write(&worst, serde_json::to_string(&v).unwrap()).unwrap();

    // 1e-12 -> 1e-11 is a tenfold regression
    let o = run(&["diff", worse.to_str().unwrap(), worst.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("REGRESSED"));
    let o = run(&["diff", worst.to_str().unwrap(), worse.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("improved"));

    v["scenario_digest"] = "0".repeat(64).into();
    let other = dir.path().join("other.json");
    std::fs::write(&other, serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(run(&["diff", b, other.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn shipped_scenarios_load() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    for entry in std::fs::read_dir(root).unwrap() {
        let p = entry.unwrap().path();
        finjet::cli::load_path(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
}
