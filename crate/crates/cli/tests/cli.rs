use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const PLUS: &str = r#"{"dim":2,"re":[[0.5,0.5],[0.5,0.5]],"im":[[0,0],[0,0]]}"#;
const ZERO: &str = r#"{"dim":2,"re":[[1,0],[0,0]],"im":[[0,0],[0,0]]}"#;
const MIXED: &str = r#"{"dim":2,"re":[[0.7,0.2],[0.2,0.3]],"im":[[0,0.1],[-0.1,0]]}"#;
const DIAG: &str = r#"{"dim":2,"re":[[0.4,0],[0,0.6]],"im":[[0,0],[0,0]]}"#;
const CQ: &str = r#"{"p":[0.4,0.3,0.2,0.1],"blocks":[
 {"dim":2,"re":[[1,0],[0,0]],"im":[[0,0],[0,0]]},
 {"dim":2,"re":[[0.5,0.5],[0.5,0.5]],"im":[[0,0],[0,0]]},
 {"dim":2,"re":[[0,0],[0,1]],"im":[[0,0],[0,0]]},
 {"dim":2,"re":[[0.5,0],[0,0.5]],"im":[[0,0],[0,0]]}]}"#;

struct Files {
    dir: TempDir,
}

impl Files {
    fn new() -> Self {
        let f = Self { dir: tempfile::tempdir().unwrap() };
        for (name, body) in [("plus", PLUS), ("zero", ZERO), ("mixed", MIXED), ("diag", DIAG), ("cq", CQ)] {
            std::fs::write(f.path(&format!("{name}.json")), body).unwrap();
        }
        f
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }
}

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_smollision"));
    cmd.args(args).env_remove("SMOLLISION_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn divergence(f: &Files, kind: &str, eps: &str, rho: &str, sigma: &str, unit: &str) -> Output {
    run(&["divergence", "--kind", kind, "--eps", eps, "--state", &f.arg(rho), "--state", &f.arg(sigma), unit])
}

#[test]
fn smoothed_max_divergence_of_plus_against_zero() {
    let f = Files::new();
    let o = divergence(&f, "dmax-smooth-measured", "0.6", "plus.json", "zero.json", "--bits");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    // the hockey-stick divergence drops to 0.6 at threshold 2.4
    assert!((v["value_bits"].as_f64().unwrap() - 2.4f64.log2()).abs() < 1e-9);
    assert_eq!(v["value"], v["value_bits"]);
    assert_eq!(v["unit"], "bits");
}

#[test]
fn bits_and_nats_differ_by_ln2() {
    let f = Files::new();
    for kind in ["dmax", "d2-measured", "d2-smooth-measured", "dh", "umegaki"] {
        let b = json(&divergence(&f, kind, "0.1", "mixed.json", "diag.json", "--bits"));
        let n = json(&divergence(&f, kind, "0.1", "mixed.json", "diag.json", "--nats"));
        let (vb, vn) = (b["value"].as_f64().unwrap(), n["value"].as_f64().unwrap());
        assert!((vb * std::f64::consts::LN_2 - vn).abs() <= 2e-12 * vn.abs().max(1.0), "{kind}: {vb} {vn}");
        assert_eq!(b["value_nats"], n["value_nats"]);
    }
}

#[test]
fn infinite_values_are_strings() {
    let f = Files::new();
    let o = divergence(&f, "d2-smooth-measured", "0.1", "plus.json", "zero.json", "--bits");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["value"], "inf");
}

#[test]
fn exported_program_solves_to_the_same_value() {
    let f = Files::new();
    let out = f.arg("p.dat-s");
    let o = run(&[
        "divergence", "--kind", "d2-smooth-measured", "--eps", "0.1", "--state", &f.arg("mixed.json"), "--state",
        &f.arg("diag.json"), "--export-sdpa", &out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let nats = json(&o)["value_nats"].as_f64().unwrap();
    let s = run(&["sdp-solve", &out, "--tol", "1e-9"]);
    assert_eq!(s.status.code(), Some(0), "{}", stderr(&s));
    let v = json(&s);
    assert_eq!(v["status"], "optimal");
    assert!((v["value"].as_f64().unwrap().ln() - nats).abs() < 1e-6);
}

#[test]
fn entropy_variants() {
    let f = Files::new();
    let up = json(&run(&["entropy", "--kind", "dmax-smooth-measured", "--variant", "up", "--eps", "0.1", "--state", &f.arg("cq.json")]));
    let down = json(&run(&["entropy", "--kind", "dmax-smooth-measured", "--variant", "down", "--eps", "0.1", "--state", &f.arg("cq.json")]));
    // optimizing the reference can only increase the entropy
    assert!(up["value"].as_f64().unwrap() >= down["value"].as_f64().unwrap() - 1e-6);
    let o = run(&["entropy", "--kind", "sandwiched", "--state", &f.arg("cq.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--alpha"));
}

#[test]
fn pa_sim_emits_versioned_csv_with_every_bound() {
    let f = Files::new();
    let args = ["pa-sim", "--state", &f.arg("cq.json"), "--family", "toeplitz", "--k", "1", "--eps", "0.1"];
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# smollision-v1"));
    assert!(lines.next().unwrap().starts_with("name,passed,lhs,rhs,slack"));
    for name in ["leftover_hash_smoothed", "converse_purified", "converse_measured", "achievability_collision", "sandwich_consistency", "renyi_achievability_measured"] {
        assert!(text.contains(&format!("\n{name},true,")), "missing {name}");
    }
    assert_eq!(run(&args).stdout, o.stdout, "output must be byte-identical across runs");
}

#[test]
fn pa_sim_rejects_toeplitz_on_odd_alphabet() {
    let f = Files::new();
    std::fs::write(f.path("cq3.json"), r#"{"p":[0.5,0.25,0.25],"blocks":[{"dim":1,"re":[[1]],"im":[[0]]},{"dim":1,"re":[[1]],"im":[[0]]},{"dim":1,"re":[[1]],"im":[[0]]}]}"#).unwrap();
    let o = run(&["pa-sim", "--state", &f.arg("cq3.json"), "--family", "toeplitz"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["pa-sim", "--state", &f.arg("cq3.json"), "--family", "exhaustive", "--eps", "0", "0.2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn verify_default_grid_passes() {
    let f = Files::new();
    let csv = f.arg("reports.csv");
    let o = run(&["verify", "--suite", "all", "--instances", "100", "--seed", "7", "--out", &csv]);
    assert_eq!(o.status.code(), Some(0), "{}\n{}", stdout(&o), stderr(&o));
    let v = json(&o);
    assert_eq!(v["fail"], 0);
    assert_eq!(v["seed"], 7);
    assert!(stderr(&o).contains("seed 7"));
    let body = std::fs::read_to_string(&csv).unwrap();
    assert!(body.starts_with("# smollision-v1\n"));
    assert_eq!(body.lines().count(), 2 + v["pass"].as_u64().unwrap() as usize);
}

#[test]
fn verify_is_deterministic_across_thread_counts() {
    let f = Files::new();
    let a = f.arg("a.json");
    let b = f.arg("b.json");
    let args = |out: &str| ["verify", "--suite", "cq", "--instances", "4", "--seed", "3", "--out", out].map(String::from);
    let oa = run_env(&args(&a).iter().map(String::as_str).collect::<Vec<_>>(), &[("SMOLLISION_THREADS", "1")]);
    let ob = run_env(&args(&b).iter().map(String::as_str).collect::<Vec<_>>(), &[("SMOLLISION_THREADS", "3")]);
    assert_eq!(oa.status.code(), Some(0));
    assert_eq!(oa.stdout, ob.stdout);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let bad = run_env(&["verify", "--instances", "1"], &[("SMOLLISION_THREADS", "many")]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn verify_reads_a_config_file() {
    let f = Files::new();
    std::fs::write(f.path("cfg.json"), r#"{"grid": {"suite": "decoupling", "instances": 2}, "seed": 11}"#).unwrap();
    let o = run(&["verify", "--config", &f.arg("cfg.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(json(&o)["seed"], 11);
    assert_eq!(json(&o)["pass"], 8);
    std::fs::write(f.path("cfg.json"), r#"{"grid": {"suite": "decoupling"}, "seeds": 11}"#).unwrap();
    assert_eq!(run(&["verify", "--config", &f.arg("cfg.json")]).status.code(), Some(1));
}

#[test]
fn iid_trend_runs_to_six_copies() {
    let o = run(&["iid-trend", "--n", "6", "--eps", "0.1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("# smollision-v1\nn,hmin_bits,reference_bits,residual_bits\n"));
    assert_eq!(text.lines().count(), 8);
    assert_eq!(run(&["iid-trend", "--n", "7"]).status.code(), Some(1));
}

#[test]
fn hash_audit_dumps_members() {
    let o = run(&["hash-audit", "--family", "toeplitz", "--m", "3", "--k", "2", "--dump"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["passes"], true);
    assert_eq!(v["target"], "1/4");
    assert_eq!(v["dump"].as_array().unwrap().len(), 16);
    assert_eq!(v["dump"][0]["table"].as_array().unwrap().len(), 8);
}

#[test]
fn decouple_sim_on_a_pure_qubit() {
    let f = Files::new();
    let o = run(&["decouple-sim", "--state", &f.arg("zero.json"), "--split", "2,1", "--ensemble", "clifford1q"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("\ndecoupling_smoothed,true,"));
    assert!(text.contains("\ndecoupling_bures,true,5.00000000000e-1,5.00000000000e-1,"));
}

fn assert_location(path: &Path, o: &Output, line: usize) {
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(o);
    assert!(err.contains(&format!("{}:{line}:", path.display())), "{err}");
}

#[test]
fn malformed_states_report_their_location() {
    let f = Files::new();
    std::fs::write(f.path("bad.json"), "{\"dim\": 2,\n \"re\": [[1,0],[0,0]],\n \"im\": oops}").unwrap();
    let o = divergence(&f, "dmax", "0", "bad.json", "diag.json", "--bits");
    assert_location(&f.path("bad.json"), &o, 3);
    std::fs::write(f.path("neg.json"), "{\"dim\": 2,\n \"re\": [[2,0],[0,-1]], \"im\": [[0,0],[0,0]]}").unwrap();
    let o = divergence(&f, "dmax", "0", "neg.json", "diag.json", "--bits");
    assert_eq!(o.status.code(), Some(1));
    std::fs::write(f.path("cqbad.json"), "{\"p\": [0.5, 0.6],\n \"blocks\": [{\"dim\":1,\"re\":[[1]],\"im\":[[0]]},{\"dim\":1,\"re\":[[1]],\"im\":[[0]]}]}").unwrap();
    let o = run(&["entropy", "--kind", "dmax", "--state", &f.arg("cqbad.json")]);
    assert_location(&f.path("cqbad.json"), &o, 1);
    let o = divergence(&f, "dmax", "0", "missing.json", "diag.json", "--bits");
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["divergence", "--kind", "dmax"]).status.code(), Some(1));
    assert_eq!(run(&["divergence", "--kind", "nope", "--state", "a", "--state", "b"]).status.code(), Some(1));
}

#[test]
fn every_run_prints_seed_and_tolerances() {
    let o = run(&["hash-audit", "--m", "2", "--k", "1", "--seed", "42"]);
    let err = stderr(&o);
    assert!(err.contains("seed 42") && err.contains("solver tol 1e-8") && err.contains("analytic slack 1e-7"), "{err}");
}
