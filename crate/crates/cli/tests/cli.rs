use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use renyikw_core::random::{haar_pure, rng_from_seed};
use renyikw_core::{kw_verify, AlphaParam, OptimizerConfig, PureState64};
use serde_json::Value;
use tempfile::TempDir;

fn renyikw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_renyikw")).args(args).env_remove("RENYIKW_SEED").output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const MAXMIXED2: &str = r#"{"dims":[2],"matrix":[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]}"#;
const BELL: &str = r#"{"dims":[2,2],"vector":[[0.7071067811865476,0],[0,0],[0,0],[0.7071067811865476,0]]}"#;

fn without_duration(mut v: Value) -> Value {
    v["manifest"].as_object_mut().unwrap().remove("duration_s");
    v
}

#[test]
fn entropy_of_maximally_mixed_qubit() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "mm.json", MAXMIXED2);
    let v = json(&renyikw(&["entropy", "--alpha", "0.5", "--state", p(&state)]));
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["manifest"]["command"], "entropy");
    assert_eq!(v["manifest"]["input_digests"].as_object().unwrap().len(), 1);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "mm.json", MAXMIXED2);
    let out = renyikw(&["entropy", "--alpha", "-1", "--state", p(&state)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("InvalidAlpha"));

    assert_eq!(renyikw(&["entropy", "--state", p(&state)]).status.code(), Some(64));
    assert_eq!(renyikw(&["no-such-command"]).status.code(), Some(64));
    assert_eq!(renyikw(&["entropy", "--alpha", "0.5", "--state", "/nonexistent.json"]).status.code(), Some(2));

    let skew = write(&dir, "skew.json", r#"{"dims":[2],"matrix":[[[0.5,0],[0.3,0]],[[0,0],[0.5,0]]]}"#);
    let out = renyikw(&["entropy", "--alpha", "0.5", "--state", p(&skew)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("NonHermitian"));
}

#[test]
fn sweep_rows_and_validation() {
    let dir = TempDir::new().unwrap();
    let bell = write(&dir, "bell.json", BELL);
    let out = renyikw(&["sweep", "--grid", "0.5:0.5:0.1", "--quantity", "c-alpha", "--state", p(&bell), "--restarts", "4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "alpha,instance_seed,quantity,value,gap,converged");
    assert_eq!(lines.len(), 2);
    let cols: Vec<&str> = lines[1].split(',').collect();
    assert_eq!((cols[0], cols[1], cols[2]), ("0.5", "", "c_alpha"));
    assert!((cols[3].parse::<f64>().unwrap() - 1.0).abs() < 1e-6);

    let csv = dir.path().join("pure.csv");
    let out = renyikw(&[
        "sweep", "--grid", "0.1:0.9:0.1", "--quantity", "eof-alpha", "--dims", "2,3", "--seed", "5", "--out", p(&csv),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 9);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[1], "5");
        assert!(cols[4].parse::<f64>().unwrap().abs() <= 1e-6, "{row}");
    }
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("pure.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "sweep");

    assert_eq!(renyikw(&["sweep", "--grid", "0:1:0.1", "--quantity", "c-alpha", "--state", p(&bell)]).status.code(), Some(2));
}

#[test]
fn kw_verify_matches_the_library() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("psi.json");
    let out = renyikw(&["random", "--dims", "2,2,2", "--seed", "7", "--out", p(&path)]);
    assert!(out.status.success());
    let v = json(&renyikw(&["kw-verify", "--state", p(&path), "--alpha", "0.5", "--seed", "7", "--restarts", "4"]));

    let psi: PureState64 = haar_pure(&[2, 2, 2], &mut rng_from_seed(7)).unwrap();
    let config = OptimizerConfig::default().with_restarts(4).with_seed(7);
    let r = kw_verify(&psi, AlphaParam::correlation(0.5).unwrap(), &config).unwrap();
    assert_eq!(v["c_alpha_ae"].as_f64().unwrap(), r.c_alpha_ae);
    assert_eq!(v["eof_alpha_ab"].as_f64().unwrap(), r.eof_alpha_ab);
    assert_eq!(v["gap"].as_f64().unwrap(), r.gap);
    assert!(r.gap.abs() < 5e-3);
}

#[test]
fn reports_reparse_under_the_shared_schema() {
    let dir = TempDir::new().unwrap();
    let mixed = dir.path().join("rho.json");
    assert!(renyikw(&["random", "--dims", "2,2", "--kind", "mixed", "--rank", "2", "--seed", "3", "--out", p(&mixed)]).status.success());
    let v = json(&renyikw(&["entropy", "--alpha", "0.3", "--state", p(&mixed)]));
    assert!(v["value"].as_f64().unwrap() > 0.0);

    let c = json(&renyikw(&["calpha", "--alpha", "0.7", "--state", p(&mixed), "--restarts", "2"]));
    let effects = c["povm"]["effects"].as_array().unwrap();
    assert_eq!(effects.len(), 4);
    let mut trace = 0.0;
    for e in effects {
        assert_eq!(e["dims"], serde_json::json!([2]));
        trace += e["matrix"][0][0][0].as_f64().unwrap() + e["matrix"][1][1][0].as_f64().unwrap();
    }
    assert!((trace - 2.0).abs() < 1e-9);

    let e = json(&renyikw(&["eof", "--alpha", "0.7", "--state", p(&mixed), "--restarts", "2"]));
    let members = e["decomposition"]["members"].as_array().unwrap();
    let total: f64 = members.iter().map(|m| m["p"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
    let member = write(&dir, "member.json", &members[0]["state"].to_string());
    assert!(renyikw(&["entropy", "--alpha", "0.5", "--state", p(&member)]).status.success());
}

#[test]
fn discrimination_and_robustness() {
    let dir = TempDir::new().unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let ensemble = write(
        &dir,
        "xi.json",
        &format!(
            r#"{{"members":[{{"p":0.5,"state":{{"dims":[2],"vector":[[1,0],[0,0]]}}}},{{"p":0.5,"state":{{"dims":[2],"vector":[[{h},0],[{h},0]]}}}}]}}"#
        ),
    );
    let d = json(&renyikw(&["discriminate", "--ensemble", p(&ensemble), "--restarts", "4"]));
    let expected = 0.5 * (1.0 + h);
    assert!((d["helstrom_value"].as_f64().unwrap() - expected).abs() < 1e-12);
    assert!((d["p_success"].as_f64().unwrap() - expected).abs() < 1e-5);

    let b = json(&renyikw(&["psuc-bound", "--ensemble", p(&ensemble), "--restarts", "4"]));
    let slack = b["s_half_avg"].as_f64().unwrap() - b["neg_log_psuc"].as_f64().unwrap();
    assert!((b["slack"].as_f64().unwrap() - slack).abs() < 1e-12);

    let bell = write(&dir, "bell.json", BELL);
    let r = json(&renyikw(&["robustness", "--state", p(&bell)]));
    assert!((r["r_g"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((r["lr_g"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(r["half_lemma_diff"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn identical_seeds_give_identical_reports() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    assert!(renyikw(&["random", "--dims", "3,3", "--kind", "mixed", "--seed", "11", "--out", p(&a)]).status.success());
    assert!(renyikw(&["random", "--dims", "3,3", "--kind", "mixed", "--seed", "11", "--out", p(&b)]).status.success());
    let (ra, rb): (Value, Value) = (
        serde_json::from_str(&std::fs::read_to_string(&a).unwrap()).unwrap(),
        serde_json::from_str(&std::fs::read_to_string(&b).unwrap()).unwrap(),
    );
    assert_eq!(ra["matrix"], rb["matrix"]);

    let run = || renyikw(&["calpha", "--alpha", "0.4", "--state", p(&a), "--restarts", "3", "--seed", "9"]);
    let (x, y) = (run(), run());
    assert!(x.status.success());
    let strip = |o: &Output| serde_json::to_string(&without_duration(serde_json::from_slice(&o.stdout).unwrap())).unwrap();
    assert_eq!(strip(&x), strip(&y));
}

#[test]
fn seed_falls_back_to_the_environment() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("psi.json");
    let out = Command::new(env!("CARGO_BIN_EXE_renyikw"))
        .args(["random", "--dims", "2,2", "--out", p(&path)])
        .env("RENYIKW_SEED", "42")
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["manifest"]["master_seed"], 42);
    let expected = haar_pure::<f64, _>(&[2, 2], &mut rng_from_seed(42)).unwrap();
    assert_eq!(v["vector"][0][0].as_f64().unwrap(), expected.amplitudes()[0].re);
}
