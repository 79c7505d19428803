use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_burgers-alpha"))
        .args(args)
        .env("BURGERS_ALPHA_OUT", root)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn failed(dir: &Path) -> Vec<String> {
    json(&dir.join("verdict.json"))["failed"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect()
}

#[test]
fn degenerate_mesh_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["simulate", "--n", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n must be at least 3"));
}

#[test]
fn unknown_keys_list_the_valid_ones() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "n = 21\nviscosity = 0.1\n").unwrap();
    let out = run(tmp.path(), &["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("viscosity") && err.contains("valid keys") && err.contains("eta"), "{err}");
}

#[test]
fn flags_override_the_file_and_defaults_fill_the_rest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "n = 31\nT = 0.5\nprofile = \"sin:2:0.5\"\nout = \"free\"\n").unwrap();
    let out = run(tmp.path(), &["simulate", "--config", cfg.to_str().unwrap(), "--n", "21"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("free");
    let r = json(&dir.join("config.resolved.json"));
    assert_eq!(r["n"], 21);
    assert_eq!(r["m"], 40);
    assert_eq!(r["T"], 0.5);
    assert_eq!(r["eta"], 0.25);
    assert_eq!(r["alpha"], 0.1);
    assert_eq!(r["overridden"], serde_json::json!(["n"]));
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    let v = json(&dir.join("verdict.json"));
    assert_eq!(v["pass"], true);
    assert!(v["checks"].as_array().unwrap().iter().any(|c| c["name"] == "max_principle"));
    let traj = std::fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("t,x,value\n") && !traj.contains('\r'));
    assert_eq!(traj.lines().count(), 1 + 41 * 21);
}

#[test]
fn csv_profiles_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let first = run(tmp.path(), &["simulate", "--n", "21", "--T", "0.1", "--out", "a"]);
    assert_eq!(first.status.code(), Some(0));
    let path = tmp.path().join("a/final.csv");
    let spec = format!("csv:{}", path.display());
    let second = run(tmp.path(), &["simulate", "--n", "21", "--T", "0.1", "--profile", &spec, "--out", "b"]);
    assert_eq!(second.status.code(), Some(0), "{}", String::from_utf8_lossy(&second.stderr));
    let finer = run(tmp.path(), &["simulate", "--n", "31", "--T", "0.1", "--profile", &spec, "--out", "c"]);
    assert_eq!(finer.status.code(), Some(0));
    let longer = run(tmp.path(), &["simulate", "--L", "2", "--profile", &spec, "--out", "d"]);
    assert_eq!(longer.status.code(), Some(2));
}

#[test]
fn inviscid_control_reaches_the_target() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["control-inviscid", "--L", "1", "--T", "2", "--n", "201"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("control-inviscid");
    let rep = json(&dir.join("report.json"));
    for key in ["gamma0", "gamma_T", "eta", "delta_hat", "iterations", "residuals"] {
        assert!(rep.get(key).is_some(), "{key}");
    }
    assert!(rep["terminal_error"].as_f64().unwrap() <= rep["terminal_tolerance"].as_f64().unwrap());
    let controls = std::fs::read_to_string(dir.join("controls.csv")).unwrap();
    assert!(controls.starts_with("t,p,v_l,v_r\n"));
    assert_eq!(controls.lines().count(), 1 + 401);
}

#[test]
fn pipeline_passes_and_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let args = |out: &'static str| ["pipeline", "--n", "81", "--m", "200", "--delta-hat2", "0.484375", "--delta-hat-v", "1", "--out", out];
    for out in ["one", "two"] {
        let o = run(tmp.path(), &args(out));
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for file in ["controls.csv", "trajectory.csv", "verdict.json"] {
        let a = std::fs::read(tmp.path().join("one").join(file)).unwrap();
        let b = std::fs::read(tmp.path().join("two").join(file)).unwrap();
        assert!(a == b, "{file} differs between reruns");
    }
    let rep = json(&tmp.path().join("one/report.json"));
    assert_eq!(rep["stages"].as_array().unwrap().len(), 3);
    assert_eq!(rep["terminal_ok"], true);
}

#[test]
fn late_stage_plan_cites_the_inequality() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["pipeline", "--n", "41", "--tau", "0.6", "--delta-hat2", "0.5", "--delta-hat-v", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("T* < T/2 - tau"));
    let v = json(&tmp.path().join("pipeline/verdict.json"));
    assert_eq!(v["exit_code"], 2);
}

#[test]
fn monitor_violations_are_named() {
    let tmp = tempfile::tempdir().unwrap();
    let coarse = run(
        tmp.path(),
        &["simulate", "--n", "11", "--m", "200", "--profile", "bump:0.3:0.25:160", "--alpha", "0.01", "--out", "coarse"],
    );
    assert_eq!(coarse.status.code(), Some(4));
    assert!(failed(&tmp.path().join("coarse")).contains(&"max_principle".to_string()));

    let absurd = run(
        tmp.path(),
        &["simulate", "--n", "11", "--m", "1", "--profile", "bump:0.3:0.25:20", "--alpha", "0.01", "--out", "absurd"],
    );
    assert_eq!(absurd.status.code(), Some(5));
    assert!(failed(&tmp.path().join("absurd")).iter().any(|f| f.starts_with("viscous step")));
}

#[test]
fn sweep_workers_write_their_own_directories_deterministically() {
    let tmp = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        ["sweep", "--n", "101", "--tau-fractions", "0.32,0.08", "--alphas", "0.05,0.5", "--delta-hat2", "0.484375", "--out", out]
    };
    for out in ["a", "b"] {
        let o = run(tmp.path(), &args(out));
        assert!(matches!(o.status.code(), Some(0 | 4)), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let sweep = std::fs::read_to_string(a.join("remainder_sweep.csv")).unwrap();
    assert!(sweep.starts_with("tau,alpha,h1_terminal\n"));
    assert_eq!(sweep.lines().count(), 5);
    assert_eq!(sweep, std::fs::read_to_string(b.join("remainder_sweep.csv")).unwrap());
    for alpha in ["0.05", "0.5"] {
        for tau in ["0.0064", "0.0016"] {
            let sub = format!("alpha_{alpha}_tau_{tau}/controls.csv");
            assert_eq!(std::fs::read(a.join(&sub)).unwrap(), std::fs::read(b.join(&sub)).unwrap(), "{sub}");
        }
    }
}

#[test]
fn remaining_commands_run() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        &["control-viscous", "--n", "41", "--m", "40"][..],
        &["smooth", "--n", "81"],
        &["approx", "--n", "81", "--delta-hat2", "0.484375"],
        &["local-exact", "--n", "41"],
        &["alpha-limit", "--n", "41"],
        &["simulate", "--n", "41", "--system", "inviscid", "--profile", "sin:1:0.2"],
    ] {
        let o = run(tmp.path(), args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let smooth = json(&tmp.path().join("smooth/smoothing.json"));
    for key in ["t1", "t2", "T_star", "c2_at_Tstar", "lambda1", "lambda2", "alpha"] {
        assert!(smooth.get(key).is_some(), "{key}");
    }
    let hum = json(&tmp.path().join("control-viscous/report.json"));
    for key in ["iterations", "terminal_l2", "cost", "epsilon", "residual"] {
        assert!(hum.get(key).is_some(), "{key}");
    }
}
