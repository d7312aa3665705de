use std::path::PathBuf;
use std::process::Command;

use mublab::io::{set_from_json, set_to_json};
use mublab::linalg::{validate_mub_set, Basis, MubSet};
use serde_json::Value;

fn run(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_mublab")).args(args).env_remove("MUBLAB_SEED").output().unwrap();
    (String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap(), out.status.code().unwrap_or(-1))
}

fn json(args: &[&str]) -> (Value, i32) {
    let (out, err, code) = run(args);
    (serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}{err}")), code)
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mublab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

#[test]
fn construct_examples() {
    let (v, code) = json(&["construct", "wh-set", "--d", "6"]);
    assert_eq!(code, 0);
    assert_eq!(v["bases"].as_array().unwrap().len(), 3);
    let (v, _) = json(&["construct", "complete-set", "--d", "5"]);
    assert_eq!(v["bases"].as_array().unwrap().len(), 6);
    let (v, _) = json(&["construct", "qr3mod4", "--p", "7"]);
    assert_eq!(v["labels"][0], "QR7");
    assert_eq!(v["manifest"]["subcommand"], "construct");
    assert_eq!(v["manifest"]["params"]["p"], 7);
    let (v, _) = json(&["construct", "dim4-triple", "--a", "1.5707963267948966", "--b", "0.3"]);
    assert!(v["note"].as_str().unwrap().contains("pi/2"));
}

#[test]
fn invalid_parameters_exit_two() {
    for args in [
        vec!["construct", "qr3mod4", "--p", "5"],
        vec!["construct", "qr1mod4", "--p", "9"],
        vec!["construct", "complete-set", "--d", "4"],
        vec!["construct", "wh-set"],
        vec!["construct", "nonsense"],
        vec!["frobnicate"],
        vec!["cv", "complete", "--r", "1", "--theta", "0"],
    ] {
        let (out, err, code) = run(&args);
        assert_eq!(code, 2, "{args:?}: {out}{err}");
        assert!(!err.is_empty());
    }
}

#[test]
fn verify_exit_codes() {
    let same = MubSet::new(vec![Basis::identity(3), Basis::identity(3)]).unwrap();
    let p = scratch("same.json", &set_to_json(&same));
    let (v, code) = json(&["verify", p.to_str().unwrap()]);
    assert_eq!(code, 3);
    assert_eq!(v["report"]["ok"], false);

    let (out, _, _) = run(&["construct", "fourier", "--d", "3", "--pair"]);
    let p = scratch("pair.json", &out);
    let (v, code) = json(&["verify", p.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["report"]["ok"], true);

    let p = scratch("broken.json", "{\"dimension\": 3, \"bases\": [[[1, 0]");
    let (_, err, code) = run(&["verify", p.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("parse"));

    let (_, _, code) = run(&["verify", "/nonexistent/set.json"]);
    assert_eq!(code, 2);
}

#[test]
fn verify_accepts_text_matrices() {
    let p = scratch(
        "pauli.txt",
        "1\t0\n0\t1\n\n0.7071067811865476\t0.7071067811865476\n0.7071067811865476\t-0.7071067811865476\n",
    );
    let (v, code) = json(&["verify", p.to_str().unwrap(), "--tol", "1e-12"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["bases"], 2);
}

#[test]
fn construct_round_trip_is_bit_identical() {
    for args in [
        vec!["construct", "qr1mod4", "--p", "13", "--triple"],
        vec!["construct", "wh-set", "--d", "10"],
        vec!["construct", "s6-pair"],
    ] {
        let (out, _, code) = run(&args);
        assert_eq!(code, 0);
        let parsed = set_from_json(&out).unwrap();
        let direct = validate_mub_set(&parsed, 1e-10).unwrap();
        let p = scratch("rt.json", &out);
        let (v, _) = json(&["verify", p.to_str().unwrap()]);
        let via_cli = v["report"]["worst_unbiasedness_defect"].as_f64().unwrap();
        assert_eq!(via_cli.to_bits(), direct.worst_unbiasedness_defect.to_bits());
        assert_eq!(set_to_json(&set_from_json(&set_to_json(&parsed)).unwrap()), set_to_json(&parsed));
    }
}

#[test]
fn search_verdict_drives_exit_code() {
    let (out, _, _) = run(&["construct", "fourier", "--d", "3", "--pair"]);
    let p = scratch("f3.json", &out);
    let (v, code) = json(&["search", p.to_str().unwrap(), "--restarts", "100"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "FOUND");
    let (v, code) = json(&["classify", p.to_str().unwrap(), "--restarts", "200"]);
    assert_eq!(code, 0);
    assert_eq!(v["level"], "EXTENDS_BY_BASIS");
    assert_eq!(v["total_bases"], 4);
    assert_eq!(v["extended_report"]["ok"], true);

    let (out, _, _) = run(&["construct", "complete-set", "--d", "2"]);
    let p = scratch("c2.json", &out);
    let (v, code) = json(&["search", p.to_str().unwrap(), "--restarts", "50"]);
    assert_eq!(code, 3);
    assert_eq!(v["verdict"], "NOT_FOUND");
    assert_eq!(v["manifest"]["params"]["config"]["restarts"], 50);
}

#[test]
fn seed_comes_from_environment() {
    let (out, _, _) = run(&["construct", "fourier", "--d", "2", "--pair"]);
    let p = scratch("f2.json", &out);
    let path = p.to_str().unwrap();
    let env = Command::new(env!("CARGO_BIN_EXE_mublab"))
        .args(["search", path, "--restarts", "20"])
        .env("MUBLAB_SEED", "77")
        .output()
        .unwrap();
    let (flag, _, _) = run(&["search", path, "--restarts", "20", "--seed", "77"]);
    assert_eq!(String::from_utf8(env.stdout).unwrap(), flag);
    let v: Value = serde_json::from_str(&flag).unwrap();
    assert_eq!(v["manifest"]["seed"], 77);
}

#[test]
fn bloch_reports_complement_table() {
    let (out, _, _) = run(&["construct", "complete-set", "--d", "3"]);
    let p = scratch("c3.json", &out);
    let (v, code) = json(&["bloch", p.to_str().unwrap()]);
    assert_eq!(code, 0);
    let table = v["complement"].as_array().unwrap();
    assert_eq!(table[0]["complement_dimension"], 6);
    assert_eq!(table[3]["complement_dimension"], 0);
    assert!(v["max_cross_basis_dot"].as_f64().unwrap() < 1e-12);
    assert!(v["bases"].as_array().unwrap().iter().all(|b| b["simplex"] == true));
    assert_eq!(v["bases"][0]["vectors"][0].as_array().unwrap().len(), 8);
}

#[test]
fn cv_subcommands() {
    let (v, code) = json(&["cv", "complete", "--r", "1", "--theta", "1.5707963267948966"]);
    assert_eq!(code, 0);
    assert_eq!(v["verified"], true);
    assert_eq!(v["plus"]["completion"]["branch"], "+");
    let (v, code) = json(&["cv", "residual", "--grid", "100"]);
    assert_eq!(code, 0);
    assert!(v["residual"]["violation"].as_f64().unwrap() > 0.3);
}

#[test]
fn text_format_and_out_file() {
    let (out, _, code) = run(&["construct", "fourier", "--d", "2", "--format", "text"]);
    assert_eq!(code, 0);
    assert!(out.contains("7.0710678118654746e-1"));
    let target = std::env::temp_dir().join(format!("mublab-cli-out-{}.json", std::process::id()));
    let (out, _, code) = run(&["construct", "s6-pair", "--out", target.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    assert_eq!(set_from_json(&std::fs::read_to_string(&target).unwrap()).unwrap().len(), 2);
}

#[test]
fn timing_is_opt_in() {
    let (v, _) = json(&["construct", "s6-pair"]);
    assert!(v["manifest"].get("duration_seconds").is_none());
    let (v, _) = json(&["construct", "s6-pair", "--timing"]);
    assert!(v["manifest"]["duration_seconds"].as_f64().unwrap() >= 0.0);
}
