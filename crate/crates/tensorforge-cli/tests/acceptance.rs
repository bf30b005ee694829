// SPDX-License-Identifier: Apache-2.0

//! Command-line acceptance checks, one PASS/FAIL line each. Runs without the libtest harness.

use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const MU_TARGET: f64 = 0.52733;
const MU_TOL: f64 = 2e-4;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_tensorforge"));
    c.env_remove("TENSORFORGE_WORKERS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or(Value::Null)
}

fn corpus() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../tensorforge/tests/fixtures/corpus");
    let mut files: Vec<_> = std::fs::read_dir(dir).expect("corpus").map(|e| e.expect("entry").path()).collect();
    files.sort();
    files
}

fn mu_command() -> (bool, String) {
    let out = run(&["mu", "--step", "0.001", "--exact-check", "--no-timing"]);
    let v = json_of(&out);
    let mu = v["mu"].as_f64().unwrap_or(f64::NAN);
    let ok = out.status.code() == Some(0) && (mu - MU_TARGET).abs() <= MU_TOL && v["exact_check"]["passed"] == true;
    (ok, format!("exit {:?}, mu = {mu:.6}", out.status.code()))
}

fn params_command() -> (bool, String) {
    let out = run(&["params", "--mu", "52733/100000", "--m-max", "60000", "--no-timing"]);
    let v = json_of(&out);
    let got = (v["m"].as_u64(), v["k"].as_u64(), v["r_lo"].as_u64(), v["r_hi"].as_u64());
    let ok = out.status.code() == Some(0) && got == (Some(48352), Some(328), Some(790097248), Some(790097406));
    (ok, format!("exit {:?}, (m, k, r_lo, r_hi) = {got:?}", out.status.code()))
}

fn phi_command() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (r, t, s) in [("3", "2", "4"), ("2", "1", "2")] {
        let out = run(&["phi", "--r", r, "--theta", t, "--sigma", s, "--verify", "--no-timing"]);
        let passed = out.status.code() == Some(0) && json_of(&out)["passed"] == true;
        ok &= passed;
        parts.push(format!("({r},{t},{s}) {passed}"));
    }
    (ok, parts.join(", "))
}

fn exit_codes() -> (bool, String) {
    let dir = tempfile::tempdir().expect("tempdir");
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"dims\":[1,1,1],\"entries\":[[0,0,0,\"2/4\"]]}").expect("write");
    let cases: Vec<(&str, Vec<String>, i32)> = vec![
        ("missing input", vec!["rank".into(), "--input".into(), "missing.json".into()], 2),
        ("non-reduced fraction", vec!["tensor".into(), "--input".into(), bad.display().to_string()], 2),
        ("budget exceeded", vec!["phi", "--r", "3", "--theta", "3", "--sigma", "20", "--verify", "--budget", "1000"].into_iter().map(String::from).collect(), 2),
        ("bad step", vec!["mu".into(), "--step".into(), "1.0".into()], 2),
        ("unknown flag", vec!["mu".into(), "--bogus".into()], 2),
        ("appendix ok", vec!["verify-appendix", "--samples", "50", "--m-max", "500", "--no-timing"].into_iter().map(String::from).collect(), 0),
        ("secant mismatch outside stated range", vec!["secant", "--m", "3", "--no-timing"].into_iter().map(String::from).collect(), 0),
        ("infeasible mu", vec!["params", "--mu", "1/2", "--m-max", "300", "--no-timing"].into_iter().map(String::from).collect(), 0),
    ];
    let mut bad_cases = Vec::new();
    for (name, args, want) in &cases {
        let got = bin().args(args).output().expect("binary runs").status.code();
        if got != Some(*want) {
            bad_cases.push(format!("{name}: {got:?} != {want}"));
        }
    }
    (bad_cases.is_empty(), format!("{} cases, wrong: {:?}", cases.len(), bad_cases))
}

fn determinism() -> (bool, String) {
    let commands: Vec<Vec<&str>> = vec![
        vec!["mu", "--step", "0.01", "--refine", "2", "--no-timing"],
        vec!["params", "--mu", "3/2", "--m-max", "400", "--no-timing"],
        vec!["verify-appendix", "--samples", "200", "--m-max", "2000", "--seed", "5", "--no-timing"],
        vec!["phi", "--r", "3", "--theta", "2", "--sigma", "4", "--verify", "--seed", "3", "--no-timing"],
        vec!["secant", "--m", "3,4", "--seed", "9", "--format", "csv", "--no-timing"],
        vec!["rank", "--input", "../tensorforge/tests/fixtures/corpus/matmul_122.json", "--seed", "1", "--no-timing"],
    ];
    let mut differing = Vec::new();
    for args in &commands {
        let outputs: Vec<Vec<u8>> = ["1", "2", "4", "8"]
            .iter()
            .map(|w| {
                bin()
                    .current_dir(env!("CARGO_MANIFEST_DIR"))
                    .args(["--workers", w])
                    .args(args)
                    .output()
                    .expect("binary runs")
                    .stdout
            })
            .collect();
        if outputs.iter().any(|o| o != &outputs[0] || o.is_empty()) {
            differing.push(args[0]);
        }
    }
    let env_out = bin().env("TENSORFORGE_WORKERS", "3").args(&commands[0]).output().expect("runs").stdout;
    let baseline = bin().args(&commands[0]).output().expect("runs").stdout;
    let ok = differing.is_empty() && env_out == baseline;
    (ok, format!("{} commands across 1/2/4/8 workers, differing: {differing:?}", commands.len()))
}

fn csv_header() -> (bool, String) {
    let out = run(&["secant", "--m", "4", "--r-max", "2", "--format", "csv"]);
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    let first = text.lines().next().unwrap_or_default().to_string();
    (first == "m,r,formula,sampled,match" && text.lines().count() == 3, format!("header {first:?}"))
}

fn corpus_round_trip() -> (bool, String) {
    let files = corpus();
    let mut same = 0;
    for f in &files {
        let out = run(&["tensor", "--input", f.to_str().expect("utf-8 path")]);
        let original = std::fs::read(f).expect("readable");
        same += usize::from(out.status.success() && out.stdout == original);
    }
    (same == 50 && files.len() == 50, format!("{same}/{} files byte-identical", files.len()))
}

fn clone_and_augment() -> (bool, String) {
    let dir = tempfile::tempdir().expect("tempdir");
    let ua = dir.path().join("ua.json");
    std::fs::write(&ua, r#"{"ambient":[1,1],"basis":[{"dims":[1,1],"entries":[[0,0,"1/1"]]}]}"#).expect("write");
    let diag1 = dir.path().join("d1.json");
    std::fs::write(&diag1, "{\"dims\":[1,1,1],\"entries\":[[0,0,0,\"1/1\"]]}\n").expect("write");
    let aug = run(&["augment", "--input", diag1.to_str().unwrap(), "--ua", ua.to_str().unwrap()]);
    let aug_text = String::from_utf8_lossy(&aug.stdout).to_string();
    let clone = run(&["clone", "--input", diag1.to_str().unwrap(), "--v", "2"]);
    let clone_text = String::from_utf8_lossy(&clone.stdout).to_string();
    let ok = aug_text == "{\"dims\":[2,1,1],\"entries\":[[0,0,0,\"1/1\"],[1,0,0,\"1/1\"]]}\n"
        && clone_text.starts_with("{\"dims\":[2,2,2]")
        && clone_text.matches("1/1").count() == 8;
    (ok, format!("augment exit {:?}, clone exit {:?}", aug.status.code(), clone.status.code()))
}

fn main() {
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    type Check = (&'static str, fn() -> (bool, String));
    let checks: [Check; 8] = [
        ("mu command reproduces the expected constant", mu_command),
        ("params command reproduces the expected parameters", params_command),
        ("phi --verify passes", phi_command),
        ("exit codes", exit_codes),
        ("reports identical across worker counts", determinism),
        ("secant CSV header", csv_header),
        ("tensor corpus round-trip", corpus_round_trip),
        ("clone and augment documents", clone_and_augment),
    ];
    let mut failed = 0;
    let mut ran = 0;
    for (name, f) in checks {
        if filter.as_ref().is_some_and(|p| !name.contains(p.as_str())) {
            continue;
        }
        ran += 1;
        let (ok, detail) = f();
        failed += usize::from(!ok);
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
    println!("cli acceptance: {} passed, {failed} failed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
