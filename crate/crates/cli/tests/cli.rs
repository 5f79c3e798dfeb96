use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ccx_core::polygon::PolygonalFunction;
use ccx_core::refutation::Certificate;
use serde_json::Value;

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn ccx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccx")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn build_is_byte_identical() {
    let seeds = data("seeds.scm");
    let path = scratch("F3.json");
    let mut texts = Vec::new();
    for _ in 0..2 {
        let o = ccx(&["build", "--stages", "2000", "--registry", &seeds, "--n", "3", "--out", path.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        texts.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
    let va: Value = serde_json::from_slice(&texts[0]).unwrap();
    let f: PolygonalFunction = serde_json::from_slice(&texts[0]).unwrap();
    assert!(f.points().len() >= 13);
    assert_eq!(va["manifest"]["registry_files"][0], Value::String(seeds.clone()));

    let out = ccx(&["build", "--stages", "2000", "--registry", &seeds, "--n", "3"]);
    assert_eq!(out.stdout, ccx(&["build", "--stages", "2000", "--registry", &seeds, "--n", "3"]).stdout);
}

#[test]
fn eval_reads_build_output() {
    let seeds = data("seeds.scm");
    let f = scratch("F0.json");
    assert!(ccx(&["build", "--stages", "10", "--registry", &seeds, "--n", "0", "--out", f.to_str().unwrap()]).status.success());
    let v = json(&ccx(&["eval", "--function", f.to_str().unwrap(), "--x", "1/2", "--x", "0"]));
    assert_eq!(v["values"][0]["y"], "1/1");
    assert_eq!(v["values"][1]["y"], "0/1");
}

#[test]
fn refute_then_check() {
    let cheater = data("cheater.scm");
    let cert = scratch("cert.json");
    let out = ccx(&["refute", "--scheme", &cheater, "--stages", "5000", "--out", cert.to_str().unwrap()]);
    assert!(out.status.success());
    let parsed: Certificate = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(parsed.value_at_zeta, ccx_core::numerals::rat(1, 1));
    let ok = ccx(&["check-cert", "--cert", cert.to_str().unwrap(), "--scheme", &cheater, "--stages", "5000"]);
    assert_eq!(json(&ok)["valid"], true);

    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    v["beta"] = v["delta_m"].clone();
    let bad = scratch("cert-bad.json");
    std::fs::write(&bad, v.to_string()).unwrap();
    let rejected = ccx(&["check-cert", "--cert", bad.to_str().unwrap(), "--scheme", &cheater, "--stages", "5000"]);
    assert_eq!(rejected.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    assert_eq!(ccx(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(ccx(&["eval", "--function", "/nonexistent.json", "--x", "0"]).status.code(), Some(2));

    let looping = scratch("loop.scm");
    std::fs::write(&looping, "-> a\n").unwrap();
    let out = ccx(&["refute", "--scheme", looping.to_str().unwrap(), "--stages", "50"]);
    assert_eq!(out.status.code(), Some(3));

    let garbage = scratch("garbage.scm");
    std::fs::write(&garbage, "| ->\n->. ab\n").unwrap();
    let v = json(&ccx(&["refute", "--scheme", garbage.to_str().unwrap(), "--stages", "50"]));
    assert_eq!(v["kind"], "invalid_list");

    let out = ccx(&["diagonal", "--registry", &data("seeds.scm"), "--stages", "0", "--search-stages", "3", "--rows", "4"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_suites() {
    for suite in ["omega", "partition", "bump"] {
        let v = json(&ccx(&["verify", suite, "--seed", "3", "--count", "20"]));
        assert_eq!(v["passed"], true);
        assert_eq!(v["report"]["cases"], 20);
    }
    let seq = ccx(&["verify", "omega", "--seed", "3", "--count", "20", "--sequential"]);
    let par = ccx(&["verify", "omega", "--seed", "3", "--count", "20"]);
    assert_eq!(json(&seq)["report"], json(&par)["report"]);
    let v = json(&ccx(&["verify", "riemann", "--registry", &data("seeds.scm"), "--stages", "0", "--rows", "2", "--eps", "1/4"]));
    assert_eq!(v["passed"], true);
    assert_eq!(v["reports"].as_array().unwrap().len(), 3);
}

#[test]
fn cover_hseq_enumerate() {
    let seeds = data("cover_seeds.scm");
    let v = json(&ccx(&["cover", "--registry", &seeds, "--stages", "100", "--inject", "1/3@0"]));
    assert_eq!(v["intervals"][0], serde_json::json!(["253/768", "259/768", "injected:0"]));
    assert_eq!(v["manifest"]["injections"][0], "1/3@0");
    let v = json(&ccx(&["hseq", "--registry", &seeds, "--stages", "100", "--cover-point", "1/7", "--n", "5"]));
    assert_eq!(v["summary"].as_array().unwrap().len(), 6);
    assert!(v["coverage"][0]["n"].as_u64().unwrap() > 0);
    let v = json(&ccx(&["enumerate", "--registry", &data("seeds.scm"), "--stages", "20"]));
    assert_eq!(v["entries"].as_array().unwrap().len(), 4);
    assert_eq!(v["entries"][1]["delta"], "1/8");
}

#[test]
fn csv_and_selftest() {
    let out = ccx(&["emit-csv", "--registry", &data("seeds.scm"), "--stages", "0", "--n", "1", "--digits", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("x,y\n0.000,0.000\n"));
    assert!(text.lines().any(|l| l == "0.500,1.000"));
    let v = json(&ccx(&["selftest", "--seed", "7"]));
    assert_eq!(v["passed"], true);
}
