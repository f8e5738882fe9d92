use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn polyext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyext"))
        .args(args)
        .env_remove("POLYEXT_SEED")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn selftest_passes() {
    let out = polyext(&["selftest"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["status"], "ok");
    assert_eq!(r["result"]["failed"], 0);
    assert!(r["result"]["checks"].as_array().unwrap().len() >= 10);
}

#[test]
fn seed_comes_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_polyext"))
        .args(["selftest"])
        .env("POLYEXT_SEED", "5")
        .output()
        .unwrap();
    assert_eq!(report(&out)["result"]["seed"], 5);
    let out = polyext(&["--seed", "9", "selftest"]);
    assert_eq!(report(&out)["result"]["seed"], 9);
}

#[test]
fn identity_is_extreme() {
    let out = polyext(&["op", "check-extreme", &fixture("identity_linf2.json")]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["result"]["is_extreme"], true);
    assert_eq!(r["result"]["active_rank"], 4);
    assert_eq!(r["mode"], "exact");
}

#[test]
fn remark_operator_reports() {
    let f = fixture("remark.json");
    let r = report(&polyext(&["op", "check-extreme", &f]));
    assert_eq!(r["result"]["is_extreme"], false);
    assert_eq!(r["result"]["active_rank"], 3);
    assert!(r["result"]["witness"].is_array());

    assert_eq!(report(&polyext(&["op", "norm", &f]))["result"]["norm"], "1/1");
    assert_eq!(report(&polyext(&["op", "rank", &f]))["result"]["rank"], 2);
    assert_eq!(report(&polyext(&["op", "extremal-number", &f]))["result"]["extremal_number"], 1);
    let att = report(&polyext(&["op", "attain", &f]));
    assert_eq!(att["result"]["indices"].as_array().unwrap().len(), 4);

    let out = polyext(&["decompose", "general", "--rank", "2", &f]);
    assert_eq!(code(&out), 3);
    let r = report(&out);
    assert_eq!(r["status"], "infeasible");
    assert_eq!(r["result"]["status"], "infeasible");
    assert!(r["result"]["certificate"].is_array());

    let out = polyext(&["decompose", "general", &f]);
    assert_eq!(code(&out), 0);
    assert_eq!(report(&out)["result"]["status"], "decomposed");
}

#[test]
fn rank1_decomposition_transcript() {
    let out = polyext(&["decompose", "km", &fixture("rank1_linf2_l1.json")]);
    assert_eq!(code(&out), 0);
    let r = report(&out)["result"].clone();
    assert_eq!(r["weights"], serde_json::json!(["1/2", "1/2"]));
    assert_eq!(r["transcript"]["vertex_index"], 0);
    assert_eq!(r["transcript"]["facets"].as_array().unwrap().len(), 2);

    let sub = report(&polyext(&["decompose", "km", "--subsets", "--vertex", "3", &fixture("rank1_linf2_l1.json")]));
    assert_eq!(sub["result"]["transcript"]["vertex_index"], 3);

    let out = polyext(&["decompose", "km", &fixture("identity_linf2.json")]);
    assert_eq!(code(&out), 2);
}

#[test]
fn enumeration_counts() {
    for (x, y, n) in [("linf2", "l1-2", 8), ("hex", "l1-2", 12), ("linf2", "linf2", 8), ("hex", "l1-3", 18)] {
        let r = report(&polyext(&["enumerate", "rank1", x, y]));
        assert_eq!(r["result"]["count"], n, "{x} -> {y}");
    }
    let r = report(&polyext(&["enumerate", "all", "linf2", "linf2"]));
    assert_eq!(r["result"]["count"], 16);
    assert_eq!(r["result"]["by_rank"]["2"], 8);
    let out = polyext(&["enumerate", "all", "linf3", "l1-4"]);
    assert_eq!(code(&out), 2);
    let out = polyext(&["enumerate", "all", "linf2", "linf2", "--cap", "3"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("4 > 3"));
}

#[test]
fn octagon_instance() {
    let f = fixture("octagon_identity.json");
    let r = report(&polyext(&["op", "check-extreme", &f]));
    assert_eq!(r["result"]["is_extreme"], true);
    assert_eq!(report(&polyext(&["op", "extremal-number", &f]))["result"]["extremal_number"], 0);
}

#[test]
fn farkas_exit_codes() {
    let out = polyext(&["farkas", &fixture("farkas_infeasible.json")]);
    assert_eq!(code(&out), 3);
    assert_eq!(report(&out)["result"]["variant"], "Dual");
    let out = polyext(&["farkas", &fixture("farkas_feasible.json")]);
    assert_eq!(code(&out), 0);
    assert_eq!(report(&out)["result"]["variant"], "Primal");
}

#[test]
fn companion_commands() {
    let r = report(&polyext(&[
        "companion", "enumerate", "linf2", "l1-2", "--vertex", "1,1", "--image", "1,0",
    ]));
    let comps = r["result"]["companions"].as_array().unwrap();
    assert_eq!(comps.len(), 2);
    assert!(comps.iter().all(|c| c["hypothesis_holds"] == true));

    let r = report(&polyext(&["companion", "check", "--matrix", "1,1;1,-1"]));
    assert_eq!(r["result"]["hypothesis_holds"], true);
    let r = report(&polyext(&["companion", "check", "--matrix", "1,1;1,1"]));
    assert_eq!(r["result"]["hypothesis_holds"], false);

    let out = polyext(&["companion", "enumerate", "linf2", "l1-2", "--vertex", "1,0", "--image", "1,0"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn complex_commands() {
    let out = polyext(&["linfl1", "check", &fixture("complex_average.json")]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["mode"], "float-tol");
    assert_eq!(r["tol"], 1e-9);
    assert_eq!(r["result"]["norm_one"], true);
    assert_eq!(r["result"]["extreme"], false);

    let r = report(&polyext(&["linfl1", "decompose", &fixture("complex_average.json")]));
    assert_eq!(r["result"]["leaves"].as_array().unwrap().len(), 4);

    let r = report(&polyext(&["linfl1", "decompose", &fixture("complex_phase.json")]));
    let leaves = r["result"]["leaves"].as_array().unwrap();
    let total: f64 = leaves.iter().map(|l| l["weight"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
    assert!(r["result"]["reconstruction_error"].as_f64().unwrap() < 1e-9);
}

#[test]
fn spaces_build_and_inspect() {
    let dir = std::env::temp_dir().join(format!("polyext-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out_path = dir.join("square.json");
    let out = polyext(&["space", "build", &fixture("square.json"), "--out", out_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let built = report(&out);
    let inspected = report(&polyext(&["space", "inspect", out_path.to_str().unwrap()]));
    assert_eq!(built["result"]["facets"], inspected["result"]["facets"]);
    assert_eq!(inspected["result"]["facet_pairs"], 2);
    std::fs::remove_dir_all(&dir).unwrap();

    let r = report(&polyext(&["space", "inspect", "oct"]));
    assert_eq!(r["result"]["facets"].as_array().unwrap().len(), 8);
}

#[test]
fn errors_and_usage() {
    let out = polyext(&["space", "build", &fixture("not_symmetric.json")]);
    assert_eq!(code(&out), 2);
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "validation");

    assert_eq!(code(&polyext(&["no-such-command"])), 1);
    assert_eq!(code(&polyext(&["op", "norm"])), 1);
    assert_eq!(code(&polyext(&["space", "inspect", "nowhere"])), 1);
    assert_eq!(code(&polyext(&["--help"])), 0);
}

#[test]
fn reports_are_stable_and_digest_inputs() {
    let f = fixture("remark.json");
    let a = polyext(&["decompose", "general", &f]);
    let b = polyext(&["decompose", "general", &f]);
    assert_eq!(a.stdout, b.stdout);

    let bytes = std::fs::read(&f).unwrap();
    let mut h = Sha256::new();
    h.update(b"file");
    h.update((bytes.len() as u64).to_le_bytes());
    h.update(&bytes);
    assert_eq!(report(&a)["inputs_digest"], hex::encode(h.finalize()));

    let timed = report(&polyext(&["--timing", "op", "norm", &f]));
    assert!(timed["elapsed_ms"].is_number());
    assert!(report(&a).get("elapsed_ms").is_none());
}

#[test]
fn human_summaries() {
    let out = polyext(&["--human", "op", "check-extreme", &fixture("identity_linf2.json")]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "extreme: active rank 4 of 4");
    let out = polyext(&["--human", "decompose", "km", &fixture("rank1_linf2_l1.json")]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("T is a convex combination of 2 extreme contractions"));
}
