use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn isoslope(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isoslope"))
        .args(args)
        .env_remove("ISOSLOPE_CACHE")
        .output()
        .expect("binary runs")
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is a JSON report")
}

#[test]
fn polygon_of_generic_quintic_fiber() {
    let o = isoslope(&["polygon", "--vals", "0,0,1,3,6"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json_out(&o);
    assert_eq!(r["outputs"]["slopes"], "0,1,2,3");
    assert_eq!(r["outputs"]["vertices"][4], serde_json::json!(["4", "6"]));
    assert!(r["anchor"].as_str().is_some_and(|s| !s.is_empty()));

    let o = isoslope(&["polygon", "--vals", "0,0,0"]);
    assert_eq!(json_out(&o)["outputs"]["slopes"], "0,0");

    let o = isoslope(&["polygon", "--vals", "0,1/2,inf,3", "--norm", "2"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn malformed_input_is_a_usage_error() {
    for args in [
        &["polygon", "--vals", "0,abc"][..],
        &["polygon", "--vals", "1,0"],
        &["check-criterion", "--slopes", "0,x", "--lie-dim", "3"],
        &["check-criterion", "--slopes", "0", "--lie-dim", "0"],
        &["frobnicate"],
        &["polygon"],
    ] {
        let o = isoslope(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
        assert!(o.stdout.is_empty());
    }
    assert_eq!(isoslope(&["--help"]).status.code(), Some(0));
    assert_eq!(isoslope(&["--version"]).status.code(), Some(0));
}

#[test]
fn criterion_exit_codes() {
    let o = isoslope(&[
        "check-criterion",
        "--slopes",
        "0,1,2,3",
        "--lie-dim",
        "10",
        "--traceless",
        "--self-dual",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let r = json_out(&o);
    assert_eq!(r["outputs"]["verdict"], "VIOLATION");
    assert_eq!(r["outputs"]["admissible_dimension_bound"], 9);

    let o = isoslope(&[
        "check-criterion",
        "--slopes",
        "0,0,1,1",
        "--lie-dim",
        "10",
        "--traceless",
        "--self-dual",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_out(&o)["outputs"]["admissible_dimension_bound"], 15);

    let o = isoslope(&["check-criterion", "--slopes", "0", "--lie-dim", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_out(&o)["outputs"]["verdict"], "CONSISTENT");
}

#[test]
fn end_slopes_table() {
    let o = isoslope(&["end-slopes", "--slopes", "0,1,2,3"]);
    let r = json_out(&o);
    assert_eq!(
        r["outputs"]["end_slopes"],
        serde_json::json!({"-3": 1, "-2": 2, "-1": 3, "0": 4, "1": 3, "2": 2, "3": 1})
    );
}

#[test]
fn scan_with_cache_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("traces.jsonl");
    let c = cache.to_str().unwrap();
    let cold = isoslope(&["dwork", "scan", "--p", "11", "--cache", c]);
    assert_eq!(cold.status.code(), Some(0));
    let text = String::from_utf8(cold.stdout.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,a_p,a_p2,c1,c2,slopes,ordinary,mazur_ok");
    assert_eq!(lines.len(), 6);
    assert!(lines[1..].iter().all(|l| l.ends_with(",true")));
    assert!(lines[1..].iter().any(|l| l.contains("\"0,1,2,3\",true")));
    assert!(String::from_utf8_lossy(&cold.stderr).contains("20 computed"));

    let warm = isoslope(&["dwork", "scan", "--p", "11", "--cache", c]);
    assert_eq!(warm.stdout, cold.stdout);
    assert!(String::from_utf8_lossy(&warm.stderr).contains("20 from cache, 0 computed"));

    let verify = isoslope(&["cache", "verify", "--cache", c, "--recompute"]);
    assert_eq!(verify.status.code(), Some(0));
    assert_eq!(json_out(&verify)["outputs"]["valid"], 20);
}

#[test]
fn corrupted_cache_is_repaired() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("traces.jsonl");
    let c = cache.to_str().unwrap();
    assert_eq!(
        isoslope(&["dwork", "trace", "--p", "11", "--t", "2", "--cache", c])
            .status
            .code(),
        Some(0)
    );
    let mut text = fs::read_to_string(&cache).unwrap();
    text = text.replace("\"trace\":14", "\"trace\":15");
    text.push_str("garbage\n");
    fs::write(&cache, &text).unwrap();
    // a wrong-but-plausible trace survives parsing; only recomputation catches it
    let verify = isoslope(&["cache", "verify", "--cache", c, "--recompute"]);
    assert_eq!(verify.status.code(), Some(2));
    let r = json_out(&verify);
    assert_eq!(r["outputs"]["rejected"].as_array().unwrap().len(), 1);
    assert_eq!(
        r["outputs"]["recomputed_mismatches"]
            .as_array()
            .unwrap()
            .len(),
        1
    );

    // opening drops the garbage line and compacts
    let o = isoslope(&["dwork", "trace", "--p", "11", "--t", "6", "--cache", c]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dropped 1"));
    assert!(!fs::read_to_string(&cache).unwrap().contains("garbage"));
}

#[test]
fn cache_location_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("env-cache.jsonl");
    let o = Command::new(env!("CARGO_BIN_EXE_isoslope"))
        .args(["dwork", "trace", "--p", "11", "--t", "7"])
        .env("ISOSLOPE_CACHE", &cache)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(Path::new(&cache).exists());
}

#[test]
fn dwork_guards_and_reports() {
    let o = isoslope(&["dwork", "scan", "--p", "7", "--no-cache"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("p must be ≡ 1 mod 5"));

    let o = isoslope(&["dwork", "trace", "--p", "11", "--t", "1", "--no-cache"]);
    assert_eq!(o.status.code(), Some(1));

    let o = isoslope(&[
        "dwork",
        "trace",
        "--p",
        "11",
        "--t",
        "2",
        "--k",
        "2",
        "--no-cache",
        "--count-check",
    ]);
    assert_eq!(
        o.status.code(),
        Some(1),
        "quotient counting over F_121 exceeds the enumeration budget"
    );

    let o = isoslope(&[
        "dwork",
        "trace",
        "--p",
        "11",
        "--t",
        "2",
        "--no-cache",
        "--count-check",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r = json_out(&o);
    assert_eq!(r["outputs"]["trace"], 14);
    assert_eq!(r["outputs"]["quotient_count_trace"], 14);
    assert_eq!(r["outputs"]["residual"], "0");

    let o = isoslope(&[
        "dwork",
        "charpoly",
        "--p",
        "11",
        "--t",
        "2",
        "--no-cache",
        "--backend",
        "complex",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r = json_out(&o);
    assert_eq!(r["outputs"]["newton_slopes"], "0,1,2,3");
    assert_eq!(r["outputs"]["charpoly"][4], "1771561");
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("isoslope.toml");
    let cache = dir.path().join("from-config.jsonl");
    fs::write(
        &cfg,
        format!("primes = [11]\ncache = {:?}\n", cache.to_str().unwrap()),
    )
    .unwrap();
    let o = isoslope(&[
        "dwork",
        "scan",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r = json_out(&o);
    assert_eq!(r["outputs"]["scans"][0]["summary"]["fibers"], 5);
    assert!(cache.exists());

    fs::write(&cfg, "backend = \"abacus\"\n").unwrap();
    let o = isoslope(&[
        "dwork",
        "scan",
        "--config",
        cfg.to_str().unwrap(),
        "--no-cache",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

fn phimod(json: &str) -> Value {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("module.json");
    fs::write(&path, json).unwrap();
    let o = isoslope(&["phimod", path.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    json_out(&o)
}

#[test]
fn phimod_reports() {
    let ordinary = phimod(
        r#"{"frobenius": [{"exponent": 0}, {"exponent": 1}],
            "filtration": [{"jump": 0, "basis": [[1, 0], [0, 1]]}, {"jump": 1, "basis": [[1, 1]]}]}"#,
    );
    assert_eq!(ordinary["outputs"]["ordinary"], true);
    assert_eq!(ordinary["outputs"]["weakly_admissible"], true);

    let bad = phimod(
        r#"{"frobenius": [{"exponent": 0}, {"exponent": 1}],
            "filtration": [{"jump": 0, "basis": [[1, 0], [0, 1]]}, {"jump": 1, "basis": [[1, 0]]}]}"#,
    );
    assert_eq!(bad["outputs"]["weakly_admissible"], false);

    let trivial = phimod(
        r#"{"frobenius": [{"exponent": 0}], "filtration": [{"jump": 0, "basis": [[1]]}],
                             "group": [[[1]]]}"#,
    );
    assert_eq!(trivial["outputs"]["ordinary"], true);
    assert_eq!(trivial["outputs"]["weakly_admissible"], true);
    assert_eq!(trivial["outputs"]["invariants"]["ordinary"], true);

    let unsupported = phimod(
        r#"{"frobenius": [{"exponent": 1}, {"exponent": 1}, {"exponent": 0}],
            "filtration": [{"jump": 0, "basis": [[1,0,0],[0,1,0],[0,0,1]]}, {"jump": 1, "basis": [[1,0,0],[0,1,0]]}]}"#,
    );
    assert!(unsupported["outputs"]["weakly_admissible"].is_null());
    assert!(unsupported["outputs"]["unsupported"]
        .as_str()
        .unwrap()
        .contains("unsupported"));

    let sign = phimod(
        r#"{"frobenius": [{"exponent": 0}, {"exponent": 1}],
            "filtration": [{"jump": 0, "basis": [[1, 0], [0, 1]]}, {"jump": 1, "basis": [[0, 1]]}],
            "group": [[[1, 0], [0, 1]], [[1, 0], [0, -1]]]}"#,
    );
    assert_eq!(sign["outputs"]["invariants"]["rank"], 1);
    assert_eq!(sign["outputs"]["invariants"]["newton_slopes"], "0");
}

#[test]
fn reports_are_rederivable() {
    let o = isoslope(&["polygon", "--vals", "0,2,3,5"]);
    let r = json_out(&o);
    let vals: Vec<String> = r["inputs"]["vals"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    let again = isoslope(&["polygon", "--vals", &vals.join(",")]);
    assert_eq!(again.stdout, o.stdout);
}
