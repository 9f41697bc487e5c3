use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mfkit::exactalg::{poly_parse, PolyMatrix, Ring};
use mfkit::json::{mf_from_str, mf_to_string};
use mfkit::mfcore::{diagonal_delta, knorrer_certificate, MatrixFactorization};
use serde_json::Value;

fn mfkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfkit")).args(args).env_remove("MFKIT_JOBS").output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn potential(s: &str, vars: &[&str]) -> mfkit::exactalg::Polynomial {
    poly_parse(s, &Ring::new(vars), 1).unwrap()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "delta.json", &mf_to_string(&diagonal_delta(&potential("x^2", &["x"]))));
    let o = mfkit(&["verify", arg(&good)]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["passed"], true);

    let corrupt = write(dir.path(), "bad.json", "{\"source_vars\": [");
    assert_eq!(code(&mfkit(&["verify", arg(&corrupt)])), 2);
    assert_eq!(code(&mfkit(&["verify", arg(&dir.path().join("missing.json"))])), 2);

    let r = Ring::new(&["x", "y"]);
    let m = |s: &str| PolyMatrix::from_rows(&r, vec![vec![poly_parse(s, &r, 1).unwrap()]]);
    let wrong =
        MatrixFactorization::new(&["x"], &["y"], &potential("x^2", &["x"]), &potential("y^3", &["y"]), &m("y - x"), &m("y + x"), None, 1)
            .unwrap();
    let wrong = write(dir.path(), "wrong.json", &mf_to_string(&wrong));
    let o = mfkit(&["verify", arg(&wrong)]);
    assert_eq!(code(&o), 1);
    let v = stdout_json(&o);
    assert_eq!(v["passed"], false);
    assert_eq!(v["violations"][0]["row"], 0);
    assert_eq!(v["violations"][0]["col"], 0);
}

#[test]
fn qdim_of_units_and_knorrer() {
    let dir = tempfile::tempdir().unwrap();
    let delta = write(dir.path(), "d.json", &mf_to_string(&diagonal_delta(&potential("x^3", &["x"]))));
    let o = mfkit(&["qdim", arg(&delta)]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!((v["dim_left"].as_str(), v["dim_right"].as_str()), (Some("1"), Some("1")));

    let k = write(dir.path(), "k.json", &mf_to_string(&knorrer_certificate(&potential("x^2", &["x"]))));
    let o = mfkit(&["qdim", arg(&k)]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["verdict"], true);

    let o = mfkit(&["qdim", "--group-order", "2", arg(&delta)]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout_json(&o)["product_matches_group_order"], false);
}

#[test]
fn qdim_rejects_ungraded_and_zero_differentials() {
    let dir = tempfile::tempdir().unwrap();
    let x = diagonal_delta(&potential("x^2", &["x"]));
    let mut v: Value = serde_json::from_str(&mf_to_string(&x)).unwrap();
    v["grading"] = Value::Null;
    let ungraded = write(dir.path(), "u.json", &v.to_string());
    assert_eq!(code(&mfkit(&["qdim", arg(&ungraded)])), 3);

    let mut v: Value = serde_json::from_str(&mf_to_string(&x)).unwrap();
    v["d0"] = serde_json::json!([["0"]]);
    v["d1"] = serde_json::json!([["0"]]);
    mf_from_str(&v.to_string()).unwrap();
    let zero = write(dir.path(), "z.json", &v.to_string());
    let o = mfkit(&["qdim", arg(&zero)]);
    assert_ne!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!((v["dim_left"].as_str(), v["dim_right"].as_str()), (Some("0"), Some("0")));
}

#[test]
fn milnor_of_the_three_variable_presentation() {
    let o = mfkit(&["milnor", "x1^6*x2 + x2^3 + x3^2"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["milnor"], 16);
    assert_eq!(v["weights"]["x1"], "1/9");
    let o = mfkit(&["--format", "table", "milnor", "x^3 + y^4"]);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "6");
    assert_eq!(code(&mfkit(&["milnor", "x^2 + x^3 +"])), 2);
    assert_eq!(code(&mfkit(&["milnor", "x^2*y"])), 1);
    assert_eq!(code(&mfkit(&["--order", "3", "milnor", "zeta3*x^3 + y^2"])), 0);
}

#[test]
fn catalog_subcommands() {
    let o = mfkit(&["catalog", "verify"]);
    let v = stdout_json(&o);
    let failing: Vec<(String, String)> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["counted"] == true && r["passed"] == false)
        .map(|r| (r["subject"].as_str().unwrap().to_string(), r["check"].as_str().unwrap().to_string()))
        .collect();
    // The three-variable presentation has Milnor number 16, not 13.
    assert_eq!(failing, [("Z13".to_string(), "milnor".to_string())]);
    assert_eq!(code(&o), 1);

    let o = mfkit(&["--format", "table", "catalog", "list"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout).to_string();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split_whitespace().collect();
    assert_eq!(header, ["name", "mu", "weights", "status"]);
    assert!(text.lines().any(|l| l.starts_with("D4 ") && l.contains("1/3, 1/3") && l.ends_with("enabled")));

    let dir = tempfile::tempdir().unwrap();
    let o = mfkit(&["catalog", "export"]);
    assert_eq!(code(&o), 0);
    let exported = write(dir.path(), "cat.json", &String::from_utf8_lossy(&o.stdout));
    let again = mfkit(&["catalog", "--file", arg(&exported), "export"]);
    assert_eq!(again.stdout, o.stdout);
    let reverified = mfkit(&["catalog", "--file", arg(&exported), "verify"]);
    assert_eq!(stdout_json(&reverified), v);

    let mut cat: Value = serde_json::from_slice(&o.stdout).unwrap();
    cat["pairs"][0]["certificate"]["dim_left"] = "5".into();
    let forged = write(dir.path(), "forged.json", &cat.to_string());
    assert_eq!(code(&mfkit(&["catalog", "--file", arg(&forged), "verify"])), 2);
}

#[test]
fn search_request_for_d4_a5() {
    let dir = tempfile::tempdir().unwrap();
    let req = write(
        dir.path(),
        "req.json",
        r#"{"U": "u^6 + v^2", "V": "x^3 + x*y^2",
            "weights_source": {"u": 1, "v": 3}, "weights_target": {"x": 2, "y": 2},
            "degree": 6, "group_order_claim": 2, "budget": {}}"#,
    );
    let o = mfkit(&["--jobs", "2", "search", arg(&req)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert!(v["accepted"].as_u64().unwrap() >= 1);
    let cert = v["certificates"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["verdict"] == true && c["product_matches_group_order"] == true)
        .unwrap();
    assert_eq!(cert["product"], "2");
    let mf = write(dir.path(), "found.json", &cert["mf"].to_string());
    assert_eq!(code(&mfkit(&["verify", arg(&mf)])), 0);
    assert_eq!(code(&mfkit(&["qdim", "--group-order", "2", arg(&mf)])), 0);

    let bad = write(dir.path(), "bad.json", r#"{"U": "u^2"}"#);
    assert_eq!(code(&mfkit(&["search", arg(&bad)])), 2);
}

#[test]
fn delta_and_knorrer_output_round_trip() {
    let o = mfkit(&["delta", "x^3 + x*y^2"]);
    assert_eq!(code(&o), 0);
    let x = mf_from_str(&String::from_utf8_lossy(&o.stdout)).unwrap();
    assert_eq!(x, diagonal_delta(&potential("x^3 + x*y^2", &["x", "y"])));
    for w in ["x^2", "x^3", "x^3 + y^3"] {
        let o = mfkit(&["knorrer", w]);
        assert_eq!(code(&o), 0, "{w}");
        let v = stdout_json(&o);
        assert!(v["product"] == "1" || v["product"] == "-1", "{w}: {}", v["product"]);
        mfkit::json::certificate_from_str(&String::from_utf8_lossy(&o.stdout)).unwrap();
    }
    // Certificate files are accepted wherever a factorization file is.
    let dir = tempfile::tempdir().unwrap();
    let cert = write(dir.path(), "cert.json", &String::from_utf8_lossy(&mfkit(&["knorrer", "x^4"]).stdout));
    assert_eq!(code(&mfkit(&["verify", arg(&cert)])), 0);
    let o = mfkit(&["qdim", arg(&cert)]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["verdict"], true);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&mfkit(&["frobnicate"])), 2);
    assert_eq!(code(&mfkit(&["--format", "xml", "milnor", "x^2"])), 2);
    assert_eq!(code(&mfkit(&["--help"])), 0);
}
