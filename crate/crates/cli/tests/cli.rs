use std::process::{Command, Output};

fn picalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_picalc"))
        .args(args)
        .env_remove("PICALC_FRESH_POOL")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

#[test]
fn norm_of_extruding_composition() {
    let o = picalc(&["norm", "new z.(a!z.0) | a?(x).x!a.0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "2");
}

#[test]
fn weak_bisimilarity_ignores_tau_prefixes() {
    let o = picalc(&["bisim", "--mode=weak", "x!y.0", "tau.tau.x!y.0"]);
    assert_eq!(stdout(&o), "true");
    let o = picalc(&[
        "bisim",
        "--mode=strong",
        "--oracle",
        "x!y.0",
        "tau.tau.x!y.0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "false");
}

#[test]
fn every_demo_exits_cleanly() {
    for name in [
        "non-congruence",
        "norm-gap",
        "tau-chain",
        "stutter-par",
        "scope-extrusion",
        "weak-normed-counterexample",
    ] {
        let o = picalc(&["demo", name]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stdout(&o));
        assert!(!stdout(&o).contains("FAIL"));
    }
    let o = picalc(&["demo", "scope-extrusion"]);
    assert!(stdout(&o).contains("NoSplitWithinUniverse"));
}

#[test]
fn exit_codes() {
    assert_eq!(picalc(&["parse", "a!b."]).status.code(), Some(2));
    assert_eq!(picalc(&["demo", "missing"]).status.code(), Some(2));
    assert_eq!(picalc(&["depth", "!a!b.0"]).status.code(), Some(2));
    assert_eq!(
        picalc(&["normalize", "a?(x).(x!b.0 + tau.c!b.0)"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        picalc(&[
            "--inputs",
            "fresh-only",
            "normalize",
            "a?(x).(x!b.0 + tau.c!b.0)"
        ])
        .status
        .code(),
        Some(0)
    );
    assert_eq!(
        picalc(&["--fresh-pool", "0", "depth", "a?(x).0"])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn pool_size_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_picalc"))
        .args(["depth", "a?(x).0"])
        .env("PICALC_FRESH_POOL", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn json_reports_are_deterministic() {
    let args = [
        "--json",
        "decompose",
        "--mode",
        "strong",
        "new z.a!z.0 | a?(x).x!a.0",
    ];
    let strip = |o: Output| {
        let mut v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v.as_object_mut().unwrap().remove("elapsed_ms");
        v
    };
    let (a, b) = (strip(picalc(&args)), strip(picalc(&args)));
    assert_eq!(a, b);
    assert_eq!(
        a["result"]["factors"],
        serde_json::json!(["new v0.a!v0.0", "a?(v0).v0!a.0"])
    );
    assert_eq!(a["result"]["verified_equivalent"], true);
}

#[test]
fn lts_outputs() {
    let dot = stdout(&picalc(&["lts", "--dot", "a!b.0 | b!a.0"]));
    assert!(dot.starts_with("digraph"));
    let o = picalc(&["--json", "lts", "a!b.0"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"]["states"].as_array().unwrap().len(), 2);
    let o = picalc(&["--max-weight", "4", "norm", "!a!b.0"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn upd_checks() {
    let o = picalc(&["verify-upd", "a!b.0 | c!c.0", "c!c.a!b.0 + a!b.c!c.0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "unique: factors match");
    let o = picalc(&["verify-upd", "--sweep", "names=a", "max-size=4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(
        picalc(&["verify-upd", "--sweep", "names=a"]).status.code(),
        Some(2)
    );
}

#[test]
fn random_terms_follow_the_seed() {
    let a = stdout(&picalc(&["random", "--seed", "5", "--count", "4"]));
    let b = stdout(&picalc(&["random", "--seed", "5", "--count", "4"]));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 4);
}
