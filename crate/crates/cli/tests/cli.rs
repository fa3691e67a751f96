use std::process::{Command, Output};

fn dicke(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dicke")).args(args).env_remove("DICKE_SEED").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn counts_agree_with_closed_forms() {
    for (n, k) in [("4", "2"), ("7", "3"), ("9", "1"), ("9", "8")] {
        for extra in [&[][..], &["--baseline"][..]] {
            let mut args = vec!["counts", "--n", n, "--k", k];
            args.extend_from_slice(extra);
            let o = dicke(&args);
            assert!(o.status.success(), "{args:?}");
            assert!(stdout(&o).ends_with(": OK\n"), "{}", stdout(&o));
        }
    }
    assert_eq!(stdout(&dicke(&["counts", "--n", "4", "--k", "2"])), "built 12 CNOT, 9 Ry, 2 X; predicted 12 CNOT, 9 Ry: OK\n");
}

#[test]
fn build_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let o = dicke(&["build", "--n", "6", "--k", "3", "--mask", "01", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let c = dicke::Circuit::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(c.n(), 6);
    assert_eq!(c.counts().cnot, 5 * 3 * 3 - 12);
    let q = stdout(&dicke(&["build", "--n", "6", "--k", "3", "--format", "qasm", "--measure"]));
    assert!(q.starts_with("OPENQASM 2.0;"));
    assert!(q.ends_with("measure q -> c;\n"));
}

#[test]
fn simulate_reports_unit_fidelity() {
    for args in [
        &["simulate", "--n", "5", "--k", "2", "--mask", "11", "--rewired"][..],
        &["simulate", "--n", "6", "--k", "4", "--baseline", "--mask", "1"][..],
        &["simulate", "--n", "6", "--k", "1"][..],
    ] {
        let o = dicke(args);
        assert!(o.status.success(), "{args:?}");
        let f: f64 = stdout(&o).lines().next().unwrap().strip_prefix("fidelity ").unwrap().parse().unwrap();
        assert!((1.0 - f).abs() < 1e-12);
    }
}

#[test]
fn sampling_is_seeded() {
    let a = dicke(&["sample", "--n", "4", "--k", "2", "--shots", "300", "--seed", "9"]);
    let b = Command::new(env!("CARGO_BIN_EXE_dicke"))
        .args(["sample", "--n", "4", "--k", "2", "--shots", "300"])
        .env("DICKE_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(stdout(&a), stdout(&b));
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["histogram"]["shots"], 300);
    let em = v["em"].as_f64().unwrap();
    assert!((0.0..0.2).contains(&em));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.json");
    std::fs::write(&path, v["histogram"].to_string()).unwrap();
    let o = dicke(&["em", "--hist", path.to_str().unwrap(), "--n", "4", "--w", "2"]);
    assert_eq!(stdout(&o).trim().parse::<f64>().unwrap(), em);
}

#[test]
fn mapping_and_infeasibility() {
    let o = dicke(&["map", "--n", "4", "--k", "2", "--arch", "a4"]);
    assert_eq!(stdout(&o), "1:0,2:1,3:2,4:3\n1:2,2:1,3:0,4:3\n");
    let o = dicke(&["map", "--n", "5", "--k", "2", "--arch", "ibmqx2"]);
    assert_eq!(o.status.code(), Some(3));
    let arch = concat!(env!("CARGO_MANIFEST_DIR"), "/../../architectures/ibmqx2.json");
    let o = dicke(&["map", "--n", "4", "--k", "2", "--arch", arch]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 8);
}

#[test]
fn variant_ranking_follows_rates() {
    let run = |e02: &str| {
        let rates = format!("0-1=0.02,0-2={e02},1-2=0.03,1-3=0.01");
        stdout(&dicke(&["variants", "--n", "4", "--k", "2", "--arch", "a4", "--rates", &rates, "--best"]))
    };
    assert!(run("0.01").contains("rewired"));
    assert!(run("0.03").contains("standard"));
    let all = stdout(&dicke(&["variants", "--n", "4", "--k", "2", "--arch", "a4"]));
    assert_eq!(all.lines().count(), 8);
}

#[test]
fn rates_from_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rates.json");
    std::fs::write(&path, r#"[{"a":0,"b":1,"error":0.02},{"a":2,"b":0,"error":0.01}]"#).unwrap();
    let o = dicke(&[
        "expected-error", "--n", "4", "--k", "2", "--mask", "1", "--arch", "a4", "--rates", path.to_str().unwrap(),
        "--assignment", "1:0,2:1,3:2,4:3",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    // 5 * 0.02 + 3 * 0.01 + 3 * 0.01 + 1 * 0.01
    assert!((v["expected_error"].as_f64().unwrap() - 0.17).abs() < 1e-12);
}

#[test]
fn expected_error_with_monte_carlo() {
    let o = dicke(&[
        "expected-error", "--n", "4", "--k", "2", "--arch", "a4", "--response", "affine:0.5,0.01", "--trials", "20000",
        "--seed", "11",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["monte_carlo"]["z"].as_f64().unwrap().abs() < 4.0);
    assert_eq!(v["monte_carlo"]["trials"], 20000);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["build", "--n", "3", "--k", "3"][..],
        &["build", "--n", "4"][..],
        &["variants", "--n", "4", "--k", "2", "--arch", "a4", "--response", "affine:2,1"][..],
        &["expected-error", "--n", "4", "--k", "2", "--arch", "a4", "--assignment", "1:0,2:0,3:1,4:2"][..],
    ] {
        assert_eq!(dicke(args).status.code(), Some(2), "{args:?}");
    }
    assert_eq!(dicke(&["map", "--n", "4", "--k", "2", "--arch", "/nonexistent.json"]).status.code(), Some(1));
}

#[test]
fn dot_exports() {
    let o = dicke(&["export", "--what", "circuit", "--n", "4", "--k", "2", "--mask", "1"]);
    assert!(stdout(&o).contains("label=\"5\"") || stdout(&o).contains("label=5"), "{}", stdout(&o));
    let o = dicke(&["export", "--what", "arch", "--arch", "ibmqx2"]);
    assert!(stdout(&o).starts_with("graph"));
    assert_eq!(dicke(&["export", "--what", "gnk"]).status.code(), Some(2));
}

#[test]
fn table_csv() {
    let csv = stdout(&dicke(&["table", "--nmax", "6", "--csv"]));
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], "n,k,baseline_cnot,baseline_ry,optimized_cnot,optimized_ry");
    assert_eq!(lines.len(), 1 + 1 + 2 + 3 + 4);
    assert!(lines.contains(&"4,2,22,14,12,9"));
}
