use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn latticeguard(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latticeguard"))
        .args(args)
        .env_remove("LATTICEGUARD_THREADS")
        .output()
        .expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL_MAC: &str = r#"{
  "name": "small-mac",
  "fixture": {"codes": {"c0": {"q": 5, "n": 1, "generators": []}, "c": {"q": 5, "n": 1, "generators": [[1]]}}},
  "density": {"kind": "gaussian", "sigma": 4.0},
  "gains": {"h1": 1.5, "h2": 3},
  "noise_grid": [0.0, 0.2],
  "trials": 300,
  "seeds": [11],
  "output_dir": "unused",
  "analyses": ["build-lattice", "simulate"]
}"#;

#[test]
fn flatness_of_the_integers() {
    let out = latticeguard(&["flatness", "--lattice", "z", "--theta", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let eps = json_stdout(&out)["values"][0]["epsilon"].as_f64().unwrap();
    // sum over k != 0 of exp(-2 pi^2 k^2)
    let direct: f64 = (1..10)
        .map(|k| 2.0 * (-2.0 * std::f64::consts::PI.powi(2) * (k * k) as f64).exp())
        .sum();
    assert!((eps - direct).abs() < 1e-3 * direct, "{eps} vs {direct}");
    assert!((eps - 5.35e-9).abs() < 0.01e-9);
}

#[test]
fn perfect_rate() {
    let out = latticeguard(&["rates", "--mode", "perfect", "--alpha", "0.9", "--snr", "100"]);
    assert_eq!(out.status.code(), Some(0));
    let bits = json_stdout(&out)["bits"].as_f64().unwrap();
    let oracle = 0.5 * (0.81f64 * 100.0).log2() - (2.0 * std::f64::consts::E).log2();
    assert!((bits - oracle).abs() < 1e-12);
    assert!((bits - 0.727).abs() < 5e-4);
}

#[test]
fn feasibility_boundary_is_exact() {
    // 2 / (1 + 4) = 0.4 is not strictly greater than 0.4
    let out = latticeguard(&[
        "rates", "--mode", "perfect", "--alpha", "0.4", "--snr", "100", "--k1", "1", "--k2", "4",
    ]);
    assert_eq!(json_stdout(&out)["alpha_feasible"], Value::Bool(false));
    let out = latticeguard(&[
        "rates", "--mode", "strong", "--alpha", "1/5", "--snr", "100", "--k1", "-3", "--k2", "4",
    ]);
    assert_eq!(json_stdout(&out)["alpha_feasible"], Value::Bool(true));
}

#[test]
fn irrational_attack_recovers_uniquely() {
    let out = latticeguard(&["attack", "--h2", "sqrt2", "--lattice", "z2", "--u", "1,-4", "--v", "7,2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_stdout(&out);
    let rec = &v["records"][0];
    assert_eq!(rec["result"]["outcome"], "unique");
    assert_eq!(rec["result"]["pair"]["u"], serde_json::json!([1, -4]));
    assert_eq!(rec["result"]["pair"]["v"], serde_json::json!([7, 2]));
    let csv = latticeguard(&["attack", "--h2", "pi", "--count", "20", "--seed", "3", "--format", "csv"]);
    assert_eq!(csv.status.code(), Some(0));
    let text = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(text.lines().count(), 21);
    assert!(text.lines().skip(1).all(|l| l.ends_with("unique,true")));
}

#[test]
fn rational_attack_is_flagged() {
    let out = latticeguard(&["attack", "--h2", "2", "--count", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(latticeguard(&["flatness", "--theta", "abc"]).status.code(), Some(1));
    assert_eq!(latticeguard(&["attack", "--h2", "sqrt5"]).status.code(), Some(1));
    assert_eq!(latticeguard(&["audit-perfect", "--q", "4"]).status.code(), Some(1));
    assert_eq!(latticeguard(&["nonsense"]).status.code(), Some(1));
    assert_eq!(latticeguard(&["--help"]).status.code(), Some(0));
    let bad_threads = Command::new(env!("CARGO_BIN_EXE_latticeguard"))
        .args(["rates", "--mode", "strong", "--alpha", "0.5", "--snr", "10"])
        .env("LATTICEGUARD_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad_threads.status.code(), Some(1));
}

#[test]
fn thread_cap_is_accepted() {
    let out = Command::new(env!("CARGO_BIN_EXE_latticeguard"))
        .args(["simulate", "--trials", "200", "--noise", "0,0.1", "--format", "csv"])
        .env("LATTICEGUARD_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("seed,noise_var,trials,errors"));
    assert!(text.lines().nth(1).unwrap().starts_with("0,0,200,0,0,"));
}

#[test]
fn bundled_perfect_fixture_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = latticeguard(&["run", "--fixture", "perfect-z5", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = read_json(&out_dir.join("manifest.json"));
    let hash = manifest["hash"].as_str().unwrap().to_string();
    assert_eq!(hash.len(), 64);
    assert_eq!(manifest["seeds"], serde_json::json!([0]));
    assert!(manifest["version"].is_string());
    assert_eq!(manifest["config"]["name"], "perfect-z5");
    let report = read_json(&out_dir.join("audit-perfect.json"));
    assert_eq!(report["manifest"], hash.as_str());
    assert_eq!(report["report"]["geometric_certificate"], Value::Bool(true));
    assert!(report["report"]["max_variational"].as_f64().unwrap() <= 1e-4);
    for csv in ["audit-perfect.csv", "build-lattice.csv"] {
        let text = std::fs::read_to_string(out_dir.join(csv)).unwrap();
        assert_eq!(text.lines().next().unwrap(), format!("# manifest {hash}"));
    }
    assert_eq!(read_json(&out_dir.join("build-lattice.json"))["manifest"], hash.as_str());
}

#[test]
fn order_violation_fixture_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = latticeguard(&["run", "--fixture", "leak-z5-h5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let report = read_json(&dir.path().join("audit-perfect.json"));
    assert_eq!(report["passed"], Value::Bool(false));
    assert_eq!(report["report"]["condition_holds"], Value::Bool(false));
    assert!(report["report"]["leakage_bits"].as_f64().unwrap() > 0.1);
}

#[test]
fn malformed_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    let out_dir = dir.path().join("out");
    let broken = SMALL_MAC.replace("\"trials\": 300,", "\"trials\": 300");
    std::fs::write(&cfg, broken).unwrap();
    let out = latticeguard(&["run", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 8"), "{err}");
    assert!(!out_dir.exists());

    let unknown = SMALL_MAC.replace("\"trials\"", "\"trails\": 1, \"trials\"");
    std::fs::write(&cfg, unknown).unwrap();
    let out = latticeguard(&["run", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));
    assert!(!out_dir.exists());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("mac.json");
    std::fs::write(&cfg, SMALL_MAC).unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let out = latticeguard(&["run", cfg.to_str().unwrap(), "--out", d.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["simulate.csv", "build-lattice.csv", "simulate.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let ma = read_json(&a.join("manifest.json"));
    assert_eq!(ma["hash"], read_json(&b.join("manifest.json"))["hash"]);

    let other = latticeguard(&["run", cfg.to_str().unwrap(), "--out", a.to_str().unwrap(), "--seed", "12"]);
    assert_eq!(other.status.code(), Some(0));
    assert_ne!(std::fs::read(a.join("simulate.csv")).unwrap(), std::fs::read(b.join("simulate.csv")).unwrap());
}

#[test]
fn resolved_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("mac.json");
    std::fs::write(&cfg, SMALL_MAC).unwrap();
    let a = dir.path().join("a");
    let out = latticeguard(&["run", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    // the resolved config re-runs as a config of its own
    let resolved = read_json(&a.join("manifest.json"))["config"].clone();
    let again = dir.path().join("again.json");
    std::fs::write(&again, serde_json::to_string_pretty(&resolved).unwrap()).unwrap();
    let b = dir.path().join("b");
    let out = latticeguard(&["run", again.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(read_json(&b.join("manifest.json"))["hash"], read_json(&a.join("manifest.json"))["hash"]);
}
