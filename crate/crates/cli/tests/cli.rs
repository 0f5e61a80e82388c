use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_choquard-lab"))
}

fn write_config(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_vec_pretty(value).unwrap()).unwrap();
    path
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> i32 {
    let status = bin()
        .arg(cmd)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .status()
        .unwrap();
    status.code().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn solve_1d() -> Value {
    json!({
        "params": {"dim": 1, "alpha": 0.5, "p": 4, "q": 6.5, "mu": 1, "a": 1},
        "grid": {"dim": 1, "half_length": 0.3, "points_per_axis": 256},
        "initializer": {"kind": "gaussian", "width": 0.05}
    })
}

#[test]
fn constants_report_contains_closed_form_values() {
    let tmp = tempfile::tempdir().unwrap();
    let c3 = write_config(tmp.path(), "c3.json", &json!({"params": {"dim": 3, "alpha": 2, "p": 5, "q": 4, "mu": 1, "a": 1}}));
    assert_eq!(run("constants", &c3, &tmp.path().join("o3"), &[]), 0);
    let r = read_json(&tmp.path().join("o3/constants.json"));
    let a = r["result"]["constants"]["a_alpha"]["value"].as_f64().unwrap();
    assert!((a - 0.0795775).abs() < 1e-7);
    assert_eq!(r["result"]["s_alpha_identity_pass"], json!(true));

    let c1 = write_config(tmp.path(), "c1.json", &json!({"params": {"dim": 1, "alpha": 0.5, "p": 4, "q": 6, "mu": 1, "a": 1}}));
    assert_eq!(run("constants", &c1, &tmp.path().join("o1"), &[]), 0);
    let r = read_json(&tmp.path().join("o1/constants.json"));
    let a_star = r["result"]["constants"]["a_star"]["value"].as_f64().unwrap();
    assert!((a_star - 1.64945).abs() < 1e-5);
}

#[test]
fn solve_writes_all_outputs_and_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "s.json", &solve_1d());
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run("solve", &cfg, &a, &["--seed", "3"]), 0);
    assert_eq!(run("solve", &cfg, &b, &["--seed", "3"]), 0);
    for f in ["report.json", "field.bin", "radial.csv", "history.csv"] {
        assert!(a.join(f).exists(), "{f} missing");
    }
    assert_eq!(std::fs::read(a.join("history.csv")).unwrap(), std::fs::read(b.join("history.csv")).unwrap());
    let r = read_json(&a.join("report.json"));
    assert_eq!(r["command"], "solve");
    assert_eq!(r["config"]["seed"], 3);
    assert_eq!(r["input_hash"].as_str().unwrap().len(), 64);
    let report = &r["result"]["report"];
    assert_eq!(report["converged"], json!(true));
    assert!(report["lambda"].as_f64().unwrap() < 0.0);
    // 17 significant digits in every float
    let text = std::fs::read_to_string(a.join("report.json")).unwrap();
    assert!(text.contains("\"alpha\": 5.0000000000000000e-1"));
    // the field dump header carries the grid
    let dump = std::fs::read(a.join("field.bin")).unwrap();
    assert_eq!(dump.len(), 24 + 16 * 256);
}

#[test]
fn critical_solve_reports_margin() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        &json!({
            "params": {"dim": 3, "alpha": 2, "p": 5, "q": 4, "mu": 1, "a": 1},
            "grid": {"dim": 3, "half_length": 2.0, "points_per_axis": 16},
            "initializer": {"kind": "gaussian", "width": 0.4},
            "solver": {"max_iters": 2}
        }),
    );
    let code = run("solve", &cfg, &tmp.path().join("o"), &[]);
    assert!(code == 0 || code == 3, "exit {code}");
    let r = read_json(&tmp.path().join("o/report.json"));
    let m = &r["result"]["critical_margin"];
    let level = m["level"].as_f64().unwrap();
    assert!((level - 5.128396881987653).abs() < 1e-9);
    let c_po = r["result"]["report"]["c_po"].as_f64().unwrap();
    assert!((m["margin"].as_f64().unwrap() - (c_po - level)).abs() < 1e-12);
}

#[test]
fn regime_rejection_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    // p below p* = 1 + (2 + α)/N
    let mut c = solve_1d();
    c["params"]["p"] = json!(2.0);
    let cfg = write_config(tmp.path(), "r.json", &c);
    assert_eq!(run("solve", &cfg, &tmp.path().join("o"), &[]), 2);
    let r = read_json(&tmp.path().join("o/report.json"));
    assert_eq!(r["result"]["regime"]["regime"], "out_of_theory");
}

#[test]
fn non_convergence_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = solve_1d();
    c["solver"] = json!({"max_iters": 1});
    let cfg = write_config(tmp.path(), "n.json", &c);
    assert_eq!(run("solve", &cfg, &tmp.path().join("o"), &[]), 3);
    let r = read_json(&tmp.path().join("o/report.json"));
    assert_eq!(r["result"]["report"]["converged"], json!(false));
}

#[test]
fn gapcheck_exit_reflects_margin() {
    let tmp = tempfile::tempdir().unwrap();
    let params = json!({"dim": 3, "alpha": 2, "p": 5, "q": 4, "mu": 1, "a": 1});
    let large = write_config(tmp.path(), "g1.json", &json!({"params": params, "gapcheck": {"eps": [0.1]}}));
    assert_eq!(run("gapcheck", &large, &tmp.path().join("o1"), &[]), 4);
    let small = write_config(tmp.path(), "g2.json", &json!({"params": params, "gapcheck": {"eps": [0.00625]}}));
    assert_eq!(run("gapcheck", &small, &tmp.path().join("o2"), &[]), 0);
    let r = read_json(&tmp.path().join("o2/gapcheck.json"));
    assert!(r["result"]["rows"][0]["margin"].as_f64().unwrap() < 0.0);
    assert!(tmp.path().join("o2/gapcheck.csv").exists());
}

#[test]
fn sweep_column_is_monotone() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "w.json",
        &json!({
            "params": {"dim": 1, "alpha": 0.5, "p": 4, "q": 6, "mu": 1, "a": 1},
            "grid": {"dim": 1, "half_length": 0.3, "points_per_axis": 256},
            "initializer": {"kind": "gaussian", "width": 0.05},
            "sweep": {"mu_factors": [0.5, 1.0, 1.5]}
        }),
    );
    let code = run("sweep", &cfg, &tmp.path().join("o"), &[]);
    assert!(code == 0 || code == 3, "exit {code}");
    let r = read_json(&tmp.path().join("o/threshold.json"));
    assert_eq!(r["result"]["monotone_in_mu"], json!(true));
    let rows = r["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0]["method"], "minimized");
    assert_eq!(rows[2]["method"], "witness");
    let csv = std::fs::read_to_string(tmp.path().join("o/threshold.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn verify_passes_and_lists_oracles() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "v.json", &solve_1d());
    let status = bin()
        .args(["verify", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("o"))
        .env("CHOQUARD_LAB_THREADS", "2")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let r = read_json(&tmp.path().join("o/verify.json"));
    let checks = r["result"]["checks"].as_array().unwrap();
    let erf = checks.iter().find(|c| c["name"] == "riesz_vs_gaussian_erf_3d_m64").unwrap();
    assert_eq!(erf["passed"], json!(true));
    assert!(checks.iter().any(|c| c["group"] == "symmetry"));
}

#[test]
fn bad_config_is_a_plain_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "x.json", &json!({"unknown_section": 1}));
    assert_eq!(run("solve", &cfg, &tmp.path().join("o"), &[]), 1);
    let missing = write_config(tmp.path(), "m.json", &json!({}));
    assert_eq!(run("solve", &missing, &tmp.path().join("o"), &[]), 1);
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = choquard_lab::config::RunConfig::load(&path).unwrap();
        cfg.resolve(&Default::default()).unwrap_or_else(|e| panic!("{}: {e:#}", path.display()));
        n += 1;
    }
    assert!(n >= 5);
}
