use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_neckstack"))
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn json(args: &[&str]) -> (i32, serde_json::Value) {
    let out = bin().args(args).arg("--json").output().unwrap();
    let v = serde_json::from_slice(&out.stdout).unwrap_or(serde_json::Value::Null);
    (out.status.code().unwrap(), v)
}

#[test]
fn forces_on_riemann_are_zero_inside() {
    let p = data("riemann.json");
    let (code, v) = json(&["forces", "--input", p.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(v["max_interior_force"].as_f64().unwrap() < 1e-14);
    assert_eq!(v["balanced"], true);
}

#[test]
fn verify_paper_passes() {
    let (code, v) = json(&["verify-paper", "--cases", "20"]);
    assert_eq!(code, 0);
    for c in v["checks"].as_array().unwrap() {
        for key in ["computed", "reference", "deviation", "tolerance"] {
            assert!(c.get(key).is_some(), "{c}");
        }
    }
}

#[test]
fn verify_paper_fails_under_impossible_tolerance() {
    let (code, _) = json(&["verify-paper", "--cases", "2", "--tol", "1e-30"]);
    assert_eq!(code, 1);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(bin().arg("nope").output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["forces", "--window", "3:1"]).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["forces", "--input", "/nonexistent.json"]).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["forces"]).output().unwrap().status.code(), Some(2));
}

#[test]
fn classify_words() {
    let fib = data("fib.json");
    let (code, v) = json(&["classify", "--word", fib.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["kind"], "quasi_periodic_witnesses");
    assert_eq!(v["witnesses"].as_array().unwrap().len(), 32);
    let per = data("periodic.json");
    let (_, v) = json(&["classify", "--word", per.to_str().unwrap()]);
    assert_eq!(v["kind"], "periodic");
    assert_eq!(v["period"], 2);
}

#[test]
fn concat_fan_in_chain_has_genus_one() {
    let w = data("fan_in_chain.json");
    let (code, v) = json(&["concat", "--word", w.to_str().unwrap(), "--window=-1:3"]);
    assert_eq!(code, 0);
    assert_eq!(v["genus"], 1);
    assert!(v["max_interior_force"].as_f64().unwrap() < 1e-12);
}

#[test]
fn solve_recovers_fan() {
    let (code, v) = json(&["solve", "--builtin", "fan:n=2", "--perturb", "0.1"]);
    assert_eq!(code, 0);
    let r = &v["residual"]["residual_force"];
    assert!((r[1].as_f64().unwrap() + 0.75).abs() < 1e-12, "{r}");
}

#[test]
fn periods_report_passes() {
    let (code, v) = json(&["periods", "--builtin", "ladder22"]);
    assert_eq!(code, 0);
    assert!(!v["necks"].as_array().unwrap().is_empty());
}

#[test]
fn mesh_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let w = data("fib.json");
    let run = |out: &str| {
        bin()
            .args(["mesh", "--word", w.to_str().unwrap(), "--t", "1e-3", "--grid", "32", "-o"])
            .arg(dir.path().join(out))
            .output()
            .unwrap()
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(b.status.code(), Some(0));
    for f in ["mesh.obj", "report.json"] {
        let x = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let y = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("a/report.json")).unwrap()).unwrap();
    assert_eq!(report["embeddedness"]["embedded"], true);
}

#[test]
fn mesh_at_large_t_reports_failure() {
    let dir = tempfile::tempdir().unwrap();
    let w = data("fan_in_chain.json");
    let out = bin()
        .args(["mesh", "--word", w.to_str().unwrap(), "--window=-1:3", "--t", "0.5", "--grid", "24", "-o"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["embeddedness"]["slabs_ordered"], false);
}
