use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_bornwave");

fn bornwave(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("BORNWAVE_OUT").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn run_into(out: &Path, id: &str, extra: &[&str]) -> Output {
    let mut args = vec!["run", id, "--threads", "1", "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    bornwave(&args)
}

#[test]
fn list_is_stable_and_machine_readable() {
    let a = bornwave(&["list", "--json"]);
    assert_eq!(code(&a), 0);
    let rows: Vec<Value> = serde_json::from_str(&stdout(&a)).unwrap();
    let ids: Vec<&str> = rows.iter().map(|r| r["id"].as_str().unwrap()).collect();
    for id in [
        "ho-ground-1p",
        "free-gauss-1p",
        "coupled-ho-2p",
        "perm-equal-mass",
        "perm-unequal-mass",
        "noneq-guided",
        "noneq-selfconsistent",
        "uniqueness-probe",
    ] {
        assert!(ids.contains(&id), "{id}");
    }
    assert!(rows.iter().all(|r| r["description"].as_str().is_some_and(|d| !d.is_empty())));
    assert_eq!(stdout(&a), stdout(&bornwave(&["list", "--json"])));

    let text = stdout(&bornwave(&["list"]));
    let text_ids: Vec<&str> = text.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(text_ids, ids);

    let perm = bornwave(&["list", "perm", "--json"]);
    let rows: Vec<Value> = serde_json::from_str(&stdout(&perm)).unwrap();
    assert!(!rows.is_empty() && rows.iter().all(|r| r["id"].as_str().unwrap().contains("perm")));

    let none = bornwave(&["list", "no-such-scenario", "--json"]);
    assert_eq!(code(&none), 0);
    assert_eq!(serde_json::from_str::<Vec<Value>>(&stdout(&none)).unwrap().len(), 0);
    let none = bornwave(&["list", "no-such-scenario"]);
    assert_eq!(code(&none), 0);
    assert!(stdout(&none).is_empty());
}

#[test]
fn oscillator_run_writes_a_bundle_and_reports_orders() {
    let out = tempfile::tempdir().unwrap();
    let o = run_into(out.path(), "ho-ground-1p", &["--json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(summary["passed"], true);
    assert_eq!(summary["threads"], 1);
    let wave = summary["checks"].as_array().unwrap().iter().find(|c| c["check"] == "wave_1p.linf").unwrap();
    assert!(wave["value"].as_f64().unwrap() < wave["bound"].as_f64().unwrap());

    let dir = out.path().join("ho-ground-1p");
    for f in ["bundle.json", "scenario.toml", "residuals.csv", "checks.csv", "deviation.csv"] {
        assert!(dir.join(f).is_file(), "{f}");
    }
    let residuals = std::fs::read_to_string(dir.join("residuals.csv")).unwrap();
    assert!(residuals.starts_with("scenario_id,equation,level,n,dx,dt,L1,L2,Linf,interior_fraction"));
    let deviation = std::fs::read_to_string(dir.join("deviation.csv")).unwrap();
    assert!(deviation.starts_with("scenario_id,time,L1,Linf"));

    let r = bornwave(&["report", dir.to_str().unwrap(), "--json"]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let report: Value = serde_json::from_str(&stdout(&r)).unwrap();
    let tables = report["tables"].as_array().unwrap();
    let derived: Vec<&Value> = tables.iter().filter(|t| t["mode"] == "derived" && t["pi_form"] == "standard").collect();
    assert_eq!(derived.len(), 5);
    for t in derived {
        let orders = t["rows"].as_array().unwrap().iter().filter(|r| r["order"].is_number()).count();
        assert_eq!(orders, 2, "{}", t["equation"]);
    }
    // the literal stress form is flagged against the standard one
    assert!(report["literal"].as_array().unwrap().iter().any(|f| f["differs"] == true));
    assert!(dir.join("report.csv").is_file());
}

#[test]
fn echoed_scenario_reproduces_the_bundle() {
    let out = tempfile::tempdir().unwrap();
    assert_eq!(code(&run_into(out.path(), "noneq-guided", &[])), 0);
    let first = out.path().join("noneq-guided");
    let echo = first.join("scenario.toml");
    let again = tempfile::tempdir().unwrap();
    let o = run_into(again.path(), echo.to_str().unwrap(), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["residuals.csv", "checks.csv", "deviation.csv"] {
        let a = std::fs::read(first.join(f)).unwrap();
        let b = std::fs::read(again.path().join("noneq-guided").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}

#[test]
fn output_root_comes_from_the_environment() {
    let root = tempfile::tempdir().unwrap();
    let o = Command::new(BIN)
        .args(["run", "free-gauss-1p", "--override", "refinement.levels=[512, 1024]"])
        .env("BORNWAVE_OUT", root.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(root.path().join("free-gauss-1p").join("bundle.json").is_file());
}

#[test]
fn oversized_step_is_a_numerical_abort() {
    let out = tempfile::tempdir().unwrap();
    let o = run_into(out.path(), "ho-ground-1p", &["--override", "evolution.dt=1.171875"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("dt = 1.171875"), "{}", stderr(&o));
}

#[test]
fn schema_errors_name_the_field() {
    let out = tempfile::tempdir().unwrap();
    let o = run_into(out.path(), "ho-ground-1p", &["--override", "checks.equations=[\"wave_3p\"]"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("equations") && stderr(&o).contains("wave_3p"), "{}", stderr(&o));

    let o = run_into(out.path(), "ho-ground-1p", &["--override", "checks.bogus_check=1"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("bogus_check"), "{}", stderr(&o));

    let o = run_into(out.path(), "ho-ground-1p", &["--override", "checks.suites=[\"permutation\"]"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("permutation"), "{}", stderr(&o));

    let o = run_into(out.path(), "no/such/file.toml", &[]);
    assert_eq!(code(&o), 2);
}

#[test]
fn tolerance_failure_exits_one() {
    let out = tempfile::tempdir().unwrap();
    let o = run_into(out.path(), "ho-ground-1p", &["--override", "checks.tolerances.wave_1p.max_linf=1e-12"]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(stdout(&o).contains("FAIL wave_1p.linf"));
    assert!(out.path().join("ho-ground-1p").join("bundle.json").is_file());
}

#[test]
fn report_rejects_missing_bundles() {
    let empty = tempfile::tempdir().unwrap();
    let o = bornwave(&["report", empty.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("no bundle found"));

    let out = tempfile::tempdir().unwrap();
    assert_eq!(code(&run_into(out.path(), "noneq-guided", &[])), 0);
    let dir = out.path().join("noneq-guided");
    std::fs::remove_file(dir.join("residuals.csv")).unwrap();
    std::fs::remove_file(dir.join("deviation.csv")).unwrap();
    let o = bornwave(&["report", dir.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("residuals.csv") && stderr(&o).contains("deviation.csv"), "{}", stderr(&o));
}

#[test]
fn unequal_mass_report_shows_the_swap_defect() {
    let out = tempfile::tempdir().unwrap();
    let o = run_into(out.path(), "perm-unequal-mass", &["--json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let defect = summary["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["check"] == "permutation.swap_defect")
        .unwrap()["value"]
        .as_f64()
        .unwrap();
    let dir = out.path().join("perm-unequal-mass");
    let text = stdout(&bornwave(&["report", dir.to_str().unwrap()]));
    assert!(text.contains("permutation.swap_defect") && text.contains(&format!("{defect:.4e}")), "{text}");
    let long = std::fs::read_to_string(dir.join("report.csv")).unwrap();
    assert!(long.lines().any(|l| l.contains("permutation.swap_defect") && l.ends_with(&defect.to_string())), "{long}");
}
