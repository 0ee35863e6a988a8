use std::fs;
use std::path::{Path, PathBuf};

use bdry_fronts_cli::run_cli;
use serde_json::Value;

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn cli(args: &[&str]) -> i32 {
    run_cli(std::iter::once("bdry-fronts").chain(args.iter().copied()))
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn metric(rep: &Value, label: &str, name: &str) -> f64 {
    let run = rep["runs"].as_array().unwrap().iter().find(|r| r["label"] == label).unwrap_or_else(|| panic!("no run {label}"));
    run["metrics"][name].as_f64().unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let mut rows = vec![r.headers().unwrap().iter().map(String::from).collect()];
    rows.extend(r.records().map(|x| x.unwrap().iter().map(String::from).collect()));
    rows
}

fn write_gisclon_copy(dir: &Path, viscosities: &str) -> PathBuf {
    let mut sc: Value = serde_json::from_str(&fs::read_to_string(scenarios().join("gisclon.json")).unwrap()).unwrap();
    // coarser ε keep the test short
    sc["epsilons"] = serde_json::json!([0.02, 0.01]);
    sc["viscosities"] = serde_json::from_str(viscosities).unwrap();
    let p = dir.join("gisclon_small.json");
    fs::write(&p, serde_json::to_string_pretty(&sc).unwrap()).unwrap();
    p
}

#[test]
fn constant_scenario_has_zero_variation() {
    let out = tempfile::tempdir().unwrap();
    let sc = scenarios().join("constant.json");
    assert_eq!(cli(&["run", "--scenario", sc.to_str().unwrap(), "--out-dir", out.path().to_str().unwrap()]), 0);
    let rep = report(out.path());
    for run in rep["runs"].as_array().unwrap() {
        assert!(run["error"].is_null());
        let m = &run["metrics"];
        for key in ["initial_size", "sup_tv", "final_tv", "events"] {
            if let Some(x) = m[key].as_f64() {
                assert_eq!(x, 0.0, "{key}");
            }
        }
    }
    assert!(out.path().join("viscous_profile.csv").exists() || fs::read_dir(out.path()).unwrap().count() > 1);
}

#[test]
fn bundled_gisclon_front_tracking_traces() {
    let out = tempfile::tempdir().unwrap();
    let sc = scenarios().join("gisclon.json");
    assert_eq!(cli(&["front-track", "--scenario", sc.to_str().unwrap(), "--out-dir", out.path().to_str().unwrap()]), 0);
    let rep = report(out.path());
    let id = metric(&rep, "front-track/identity/delta=0.01", "trace_v2");
    let coupled = metric(&rep, "front-track/coupled/delta=0.01", "trace_v2");
    assert!((id - 1.0).abs() < 1e-12 && (coupled - 1.5).abs() < 1e-12);
    assert!(((coupled - id) - 0.5).abs() < 1e-12);
    assert!(out.path().join("coupled-delta0.01/profiles.csv").exists());
}

#[test]
fn compare_reports_the_gisclon_discrepancy() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = write_gisclon_copy(
        tmp.path(),
        r#"[{"label":"identity","d":[[1,0],[0,1]]},{"label":"coupled","d":[[1,0],[1,1]]}]"#,
    );
    let out = tmp.path().join("out");
    assert_eq!(cli(&["compare", "--scenario", sc.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]), 0);
    let rows = csv_rows(&out.join("compare.csv"));
    assert_eq!(rows[0], ["label", "source", "epsilon", "vbar1", "vbar2", "discrepancy", "config_hash"]);
    let find = |label: &str, source: &str| rows.iter().find(|r| r[0] == label && r[1] == source).unwrap().clone();
    let ft = find("coupled", "front-tracking");
    assert!((ft[4].parse::<f64>().unwrap() - 1.5).abs() < 1e-12);
    assert!((ft[5].parse::<f64>().unwrap() - 0.5).abs() < 1e-12);
    // ∼_* ignores D: both viscosities give the same contrast trace
    assert!(find("coupled", "star")[5].parse::<f64>().unwrap() < 1e-12);
    let oracle = find("coupled", "linear-oracle");
    assert!((oracle[4].parse::<f64>().unwrap() - 1.5).abs() < 1e-12);
    for source in ["viscous", "extrapolated", "cauchy-front-tracking", "cauchy-viscous"] {
        assert!(rows.iter().any(|r| r[1] == source), "{source}");
    }
    let rep = report(&out);
    for check in rep["checks"].as_array().unwrap() {
        assert_eq!(check["pass"], true, "{check}");
    }
}

#[test]
fn identical_viscosities_have_no_discrepancy() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = write_gisclon_copy(tmp.path(), r#"[{"label":"a","d":[[1,0],[1,1]]},{"label":"b","d":[[1,0],[1,1]]}]"#);
    let out = tmp.path().join("out");
    assert_eq!(cli(&["compare", "--scenario", sc.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]), 0);
    let rows = csv_rows(&out.join("compare.csv"));
    // Cauchy rows compare against the whole-line solution, not between viscosities
    let between = rows[1..].iter().filter(|r| !r[1].starts_with("cauchy"));
    assert!(between.clone().count() >= 10);
    assert!(between.clone().all(|r| r[5].parse::<f64>().unwrap() == 0.0));
}

#[test]
fn malformed_scenario_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("bad.json");
    fs::write(&p, "{\n  \"system\": {\"system\": \"p-system\"},\n  \"deltas\": [0.01,\n}\n").unwrap();
    let out = tmp.path().join("out");
    assert_eq!(cli(&["front-track", "--scenario", p.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]), 1);
    let err = bdry_fronts_cli::scenario::Scenario::load(&p).unwrap_err();
    assert!(err.to_string().contains("line 4"), "{err}");
    let p2 = tmp.path().join("neg.json");
    fs::write(&p2, r#"{"system":"p-system","initial":{"constant":[1,0]},"boundary":{"constant":[1,0]},"deltas":[-0.1]}"#).unwrap();
    assert_eq!(cli(&["front-track", "--scenario", p2.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]), 1);
    assert_eq!(cli(&["front-track", "--scenario", tmp.path().join("missing.json").to_str().unwrap()]), 1);
    assert_eq!(cli(&["riemann", "--system", "p-system", "--left", "1,0"]), 1);
    assert_eq!(cli(&["no-such-command"]), 1);
}

#[test]
fn solver_failure_is_a_diagnostic() {
    let out = tempfile::tempdir().unwrap();
    // negative specific volume
    let code = cli(&["riemann", "--system", "p-system", "--left", "-1,0", "--right", "1,0", "--out-dir", out.path().to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn riemann_and_boundary_riemann_outputs() {
    let out = tempfile::tempdir().unwrap();
    let o = out.path().to_str().unwrap();
    assert_eq!(cli(&["riemann", "--system", "p-system", "--left", "1,0", "--right", "1.05,-0.02", "--out-dir", o]), 0);
    let fan = csv_rows(&out.path().join("fan.csv"));
    assert_eq!(fan[0], ["xi", "v1", "v2"]);
    assert_eq!(fan.len(), 602);
    assert_eq!(fan[1][1..], ["1", "0"]);
    let waves = csv_rows(&out.path().join("waves.csv"));
    assert_eq!(waves[0], ["family", "kind", "speed_left", "speed_right", "strength"]);
    let b = out.path().join("b");
    let code = cli(&[
        "boundary-riemann",
        "--system",
        "gisclon-coupled",
        "--interior",
        "0,0",
        "--boundary-datum",
        "1,1",
        "--out-dir",
        b.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let states = csv_rows(&b.join("boundary_states.csv"));
    let trace = states.iter().find(|r| r[0] == "trace").unwrap();
    assert!(trace[1].parse::<f64>().unwrap().abs() < 1e-12);
    assert!((trace[2].parse::<f64>().unwrap() - 1.5).abs() < 1e-12);
    assert!(b.join("layer.csv").exists() && b.join("boundary_waves.csv").exists());
}

#[test]
fn empty_estimate_suite() {
    let out = tempfile::tempdir().unwrap();
    assert_eq!(cli(&["estimate-suite", "--runs", "0", "--out-dir", out.path().to_str().unwrap()]), 0);
    let rows = csv_rows(&out.path().join("scatter.csv"));
    assert_eq!(rows, vec![vec!["delta", "run", "tau", "s_abs", "varsigma_neg", "xi_abs", "delta_v", "ratio"]]);
    let rep = report(out.path());
    assert_eq!(metric(&rep, "delta=0.01", "hits"), 0.0);
}

#[test]
fn jobs_do_not_change_results() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let sc = scenarios().join("p_system_steps.json");
    for (dir, jobs) in [(a.path(), "1"), (b.path(), "3")] {
        assert_eq!(cli(&["front-track", "--scenario", sc.to_str().unwrap(), "--jobs", jobs, "--out-dir", dir.to_str().unwrap()]), 0);
    }
    for f in ["report.json", "p-system-delta0.005/profiles.csv", "p-system-delta0.01/interactions.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}
