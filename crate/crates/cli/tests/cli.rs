use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nodoid(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nodoid"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

#[test]
fn barrier_figure_profile_with_given_c() {
    let dir = tempfile::tempdir().unwrap();
    let o = nodoid(&["barrier", "--dim", "2", "--h", "0.3333333", "--r", "1", "--c", "1.3333333"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let params = read_json(&dir.path().join("params.json"));
    let p = &params["profile"];
    assert!((p["a"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!((p["b"].as_f64().unwrap() - 4.0).abs() < 1e-6);
    assert!((p["t0"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert_eq!(p["C2"], "inf");
    let (header, rows) = csv_rows(&dir.path().join("profile.csv"));
    assert_eq!(header, ["t", "p", "p_prime"]);
    assert_eq!(rows.len(), 401);
    // rises to the apex at t = 2, then falls while staying positive up to 2 t0 - r
    let ps: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    let top = ps.iter().cloned().fold(f64::MIN, f64::max);
    let last: f64 = rows.last().unwrap()[0].parse().unwrap();
    assert!((last - 3.0).abs() < 1e-6);
    assert!(ps[0].abs() < 1e-12 && ps[1..].iter().all(|&p| p > 0.0));
    assert!((top - 0.756).abs() < 1e-3 && *ps.last().unwrap() < top - 0.1);
    let svg = std::fs::read_to_string(dir.path().join("profile.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
}

#[test]
fn barrier_rejects_h_above_the_bound() {
    let dir = tempfile::tempdir().unwrap();
    let o = nodoid(&["barrier", "--dim", "2", "--h", "0.3333333", "--r", "1", "--R", "3.9"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bound"));
    let o = nodoid(&["barrier", "--h", "0.9", "--r", "1", "--R", "2"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(!dir.path().join("profile.csv").exists());
}

#[test]
fn barrier_catenary_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = nodoid(&["barrier", "--dim", "2", "--h", "0", "--r", "1", "--R", "5"], dir.path());
    assert_eq!(code(&o), 0);
    let c = read_json(&dir.path().join("params.json"))["profile"]["c"].as_f64().unwrap();
    let (_, rows) = csv_rows(&dir.path().join("profile.csv"));
    let base = (1.0 / c).acosh();
    for r in rows {
        let (t, p): (f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        assert!((p - c * ((t / c).acosh() - base)).abs() < 1e-8, "t = {t}");
    }
}

#[test]
fn check_exit_codes_follow_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let o = nodoid(&["check", "--annulus", "1,2", "--h", "-0.3"], dir.path());
    assert_eq!(code(&o), 0);
    let report = read_json(&dir.path().join("conditions.json"));
    assert_eq!(report["overall"], "existence-guaranteed");
    assert_eq!(report["checks"][0]["name"], "annulus_smallness");

    let o = nodoid(&["check", "--annulus", "1,1.1", "--h", "25"], dir.path());
    assert_eq!(code(&o), 2);
    assert_eq!(read_json(&dir.path().join("conditions.json"))["overall"], "necessary-condition-violated");

    let o = nodoid(&["check", "--rect", "10,1", "--h", "0.5"], dir.path());
    assert_eq!(code(&o), 0);
}

#[test]
fn config_file_overrides_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"domain": {"kind": "annulus", "r_in": 1, "r_out": 2}, "curvature": {"kind": "constant", "h": -0.3}}"#,
    )
    .unwrap();
    let o = nodoid(&["check", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    // flags are overridden by the file
    let bcfg = dir.path().join("barrier.json");
    std::fs::write(&bcfg, r#"{"h": 0.9}"#).unwrap();
    let o = nodoid(&["barrier", "--h", "0.3", "--r", "1", "--R", "2", "--config", bcfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2);

    std::fs::write(&cfg, r#"{"domian": {"kind": "disc", "radius": 1}}"#).unwrap();
    assert_eq!(code(&nodoid(&["check", "--h", "1", "--config", cfg.to_str().unwrap()], dir.path())), 64);
    std::fs::write(&cfg, "{ not json").unwrap();
    assert_eq!(code(&nodoid(&["check", "--config", cfg.to_str().unwrap()], dir.path())), 64);
    assert_eq!(code(&nodoid(&["check", "--h", "1"], dir.path())), 64);
    assert_eq!(code(&nodoid(&["solve", "--disc", "1", "--annulus", "1,2", "--h", "1"], dir.path())), 64);
    assert_eq!(code(&nodoid(&["frobnicate"], dir.path())), 64);
}

#[test]
fn solve_writes_solution_and_report_deterministically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["solve", "--annulus", "1,2", "--h", "-0.3", "--nodes", "33"];
    assert_eq!(code(&nodoid(&args, a.path())), 0);
    assert_eq!(code(&nodoid(&args, b.path())), 0);
    for f in ["solution.csv", "report.json", "solution.svg"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let report = read_json(&a.path().join("report.json"));
    assert_eq!(report["status"], "converged");
    assert!(report["residual_inf"].as_f64().unwrap() <= 1e-10);
    assert_eq!(report["trace"]["steps"].as_array().unwrap().len(), 11);
    assert_eq!(report["hypotheses"]["monotone"], "pass");
    let (header, rows) = csv_rows(&a.path().join("solution.csv"));
    assert_eq!(header, ["x", "y", "f"]);
    assert!(rows.iter().all(|r| r[2].parse::<f64>().unwrap() >= -1e-9));
}

#[test]
fn solve_flags_nonzero_boundary_data() {
    let dir = tempfile::tempdir().unwrap();
    let o = nodoid(&["solve", "--disc", "1", "--h", "0", "--g", "0.5", "--nodes", "17"], dir.path());
    assert_eq!(code(&o), 0);
    let report = read_json(&dir.path().join("report.json"));
    assert_eq!(report["boundary"]["zero"], false);
    assert!(report["boundary"]["note"].as_str().unwrap().contains("no existence guarantee"));
}

#[test]
fn solve_stalls_beyond_the_inscribed_disc_limit() {
    let dir = tempfile::tempdir().unwrap();
    let o = nodoid(&["solve", "--disc", "1", "--h", "1.2", "--nodes", "33"], dir.path());
    assert_eq!(code(&o), 3);
    let report = read_json(&dir.path().join("report.json"));
    assert_eq!(report["status"], "stalled");
    assert_eq!(report["failure"]["label"], "numerical");
    assert!(report["failure"]["t_star"].as_f64().unwrap() < 1.0);
    assert!(!dir.path().join("solution.csv").exists());
}

#[test]
fn verify_annulus_estimates() {
    let dir = tempfile::tempdir().unwrap();
    let o = nodoid(&["verify", "--annulus", "1,2", "--h", "-0.3", "--nodes", "33"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&dir.path().join("estimates.json"));
    assert_eq!(r["height_verdict"], "pass");
    assert_eq!(r["boundary_gradient_verdict"], "pass");
    assert!(r["c0_actual"].as_f64().unwrap() <= r["c0_bound"].as_f64().unwrap());
    assert_eq!(r["coarse_nodes"], 17);
    // nonzero boundary data are refused
    assert_eq!(code(&nodoid(&["verify", "--annulus", "1,2", "--h", "-0.3", "--g", "1"], dir.path())), 64);
}

#[test]
fn nonexist_sweep_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = nodoid(&["nonexist", "--dim", "2", "--h", "1", "--outer", "1"], dir.path());
    assert_eq!(code(&o), 0);
    let (header, rows) = csv_rows(&dir.path().join("sweep.csv"));
    assert_eq!(header, ["epsilon", "exists", "sup_p", "bound"]);
    let mut seen_missing = false;
    for r in &rows {
        let exists: bool = r[1].parse().unwrap();
        if exists {
            assert!(!seen_missing, "existence after nonexistence");
            let (sup, bound): (f64, f64) = (r[2].parse().unwrap(), r[3].parse().unwrap());
            assert!(sup <= bound + 1e-9);
        } else {
            seen_missing = true;
        }
    }
    assert!(seen_missing);
    let summary = read_json(&dir.path().join("sweep.json"));
    assert_eq!(summary["flips"], 1);
    assert!(summary["epsilon_star"].is_array());
}

#[test]
fn blowup_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = nodoid(&["blowup", "--eps", "1,0.1,0.01"], dir.path());
    assert_eq!(code(&o), 0);
    let (header, rows) = csv_rows(&dir.path().join("blowup.csv"));
    assert_eq!(header, ["epsilon", "fprime0", "H_bound", "minHz"]);
    let fp: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(fp, ["1", "10", "100"]);
    assert!(rows.iter().all(|r| r[3].parse::<f64>().unwrap() < 0.0));
    assert_eq!(code(&nodoid(&["blowup", "--eps", "0"], dir.path())), 64);
}
