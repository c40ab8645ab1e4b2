use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_peckorder");

fn peckorder(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn simulate_small(dir: &Path) {
    let cfg = dir.join("sim.conf");
    fs::write(&cfg, "# small community\nn_residents = 10\nweeks = 40\nseed = 8\n").unwrap();
    let o = peckorder(&[
        "simulate",
        "--out",
        dir.join("data").to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

fn analyze(dir: &Path, extra: &[&str]) -> Output {
    let d = dir.join("data");
    let mut args = vec![
        "analyze".to_string(),
        "--events".into(),
        d.join("events.csv").display().to_string(),
        "--roster".into(),
        d.join("roster.csv").display().to_string(),
        "--out".into(),
        dir.join("out/report.json").display().to_string(),
        "--figures".into(),
        dir.join("out/figures").display().to_string(),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    peckorder(&refs)
}

#[test]
fn simulate_then_analyze() {
    let tmp = tempfile::tempdir().unwrap();
    simulate_small(tmp.path());
    let gt = fs::read_to_string(tmp.path().join("data/ground_truth.csv")).unwrap();
    assert!(gt.starts_with("resident_id,week,latent_rank\n"));

    let o = analyze(tmp.path(), &["--svg"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("peak week"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("out/report.json")).unwrap()).unwrap();
    assert_eq!(report["shape"]["n_nodes"], 10);
    for f in [
        "fig1_network_nodes.csv",
        "fig1_network_edges.csv",
        "fig2_histogram.csv",
        "fig2_kde.csv",
        "fig3_curve.csv",
        "fig4_boxplot.csv",
        "fig5_probcurve.csv",
        "fig5_probcurve.svg",
    ] {
        assert!(tmp.path().join("out/figures").join(f).is_file(), "{f}");
    }
}

#[test]
fn nonconvergence_exits_two_and_still_writes() {
    let tmp = tempfile::tempdir().unwrap();
    simulate_small(tmp.path());
    let o = analyze(tmp.path(), &["--max-iter", "1"]);
    assert_eq!(code(&o), 2);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("out/report.json")).unwrap()).unwrap();
    assert!(!report["metadata"]["nonconverged_weeks"].as_array().unwrap().is_empty());
    assert_eq!(report["shape"]["converged"], false);
}

#[test]
fn input_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("data");
    fs::create_dir_all(&d).unwrap();
    fs::write(d.join("roster.csv"), "resident_id,entry_week,exit_week,graduated\na,0,9,1\nb,0,9,0\n").unwrap();

    fs::write(d.join("events.csv"), "week,corrector_id,corrected_id\n1,a,ghost\n").unwrap();
    let o = analyze(tmp.path(), &[]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown resident ghost"));
    assert!(!tmp.path().join("out/report.json").exists());

    fs::write(d.join("events.csv"), "week,corrector_id,corrected_id\nx,a,b\n").unwrap();
    let o = analyze(tmp.path(), &[]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    fs::remove_file(d.join("events.csv")).unwrap();
    assert_eq!(code(&analyze(tmp.path(), &[])), 1);

    fs::write(d.join("events.csv"), "week,corrector_id,corrected_id\n1,a,b\n").unwrap();
    assert_eq!(code(&analyze(tmp.path(), &["--epsilon", "0"])), 1);
    assert_eq!(code(&analyze(tmp.path(), &["--window", "0"])), 1);
}

#[test]
fn warnings_do_not_fail() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("data");
    fs::create_dir_all(&d).unwrap();
    fs::write(d.join("roster.csv"), "resident_id,entry_week,exit_week,graduated\na,0,9,1\nb,0,9,0\n").unwrap();
    fs::write(d.join("events.csv"), "week,corrector_id,corrected_id,count\n1,a,b,2\n30,b,a,1\n").unwrap();
    let o = analyze(tmp.path(), &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("outside tenure"));
}

#[test]
fn bad_config_key_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.conf");
    fs::write(&cfg, "beds = 3\n").unwrap();
    let o = peckorder(&["simulate", "--out", tmp.path().to_str().unwrap(), "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown key"));
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = tmp.path().join(name);
        let o = peckorder(&["simulate", "--out", out.to_str().unwrap(), "--seed", seed]);
        assert_eq!(code(&o), 0);
        fs::read(out.join("events.csv")).unwrap()
    };
    assert_eq!(run("a", "5"), run("b", "5"));
    assert_ne!(run("a", "5"), run("c", "6"));
}

#[test]
fn selftest_reports_each_suite() {
    let o = peckorder(&["selftest", "--cases", "25"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8_lossy(&o.stdout);
    assert_eq!(out.lines().count(), 9);
    assert!(out.lines().all(|l| l.starts_with("PASS ")));
}
