use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_widthlab"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("widthlab-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn report(out: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

#[test]
fn widths_on_near_round_ellipsoid() {
    let out = scratch("widths");
    let o = run(&["widths", "--surface", "0.95,1.0,1.05"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(&out);
    assert_eq!(r["counterexample"]["verdict"], "Question 1 violated");
    assert_eq!(r["config"]["seed"], 1);
    let widths = fs::read_to_string(out.join("widths.csv")).unwrap();
    assert_eq!(widths.lines().count(), 9);
    assert!(widths.lines().nth(4).unwrap().starts_with("4,W4,"));
    let cands = fs::read_to_string(out.join("candidates.csv")).unwrap();
    assert!(cands.lines().any(|l| l.starts_with("W6,") && l.contains(",g2x2,2,4,0,")));
}

#[test]
fn low_budget_scan_is_flagged() {
    let out = scratch("lowscan");
    let o = run(&["scan", "--budget", "10", "--level", "4", "--seed", "7"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("LOW-CONFIDENCE"));
    let scans = fs::read_to_string(out.join("scans.csv")).unwrap();
    assert_eq!(scans.lines().count(), 9);
    for line in scans.lines().skip(1) {
        assert!(line.contains(",10,7,") && line.ends_with("LOW-CONFIDENCE"), "{line}");
    }
    let dump = fs::read_to_string(out.join("curves/scan_F1.txt")).unwrap();
    assert!(dump.starts_with("# seed 7\n"));
    let cycle = widthlab::io::read_cycle(&dump).unwrap();
    assert!(!cycle.is_empty());
}

#[test]
fn config_file_with_overrides() {
    let out = scratch("config");
    fs::create_dir_all(&out).unwrap();
    let cfg = out.join("lab.cfg");
    fs::write(&cfg, "# near-round run\nsurface = 0.95,1.0,1.05\nseed = 4\ntol.zero_tol = 1e-3\n").unwrap();
    let o = bin()
        .args(["index", "--config"])
        .arg(&cfg)
        .args(["--seed", "5", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(&out);
    assert_eq!(r["config"]["seed"], 5);
    assert_eq!(r["config"]["tolerances"]["zero_tol"], 1e-3);
    assert_eq!(r["search"]["primitive_classes"], 3);
    assert_eq!(r["index"][1]["coarse"]["index"], 3);
}

#[test]
fn config_errors_exit_3() {
    let out = scratch("bad");
    for args in [
        vec!["scan", "--surface", "1,2"],
        vec!["scan", "--level", "2"],
        vec!["widths", "--tol", "nonsense=1"],
        vec!["widths", "--tol", "junction"],
        vec!["index", "--budget", "many"],
        vec!["frobnicate"],
    ] {
        let o = run(&args, &out);
        assert_eq!(o.status.code(), Some(3), "{args:?}");
    }
    let o = bin().args(["scan", "--config", "/nonexistent/widthlab.cfg"]).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn network_check_fixtures_and_files() {
    let out = scratch("network");
    let o = run(&["network-check"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(&out);
    assert_eq!(r["networks"].as_array().unwrap().len(), 12);

    let good = out.join("y.net");
    fs::write(&good, widthlab::io::write_network(&widthlab::network::fixtures::y_network(128).unwrap())).unwrap();
    let o = bin().args(["network-check", "--network"]).arg(&good).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(&out)["networks"][0]["classes"], serde_json::json!(["triple", "triple"]));

    // a non-stationary network is an invariant failure
    let bent = out.join("bent.net");
    fs::write(&bent, widthlab::io::write_network(&widthlab::network::fixtures::bent_y_network(128).unwrap())).unwrap();
    let o = bin().args(["network-check", "--network"]).arg(&bent).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(2));

    let broken = out.join("broken.net");
    fs::write(&broken, "surface 1 1 1\nsegment 3 mult 1\n").unwrap();
    let o = bin().args(["network-check", "--network"]).arg(&broken).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn strict_tolerance_fails_the_cone_check() {
    let out = scratch("cone");
    let o = run(&["cone-check"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let o = run(&["cone-check", "--tol", "cone_growth=1e-6"], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAILED cone mass growth"));
}
