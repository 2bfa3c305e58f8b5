use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn aoa(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aoa"))
        .args(args)
        .current_dir(dir)
        .env_remove("AOA_SEED")
        .output()
        .expect("spawn aoa")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Bearing from the source towards each sensor, computed directly.
fn exact_planar_file(source: (f64, f64), sensors: &[(f64, f64)]) -> String {
    sensors.iter().map(|&(x, y)| format!("{x} {y} {:?}\n", (y - source.1).atan2(x - source.0))).collect()
}

fn parse_estimate(report: &str) -> Vec<f64> {
    let line = report.lines().find(|l| l.starts_with("estimate:")).expect("estimate line");
    line["estimate:".len()..].split(',').map(|kv| kv.split('=').nth(1).unwrap().trim().parse().unwrap()).collect()
}

const SMALL: &str = r#"
[[scenario]]
name = "small"
source = [60.0, 10.0]
noise = { sigma_a = 0.2 }
n = [20, 40]
estimators = ["PLS", "BELS+GN", "BELS(vhat)+GN"]
runs = 30
base_seed = 11

[scenario.array]
kind = "replicated"
sites = [[0.0, 0.0], [100.0, 0.0], [0.0, 100.0], [100.0, 100.0]]
"#;

#[test]
fn exact_bearings_give_the_intersection() {
    let dir = TempDir::new().unwrap();
    let text = exact_planar_file((60.0, 10.0), &[(0.0, 0.0), (100.0, 0.0), (0.0, 100.0), (100.0, 100.0)]);
    std::fs::write(dir.path().join("m.txt"), text).unwrap();
    for est in ["pls", "bels", "two-step"] {
        let o = aoa(&["estimate", "m.txt", "--estimator", est, "--sigma-a", "0"], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
        let p = parse_estimate(&stdout(&o));
        assert!((p[0] - 60.0).abs() < 1e-6 && (p[1] - 10.0).abs() < 1e-6, "{est}: {p:?}");
    }
}

#[test]
fn estimate_output_is_deterministic_and_reports_bound() {
    let dir = TempDir::new().unwrap();
    let s = aoa(&["synth", "--preset", "paper-2d-fixed", "--n", "100", "--seed", "5", "--out", "m.txt"], dir.path());
    assert!(s.status.success(), "{}", stderr(&s));
    let a = aoa(&["estimate", "m.txt", "--sigma-a", "0.2"], dir.path());
    let b = aoa(&["estimate", "m.txt", "--sigma-a", "0.2"], dir.path());
    assert_eq!(a.stdout, b.stdout);
    let report = stdout(&a);
    assert!(report.contains("rcrlb (supplied sigma"), "{report}");
    let unknown = stdout(&aoa(&["estimate", "m.txt"], dir.path()));
    assert!(unknown.contains("estimated from data"), "{unknown}");
}

#[test]
fn malformed_row_exits_2_naming_the_row() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("bad.txt"), "0 0 0.1\n10 0 0.2\n5 oops 1\n").unwrap();
    let o = aoa(&["estimate", "bad.txt"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.txt:3:"), "{}", stderr(&o));
    let missing = aoa(&["estimate", "nope.txt"], dir.path());
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn degenerate_geometry_exits_3() {
    let dir = TempDir::new().unwrap();
    // Every sensor on one line through the source.
    let text = exact_planar_file((50.0, 0.0), &[(0.0, 0.0), (10.0, 0.0), (20.0, 0.0), (100.0, 0.0)]);
    std::fs::write(dir.path().join("line.txt"), text).unwrap();
    let o = aoa(&["estimate", "line.txt", "--estimator", "pls"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
}

#[test]
fn campaign_csv_header_and_rows() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("c.toml"), SMALL).unwrap();
    let o = aoa(&["campaign", "c.toml", "--jobs", "2"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["scenario", "n", "estimator", "bias", "rmse", "rcrlb", "runs", "failures", "seed"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert!(r[4].parse::<f64>().unwrap() > 0.0);
        assert!(r[5].parse::<f64>().unwrap() > 0.0);
        assert_eq!(&r[8], "11");
    }
    assert!(stderr(&o).contains("rmse/rcrlb"));
}

#[test]
fn campaign_rerun_is_byte_identical_across_job_counts() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("c.toml"), SMALL).unwrap();
    let a = aoa(&["campaign", "c.toml", "--jobs", "1", "--out", "a.csv", "--dump", "da.csv"], dir.path());
    let b = aoa(&["campaign", "c.toml", "--jobs", "3", "--out", "b.csv", "--dump", "db.csv"], dir.path());
    assert!(a.status.success() && b.status.success());
    let read = |f: &str| std::fs::read(dir.path().join(f)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_eq!(read("da.csv"), read("db.csv"));
    // header plus 2 n values x 3 estimators x 30 runs
    assert_eq!(String::from_utf8(read("da.csv")).unwrap().lines().count(), 1 + 2 * 3 * 30);
}

#[test]
fn seed_override_from_environment() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("c.toml"), SMALL).unwrap();
    let run = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_aoa"))
            .args(["campaign", "c.toml", "--runs", "5"])
            .current_dir(dir.path())
            .env("AOA_SEED", seed)
            .output()
            .unwrap()
    };
    let o = run("99");
    assert!(o.status.success());
    assert!(stdout(&o).lines().skip(1).all(|l| l.ends_with(",99")));
    assert_eq!(run("not-a-number").status.code(), Some(2));
}

#[test]
fn empty_scenario_list_exits_2() {
    let dir = TempDir::new().unwrap();
    assert_eq!(aoa(&["campaign"], dir.path()).status.code(), Some(2));
    std::fs::write(dir.path().join("empty.toml"), "[output]\njobs = 1\n").unwrap();
    assert_eq!(aoa(&["campaign", "empty.toml"], dir.path()).status.code(), Some(2));
    std::fs::write(dir.path().join("typo.toml"), SMALL.replace("runs = 30", "rnus = 30")).unwrap();
    let o = aoa(&["campaign", "typo.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("rnus"));
}

#[test]
fn check_fails_with_exit_4_on_invalid_cells() {
    let dir = TempDir::new().unwrap();
    // Sensors on a line through the source: every run is degenerate.
    let cfg = r#"
[[scenario]]
name = "line"
source = [50.0, 0.0]
noise = { sigma_a = 0.0 }
n = [4]
estimators = ["BELS+GN"]
runs = 10
base_seed = 1
array = { kind = "fixed", positions = [[0.0, 0.0], [10.0, 0.0], [20.0, 0.0], [100.0, 0.0]] }
"#;
    std::fs::write(dir.path().join("c.toml"), cfg).unwrap();
    let o = aoa(&["campaign", "c.toml", "--check"], dir.path());
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).contains("check failed"));
    assert!(stdout(&o).lines().nth(1).unwrap().ends_with(",0,10,1"));
    // Without --check the same campaign reports and succeeds.
    assert_eq!(aoa(&["campaign", "c.toml"], dir.path()).status.code(), Some(0));
}

#[test]
fn check_passes_near_the_bound() {
    let dir = TempDir::new().unwrap();
    let cfg = SMALL
        .replace("n = [20, 40]", "n = [400, 2000]")
        .replace("runs = 30", "runs = 300")
        .replace(r#"["PLS", "BELS+GN", "BELS(vhat)+GN"]"#, r#"["BELS+GN"]"#);
    std::fs::write(dir.path().join("c.toml"), cfg).unwrap();
    let o = aoa(&["campaign", "c.toml", "--check"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("check: ok"));
}

#[test]
fn bench_csv_parses() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("c.toml"), SMALL).unwrap();
    let o = aoa(&["bench", "c.toml", "--reps", "3"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["scenario", "n", "estimator", "median_seconds", "ratio_to_first_n"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert!(r[3].parse::<f64>().unwrap() >= 0.0);
    }
    // The first n of each estimator is its own reference.
    assert!(rows.iter().filter(|r| &r[1] == "20").all(|r| &r[4] == "1.0000"));
}

#[test]
fn printed_config_round_trips() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("c.toml"), SMALL).unwrap();
    let first = aoa(&["campaign", "c.toml", "--preset", "paper-3d-coplanar", "--print-config"], dir.path());
    assert!(first.status.success(), "{}", stderr(&first));
    std::fs::write(dir.path().join("resolved.toml"), &first.stdout).unwrap();
    let second = aoa(&["campaign", "resolved.toml", "--print-config"], dir.path());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn synthesized_file_round_trips_through_estimate() {
    let dir = TempDir::new().unwrap();
    let s = aoa(&["synth", "--preset", "paper-3d-noncoplanar", "--n", "1000", "--seed", "2", "--out", "m.txt"], dir.path());
    assert!(s.status.success(), "{}", stderr(&s));
    let o = aoa(&["estimate", "m.txt", "--sigma-a", "0.2", "--sigma-e", "0.2"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let p = parse_estimate(&stdout(&o));
    let err = ((p[0] - 60.0).powi(2) + (p[1] - 10.0).powi(2) + (p[2] - 10.0).powi(2)).sqrt();
    assert!(err < 5.0, "{p:?}");
    let bad = aoa(&["synth", "--preset", "paper-3d-noncoplanar", "--n", "7"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
}
