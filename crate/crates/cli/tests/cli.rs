use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hashlag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hashlag"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const STEP: &str = r#"
horizon = 400
aggregation = 1
start_height = 630000
initial_hashes = "equilibrium"
probe_max_lag = 10

[params]
n = 0.1
el = 5.0

[price]
kind = "step"
before = 160.0
after = 320.0
at = 100
"#;

fn simulate(dir: &Path, scenario: &str, out: &str, extra: &[&str]) -> Output {
    let path = write(dir, "scenario.toml", scenario);
    let out = dir.join(out);
    let mut args = vec!["simulate", "--scenario", &path, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    hashlag(&args)
}

#[test]
fn calc_defaults() {
    let out = hashlag(&["calc"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("19,584 EH/BTC"), "{text}");
    assert!(text.contains("$2,321.88"), "{text}");
    assert!(text.contains("$334,350.00"), "{text}");
}

#[test]
fn calc_custom_inputs() {
    let out = hashlag(&["calc", "--hashrate", "100", "--reward", "3.125", "--price", "60000", "--share", "0.5"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    // 100 × 600 / 3.125 = 19,200; 0.5 × 3.125 × 60,000 = 93,750 per block
    assert!(text.contains("19,200 EH/BTC"), "{text}");
    assert!(text.contains("$93,750.00"), "{text}");
    assert!(text.contains("$13,500,000.00"), "{text}");
}

#[test]
fn calc_usage_errors() {
    assert_eq!(code(&hashlag(&["calc", "--price", "abc"])), 1);
    assert_eq!(code(&hashlag(&["calc", "--price", "-5"])), 1);
    assert_eq!(code(&hashlag(&["calc", "--hashrate", "-1"])), 1);
    assert_eq!(code(&hashlag(&["calc", "--share", "2"])), 1);
    assert_eq!(code(&hashlag(&["frobnicate"])), 1);
    assert_eq!(code(&hashlag(&[])), 1);
    assert_eq!(code(&hashlag(&["--help"])), 0);
    assert_eq!(code(&hashlag(&["--version"])), 0);
}

#[test]
fn simulate_step_response() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(dir.path(), STEP, "run", &[]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let run = dir.path().join("run");
    let trajectory = fs::read_to_string(run.join("trajectory.csv")).unwrap();
    let mut lines = trajectory.lines();
    assert_eq!(
        lines.next().unwrap(),
        "period,price,total_hashes,revenue,variable_cost,excess_profit,reward,hashes_per_bitcoin,clamp_flag"
    );
    assert_eq!(lines.count(), 400);

    let summary = json(&run.join("summary.json"));
    assert_eq!(summary["stability"], "monotone");
    assert_eq!(summary["initial_total_hashes"].as_f64(), Some(200.0));
    // 320 × 6.25 / 5 = 400
    let final_h = summary["final_total_hashes"].as_f64().unwrap();
    assert!((final_h - 400.0).abs() < 1e-6, "{final_h}");
    assert!(summary["best_lag"].as_i64().unwrap() >= 1, "{summary}");
    assert_eq!(summary["clamp_events"].as_u64(), Some(0));
    assert!(summary["halvings"].as_array().unwrap().is_empty());

    let obs = fs::read_to_string(run.join("observations.csv")).unwrap();
    assert!(obs.starts_with("date,price_usd,hashrate_ehs\n2000-01-01,160,"), "{obs}");
}

#[test]
fn simulate_equilibrium_constant_price_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = STEP.replace("after = 320.0", "after = 160.0");
    let out = simulate(dir.path(), &scenario, "run", &[]);
    assert_eq!(code(&out), 0);
    let summary = json(&dir.path().join("run/summary.json"));
    assert_eq!(summary["final_total_hashes"].as_f64(), Some(200.0));
    assert_eq!(summary["final_excess_profit"].as_f64(), Some(0.0));
    assert_eq!(summary["convergence_period"].as_u64(), Some(0));
    // no movement to correlate
    assert!(summary["best_lag"].is_null());
    assert!(summary["probe_note"].as_str().unwrap().contains("degenerate"));
}

#[test]
fn simulate_halving_doubles_hashes_per_bitcoin() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = r#"
horizon = 300
aggregation = 1
start_height = 629900
initial_hashes = "equilibrium"

[params]
n = 0.1
el = 5.0

[price]
kind = "constant"
value = 160.0
"#;
    let out = simulate(dir.path(), scenario, "run", &[]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary = json(&dir.path().join("run/summary.json"));
    assert_eq!(summary["initial_total_hashes"].as_f64(), Some(400.0));
    let halving = &summary["halvings"][0];
    assert_eq!(halving["period"].as_u64(), Some(100));
    assert_eq!(halving["reward_before"].as_f64(), Some(12.5));
    assert_eq!(halving["reward_after"].as_f64(), Some(6.25));
    assert_eq!(halving["hashes_per_bitcoin_ratio"].as_f64(), Some(2.0));
    let final_h = summary["final_total_hashes"].as_f64().unwrap();
    assert!((final_h - 200.0).abs() < 1e-6, "{final_h}");
}

#[test]
fn simulate_daily_aggregation() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = STEP.replace("aggregation = 1\n", "").replace("horizon = 400", "horizon = 1440");
    let out = simulate(dir.path(), &scenario, "run", &[]);
    assert_eq!(code(&out), 0);
    let trajectory = fs::read_to_string(dir.path().join("run/trajectory.csv")).unwrap();
    assert_eq!(trajectory.lines().count(), 11);
    let second: Vec<&str> = trajectory.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(second[0], "144");
    // 144 blocks of 6.25 coins
    assert_eq!(second[6], "900");
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = STEP.replace("at = 100", "at = 100\nvolatility = 0.02");
    for name in ["a", "b"] {
        assert_eq!(code(&simulate(dir.path(), &scenario, name, &["--seed", "42"])), 0);
    }
    assert_eq!(code(&simulate(dir.path(), &scenario, "c", &["--seed", "43"])), 0);
    for file in ["trajectory.csv", "summary.json", "observations.csv"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
    let a = fs::read(dir.path().join("a/trajectory.csv")).unwrap();
    let c = fs::read(dir.path().join("c/trajectory.csv")).unwrap();
    assert_ne!(a, c);
}

#[test]
fn simulate_refuses_divergent() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = STEP.replace("n = 0.1", "n = 0.5");
    let out = simulate(dir.path(), &scenario, "run", &[]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("allow_divergent"), "{}", stderr(&out));
    assert!(!dir.path().join("run/trajectory.csv").exists());

    let allowed = scenario.replace("probe_max_lag = 10", "probe_max_lag = 10\nallow_divergent = true");
    let out = simulate(dir.path(), &allowed, "run", &[]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(json(&dir.path().join("run/summary.json"))["stability"], "divergent");
}

#[test]
fn simulate_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(dir.path(), &STEP.replace("n = 0.1", "n = 0.1\nresponsiveness = 2"), "run", &[]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("responsiveness"), "{}", stderr(&out));

    let out = simulate(dir.path(), &STEP.replace("el = 5.0", "el = -5.0"), "run", &[]);
    assert_eq!(code(&out), 2);

    let missing = dir.path().join("nope.toml");
    let out = hashlag(&["simulate", "--scenario", missing.to_str().unwrap(), "--out", "x"]);
    assert_eq!(code(&out), 2);

    assert_eq!(code(&hashlag(&["simulate", "--out", "x"])), 1);
}

#[test]
fn simulate_replay_prices() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "prices.csv",
        "date,price_usd,hashrate_ehs\n2022-01-01,160,1\n2022-01-02,320,1\n2022-01-03,320,1\n",
    );
    let scenario = r#"
horizon = 3
aggregation = 1
start_height = 630000
initial_hashes = 200.0

[params]
n = 0.1
el = 5.0

[price]
kind = "replay"
file = "prices.csv"
"#;
    let out = simulate(dir.path(), scenario, "run", &[]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let trajectory = fs::read_to_string(dir.path().join("run/trajectory.csv")).unwrap();
    let prices: Vec<&str> = trajectory.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(prices, ["160", "320", "320"]);
    let out = simulate(dir.path(), &scenario.replace("horizon = 3", "horizon = 4"), "run", &[]);
    assert_eq!(code(&out), 2);
}

fn history(prices: &[f64], hashes: &[f64]) -> String {
    let start = chrono::NaiveDate::from_ymd_opt(2019, 1, 1).unwrap();
    let mut text = String::from("date,price_usd,hashrate_ehs\n");
    for (i, (p, h)) in prices.iter().zip(hashes).enumerate() {
        let d = start + chrono::Days::new(i as u64);
        text.push_str(&format!("{d},{p},{h}\n"));
    }
    text
}

/// Deterministic pseudo-random log steps.
fn wiggle(n: usize, seed: u64) -> Vec<f64> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut level = 100.0f64;
    (0..n)
        .map(|_| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let u = (state >> 11) as f64 / (1u64 << 53) as f64;
            level *= (0.04 * (u - 0.5)).exp();
            level
        })
        .collect()
}

fn analyze(dir: &Path, csv: &str, extra: &[&str]) -> (Output, std::path::PathBuf) {
    let input = write(dir, "history.csv", csv);
    let out = dir.join("report");
    let mut args = vec!["analyze", "--input", &input, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    (hashlag(&args), out)
}

#[test]
fn analyze_shifted_copy() {
    let dir = tempfile::tempdir().unwrap();
    let p = wiggle(800, 1);
    let mut h = vec![100.0; 800];
    h[30..].copy_from_slice(&p[..770]);
    let (out, report_dir) = analyze(dir.path(), &history(&p, &h), &["--change", "2019-01-01:2019-12-31"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&report_dir.join("report.json"));
    assert_eq!(report["rows"].as_u64(), Some(800));
    assert_eq!(report["cross_correlation"]["log_changes"]["best_lag"].as_i64(), Some(30));
    assert_eq!(report["windows"][0]["label"], "2019-01-01:2019-12-31");
    assert!(report["windows"][0]["price_pct_change"].is_number());

    let cc = fs::read_to_string(report_dir.join("cross_correlation.csv")).unwrap();
    assert_eq!(cc.lines().next(), Some("lag,levels,log_changes"));
    assert_eq!(cc.lines().count(), 1 + 121);
    let log_price = fs::read_to_string(report_dir.join("log_price.csv")).unwrap();
    assert!(log_price.starts_with("date,log_price\n2019-01-01,"));
    let hpb = fs::read_to_string(report_dir.join("hashes_per_bitcoin.csv")).unwrap();
    assert_eq!(hpb.lines().count(), 801);
}

#[test]
fn analyze_monotone_history() {
    let dir = tempfile::tempdir().unwrap();
    let p: Vec<f64> = (0..600).map(|i| 1000.0 * (0.002 * i as f64).exp()).collect();
    let h: Vec<f64> = (0..600).map(|i| 50.0 + 0.1 * i as f64).collect();
    let (out, report_dir) = analyze(dir.path(), &history(&p, &h), &[]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&report_dir.join("report.json"));
    assert!(report["boundaries"].as_array().unwrap().is_empty());
    assert_eq!(report["segments"].as_array().unwrap().len(), 1);
    assert_eq!(report["segments"][0]["label"], "Period 1");
}

#[test]
fn analyze_short_history_reports_notes() {
    let dir = tempfile::tempdir().unwrap();
    let p = wiggle(50, 2);
    let h = wiggle(50, 3);
    let (out, report_dir) = analyze(dir.path(), &history(&p, &h), &[]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&report_dir.join("report.json"));
    assert!(report["segments"].as_array().unwrap().is_empty());
    let notes = report["notes"].as_array().unwrap();
    assert!(notes.iter().any(|n| n.as_str().unwrap().starts_with("segmentation")), "{notes:?}");
    assert!(report["full_sample"]["correlation_levels"].is_number());
}

#[test]
fn analyze_rejects_bad_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = "date,price_usd,hashrate_ehs\n2022-01-01,100,10\n2022-01-02,-4,10\n2022-01-03,abc,10\n";
    let (out, report_dir) = analyze(dir.path(), csv, &[]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("line 3") && err.contains("line 4"), "{err}");
    assert!(!report_dir.exists());

    let gap = "date,price_usd,hashrate_ehs\n2022-01-01,100,10\n2022-01-03,130,16\n";
    assert_eq!(code(&analyze(dir.path(), gap, &[]).0), 2);
    assert_eq!(code(&analyze(dir.path(), gap, &["--gap-policy", "linear"]).0), 0);
    assert_eq!(code(&analyze(dir.path(), gap, &["--gap-policy", "sideways"]).0), 1);
    assert_eq!(code(&analyze(dir.path(), "when,price\n", &[]).0), 2);
}

#[test]
fn simulate_then_analyze_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = STEP
        .replace("horizon = 400", "horizon = 1500")
        .replace("at = 100", "at = 750\nvolatility = 0.01");
    assert_eq!(code(&simulate(dir.path(), &scenario, "run", &["--seed", "5"])), 0);
    let obs = dir.path().join("run/observations.csv");
    let out_dir = dir.path().join("report");
    let out = hashlag(&[
        "analyze",
        "--input",
        obs.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--max-lag",
        "10",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out_dir.join("report.json"));
    assert_eq!(report["rows"].as_u64(), Some(1500));
    assert!(report["cross_correlation"]["log_changes"]["best_lag"].as_i64().unwrap() >= 1, "{report}");
    assert!(report["granger"]["price_to_hash"]["p"].as_f64().unwrap() < 0.01);
}
