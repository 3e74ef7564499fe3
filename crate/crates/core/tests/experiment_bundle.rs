use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use switchmarket::experiment::{gamma_analysis, reproduce, GammaTable, GammaWindow, ReproduceOptions};
use switchmarket::sim::{run_market, AgentMix, CostPolicy, SimConfig};

fn small_options() -> ReproduceOptions {
    ReproduceOptions {
        calibration_runs: 30,
        sweep_seeds: 2,
        baseline_seeds: 2,
        ..ReproduceOptions::smoke(SimConfig { steps: 1500, lag: 300, seed: 9, ..SimConfig::default() })
    }
}

/// Every file under `dir` (except checkpoints) with its bytes.
fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                if !path.ends_with("stages") {
                    stack.push(path);
                }
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

#[test]
fn bundle_layout_and_reruns() {
    let options = small_options();
    let first = tempfile::tempdir().unwrap();
    let bundle = reproduce(first.path(), &options).unwrap();
    assert_eq!(bundle.tables.len(), 9);
    assert_eq!(bundle.figures.len(), 8);
    for path in bundle.tables.iter().chain(&bundle.figures).chain([&bundle.report]) {
        assert!(fs::metadata(path).unwrap().len() > 0, "{}", path.display());
    }
    assert!(bundle.resumed.is_empty());

    // a fresh directory gives the same bytes
    let second = tempfile::tempdir().unwrap();
    reproduce(second.path(), &options).unwrap();
    let reference = snapshot(first.path());
    assert_eq!(reference, snapshot(second.path()));

    // an interrupted run picks up the finished stages
    fs::remove_file(second.path().join("stages").join("sweep.json")).unwrap();
    let resumed = reproduce(second.path(), &options).unwrap();
    assert_eq!(resumed.resumed, vec!["calibration", "baseline"]);
    assert_eq!(reference, snapshot(second.path()));

    // changed options invalidate the checkpoints
    let other = ReproduceOptions { gamma_bins: 5, ..options };
    let redone = reproduce(second.path(), &other).unwrap();
    assert!(redone.resumed.is_empty());
}

#[test]
fn shuffled_gamma_has_no_rank_structure() {
    let config = SimConfig {
        steps: 4000,
        lag: 300,
        seed: 2,
        mix: AgentMix::with_switchers(0.3),
        cost: CostPolicy::Fixed { value: 0.0 },
        ..SimConfig::default()
    };
    let table = gamma_analysis(&run_market(&config).unwrap(), 50, 10).unwrap();
    assert!(table.occupied_bins() >= 3, "{:?}", table.bins);
    let mut gammas: Vec<f64> = table.windows.iter().map(|w| w.gamma).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let resamples = 100;
    let mut total = 0.0;
    let mut defined = 0;
    for _ in 0..resamples {
        gammas.shuffle(&mut rng);
        let windows: Vec<GammaWindow> =
            table.windows.iter().zip(&gammas).map(|(w, &gamma)| GammaWindow { gamma, volatility: w.volatility }).collect();
        if let Some(r) = GammaTable::from_windows(50, 10, windows).spearman {
            total += r;
            defined += 1;
        }
    }
    assert_eq!(defined, resamples);
    let mean = total / defined as f64;
    assert!(mean.abs() < 0.2, "{mean}");
}

fn cli(args: &[&str]) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_switchmarket")).args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

#[test]
fn command_line_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let run_dir = dir.path().join("run");
    let run = run_dir.to_str().unwrap();
    cli(&["run", "--rho", "0.15", "--steps", "800", "--seed", "4", "--out", run]);
    for name in ["prices.csv", "trades.csv", "profits.json", "config.json", "stats.json", "ga_trace.csv"] {
        assert!(run_dir.join(name).exists(), "{name}");
    }
    let prices = run_dir.join("prices.csv");
    let stats_file = dir.path().join("again.json");
    cli(&["stats", "--in", prices.to_str().unwrap(), "--out", stats_file.to_str().unwrap()]);
    let a: serde_json::Value = serde_json::from_slice(&fs::read(run_dir.join("stats.json")).unwrap()).unwrap();
    let b: serde_json::Value = serde_json::from_slice(&fs::read(&stats_file).unwrap()).unwrap();
    assert_eq!(a, b);
    cli(&["gamma", "--in", prices.to_str().unwrap(), "--out", run, "--window", "40"]);
    assert!(run_dir.join("gamma.json").exists());

    let help = String::from_utf8(cli(&["--help"]).stdout).unwrap();
    for sub in ["run", "calibrate", "stats", "sweep", "gamma", "reproduce"] {
        assert!(help.contains(sub), "{sub}");
    }
}

#[test]
fn command_line_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_switchmarket"))
        .args(["stats", "--in", missing.to_str().unwrap(), "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    let out = Command::new(env!("CARGO_BIN_EXE_switchmarket"))
        .args(["run", "--rho", "0.5", "--steps", "10", "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
