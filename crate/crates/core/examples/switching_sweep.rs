//! Volatility and per-type returns across switcher shares at a fixed
//! information cost, every mix sharing the same seeds.
//!
//! `cargo run --release --example switching_sweep -- [seeds] [steps]`

use switchmarket::experiment::{run_sweep, ExperimentPlan};
use switchmarket::sim::SimConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seeds: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(5);
    let steps: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(4000);
    let plan = ExperimentPlan::switching(SimConfig { steps, ..SimConfig::default() }, seeds);
    let report = run_sweep(&plan)?;

    let cell = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:+.4}"));
    println!("{:>5} {:>11} {:>9} {:>9} {:>9} {:>9} {:>7}", "rho", "volatility", "informed", "uninf.", "ZI", "switch.", "gamma");
    for m in &report.mixes {
        let r = &m.returns;
        println!(
            "{:>4.0}% {:>11.4e} {:>9} {:>9} {:>9} {:>9} {:>7}",
            m.rho * 100.0,
            m.mean_volatility,
            cell(r.informed),
            cell(r.uninformed),
            cell(r.zero_intelligence),
            cell(r.switcher_net),
            m.mean_gamma.map_or_else(|| "-".into(), |g| format!("{g:.4}")),
        );
    }
    Ok(())
}
