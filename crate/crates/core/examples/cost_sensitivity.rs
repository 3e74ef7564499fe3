//! How the information cost drives switching: informed share, volatility and
//! switcher returns at rho = 30% for a range of fixed costs.
//!
//! `cargo run --release --example cost_sensitivity -- [seeds] [steps]`

use rayon::prelude::*;
use switchmarket::experiment::TypeReturns;
use switchmarket::rng::derive_seed;
use switchmarket::sim::{run_market, AgentMix, CostPolicy, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seeds: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(4);
    let steps: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(4000);

    println!("{:>6} {:>8} {:>11} {:>10} {:>10}", "cost", "gamma", "volatility", "switch.net", "uninf.");
    for cost in [0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.36] {
        let rows: Vec<(f64, f64, f64, f64)> = (0..seeds)
            .into_par_iter()
            .map(|k| {
                let config = SimConfig {
                    steps,
                    seed: derive_seed(0, k),
                    mix: AgentMix::with_switchers(0.30),
                    cost: CostPolicy::Fixed { value: cost },
                    ..SimConfig::default()
                };
                let run = run_market(&config).expect("valid config");
                let baseline = run_market(&SimConfig { mix: AgentMix::with_switchers(0.0), ..config }).expect("valid config");
                let gamma = run.gamma.iter().sum::<f64>() / run.gamma.len() as f64;
                let net = TypeReturns::of(&run).switcher_net.unwrap_or(f64::NAN);
                let uninformed = TypeReturns::of(&baseline).uninformed.unwrap_or(f64::NAN);
                (gamma, run.volatility(), net, uninformed)
            })
            .collect();
        let avg = |f: fn(&(f64, f64, f64, f64)) -> f64| rows.iter().map(f).sum::<f64>() / rows.len() as f64;
        println!(
            "{cost:>6.2} {:>8.4} {:>11.4e} {:>+10.4} {:>+10.4}",
            avg(|r| r.0),
            avg(|r| r.1),
            avg(|r| r.2),
            avg(|r| r.3)
        );
    }
    println!("last column: uninformed traders in the matching switcher-free market");
    Ok(())
}
