//! Windowed volatility binned by the share of switchers holding information.
//! Runs at zero information cost so the share actually moves.

use switchmarket::experiment::gamma_analysis;
use switchmarket::sim::{run_market, AgentMix, CostPolicy, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cost: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0.0);
    let config = SimConfig { mix: AgentMix::with_switchers(0.30), cost: CostPolicy::Fixed { value: cost }, seed: 4, ..SimConfig::default() };
    let run = run_market(&config)?;
    let table = gamma_analysis(&run, 50, 10)?;
    println!("cost {cost}, {} windows of {} steps", table.windows.len(), table.window);
    for bin in &table.bins {
        match bin.mean_volatility {
            Some(v) => println!("  gamma {:.2}: volatility {v:.3e} over {} windows", bin.center, bin.count),
            None => println!("  gamma {:.2}: empty", bin.center),
        }
    }
    match table.spearman {
        Some(r) => println!("rank correlation between gamma and volatility: {r:+.3}"),
        None => println!("rank correlation undefined (fewer than three occupied bins)"),
    }
    Ok(())
}
