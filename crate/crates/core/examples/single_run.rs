//! One market run with switchers, written to a run directory.
//!
//! `cargo run --release --example single_run -- [out_dir] [rho] [steps]`

use std::path::PathBuf;

use switchmarket::agents::AgentKind;
use switchmarket::output::write_run;
use switchmarket::sim::{run_market, AgentMix, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out/single_run".into()));
    let rho: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.15);
    let steps: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(12_000);

    let config = SimConfig { steps, mix: AgentMix::with_switchers(rho), seed: 1, ..SimConfig::default() };
    let result = run_market(&config)?;
    let files = write_run(&out, &result, 50)?;

    println!("{} steps, {} trades, volatility {:.6}", steps, result.trades.len(), result.volatility());
    for kind in [AgentKind::Informed, AgentKind::Uninformed, AgentKind::ZeroIntelligence, AgentKind::Switcher] {
        if let Some(m) = result.profits.mean(kind) {
            println!("  {:<18} mean order profit {m:+.4}", kind.label());
        }
    }
    if let Some(net) = result.profits.switcher_net_mean() {
        let share = result.gamma.iter().sum::<f64>() / result.gamma.len() as f64;
        println!("  switchers after information cost {net:+.4}, informed share {share:.4}");
    }
    println!("prices written to {}", files.prices.display());
    Ok(())
}
