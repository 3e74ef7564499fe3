//! Statistics battery on a switcher-free run: moments, ARCH-LM, ACF and Hurst
//! for market and fundamental returns.

use switchmarket::sim::{run_market, AgentMix, SimConfig};
use switchmarket::stats::{SeriesReport, StatsReport};

fn print(name: &str, r: &SeriesReport) {
    let d = &r.descriptive;
    println!("{name}");
    println!("  mean {:.3e}  std {:.3e}  skew {:.3}  kurtosis {:.2}  JB {:.1} (p {:.2e})", d.mean, d.std, d.skewness, d.kurtosis, d.jarque_bera, d.jb_pvalue);
    println!("  ARCH b {:.4} (t {:.2}, p {:.2e}), F {:.2}", r.arch.b.estimate, r.arch.b.t_stat, r.arch.b.p_value, r.arch.f_stat);
    println!(
        "  ACF lag 1 {:.3}, inside band {:.0}%; abs-return ACF positive {:.0}%",
        r.acf_returns.values[0],
        100.0 * r.acf_returns.fraction_inside_band(),
        100.0 * r.acf_abs_returns.fraction_positive()
    );
    println!("  Hurst R/S {:.3}, DFA {:.3}", r.hurst_rs, r.hurst_dfa);
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = SimConfig { mix: AgentMix::with_switchers(0.0), seed: 3, ..SimConfig::default() };
    let run = run_market(&config)?;
    let report = StatsReport::from_paths(&run.prices, &run.fundamental, 50)?;
    print("market returns", &report.market);
    print("fundamental returns", &report.fundamental);
    Ok(())
}
