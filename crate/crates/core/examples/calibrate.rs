//! Information-cost calibration: informed-minus-uninformed profit gap over
//! switcher-free runs, fitted with a Gaussian bump.
//!
//! `cargo run --release --example calibrate -- [runs]`

use switchmarket::calibration::{fit_gaussian, run_calibration_campaign, CostDistribution};
use switchmarket::sim::{AgentMix, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let runs: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(40);
    let base = SimConfig { mix: AgentMix::with_switchers(0.0), ..SimConfig::default() };
    let samples = run_calibration_campaign(&base, runs)?;
    let gaps: Vec<f64> = samples.iter().map(|s| s.gap).collect();
    let fit = fit_gaussian(&gaps, None)?;

    println!("{runs} runs, mean gap {:.4}", gaps.iter().sum::<f64>() / runs as f64);
    println!("fit: a {:.2}, b {:.4}, c {:.4} (sd {:.4}), adjusted R^2 {:.3}", fit.a, fit.b, fit.c, fit.sigma, fit.r2_adj);
    let peak = fit.histogram.counts.iter().copied().fold(0.0, f64::max);
    for (x, n) in fit.histogram.centers().iter().zip(&fit.histogram.counts) {
        let bar = "#".repeat((40.0 * n / peak).round() as usize);
        println!("{x:>8.4} {n:>4} {bar}");
    }
    let cost = CostDistribution::from_fit(&fit);
    println!("probability of a negative cost before truncation: {:.2e}", cost.prob_negative());
    Ok(())
}
