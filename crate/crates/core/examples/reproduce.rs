//! End-to-end bundle at smoke scale: calibration, stylized facts, switching
//! sweep at the calibrated cost, tables, figure data and a report.
//!
//! `cargo run --release --example reproduce -- [out_dir]`

use std::path::PathBuf;

use switchmarket::experiment::{reproduce, ReproduceOptions};
use switchmarket::sim::SimConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/bundle".into()));
    let bundle = reproduce(&dir, &ReproduceOptions::smoke(SimConfig::default()))?;
    println!("calibrated cost {:.4} (adjusted R^2 {:.3})", bundle.calibration.fit.b, bundle.calibration.fit.r2_adj);
    for path in bundle.tables.iter().chain(&bundle.figures) {
        println!("  {}", path.display());
    }
    println!("report: {}", bundle.report.display());
    if !bundle.resumed.is_empty() {
        println!("reused checkpoints: {}", bundle.resumed.join(", "));
    }
    Ok(())
}
