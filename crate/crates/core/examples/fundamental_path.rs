//! Compound Poisson fundamental value: one path with each jump law and the
//! sample moments of its increments.

use switchmarket::fundamental::{FundamentalProcess, JumpDist};
use switchmarket::rng::{stream, Stream};
use switchmarket::stats::{describe, hurst_rs, log_returns};

fn main() {
    for dist in [JumpDist::Uniform, JumpDist::TwoPoint] {
        let process = FundamentalProcess::new(4.0, 0.01, dist);
        let path = process.generate_path(20.0, 12_000, &mut stream(7, Stream::Fundamental));
        let inc: Vec<f64> = path.values.windows(2).map(|w| w[1] - w[0]).collect();
        let var = inc.iter().map(|x| x * x).sum::<f64>() / inc.len() as f64;
        let d = describe(&log_returns(&path.values)).expect("long path");
        println!(
            "{dist:?}: final {:.2}, min {:.2}, max {:.2}, increment variance {:.3e}, return kurtosis {:.2}, H {:.3}",
            path.values.last().unwrap(),
            path.values.iter().copied().fold(f64::MAX, f64::min),
            path.values.iter().copied().fold(f64::MIN, f64::max),
            var,
            d.kurtosis,
            hurst_rs(&log_returns(&path.values)).expect("long path"),
        );
    }
    println!("expected increment variance: uniform {:.3e}, two-point {:.3e}", 4.0 * 1e-4 / 3.0, 4.0 * 1e-4);
}
