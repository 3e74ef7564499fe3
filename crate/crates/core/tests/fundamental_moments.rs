use proptest::prelude::*;
use switchmarket::fundamental::{FundamentalProcess, JumpDist};
use switchmarket::rng::{stream, Stream};

const DRAWS: usize = 1_000_000;

fn increments(dist: JumpDist, seed: u64) -> Vec<f64> {
    let process = FundamentalProcess::new(4.0, 0.01, dist);
    // far from zero so the positivity clamp never fires
    let path = process.generate_path(1000.0, DRAWS, &mut stream(seed, Stream::Fundamental));
    assert_eq!(path.clamped_steps, 0);
    path.values.windows(2).map(|w| w[1] - w[0]).collect()
}

fn moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

#[test]
fn uniform_jumps_match_compound_poisson_moments() {
    // Var = rate * E[d^2] = 4 * 0.01^2 / 3
    let expected_var = 4.0 * 0.01_f64.powi(2) / 3.0;
    let (mean, var) = moments(&increments(JumpDist::Uniform, 1));
    assert!((var / expected_var - 1.0).abs() < 0.05, "variance {var} vs {expected_var}");
    let se = (expected_var / DRAWS as f64).sqrt();
    assert!(mean.abs() < 3.0 * se, "mean {mean} vs 3 SE {}", 3.0 * se);
}

#[test]
fn two_point_jumps_match_compound_poisson_moments() {
    let expected_var = 4.0 * 0.01_f64.powi(2);
    let (mean, var) = moments(&increments(JumpDist::TwoPoint, 2));
    assert!((var / expected_var - 1.0).abs() < 0.05, "variance {var} vs {expected_var}");
    assert!(mean.abs() < 3.0 * (expected_var / DRAWS as f64).sqrt());
}

#[test]
fn default_path_is_a_modest_random_walk() {
    let process = FundamentalProcess::new(4.0, 0.01, JumpDist::Uniform);
    for seed in 0..5 {
        let path = process.generate_path(20.0, 12_000, &mut stream(seed, Stream::Fundamental));
        assert_eq!(path.values.len(), 12_001);
        assert!(path.values.iter().all(|v| *v > 0.0));
        let max_dev = path.values.iter().map(|v| (v - 20.0).abs()).fold(0.0, f64::max);
        // sd of the endpoint is about 1.26; five sd is far outside anything plausible
        assert!(max_dev < 6.5, "seed {seed}: {max_dev}");
    }
}

proptest! {
    #[test]
    fn increments_bounded_by_jump_count(seed in any::<u64>(), v0 in 0.02f64..50.0, two_point in any::<bool>()) {
        let dist = if two_point { JumpDist::TwoPoint } else { JumpDist::Uniform };
        let process = FundamentalProcess::new(4.0, 0.01, dist);
        let mut rng = stream(seed, Stream::Fundamental);
        let mut v = v0;
        for _ in 0..200 {
            let step = process.step(v, &mut rng);
            prop_assert!(step.value > 0.0);
            if !step.clamped {
                prop_assert!((step.value - v).abs() <= step.jumps as f64 * 0.01 + 1e-12);
            }
            v = step.value;
        }
    }
}
