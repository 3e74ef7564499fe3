//! Information-cost calibration.
//!
//! Markets without switchers are run repeatedly; each run contributes the gap
//! between the informed and uninformed mean order profit. A Gaussian bump
//! `a * exp(-((x - b) / c)^2)` is then fitted to the histogram of gaps by
//! Levenberg-Marquardt, and the fit defines the cost distribution used in
//! later experiments.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::agents::AgentKind;
use crate::rng::derive_seed;
use crate::sim::{run_market, ConfigError, SimConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalibrationError {
    #[error("calibration markets must not contain switchers (fraction {0})")]
    SwitchersPresent(f64),
    #[error("run with seed {seed} executed no {kind:?} orders")]
    MissingProfits { seed: u64, kind: AgentKind },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("need at least {need} samples to fit, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("fit did not converge after {iterations} iterations (last a={a}, b={b}, c={c})")]
    NonConvergence { iterations: usize, a: f64, b: f64, c: f64 },
}

pub const MIN_FIT_SAMPLES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostSample {
    pub seed: u64,
    /// Informed minus uninformed mean order profit.
    pub gap: f64,
}

/// Run `n_runs` switcher-free markets with seeds derived from `base.seed`.
pub fn run_calibration_campaign(base: &SimConfig, n_runs: usize) -> Result<Vec<CostSample>, CalibrationError> {
    if base.mix.switchers != 0.0 {
        return Err(CalibrationError::SwitchersPresent(base.mix.switchers));
    }
    base.validate()?;
    (0..n_runs as u64)
        .into_par_iter()
        .map(|k| {
            let seed = derive_seed(base.seed, k);
            let result = run_market(&SimConfig { seed, ..base.clone() })?;
            let informed = result
                .profits
                .mean(AgentKind::Informed)
                .ok_or(CalibrationError::MissingProfits { seed, kind: AgentKind::Informed })?;
            let uninformed = result
                .profits
                .mean(AgentKind::Uninformed)
                .ok_or(CalibrationError::MissingProfits { seed, kind: AgentKind::Uninformed })?;
            Ok(CostSample { seed, gap: informed - uninformed })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<f64>,
}

impl Histogram {
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn build(samples: &[f64], bins: usize) -> Histogram {
        let bins = bins.max(1);
        let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
        let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut counts = vec![0.0; bins];
        for &x in samples {
            let i = (((x - lo) / width) as usize).min(bins - 1);
            counts[i] += 1.0;
        }
        Histogram { edges, counts }
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (i, frac) = (pos.floor() as usize, pos.fract());
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

/// Bin count from the Freedman-Diaconis width `2 IQR n^(-1/3)`, kept within 5..=100.
pub fn freedman_diaconis_bins(samples: &[f64]) -> usize {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let range = sorted[sorted.len() - 1] - sorted[0];
    if !(iqr > 0.0) || !(range > 0.0) {
        return 5;
    }
    let width = 2.0 * iqr / (samples.len() as f64).cbrt();
    ((range / width).ceil() as usize).clamp(5, 100)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub a: f64,
    pub b: f64,
    /// Width in the `exp(-((x - b) / c)^2)` form; the standard deviation is `c / sqrt(2)`.
    pub c: f64,
    pub sigma: f64,
    pub r2: f64,
    pub r2_adj: f64,
    pub bins: usize,
    pub iterations: usize,
    pub histogram: Histogram,
}

impl GaussianFit {
    pub fn eval(&self, x: f64) -> f64 {
        gaussian(self.a, self.b, self.c, x)
    }
}

fn gaussian(a: f64, b: f64, c: f64, x: f64) -> f64 {
    let u = (x - b) / c;
    a * (-u * u).exp()
}

fn solve3(m: [[f64; 3]; 3], v: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if d.abs() < 1e-300 || !d.is_finite() {
        return None;
    }
    let mut out = [0.0; 3];
    for (col, slot) in out.iter_mut().enumerate() {
        let mut mc = m;
        for row in 0..3 {
            mc[row][col] = v[row];
        }
        *slot = det(&mc) / d;
    }
    Some(out)
}

const MAX_ITERATIONS: usize = 500;

/// Levenberg-Marquardt fit of the Gaussian bump to `(x, y)` points starting
/// from `start = (a, b, c)`.
pub fn fit_curve(xs: &[f64], ys: &[f64], start: (f64, f64, f64)) -> Result<((f64, f64, f64), usize), FitError> {
    let (mut a, mut b, mut c) = start;
    let sse_of = |a: f64, b: f64, c: f64| -> f64 {
        xs.iter().zip(ys).map(|(&x, &y)| (y - gaussian(a, b, c, x)).powi(2)).sum()
    };
    let nonconvergence = |iterations, a, b, c| FitError::NonConvergence { iterations, a, b, c };
    if !(c > 0.0) || !c.is_finite() {
        return Err(nonconvergence(0, a, b, c));
    }
    let mut sse = sse_of(a, b, c);
    let mut lambda = 1e-3;
    for iteration in 1..=MAX_ITERATIONS {
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for (&x, &y) in xs.iter().zip(ys) {
            let u = (x - b) / c;
            let e = (-u * u).exp();
            let grad = [e, a * e * 2.0 * u / c, a * e * 2.0 * u * u / c];
            let r = y - a * e;
            for i in 0..3 {
                jtr[i] += grad[i] * r;
                for j in 0..3 {
                    jtj[i][j] += grad[i] * grad[j];
                }
            }
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut damped = jtj;
            for (i, row) in damped.iter_mut().enumerate() {
                row[i] += lambda * jtj[i][i].max(1e-12);
            }
            let Some(delta) = solve3(damped, jtr) else {
                lambda *= 10.0;
                continue;
            };
            let (na, nb, nc) = (a + delta[0], b + delta[1], c + delta[2]);
            let candidate = if nc > 0.0 { sse_of(na, nb, nc) } else { f64::INFINITY };
            if candidate.is_finite() && candidate <= sse {
                let rel = (sse - candidate) / sse.max(1e-300);
                let step = delta.iter().map(|d| d.abs()).fold(0.0, f64::max);
                a = na;
                b = nb;
                c = nc;
                sse = candidate;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                if rel < 1e-12 || step < 1e-12 * (1.0 + b.abs() + c) {
                    return Ok(((a, b, c), iteration));
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // no descent direction left: at a (local) minimum
            if sse.is_finite() && c > 1e-12 {
                return Ok(((a, b, c), iteration));
            }
            return Err(nonconvergence(iteration, a, b, c));
        }
    }
    Err(nonconvergence(MAX_ITERATIONS, a, b, c))
}

/// Histogram the gaps and fit the Gaussian bump to the bin counts.
/// `bins = None` uses the Freedman-Diaconis rule.
pub fn fit_gaussian(samples: &[f64], bins: Option<usize>) -> Result<GaussianFit, FitError> {
    if samples.len() < MIN_FIT_SAMPLES {
        return Err(FitError::TooFewSamples { need: MIN_FIT_SAMPLES, got: samples.len() });
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let sd = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let bins = bins.unwrap_or_else(|| freedman_diaconis_bins(samples));
    let histogram = Histogram::build(samples, bins);
    let peak = histogram.counts.iter().copied().fold(0.0, f64::max);
    if !(sd > 1e-12 * (1.0 + mean.abs())) {
        return Err(FitError::NonConvergence { iterations: 0, a: peak, b: mean, c: 0.0 });
    }
    let centers = histogram.centers();
    let ((a, b, c), iterations) = fit_curve(&centers, &histogram.counts, (peak, mean, std::f64::consts::SQRT_2 * sd))?;
    let mean_count = histogram.counts.iter().sum::<f64>() / bins as f64;
    let sst: f64 = histogram.counts.iter().map(|y| (y - mean_count).powi(2)).sum();
    let sse: f64 = centers.iter().zip(&histogram.counts).map(|(&x, &y)| (y - gaussian(a, b, c, x)).powi(2)).sum();
    let r2 = if sst > 0.0 { 1.0 - sse / sst } else { 0.0 };
    let m = bins as f64;
    let r2_adj = if m > 3.0 { 1.0 - (sse / (m - 3.0)) / (sst / (m - 1.0)) } else { r2 };
    Ok(GaussianFit {
        a,
        b,
        c,
        sigma: c / std::f64::consts::SQRT_2,
        r2,
        r2_adj,
        bins,
        iterations,
        histogram,
    })
}

/// Normal law truncated to non-negative values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostDistribution {
    pub mean: f64,
    pub std: f64,
}

impl CostDistribution {
    pub fn new(mean: f64, std: f64) -> Self {
        assert!(std > 0.0 && mean.is_finite(), "invalid cost distribution");
        CostDistribution { mean, std }
    }

    pub fn from_fit(fit: &GaussianFit) -> Self {
        CostDistribution::new(fit.b, fit.sigma)
    }

    fn normal(&self) -> Normal {
        Normal::new(self.mean, self.std).expect("validated parameters")
    }

    /// Probability mass below zero before truncation.
    pub fn prob_negative(&self) -> f64 {
        self.normal().cdf(0.0)
    }

    /// Inverse-CDF draw restricted to `[0, inf)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let normal = self.normal();
        let lower = normal.cdf(0.0);
        let u = lower + (1.0 - lower) * rng.random::<f64>();
        normal.inverse_cdf(u.min(1.0 - 1e-16)).max(0.0)
    }
}

#[derive(Serialize)]
struct FitFile<'a> {
    a: f64,
    b: f64,
    c: f64,
    sigma: f64,
    r2: f64,
    r2_adj: f64,
    bins: usize,
    iterations: usize,
    histogram: &'a Histogram,
}

pub fn write_samples_csv<W: std::io::Write>(writer: W, samples: &[CostSample]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    for s in samples {
        out.serialize(s)?;
    }
    out.flush()?;
    Ok(())
}

pub fn fit_json(fit: &GaussianFit) -> serde_json::Result<String> {
    serde_json::to_string_pretty(&FitFile {
        a: fit.a,
        b: fit.b,
        c: fit.c,
        sigma: fit.sigma,
        r2: fit.r2,
        r2_adj: fit.r2_adj,
        bins: fit.bins,
        iterations: fit.iterations,
        histogram: &fit.histogram,
    })
}
