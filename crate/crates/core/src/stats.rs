//! Stylized-facts battery for return series: descriptive moments with the
//! Jarque-Bera test, AR(1) + one-lag ARCH-LM regression, sample
//! autocorrelations and rescaled-range Hurst estimation.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor, StudentsT};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("series too short: need at least {need} values, got {got}")]
    TooShort { need: usize, got: usize },
    #[error("series contains non-finite values")]
    NonFinite,
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("only {0} usable window sizes, need at least 4")]
    TooFewWindows(usize),
}

fn check(series: &[f64], need: usize) -> Result<(), StatsError> {
    if series.len() < need {
        return Err(StatsError::TooShort { need, got: series.len() });
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(())
}

/// `ln(p[t] / p[t-1])` for consecutive values.
pub fn log_returns(prices: &[f64]) -> Vec<f64> {
    prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Where a return series came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesSource {
    Market,
    Fundamental,
}

/// Validated log-return series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub source: SeriesSource,
    pub values: Vec<f64>,
}

impl ReturnSeries {
    pub fn from_prices(prices: &[f64], source: SeriesSource) -> Result<Self, StatsError> {
        Self::new(log_returns(prices), source)
    }

    pub fn new(values: Vec<f64>, source: SeriesSource) -> Result<Self, StatsError> {
        check(&values, 2)?;
        Ok(ReturnSeries { source, values })
    }

    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|x| x.abs()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Descriptive {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub max: f64,
    pub min: f64,
    pub std: f64,
    pub skewness: f64,
    /// Plain (not excess) kurtosis; 3 for a normal law.
    pub kurtosis: f64,
    pub jarque_bera: f64,
    pub jb_pvalue: f64,
}

/// Moments use the population convention for skewness and kurtosis and the
/// sample convention for the standard deviation.
pub fn describe(series: &[f64]) -> Result<Descriptive, StatsError> {
    check(series, 8)?;
    let n = series.len() as f64;
    let m = mean(series);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in series {
        let d = x - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if m2 <= 0.0 {
        return Err(StatsError::Degenerate("constant series"));
    }
    let skewness = m3 / m2.powf(1.5);
    let kurtosis = m4 / (m2 * m2);
    let jarque_bera = n / 6.0 * (skewness * skewness + (kurtosis - 3.0).powi(2) / 4.0);
    let mut sorted = series.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len().is_multiple_of(2) { 0.5 * (sorted[mid - 1] + sorted[mid]) } else { sorted[mid] };
    Ok(Descriptive {
        n: series.len(),
        mean: m,
        median,
        max: sorted[sorted.len() - 1],
        min: sorted[0],
        std: std_dev(series),
        skewness,
        kurtosis,
        jarque_bera,
        // chi-squared with two degrees of freedom has survival exp(-x/2)
        jb_pvalue: (-jarque_bera / 2.0).exp(),
    })
}

/// One regression coefficient with classical inference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub estimate: f64,
    pub std_error: f64,
    pub t_stat: f64,
    pub p_value: f64,
}

/// Ordinary least squares of `y` on a constant and `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimpleOls {
    pub n: usize,
    pub intercept: Coefficient,
    pub slope: Coefficient,
    pub r_squared: f64,
    pub sse: f64,
}

fn two_sided_t(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}

pub fn simple_ols(x: &[f64], y: &[f64]) -> Result<SimpleOls, StatsError> {
    assert_eq!(x.len(), y.len(), "regressor and response lengths differ");
    let n = x.len();
    if n < 3 {
        return Err(StatsError::TooShort { need: 3, got: n });
    }
    let nf = n as f64;
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if !(sxx > 0.0) {
        return Err(StatsError::Degenerate("regressor has zero variance"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let df = nf - 2.0;
    let s2 = sse / df;
    let se_slope = (s2 / sxx).sqrt();
    let se_intercept = (s2 * (1.0 / nf + mx * mx / sxx)).sqrt();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 0.0 };
    let coef = |estimate: f64, std_error: f64| {
        let t_stat = estimate / std_error;
        Coefficient { estimate, std_error, t_stat, p_value: two_sided_t(t_stat, df) }
    };
    Ok(SimpleOls { n, intercept: coef(intercept, se_intercept), slope: coef(slope, se_slope), r_squared, sse })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArchReport {
    /// Constant and slope of the AR(1) mean equation.
    pub ar1_intercept: f64,
    pub ar1_slope: f64,
    /// Constant of the squared-residual regression.
    pub a: Coefficient,
    /// Loading of the squared residual on its first lag.
    pub b: Coefficient,
    pub f_stat: f64,
    pub f_pvalue: f64,
    pub obs_r_squared: f64,
    pub obs_r_squared_pvalue: f64,
    /// Observations in the auxiliary regression.
    pub n_obs: usize,
}

/// ARCH-LM test with one lag on the residuals of an AR(1) fit.
pub fn arch_lm(series: &[f64]) -> Result<ArchReport, StatsError> {
    check(series, 50)?;
    let ar = simple_ols(&series[..series.len() - 1], &series[1..])?;
    let (c, phi) = (ar.intercept.estimate, ar.slope.estimate);
    let sq: Vec<f64> = series.windows(2).map(|w| (w[1] - c - phi * w[0]).powi(2)).collect();
    let aux = simple_ols(&sq[..sq.len() - 1], &sq[1..]).map_err(|e| match e {
        StatsError::Degenerate(_) => StatsError::Degenerate("squared residuals have zero variance"),
        other => other,
    })?;
    let m = aux.n as f64;
    let f_stat = aux.slope.t_stat * aux.slope.t_stat;
    let f_pvalue = if f_stat.is_finite() {
        FisherSnedecor::new(1.0, m - 2.0).expect("valid degrees of freedom").sf(f_stat).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let obs_r_squared = m * aux.r_squared;
    let obs_r_squared_pvalue = ChiSquared::new(1.0).expect("one dof").sf(obs_r_squared).clamp(0.0, 1.0);
    Ok(ArchReport {
        ar1_intercept: c,
        ar1_slope: phi,
        a: aux.intercept,
        b: aux.slope,
        f_stat,
        f_pvalue,
        obs_r_squared,
        obs_r_squared_pvalue,
        n_obs: aux.n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Autocorrelation {
    /// Correlation at lags `1..=max_lag`.
    pub values: Vec<f64>,
    /// Half-width of the 95% band under the white-noise null, `1.96 / sqrt(n)`.
    pub band: f64,
}

impl Autocorrelation {
    pub fn fraction_inside_band(&self) -> f64 {
        self.values.iter().filter(|r| r.abs() <= self.band).count() as f64 / self.values.len() as f64
    }

    pub fn fraction_positive(&self) -> f64 {
        self.values.iter().filter(|r| **r > 0.0).count() as f64 / self.values.len() as f64
    }
}

pub fn acf(series: &[f64], max_lag: usize) -> Result<Autocorrelation, StatsError> {
    check(series, max_lag + 2)?;
    let m = mean(series);
    let centered: Vec<f64> = series.iter().map(|x| x - m).collect();
    let denom: f64 = centered.iter().map(|x| x * x).sum();
    if denom <= 0.0 {
        return Err(StatsError::Degenerate("constant series"));
    }
    let values = (1..=max_lag)
        .map(|k| centered.iter().zip(&centered[k..]).map(|(a, b)| a * b).sum::<f64>() / denom)
        .collect();
    Ok(Autocorrelation { values, band: 1.96 / (series.len() as f64).sqrt() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RsOptions {
    pub min_window: usize,
    /// Largest window as a fraction of the series length (at most 1/2).
    pub max_fraction: f64,
    /// Ratio between consecutive window sizes.
    pub growth: f64,
}

impl Default for RsOptions {
    fn default() -> Self {
        RsOptions { min_window: 16, max_fraction: 0.25, growth: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstFit {
    pub exponent: f64,
    pub window_sizes: Vec<usize>,
    /// Mean statistic per window size (R/S or DFA fluctuation).
    pub statistic: Vec<f64>,
}

fn window_sizes(n: usize, min_window: usize, max_fraction: f64, growth: f64) -> Vec<usize> {
    let max_window = ((n as f64) * max_fraction.min(0.5)).floor() as usize;
    let mut sizes = Vec::new();
    let mut s = min_window.max(4) as f64;
    while s.round() as usize <= max_window {
        let size = s.round() as usize;
        if sizes.last() != Some(&size) {
            sizes.push(size);
        }
        s *= growth.max(1.01);
    }
    sizes
}

fn slope_of_logs(sizes: &[usize], stat: &[f64]) -> f64 {
    let lx: Vec<f64> = sizes.iter().map(|&s| (s as f64).ln()).collect();
    let ly: Vec<f64> = stat.iter().map(|v| v.ln()).collect();
    let mx = mean(&lx);
    let my = mean(&ly);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Hurst exponent by rescaled-range analysis with default window sizes.
pub fn hurst_rs(series: &[f64]) -> Result<f64, StatsError> {
    hurst_rs_with(series, &RsOptions::default()).map(|fit| fit.exponent)
}

/// Each window size `s` uses the first `floor(n / s)` non-overlapping
/// windows, which cover at least half of the series because `s <= n / 2`.
pub fn hurst_rs_with(series: &[f64], options: &RsOptions) -> Result<HurstFit, StatsError> {
    check(series, 512)?;
    let mut sizes = Vec::new();
    let mut statistic = Vec::new();
    for size in window_sizes(series.len(), options.min_window, options.max_fraction, options.growth) {
        let mut total = 0.0;
        let mut used = 0;
        for window in series.chunks_exact(size) {
            let m = mean(window);
            let (mut cum, mut hi, mut lo, mut ss) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0);
            for &x in window {
                let d = x - m;
                cum += d;
                hi = hi.max(cum);
                lo = lo.min(cum);
                ss += d * d;
            }
            let sd = (ss / size as f64).sqrt();
            if sd > 0.0 {
                total += (hi - lo) / sd;
                used += 1;
            }
        }
        if used > 0 && total > 0.0 {
            sizes.push(size);
            statistic.push(total / used as f64);
        }
    }
    if sizes.len() < 4 {
        return Err(StatsError::TooFewWindows(sizes.len()));
    }
    Ok(HurstFit { exponent: slope_of_logs(&sizes, &statistic), window_sizes: sizes, statistic })
}

/// Hurst exponent by first-order detrended fluctuation analysis.
pub fn hurst_dfa(series: &[f64]) -> Result<HurstFit, StatsError> {
    check(series, 512)?;
    let m = mean(series);
    let profile: Vec<f64> = series
        .iter()
        .scan(0.0, |acc, x| {
            *acc += x - m;
            Some(*acc)
        })
        .collect();
    let mut sizes = Vec::new();
    let mut statistic = Vec::new();
    for size in window_sizes(series.len(), 16, 0.25, 2.0) {
        let xs: Vec<f64> = (0..size).map(|i| i as f64).collect();
        let xm = mean(&xs);
        let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
        let mut total = 0.0;
        let mut boxes = 0;
        for segment in profile.chunks_exact(size) {
            let ym = mean(segment);
            let sxy: f64 = xs.iter().zip(segment).map(|(x, y)| (x - xm) * (y - ym)).sum();
            let slope = sxy / sxx;
            let resid: f64 = xs.iter().zip(segment).map(|(x, y)| (y - ym - slope * (x - xm)).powi(2)).sum();
            total += resid / size as f64;
            boxes += 1;
        }
        let f = (total / boxes as f64).sqrt();
        if f > 0.0 {
            sizes.push(size);
            statistic.push(f);
        }
    }
    if sizes.len() < 4 {
        return Err(StatsError::TooFewWindows(sizes.len()));
    }
    Ok(HurstFit { exponent: slope_of_logs(&sizes, &statistic), window_sizes: sizes, statistic })
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        // average rank over ties
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation; `None` when either side is constant or fewer
/// than three pairs are given.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    if x.len() < 3 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let (mx, my) = (mean(&rx), mean(&ry));
    let sxy: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

/// The full battery applied to one return series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub source: SeriesSource,
    pub descriptive: Descriptive,
    pub arch: ArchReport,
    pub acf_returns: Autocorrelation,
    pub acf_abs_returns: Autocorrelation,
    pub hurst_rs: f64,
    pub hurst_dfa: f64,
}

impl SeriesReport {
    pub fn compute(series: &ReturnSeries, max_lag: usize) -> Result<Self, StatsError> {
        let r = &series.values;
        Ok(SeriesReport {
            source: series.source,
            descriptive: describe(r)?,
            arch: arch_lm(r)?,
            acf_returns: acf(r, max_lag)?,
            acf_abs_returns: acf(&series.abs(), max_lag)?,
            hurst_rs: hurst_rs(r)?,
            hurst_dfa: hurst_dfa(r)?.exponent,
        })
    }
}

/// Contents of `stats.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub market: SeriesReport,
    pub fundamental: SeriesReport,
}

impl StatsReport {
    pub fn from_paths(market_prices: &[f64], fundamental: &[f64], max_lag: usize) -> Result<Self, StatsError> {
        Ok(StatsReport {
            market: SeriesReport::compute(&ReturnSeries::from_prices(market_prices, SeriesSource::Market)?, max_lag)?,
            fundamental: SeriesReport::compute(
                &ReturnSeries::from_prices(fundamental, SeriesSource::Fundamental)?,
                max_lag,
            )?,
        })
    }
}
