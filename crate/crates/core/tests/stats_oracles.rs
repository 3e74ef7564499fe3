//! Statistics battery against generated processes with known answers and
//! against direct textbook formulas.

mod common;

use common::{ar1, arch1, fgn, normals};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::beta::beta_reg;
use switchmarket::stats::{acf, arch_lm, describe, hurst_dfa, hurst_rs, hurst_rs_with, log_returns, RsOptions, StatsReport};

/// Per-seed OLS estimates scatter widely at b = 0.3 (the eighth moment of
/// the process is barely finite), so recovery is judged on the average.
#[test]
fn arch_coefficient_is_recovered() {
    let seeds = 40;
    let mut total = 0.0;
    for seed in 0..seeds {
        let r = arch_lm(&arch1(seed, 10_000, 1e-6, 0.3)).unwrap();
        assert!(r.b.p_value < 0.01 && r.f_pvalue < 0.01, "seed {seed}: p {}", r.b.p_value);
        total += r.b.estimate;
    }
    let mean = total / seeds as f64;
    assert!((mean - 0.3).abs() < 0.05, "mean b {mean}");
}

#[test]
fn iid_noise_rarely_shows_arch() {
    let seeds = 200;
    let quiet = (0..seeds).filter(|&s| arch_lm(&normals(1000 + s, 2000)).unwrap().b.p_value > 0.05).count();
    assert!(quiet as f64 >= 0.9 * seeds as f64, "{quiet}/{seeds}");
}

#[test]
fn iid_noise_passes_jarque_bera() {
    let seeds = 200;
    let accepted = (0..seeds).filter(|&s| describe(&normals(2000 + s, 5000)).unwrap().jb_pvalue > 0.05).count();
    assert!(accepted as f64 >= 0.9 * seeds as f64, "{accepted}/{seeds}");
}

#[test]
fn normal_kurtosis_is_three() {
    let d = describe(&normals(7, 100_000)).unwrap();
    assert!((d.kurtosis - 3.0).abs() < 0.1, "{}", d.kurtosis);
    assert!(d.skewness.abs() < 0.05);
}

#[test]
fn ar1_autocorrelation_decays_geometrically() {
    let x = ar1(11, 10_000, 0.5);
    let r = acf(&x, 5).unwrap();
    for (k, v) in r.values.iter().enumerate() {
        let want = 0.5_f64.powi(k as i32 + 1);
        assert!((v - want).abs() < 0.05, "lag {}: {v} vs {want}", k + 1);
    }
}

#[test]
fn iid_band_coverage_is_nominal() {
    // pooled over many series the share inside the 95% band sits at 0.95
    let series = 100;
    let lags = 50;
    let inside: f64 = (0..series).map(|s| acf(&normals(3000 + s, 5000), lags).unwrap().fraction_inside_band()).sum();
    let share = inside / series as f64;
    let se = (0.95 * 0.05 / (series * lags as u64) as f64).sqrt();
    assert!((share - 0.95).abs() < 3.0 * se, "{share}");
}

#[test]
fn hurst_of_iid_noise_is_one_half() {
    for seed in 0..5 {
        let h = hurst_rs(&normals(4000 + seed, 12_000)).unwrap();
        assert!((0.45..=0.60).contains(&h), "seed {seed}: R/S {h}");
        let d = hurst_dfa(&normals(4000 + seed, 12_000)).unwrap().exponent;
        assert!((0.42..=0.58).contains(&d), "seed {seed}: DFA {d}");
    }
}

#[test]
fn hurst_of_persistent_fgn() {
    for seed in 0..5 {
        let x = fgn(5000 + seed, 12_000, 0.8);
        let h = hurst_rs(&x).unwrap();
        assert!((h - 0.8).abs() < 0.07, "seed {seed}: R/S {h}");
    }
}

#[test]
fn fgn_generator_has_unit_variance() {
    let x = fgn(1, 8192, 0.7);
    let v = x.iter().map(|a| a * a).sum::<f64>() / x.len() as f64;
    assert!((v - 1.0).abs() < 0.1, "{v}");
}

#[test]
fn rs_windows_cover_half_the_series() {
    for n in [512, 777, 1000, 4097, 12_000] {
        let fit = hurst_rs_with(&normals(n as u64, n), &RsOptions::default()).unwrap();
        for s in fit.window_sizes {
            assert!((n / s) * s * 2 >= n, "n {n}, window {s}");
        }
    }
}

// Direct formulas, written independently of the library.

fn naive_moments(x: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let s1: f64 = x.iter().sum();
    let mean = s1 / n;
    let var_s = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let mu2 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let mu3 = x.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    let mu4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    (mean, var_s.sqrt(), mu3 / mu2.powf(1.5), mu4 / (mu2 * mu2))
}

/// OLS through the 2x2 normal equations on raw sums.
fn naive_ols(x: &[f64], y: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let det = n * sxx - sx * sx;
    let b = (n * sxy - sx * sy) / det;
    let a = (sxx * sy - sx * sxy) / det;
    let rss: f64 = x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
    let s2 = rss / (n - 2.0);
    let se_b = (s2 * n / det).sqrt();
    let ybar = sy / n;
    let tss: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    (a, b, se_b, 1.0 - rss / tss)
}

fn student_two_sided(t: f64, df: f64) -> f64 {
    beta_reg(df / 2.0, 0.5, df / (df + t * t))
}

fn close(a: f64, b: f64, what: &str) {
    let scale = a.abs().max(b.abs()).max(1e-300);
    assert!((a - b).abs() / scale < 1e-10, "{what}: {a} vs {b}");
}

#[test]
fn agrees_with_direct_formulas() {
    let x = arch1(21, 1000, 1e-4, 0.4);
    let d = describe(&x).unwrap();
    let (mean, sd, skew, kurt) = naive_moments(&x);
    close(d.mean, mean, "mean");
    close(d.std, sd, "std");
    close(d.skewness, skew, "skewness");
    close(d.kurtosis, kurt, "kurtosis");
    let jb = 1000.0 / 6.0 * (skew * skew + (kurt - 3.0).powi(2) / 4.0);
    close(d.jarque_bera, jb, "JB");
    close(d.jb_pvalue, ChiSquared::new(2.0).unwrap().sf(jb), "JB p");

    let r = acf(&x, 10).unwrap();
    let var: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    for k in 1..=10 {
        let c: f64 = (k..x.len()).map(|t| (x[t] - mean) * (x[t - k] - mean)).sum();
        close(r.values[k - 1], c / var, "acf");
    }

    let arch = arch_lm(&x).unwrap();
    let (c0, phi, _, _) = naive_ols(&x[..999], &x[1..]);
    close(arch.ar1_intercept, c0, "AR intercept");
    close(arch.ar1_slope, phi, "AR slope");
    let e2: Vec<f64> = (1..1000).map(|t| (x[t] - c0 - phi * x[t - 1]).powi(2)).collect();
    let (a, b, se_b, r2) = naive_ols(&e2[..e2.len() - 1], &e2[1..]);
    close(arch.a.estimate, a, "ARCH a");
    close(arch.b.estimate, b, "ARCH b");
    close(arch.b.std_error, se_b, "ARCH se");
    let df = (e2.len() - 1) as f64 - 2.0;
    close(arch.b.p_value, student_two_sided(b / se_b, df), "ARCH p");
    close(arch.obs_r_squared, (e2.len() - 1) as f64 * r2, "nR2");
}

#[test]
fn invariant_to_price_scale() {
    // scaling prices shifts the log-price level and leaves every return unchanged
    let z = normals(31, 3000);
    let mut p = vec![20.0];
    for e in &z {
        let last = *p.last().unwrap();
        p.push(last * (0.001 * e).exp());
    }
    let v: Vec<f64> = p.iter().enumerate().map(|(i, x)| x * (1.0 + 0.0001 * (i % 5) as f64)).collect();
    let base = StatsReport::from_paths(&p, &v, 20).unwrap();
    let scaled_p: Vec<f64> = p.iter().map(|x| x * 7.5).collect();
    let scaled_v: Vec<f64> = v.iter().map(|x| x * 7.5).collect();
    let moved = StatsReport::from_paths(&scaled_p, &scaled_v, 20).unwrap();
    let (a, b) = (&base.market, &moved.market);
    close(a.descriptive.kurtosis, b.descriptive.kurtosis, "kurtosis");
    close(a.arch.b.estimate, b.arch.b.estimate, "ARCH b");
    close(a.hurst_rs, b.hurst_rs, "hurst");
    for (x, y) in a.acf_returns.values.iter().zip(&b.acf_returns.values) {
        assert!((x - y).abs() < 1e-9);
    }
    let r1 = log_returns(&p);
    let r2 = log_returns(&scaled_p);
    for (x, y) in r1.iter().zip(&r2) {
        assert!((x - y).abs() < 1e-12);
    }
}
