//! Switching sweeps, γ-binned volatility and the full report bundle.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::AgentKind;
use crate::calibration::{fit_gaussian, run_calibration_campaign, CalibrationError, CostSample, FitError, GaussianFit};
use crate::output::{self, OutputError};
use crate::rng::derive_seed;
use crate::sim::{run_market, AgentMix, ConfigError, CostPolicy, RunResult, SimConfig};
use crate::stats::{self, log_returns, spearman, StatsError, StatsReport};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid plan: {0}")]
    Plan(String),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Gamma(#[from] GammaError),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error("sweep failed on {} run(s); {} completed", .failures.len(), .partial.cells.len())]
    Sweep { failures: Vec<(f64, u64, String)>, partial: Box<SweepReport> },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GammaError {
    #[error("run has no switchers, so the informed fraction is undefined")]
    NoSwitchers,
    #[error("window of {0} steps is below the minimum of 10")]
    WindowTooSmall(usize),
    #[error("bin count must be positive")]
    NoBins,
    #[error("series of {len} returns is shorter than one window of {window}")]
    TooShort { len: usize, window: usize },
    #[error("gamma series has {gamma} entries but there are {prices} prices")]
    LengthMismatch { gamma: usize, prices: usize },
}

pub const MIN_GAMMA_WINDOW: usize = 10;

/// A grid of agent mixes crossed with a shared list of seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub mixes: Vec<AgentMix>,
    pub seeds: Vec<u64>,
    pub base: SimConfig,
    pub gamma_window: usize,
    pub gamma_bins: usize,
}

impl ExperimentPlan {
    /// Five switcher shares from 0 to 30%, `n_seeds` seeds derived from `base.seed`.
    pub fn switching(base: SimConfig, n_seeds: usize) -> Self {
        let seeds = (0..n_seeds as u64).map(|k| derive_seed(base.seed, k)).collect();
        ExperimentPlan { mixes: AgentMix::switching_sweep(), seeds, base, gamma_window: 50, gamma_bins: 10 }
    }

    /// Reduced plan: 5 seeds, 4000 steps.
    pub fn smoke(base: SimConfig) -> Self {
        ExperimentPlan::switching(SimConfig { steps: 4000, ..base }, 5)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.mixes.is_empty() || self.seeds.is_empty() {
            return Err(ExperimentError::Plan("plan needs at least one mix and one seed".into()));
        }
        if self.gamma_window < MIN_GAMMA_WINDOW {
            return Err(GammaError::WindowTooSmall(self.gamma_window).into());
        }
        if self.gamma_bins == 0 {
            return Err(GammaError::NoBins.into());
        }
        for mix in &self.mixes {
            SimConfig { mix: *mix, ..self.base.clone() }.validate()?;
        }
        Ok(())
    }

    pub fn config(&self, mix: AgentMix, seed: u64) -> SimConfig {
        SimConfig { mix, seed, ..self.base.clone() }
    }
}

/// Mean order profit of each trader type in one run.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TypeReturns {
    pub informed: Option<f64>,
    pub uninformed: Option<f64>,
    pub zero_intelligence: Option<f64>,
    /// Before the information cost.
    pub switcher_gross: Option<f64>,
    /// After the information cost.
    pub switcher_net: Option<f64>,
}

impl TypeReturns {
    pub fn of(result: &RunResult) -> Self {
        let p = &result.profits;
        TypeReturns {
            informed: p.mean(AgentKind::Informed),
            uninformed: p.mean(AgentKind::Uninformed),
            zero_intelligence: p.mean(AgentKind::ZeroIntelligence),
            switcher_gross: p.mean(AgentKind::Switcher),
            switcher_net: p.switcher_net_mean(),
        }
    }
}

/// Summary of one (mix, seed) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub rho: f64,
    pub seed: u64,
    pub volatility: f64,
    pub returns: TypeReturns,
    pub mean_gamma: Option<f64>,
    /// Present only for runs with switchers.
    pub gamma: Option<GammaTable>,
}

/// Averages over the seeds of one mix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixSummary {
    pub rho: f64,
    pub runs: usize,
    pub mean_volatility: f64,
    pub returns: TypeReturns,
    pub mean_gamma: Option<f64>,
    /// Mean of the per-seed rank correlations between bin center and volatility.
    pub mean_gamma_spearman: Option<f64>,
    /// Seeds whose rank correlation was defined.
    pub spearman_defined: usize,
    /// Windows of every seed binned together.
    pub pooled_gamma: Option<GammaTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub plan: ExperimentPlan,
    pub version: String,
    /// Ordered by mix, then seed.
    pub cells: Vec<SweepCell>,
    pub mixes: Vec<MixSummary>,
}

impl SweepReport {
    fn assemble(plan: &ExperimentPlan, cells: Vec<SweepCell>) -> Self {
        let mixes = plan
            .mixes
            .iter()
            .filter_map(|mix| {
                let group: Vec<&SweepCell> = cells.iter().filter(|c| c.rho == mix.switchers).collect();
                (!group.is_empty()).then(|| summarize(mix.switchers, &group, plan.gamma_bins))
            })
            .collect();
        SweepReport { plan: plan.clone(), version: env!("CARGO_PKG_VERSION").to_string(), cells, mixes }
    }

    pub fn mix(&self, rho: f64) -> Option<&MixSummary> {
        self.mixes.iter().find(|m| m.rho == rho)
    }

    pub fn cells_for(&self, rho: f64) -> impl Iterator<Item = &SweepCell> {
        self.cells.iter().filter(move |c| c.rho == rho)
    }
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let xs: Vec<f64> = values.flatten().collect();
    (!xs.is_empty()).then(|| stats::mean(&xs))
}

fn summarize(rho: f64, group: &[&SweepCell], bins: usize) -> MixSummary {
    let vols: Vec<f64> = group.iter().map(|c| c.volatility).collect();
    let returns = TypeReturns {
        informed: mean_of(group.iter().map(|c| c.returns.informed)),
        uninformed: mean_of(group.iter().map(|c| c.returns.uninformed)),
        zero_intelligence: mean_of(group.iter().map(|c| c.returns.zero_intelligence)),
        switcher_gross: mean_of(group.iter().map(|c| c.returns.switcher_gross)),
        switcher_net: mean_of(group.iter().map(|c| c.returns.switcher_net)),
    };
    let correlations: Vec<f64> =
        group.iter().filter_map(|c| c.gamma.as_ref().and_then(|g| g.spearman)).collect();
    let windows: Vec<GammaWindow> =
        group.iter().filter_map(|c| c.gamma.as_ref()).flat_map(|g| g.windows.iter().copied()).collect();
    let pooled_gamma = group
        .first()
        .and_then(|c| c.gamma.as_ref())
        .map(|g| GammaTable::from_windows(g.window, bins, windows));
    MixSummary {
        rho,
        runs: group.len(),
        mean_volatility: stats::mean(&vols),
        returns,
        mean_gamma: mean_of(group.iter().map(|c| c.mean_gamma)),
        mean_gamma_spearman: (!correlations.is_empty()).then(|| stats::mean(&correlations)),
        spearman_defined: correlations.len(),
        pooled_gamma,
    }
}

/// Summarize a finished run the way the sweep does.
pub fn summarize_run(result: &RunResult, gamma_window: usize, gamma_bins: usize) -> Result<SweepCell, GammaError> {
    let gamma = if result.has_switchers() { Some(gamma_analysis(result, gamma_window, gamma_bins)?) } else { None };
    let mean_gamma = result.has_switchers().then(|| stats::mean(&result.gamma[1..]));
    Ok(SweepCell {
        rho: result.config.mix.switchers,
        seed: result.config.seed,
        volatility: result.volatility(),
        returns: TypeReturns::of(result),
        mean_gamma,
        gamma,
    })
}

/// Run every (mix, seed) pair in parallel.
pub fn run_sweep(plan: &ExperimentPlan) -> Result<SweepReport, ExperimentError> {
    run_sweep_with(plan, |_| Ok(()))
}

/// Like [`run_sweep`], handing each finished run to `on_run` before it is dropped.
pub fn run_sweep_with<F>(plan: &ExperimentPlan, on_run: F) -> Result<SweepReport, ExperimentError>
where
    F: Fn(&RunResult) -> Result<(), OutputError> + Sync,
{
    plan.validate()?;
    let jobs: Vec<(AgentMix, u64)> =
        plan.mixes.iter().flat_map(|m| plan.seeds.iter().map(move |s| (*m, *s))).collect();
    let outcomes: Vec<Result<SweepCell, (f64, u64, String)>> = jobs
        .par_iter()
        .map(|&(mix, seed)| {
            let fail = |e: String| (mix.switchers, seed, e);
            let result = run_market(&plan.config(mix, seed)).map_err(|e| fail(e.to_string()))?;
            on_run(&result).map_err(|e| fail(e.to_string()))?;
            summarize_run(&result, plan.gamma_window, plan.gamma_bins).map_err(|e| fail(e.to_string()))
        })
        .collect();
    let mut cells = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(cell) => cells.push(cell),
            Err(f) => failures.push(f),
        }
    }
    let report = SweepReport::assemble(plan, cells);
    if failures.is_empty() {
        Ok(report)
    } else {
        Err(ExperimentError::Sweep { failures, partial: Box::new(report) })
    }
}

/// One window: mean informed fraction and return volatility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaWindow {
    pub gamma: f64,
    pub volatility: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaBin {
    pub center: f64,
    /// `None` for an empty bin.
    pub mean_volatility: Option<f64>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaTable {
    pub window: usize,
    pub bins: Vec<GammaBin>,
    pub windows: Vec<GammaWindow>,
    /// Rank correlation between occupied bin centers and their mean volatility.
    pub spearman: Option<f64>,
}

impl GammaTable {
    /// Bin windows by γ into `bins` equal-width bins over [0, 1].
    pub fn from_windows(window: usize, bins: usize, windows: Vec<GammaWindow>) -> Self {
        let mut sums = vec![0.0; bins];
        let mut counts = vec![0_usize; bins];
        for w in &windows {
            let k = ((w.gamma * bins as f64).floor() as usize).min(bins - 1);
            sums[k] += w.volatility;
            counts[k] += 1;
        }
        let bins: Vec<GammaBin> = (0..bins)
            .map(|k| GammaBin {
                center: (k as f64 + 0.5) / bins as f64,
                mean_volatility: (counts[k] > 0).then(|| sums[k] / counts[k] as f64),
                count: counts[k],
            })
            .collect();
        let (xs, ys): (Vec<f64>, Vec<f64>) =
            bins.iter().filter_map(|b| b.mean_volatility.map(|v| (b.center, v))).unzip();
        let spearman = if xs.len() >= 2 { spearman(&xs, &ys) } else { None };
        GammaTable { window, bins, windows, spearman }
    }

    pub fn occupied_bins(&self) -> usize {
        self.bins.iter().filter(|b| b.count > 0).count()
    }
}

/// γ analysis on raw series. `gamma[t]` is the informed fraction on step `t`,
/// aligned with `prices[t]`; entry 0 is ignored. Trailing steps that do not
/// fill a window are dropped.
pub fn gamma_table(prices: &[f64], gamma: &[f64], window: usize, bins: usize) -> Result<GammaTable, GammaError> {
    if gamma.is_empty() {
        return Err(GammaError::NoSwitchers);
    }
    if window < MIN_GAMMA_WINDOW {
        return Err(GammaError::WindowTooSmall(window));
    }
    if bins == 0 {
        return Err(GammaError::NoBins);
    }
    if gamma.len() != prices.len() {
        return Err(GammaError::LengthMismatch { gamma: gamma.len(), prices: prices.len() });
    }
    let returns = log_returns(prices);
    if returns.len() < window {
        return Err(GammaError::TooShort { len: returns.len(), window });
    }
    let windows = returns
        .chunks_exact(window)
        .zip(gamma[1..].chunks_exact(window))
        .map(|(r, g)| GammaWindow { gamma: stats::mean(g), volatility: stats::std_dev(r) })
        .collect();
    Ok(GammaTable::from_windows(window, bins, windows))
}

pub fn gamma_analysis(result: &RunResult, window: usize, bins: usize) -> Result<GammaTable, GammaError> {
    if !result.has_switchers() {
        return Err(GammaError::NoSwitchers);
    }
    gamma_table(&result.prices, &result.gamma, window, bins)
}

/// Settings of the end-to-end bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproduceOptions {
    /// Simulation parameters; its seed is the master seed.
    pub base: SimConfig,
    pub calibration_runs: usize,
    pub sweep_seeds: usize,
    /// Seeds for the stylized-facts tables.
    pub baseline_seeds: usize,
    pub gamma_window: usize,
    pub gamma_bins: usize,
    pub max_lag: usize,
    /// Recorded in the report; wider tolerances apply to ordering checks.
    pub smoke: bool,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        ReproduceOptions {
            base: SimConfig::default(),
            calibration_runs: 200,
            sweep_seeds: 30,
            baseline_seeds: 5,
            gamma_window: 50,
            gamma_bins: 10,
            max_lag: 50,
            smoke: false,
        }
    }
}

impl ReproduceOptions {
    /// 5 sweep seeds, 4000 steps, 30 calibration runs.
    pub fn smoke(base: SimConfig) -> Self {
        ReproduceOptions {
            base: SimConfig { steps: 4000, ..base },
            calibration_runs: 30,
            sweep_seeds: 5,
            smoke: true,
            ..ReproduceOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationStage {
    pub samples: Vec<CostSample>,
    pub fit: GaussianFit,
    pub mean_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRun {
    pub seed: u64,
    pub stats: StatsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineStage {
    pub runs: Vec<BaselineRun>,
    /// First baseline run, kept for the path and return figures.
    pub prices: Vec<f64>,
    pub fundamental: Vec<f64>,
}

/// What [`reproduce`] leaves behind.
#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub dir: PathBuf,
    pub tables: Vec<PathBuf>,
    pub figures: Vec<PathBuf>,
    pub report: PathBuf,
    pub calibration: CalibrationStage,
    pub baseline: BaselineStage,
    pub sweep: SweepReport,
    /// Stages loaded from checkpoints instead of recomputed.
    pub resumed: Vec<&'static str>,
}

const STAGE_DIR: &str = "stages";

/// Load `stages/<name>.json` if it was written for the same options, else compute and save it.
fn stage<T, F>(
    dir: &Path,
    name: &'static str,
    options: &ReproduceOptions,
    resumed: &mut Vec<&'static str>,
    compute: F,
) -> Result<T, ExperimentError>
where
    T: Serialize + DeserializeOwned,
    F: FnOnce() -> Result<T, ExperimentError>,
{
    #[derive(Serialize, Deserialize)]
    struct Checkpoint<T> {
        options: ReproduceOptions,
        value: T,
    }
    let path = dir.join(STAGE_DIR).join(format!("{name}.json"));
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(saved) = serde_json::from_str::<Checkpoint<T>>(&text) {
            if &saved.options == options {
                resumed.push(name);
                return Ok(saved.value);
            }
        }
    }
    let value = compute()?;
    let checkpoint = Checkpoint { options: options.clone(), value };
    output::write_json(&path, &checkpoint)?;
    Ok(checkpoint.value)
}

/// Calibrate the information cost, run the stylized-facts battery and the
/// switching sweep at the calibrated cost, then write tables, figure data
/// and `report.md` into `dir`. Finished stages are checkpointed under
/// `dir/stages` and reused on the next call with the same options.
pub fn reproduce(dir: &Path, options: &ReproduceOptions) -> Result<Bundle, ExperimentError> {
    options.base.validate()?;
    fs::create_dir_all(dir).map_err(OutputError::from)?;
    let mut resumed = Vec::new();
    let base = &options.base;

    let calibration = stage(dir, "calibration", options, &mut resumed, || {
        let config = SimConfig { mix: AgentMix::with_switchers(0.0), ..base.clone() };
        let samples = run_calibration_campaign(&config, options.calibration_runs)?;
        let gaps: Vec<f64> = samples.iter().map(|s| s.gap).collect();
        let fit = fit_gaussian(&gaps, None)?;
        Ok(CalibrationStage { mean_gap: stats::mean(&gaps), samples, fit })
    })?;

    let baseline = stage(dir, "baseline", options, &mut resumed, || {
        let seeds: Vec<u64> = (0..options.baseline_seeds as u64).map(|k| derive_seed(base.seed, k)).collect();
        let results: Vec<Result<(BaselineRun, RunResult), ExperimentError>> = seeds
            .par_iter()
            .map(|&seed| {
                let config = SimConfig { seed, mix: AgentMix::with_switchers(0.0), ..base.clone() };
                let run = run_market(&config)?;
                let stats = StatsReport::from_paths(&run.prices, &run.fundamental, options.max_lag)?;
                Ok((BaselineRun { seed, stats }, run))
            })
            .collect();
        let mut runs = Vec::new();
        let mut first = None;
        for r in results {
            let (b, run) = r?;
            if first.is_none() {
                first = Some(run);
            }
            runs.push(b);
        }
        let first = first.ok_or_else(|| ExperimentError::Plan("no baseline seeds".into()))?;
        Ok(BaselineStage { runs, prices: first.prices, fundamental: first.fundamental })
    })?;

    let sweep = stage(dir, "sweep", options, &mut resumed, || {
        let cost = SimConfig { cost: CostPolicy::Fixed { value: calibration.fit.b }, ..base.clone() };
        let plan = ExperimentPlan {
            gamma_window: options.gamma_window,
            gamma_bins: options.gamma_bins,
            ..ExperimentPlan::switching(cost, options.sweep_seeds)
        };
        run_sweep(&plan)
    })?;

    let tables = write_tables(dir, options, &calibration, &baseline, &sweep)?;
    let figures = write_figures(dir, options, &calibration, &baseline, &sweep)?;
    let report = dir.join("report.md");
    output::write_text(&report, &render_report(options, &calibration, &baseline, &sweep))?;
    Ok(Bundle { dir: dir.to_path_buf(), tables, figures, report, calibration, baseline, sweep, resumed })
}

fn csv_file(dir: &Path, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<PathBuf, OutputError> {
    let path = dir.join(name);
    output::write_atomic(&path, |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(header)?;
        for row in rows {
            out.write_record(row)?;
        }
        out.flush()?;
        Ok(())
    })?;
    Ok(path)
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

fn coefficient_row(name: &str, c: &stats::Coefficient) -> Vec<String> {
    vec![name.to_string(), fmt(c.estimate), fmt(c.std_error), fmt(c.t_stat), fmt(c.p_value)]
}

fn write_tables(
    dir: &Path,
    options: &ReproduceOptions,
    calibration: &CalibrationStage,
    baseline: &BaselineStage,
    sweep: &SweepReport,
) -> Result<Vec<PathBuf>, OutputError> {
    let base = &options.base;
    let mut paths = Vec::new();
    paths.push(csv_file(
        dir,
        "table1_order_rules.csv",
        &["case", "condition", "action"],
        [
            ["both quotes", "prediction > ask + mu", "market buy"],
            ["both quotes", "prediction < bid - mu", "market sell"],
            ["both quotes", "otherwise, |ask - prediction| <= |prediction - bid|", "limit buy at prediction - mu"],
            ["both quotes", "otherwise", "limit sell at prediction + mu"],
            ["no bids", "prediction > ask + mu", "market buy"],
            ["no bids", "otherwise", "limit buy at prediction - mu"],
            ["no asks", "prediction < bid - mu", "market sell"],
            ["no asks", "otherwise", "limit sell at prediction + mu"],
            ["empty book", "probability 1/2 each", "limit buy at prediction - mu or limit sell at prediction + mu"],
        ]
        .iter()
        .map(|r| r.iter().map(|s| s.to_string()).collect())
        .collect(),
    )?);
    paths.push(csv_file(
        dir,
        "table2_parameters.csv",
        &["parameter", "value"],
        vec![
            vec!["v0".into(), fmt(base.v0)],
            vec!["tick".into(), fmt(base.tick)],
            vec!["mu".into(), fmt(base.mu)],
            vec!["jump_rate".into(), fmt(base.jump_rate)],
            vec!["order_rate".into(), fmt(base.order_rate)],
            vec!["lag".into(), base.lag.to_string()],
            vec!["steps".into(), base.steps.to_string()],
            vec!["n_agents".into(), base.n_agents.to_string()],
            vec!["calibrated_cost".into(), fmt(calibration.fit.b)],
        ],
    )?);
    let market = &baseline.runs[0].stats.market;
    let d = &market.descriptive;
    paths.push(csv_file(
        dir,
        "table3_descriptive.csv",
        &["statistic", "value"],
        [
            ("mean", d.mean),
            ("median", d.median),
            ("maximum", d.max),
            ("minimum", d.min),
            ("std_dev", d.std),
            ("skewness", d.skewness),
            ("kurtosis", d.kurtosis),
            ("jarque_bera", d.jarque_bera),
            ("jb_pvalue", d.jb_pvalue),
            ("observations", d.n as f64),
        ]
        .iter()
        .map(|(k, v)| vec![k.to_string(), fmt(*v)])
        .collect(),
    )?);
    let arch_rows = |r: &stats::ArchReport| -> Vec<Vec<String>> {
        vec![
            vec!["ar1_intercept".into(), fmt(r.ar1_intercept), String::new(), String::new(), String::new()],
            vec!["ar1_slope".into(), fmt(r.ar1_slope), String::new(), String::new(), String::new()],
            coefficient_row("a", &r.a),
            coefficient_row("b", &r.b),
        ]
    };
    let fundamental = &baseline.runs[0].stats.fundamental;
    paths.push(csv_file(
        dir,
        "table4_arch_fundamental.csv",
        &["term", "estimate", "std_error", "t_stat", "p_value"],
        arch_rows(&fundamental.arch),
    )?);
    let summary = |r: &stats::ArchReport| -> Vec<Vec<String>> {
        vec![
            vec!["f_statistic".into(), fmt(r.f_stat), fmt(r.f_pvalue)],
            vec!["obs_r_squared".into(), fmt(r.obs_r_squared), fmt(r.obs_r_squared_pvalue)],
            vec!["observations".into(), r.n_obs.to_string(), String::new()],
        ]
    };
    paths.push(csv_file(dir, "table5_arch_market_summary.csv", &["statistic", "value", "p_value"], summary(&market.arch))?);
    paths.push(csv_file(
        dir,
        "table6_arch_market.csv",
        &["term", "estimate", "std_error", "t_stat", "p_value"],
        arch_rows(&market.arch),
    )?);
    paths.push(csv_file(
        dir,
        "table7_hurst.csv",
        &["seed", "fundamental_rs", "market_rs", "fundamental_dfa", "market_dfa"],
        baseline
            .runs
            .iter()
            .map(|r| {
                vec![
                    r.seed.to_string(),
                    fmt(r.stats.fundamental.hurst_rs),
                    fmt(r.stats.market.hurst_rs),
                    fmt(r.stats.fundamental.hurst_dfa),
                    fmt(r.stats.market.hurst_dfa),
                ]
            })
            .collect(),
    )?);
    paths.push(csv_file(
        dir,
        "table8_mixes.csv",
        &["simulation", "informed", "uninformed", "zero_intelligence", "switchers"],
        sweep
            .plan
            .mixes
            .iter()
            .enumerate()
            .map(|(i, m)| {
                vec![(i + 1).to_string(), fmt(m.informed), fmt(m.uninformed), fmt(m.zero_intelligence), fmt(m.switchers)]
            })
            .collect(),
    )?);
    paths.push(csv_file(
        dir,
        "table9_volatility.csv",
        &["rho", "mean_volatility", "runs"],
        sweep.mixes.iter().map(|m| vec![fmt(m.rho), fmt(m.mean_volatility), m.runs.to_string()]).collect(),
    )?);
    Ok(paths)
}

fn write_figures(
    dir: &Path,
    options: &ReproduceOptions,
    calibration: &CalibrationStage,
    baseline: &BaselineStage,
    sweep: &SweepReport,
) -> Result<Vec<PathBuf>, OutputError> {
    let mut paths = Vec::new();
    let fit = &calibration.fit;
    paths.push(csv_file(
        dir,
        "fig1_cost_distribution.csv",
        &["bin_center", "count", "fitted"],
        fit.histogram
            .centers()
            .into_iter()
            .zip(&fit.histogram.counts)
            .map(|(x, n)| vec![fmt(x), fmt(*n), fmt(fit.eval(x))])
            .collect(),
    )?);
    paths.push(csv_file(
        dir,
        "fig2_paths.csv",
        &["t", "fundamental", "market"],
        baseline
            .fundamental
            .iter()
            .zip(&baseline.prices)
            .enumerate()
            .map(|(t, (v, p))| vec![t.to_string(), fmt(*v), fmt(*p)])
            .collect(),
    )?);
    let returns = log_returns(&baseline.prices);
    let hist = crate::calibration::Histogram::build(&returns, 60);
    let d = &baseline.runs[0].stats.market.descriptive;
    let normal = statrs::distribution::Normal::new(d.mean, d.std).ok();
    let width = hist.edges.get(1).zip(hist.edges.first()).map(|(b, a)| b - a).unwrap_or(0.0);
    paths.push(csv_file(
        dir,
        "fig3_return_histogram.csv",
        &["bin_center", "count", "normal_expected"],
        hist.centers()
            .into_iter()
            .zip(&hist.counts)
            .map(|(x, n)| {
                use statrs::distribution::Continuous;
                let expected = normal.as_ref().map(|g| g.pdf(x) * width * returns.len() as f64);
                vec![fmt(x), fmt(*n), opt(expected)]
            })
            .collect(),
    )?);
    paths.push(csv_file(
        dir,
        "fig4_market_returns.csv",
        &["t", "log_return"],
        returns.iter().enumerate().map(|(i, r)| vec![(i + 1).to_string(), fmt(*r)]).collect(),
    )?);
    paths.push(csv_file(
        dir,
        "fig5_fundamental_returns.csv",
        &["t", "log_return"],
        log_returns(&baseline.fundamental).iter().enumerate().map(|(i, r)| vec![(i + 1).to_string(), fmt(*r)]).collect(),
    )?);
    let market = &baseline.runs[0].stats.market;
    paths.push(csv_file(
        dir,
        "fig6_autocorrelation.csv",
        &["lag", "returns", "abs_returns", "band"],
        (0..options.max_lag)
            .map(|k| {
                vec![
                    (k + 1).to_string(),
                    fmt(market.acf_returns.values[k]),
                    fmt(market.acf_abs_returns.values[k]),
                    fmt(market.acf_returns.band),
                ]
            })
            .collect(),
    )?);
    paths.push(csv_file(
        dir,
        "fig7_returns_by_type.csv",
        &["rho", "seed", "informed", "uninformed", "switcher_net"],
        sweep
            .cells
            .iter()
            .map(|c| {
                vec![
                    fmt(c.rho),
                    c.seed.to_string(),
                    opt(c.returns.informed),
                    opt(c.returns.uninformed),
                    opt(c.returns.switcher_net),
                ]
            })
            .chain(sweep.mixes.iter().map(|m| {
                vec![
                    fmt(m.rho),
                    "mean".into(),
                    opt(m.returns.informed),
                    opt(m.returns.uninformed),
                    opt(m.returns.switcher_net),
                ]
            }))
            .collect(),
    )?);
    let mut rows = Vec::new();
    for m in &sweep.mixes {
        if let Some(table) = &m.pooled_gamma {
            for b in &table.bins {
                rows.push(vec![fmt(m.rho), fmt(b.center), opt(b.mean_volatility), b.count.to_string()]);
            }
        }
    }
    paths.push(csv_file(dir, "fig8_gamma_volatility.csv", &["rho", "gamma_center", "mean_volatility", "windows"], rows)?);
    Ok(paths)
}

fn render_report(
    options: &ReproduceOptions,
    calibration: &CalibrationStage,
    baseline: &BaselineStage,
    sweep: &SweepReport,
) -> String {
    let mut s = String::new();
    let fit = &calibration.fit;
    let _ = writeln!(s, "# Switching market report\n");
    let _ = writeln!(
        s,
        "Master seed {}, {} steps, {} agents, version {}{}.\n",
        options.base.seed,
        options.base.steps,
        options.base.n_agents,
        env!("CARGO_PKG_VERSION"),
        if options.smoke { " (smoke scale)" } else { "" }
    );
    let _ = writeln!(s, "## Information cost\n");
    let _ = writeln!(
        s,
        "{} switcher-free runs, mean informed-uninformed gap {:.4}.\n\nGaussian fit a={:.4} b={:.4} c={:.4}, adjusted R^2 {:.4}, {} bins.\n",
        calibration.samples.len(),
        calibration.mean_gap,
        fit.a,
        fit.b,
        fit.c,
        fit.r2_adj,
        fit.bins
    );
    let _ = writeln!(s, "## Stylized facts\n");
    let _ = writeln!(s, "| seed | kurtosis | JB p | ARCH b | ARCH p | fund. ARCH p | ACF in band | abs ACF > 0 | H fund. | H market |");
    let _ = writeln!(s, "|---|---|---|---|---|---|---|---|---|---|");
    for r in &baseline.runs {
        let m = &r.stats.market;
        let f = &r.stats.fundamental;
        let _ = writeln!(
            s,
            "| {} | {:.3} | {:.3e} | {:.4} | {:.3e} | {:.3} | {:.2} | {:.2} | {:.3} | {:.3} |",
            r.seed,
            m.descriptive.kurtosis,
            m.descriptive.jb_pvalue,
            m.arch.b.estimate,
            m.arch.b.p_value,
            f.arch.b.p_value,
            m.acf_returns.fraction_inside_band(),
            m.acf_abs_returns.fraction_positive(),
            f.hurst_rs,
            m.hurst_rs
        );
    }
    let _ = writeln!(s, "\n## Switching sweep (cost {:.4}, {} seeds)\n", calibration.fit.b, sweep.plan.seeds.len());
    let _ = writeln!(s, "| rho | volatility | informed | uninformed | switcher (net) | mean gamma | gamma rank corr. |");
    let _ = writeln!(s, "|---|---|---|---|---|---|---|");
    let cell = |x: Option<f64>| x.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
    for m in &sweep.mixes {
        let _ = writeln!(
            s,
            "| {:.2} | {:.6} | {} | {} | {} | {} | {} |",
            m.rho,
            m.mean_volatility,
            cell(m.returns.informed),
            cell(m.returns.uninformed),
            cell(m.returns.switcher_net),
            cell(m.mean_gamma),
            cell(m.mean_gamma_spearman)
        );
    }
    let vols: Vec<f64> = sweep.mixes.iter().map(|m| m.mean_volatility).collect();
    let increasing = vols.windows(2).all(|w| w[0] < w[1]);
    let ends = vols.first().zip(vols.last()).map(|(a, b)| a < b).unwrap_or(false);
    let _ = writeln!(
        s,
        "\nVolatility strictly increasing in rho: {}. Lowest share below highest share: {}.{}",
        if increasing { "yes" } else { "no" },
        if ends { "yes" } else { "no" },
        if options.smoke { " Smoke scale: only the end-point ordering is meaningful." } else { "" }
    );
    s
}
