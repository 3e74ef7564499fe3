//! Run artifacts on disk and experiment config files.
//!
//! A run directory holds `prices.csv`, `trades.csv`, `profits.json`,
//! `config.json`, `stats.json` and `ga_trace.csv`. Every file is written to a
//! temporary sibling and renamed into place.

use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::AgentKind;
use crate::book::write_tape_csv;
use crate::experiment::{ExperimentPlan, ReproduceOptions};
use crate::ga::write_trace_csv;
use crate::rng::derive_seed;
use crate::sim::{AgentMix, ProfitBook, RunResult, SimConfig};
use crate::stats::{log_returns, StatsError, StatsReport};

#[derive(Debug, Error)]
pub enum OutputError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("toml: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("{path}: {reason}")]
    Format { path: String, reason: String },
}

/// Write through `body` into a temporary file next to `path`, then rename.
pub fn write_atomic<F>(path: &Path, body: F) -> Result<(), OutputError>
where
    F: FnOnce(&mut dyn Write) -> Result<(), OutputError>,
{
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        body(&mut w)?;
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<(), OutputError> {
    write_atomic(path, |w| Ok(w.write_all(text.as_bytes())?))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), OutputError> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        Ok(w.write_all(b"\n")?)
    })
}

#[derive(Serialize, Deserialize)]
struct PriceRow {
    t: usize,
    v: f64,
    p: f64,
    log_ret_v: Option<f64>,
    log_ret_p: Option<f64>,
    gamma: Option<f64>,
}

/// `t,v,p,log_ret_v,log_ret_p,gamma`; returns are blank on row 0 and gamma
/// is blank for runs without switchers.
pub fn write_prices_csv<W: Write>(writer: W, result: &RunResult) -> Result<(), OutputError> {
    let rv = log_returns(&result.fundamental);
    let rp = log_returns(&result.prices);
    let mut out = csv::Writer::from_writer(writer);
    for (t, (v, p)) in result.fundamental.iter().zip(&result.prices).enumerate() {
        out.serialize(PriceRow {
            t,
            v: *v,
            p: *p,
            log_ret_v: t.checked_sub(1).map(|i| rv[i]),
            log_ret_p: t.checked_sub(1).map(|i| rp[i]),
            gamma: result.gamma.get(t).copied(),
        })?;
    }
    out.flush()?;
    Ok(())
}

/// Series read back from `prices.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceTable {
    pub fundamental: Vec<f64>,
    pub prices: Vec<f64>,
    /// Empty when the file has no gamma values.
    pub gamma: Vec<f64>,
}

pub fn read_prices_csv<R: Read>(reader: R) -> Result<PriceTable, OutputError> {
    let mut table = PriceTable { fundamental: Vec::new(), prices: Vec::new(), gamma: Vec::new() };
    let mut rows = csv::Reader::from_reader(reader);
    let mut gamma_rows = 0;
    for (i, row) in rows.deserialize::<PriceRow>().enumerate() {
        let row = row?;
        if row.t != i {
            return Err(OutputError::Format { path: "prices.csv".into(), reason: format!("row {i} has t = {}", row.t) });
        }
        table.fundamental.push(row.v);
        table.prices.push(row.p);
        if let Some(g) = row.gamma {
            gamma_rows += 1;
            table.gamma.push(g);
        }
    }
    if gamma_rows != 0 && gamma_rows != table.prices.len() {
        return Err(OutputError::Format {
            path: "prices.csv".into(),
            reason: format!("gamma present on {gamma_rows} of {} rows", table.prices.len()),
        });
    }
    Ok(table)
}

pub fn load_prices(path: &Path) -> Result<PriceTable, OutputError> {
    read_prices_csv(File::open(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeProfit {
    pub orders: u64,
    pub total: f64,
    pub mean: Option<f64>,
}

/// Contents of `profits.json`. Means are before the transaction cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfitsFile {
    pub informed: TypeProfit,
    pub uninformed: TypeProfit,
    pub zero_intelligence: TypeProfit,
    pub switcher: TypeProfit,
    pub switcher_info_cost: f64,
    pub switcher_informed_steps: u64,
    /// Switcher mean after the information cost.
    pub switcher_net_mean: Option<f64>,
}

impl ProfitsFile {
    pub fn of(book: &ProfitBook) -> Self {
        let entry = |kind| {
            let t = book.tally(kind);
            TypeProfit { orders: t.orders, total: t.total, mean: t.mean() }
        };
        ProfitsFile {
            informed: entry(AgentKind::Informed),
            uninformed: entry(AgentKind::Uninformed),
            zero_intelligence: entry(AgentKind::ZeroIntelligence),
            switcher: entry(AgentKind::Switcher),
            switcher_info_cost: book.switcher_info_cost,
            switcher_informed_steps: book.switcher_informed_steps,
            switcher_net_mean: book.switcher_net_mean(),
        }
    }
}

/// Contents of `config.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub package: String,
    pub version: String,
    pub seed: u64,
    pub config: SimConfig,
}

impl Provenance {
    pub fn of(config: &SimConfig) -> Self {
        Provenance {
            package: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            config: config.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub prices: PathBuf,
    pub trades: PathBuf,
    pub profits: PathBuf,
    pub config: PathBuf,
    /// Absent when the run is too short for the statistics battery.
    pub stats: Option<PathBuf>,
    pub ga_trace: PathBuf,
}

pub fn write_run(dir: &Path, result: &RunResult, max_lag: usize) -> Result<RunArtifacts, OutputError> {
    let mut files = RunArtifacts {
        prices: dir.join("prices.csv"),
        trades: dir.join("trades.csv"),
        profits: dir.join("profits.json"),
        config: dir.join("config.json"),
        stats: None,
        ga_trace: dir.join("ga_trace.csv"),
    };
    write_atomic(&files.prices, |w| write_prices_csv(w, result))?;
    write_atomic(&files.trades, |w| Ok(write_tape_csv(w, &result.trades, result.config.tick)?))?;
    write_json(&files.profits, &ProfitsFile::of(&result.profits))?;
    write_json(&files.config, &Provenance::of(&result.config))?;
    match StatsReport::from_paths(&result.prices, &result.fundamental, max_lag) {
        Ok(stats) => {
            let path = dir.join("stats.json");
            write_json(&path, &stats)?;
            files.stats = Some(path);
        }
        Err(StatsError::TooShort { .. }) => {}
        Err(e) => return Err(e.into()),
    }
    write_atomic(&files.ga_trace, |w| Ok(write_trace_csv(w, &result.ga_trace)?))?;
    Ok(files)
}

/// Experiment settings of a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSettings {
    /// Switcher shares; informed and zero-intelligence shares stay at 12% and 58%.
    pub rhos: Vec<f64>,
    /// Number of seeds derived from the master seed, unless `seed_list` is given.
    pub seeds: usize,
    pub seed_list: Option<Vec<u64>>,
    pub gamma_window: usize,
    pub gamma_bins: usize,
    pub calibration_runs: usize,
    pub baseline_seeds: usize,
    pub max_lag: usize,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        let r = ReproduceOptions::default();
        ExperimentSettings {
            rhos: AgentMix::switching_sweep().iter().map(|m| m.switchers).collect(),
            seeds: r.sweep_seeds,
            seed_list: None,
            gamma_window: r.gamma_window,
            gamma_bins: r.gamma_bins,
            calibration_runs: r.calibration_runs,
            baseline_seeds: r.baseline_seeds,
            max_lag: r.max_lag,
        }
    }
}

/// A TOML or JSON config file: `[sim]` mirrors the simulation config and
/// `[experiment]` the sweep plan.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConfigFile {
    pub sim: SimConfig,
    pub experiment: ExperimentSettings,
}

impl ConfigFile {
    pub fn plan(&self) -> ExperimentPlan {
        let e = &self.experiment;
        let seeds = e
            .seed_list
            .clone()
            .unwrap_or_else(|| (0..e.seeds as u64).map(|k| derive_seed(self.sim.seed, k)).collect());
        ExperimentPlan {
            mixes: e.rhos.iter().map(|&r| AgentMix::with_switchers(r)).collect(),
            seeds,
            base: self.sim.clone(),
            gamma_window: e.gamma_window,
            gamma_bins: e.gamma_bins,
        }
    }

    pub fn reproduce_options(&self) -> ReproduceOptions {
        let e = &self.experiment;
        ReproduceOptions {
            base: self.sim.clone(),
            calibration_runs: e.calibration_runs,
            sweep_seeds: e.seeds,
            baseline_seeds: e.baseline_seeds,
            gamma_window: e.gamma_window,
            gamma_bins: e.gamma_bins,
            max_lag: e.max_lag,
            smoke: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigFormat {
    Toml,
    Json,
}

pub fn parse_config(text: &str, format: ConfigFormat) -> Result<ConfigFile, OutputError> {
    Ok(match format {
        ConfigFormat::Toml => toml::from_str(text)?,
        ConfigFormat::Json => serde_json::from_str(text)?,
    })
}

/// Format follows the extension; anything other than `.json` is read as TOML.
pub fn load_config(path: &Path) -> Result<ConfigFile, OutputError> {
    let text = fs::read_to_string(path)?;
    let format = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("json") => ConfigFormat::Json,
        _ => ConfigFormat::Toml,
    };
    parse_config(&text, format)
}
