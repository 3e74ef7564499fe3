use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use switchmarket::calibration::{fit_gaussian, fit_json, run_calibration_campaign, write_samples_csv};
use switchmarket::experiment::{gamma_table, reproduce, run_sweep_with, ExperimentError, ExperimentPlan, SweepReport};
use switchmarket::output::{self, load_config, load_prices, ConfigFile, OutputError};
use switchmarket::sim::{run_market, AgentMix};
use switchmarket::stats::StatsReport;

#[derive(Parser)]
#[command(name = "switchmarket", version, about = "Agent-based double auction market with costly information")]
struct Cli {
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML or JSON config file with `[sim]` and `[experiment]` tables.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (or a `.json` file for `stats`).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for parallel runs.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Reduced scale: 5 seeds, 4000 steps, 30 calibration runs.
    #[arg(long, global = true)]
    smoke: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One market run; writes prices, trades, profits, config and stats.
    Run {
        /// Switcher share; informed and zero-intelligence shares stay fixed.
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Switcher-free runs and a Gaussian fit of the profit gap.
    Calibrate {
        #[arg(long)]
        runs: Option<usize>,
    },
    /// Statistics battery on an existing prices.csv.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 50)]
        max_lag: usize,
    },
    /// Volatility and returns across switcher shares and shared seeds.
    Sweep {
        /// Also keep every run's artifacts under `runs/`.
        #[arg(long)]
        keep_runs: bool,
    },
    /// Volatility binned by the informed fraction of switchers.
    Gamma {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 50)]
        window: usize,
        #[arg(long, default_value_t = 10)]
        bins: usize,
    },
    /// Calibration, stylized facts, sweep and γ analysis into one bundle.
    Reproduce,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("{0}")]
    Other(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn settings(cli: &Cli) -> Result<ConfigFile, CliError> {
    let mut file = match &cli.config {
        Some(path) => load_config(path)?,
        None => ConfigFile::default(),
    };
    if let Some(seed) = cli.seed {
        file.sim.seed = seed;
    }
    if cli.smoke {
        file.sim.steps = file.sim.steps.min(4000);
        file.experiment.seeds = file.experiment.seeds.min(5);
        file.experiment.calibration_runs = file.experiment.calibration_runs.min(30);
    }
    Ok(file)
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let file = settings(cli)?;
    let out = cli.out.as_path();
    match &cli.command {
        Command::Run { rho, steps } => {
            let mut config = file.sim.clone();
            if let Some(rho) = rho {
                config.mix = AgentMix::with_switchers(*rho);
            }
            if let Some(steps) = steps {
                config.steps = *steps;
            }
            let result = run_market(&config).map_err(|e| CliError::Other(e.to_string()))?;
            output::write_run(out, &result, file.experiment.max_lag)?;
            println!("{} steps, {} trades, volatility {:.6}", config.steps, result.trades.len(), result.volatility());
        }
        Command::Calibrate { runs } => {
            let runs = runs.unwrap_or(file.experiment.calibration_runs);
            let base = switchmarket::sim::SimConfig { mix: AgentMix::with_switchers(0.0), ..file.sim.clone() };
            let samples = run_calibration_campaign(&base, runs).map_err(ExperimentError::from)?;
            output::write_atomic(&out.join("calibration_samples.csv"), |w| Ok(write_samples_csv(w, &samples)?))?;
            let gaps: Vec<f64> = samples.iter().map(|s| s.gap).collect();
            let fit = fit_gaussian(&gaps, None).map_err(ExperimentError::from)?;
            output::write_text(&out.join("calibration_fit.json"), &(fit_json(&fit).map_err(OutputError::from)? + "\n"))?;
            println!("{} runs, fitted mean {:.4}, sd {:.4}, adjusted R^2 {:.4}", runs, fit.b, fit.sigma, fit.r2_adj);
        }
        Command::Stats { input, max_lag } => {
            let table = load_prices(input)?;
            let report = StatsReport::from_paths(&table.prices, &table.fundamental, *max_lag)
                .map_err(OutputError::from)?;
            let path = if out.extension().is_some_and(|e| e == "json") { out.to_path_buf() } else { out.join("stats.json") };
            output::write_json(&path, &report)?;
            let m = &report.market;
            println!(
                "kurtosis {:.3}, ARCH b {:.4} (p {:.3e}), Hurst {:.3}",
                m.descriptive.kurtosis, m.arch.b.estimate, m.arch.b.p_value, m.hurst_rs
            );
        }
        Command::Sweep { keep_runs } => {
            let plan = file.plan();
            let runs_dir = out.join("runs");
            let keep = *keep_runs;
            let max_lag = file.experiment.max_lag;
            let outcome = run_sweep_with(&plan, |r| {
                if keep {
                    let name = format!("rho{:02}_seed{}", (r.config.mix.switchers * 100.0).round() as u32, r.config.seed);
                    output::write_run(&runs_dir.join(name), r, max_lag)?;
                }
                Ok(())
            });
            match outcome {
                Ok(report) => write_sweep(out, &plan, &report)?,
                Err(ExperimentError::Sweep { failures, partial }) => {
                    write_sweep(out, &plan, &partial)?;
                    return Err(CliError::Other(format!("{} run(s) failed; partial report written", failures.len())));
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::Gamma { input, window, bins } => {
            let table = load_prices(input)?;
            let result = gamma_table(&table.prices, &table.gamma, *window, *bins).map_err(ExperimentError::from)?;
            output::write_json(&out.join("gamma.json"), &result)?;
            for b in &result.bins {
                let vol = b.mean_volatility.map(|v| format!("{v:.6}")).unwrap_or_else(|| "-".into());
                println!("{:.2}\t{}\t{}", b.center, vol, b.count);
            }
        }
        Command::Reproduce => {
            let mut options = file.reproduce_options();
            options.smoke = cli.smoke;
            let bundle = reproduce(out, &options)?;
            println!(
                "{} tables, {} figure files, report at {}",
                bundle.tables.len(),
                bundle.figures.len(),
                bundle.report.display()
            );
        }
    }
    Ok(())
}

fn write_sweep(out: &Path, plan: &ExperimentPlan, report: &SweepReport) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(OutputError::from)?;
    output::write_json(&out.join("sweep.json"), report)?;
    output::write_atomic(&out.join("table9.csv"), |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["rho", "mean_volatility", "runs"])?;
        for m in &report.mixes {
            csv.write_record([m.rho.to_string(), m.mean_volatility.to_string(), m.runs.to_string()])?;
        }
        csv.flush()?;
        Ok(())
    })?;
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for (name, pick) in [
        ("fig7a.csv", (|c| c.informed) as fn(&switchmarket::experiment::TypeReturns) -> Option<f64>),
        ("fig7b.csv", |c| c.uninformed),
        ("fig7c.csv", |c| c.switcher_net),
    ] {
        output::write_atomic(&out.join(name), |w| {
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(["rho", "seed", "mean_return"])?;
            for c in &report.cells {
                csv.write_record([c.rho.to_string(), c.seed.to_string(), opt(pick(&c.returns))])?;
            }
            csv.flush()?;
            Ok(())
        })?;
    }
    output::write_atomic(&out.join("fig8.csv"), |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["rho", "gamma_center", "mean_volatility", "windows"])?;
        for m in &report.mixes {
            if let Some(t) = &m.pooled_gamma {
                for b in &t.bins {
                    csv.write_record([m.rho.to_string(), b.center.to_string(), opt(b.mean_volatility), b.count.to_string()])?;
                }
            }
        }
        csv.flush()?;
        Ok(())
    })?;
    for m in &report.mixes {
        println!(
            "rho {:.2}: volatility {:.6} over {} runs (plan has {} seeds)",
            m.rho,
            m.mean_volatility,
            m.runs,
            plan.seeds.len()
        );
    }
    Ok(())
}
