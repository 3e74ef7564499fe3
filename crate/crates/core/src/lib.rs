//! Agent-based continuous double auction market with costly information.
//!
//! Four trader types meet in a one-share, tick-grid limit order book:
//! informed traders who see the fundamental value, uninformed traders who see
//! it with a long lag and learn forecast weights with a genetic algorithm,
//! zero-intelligence traders with random weights, and switchers who pay for
//! the fundamental only when their recent forecast error justifies the cost.
//!
//! Module map:
//!
//! - [`book`]: price-time priority order book.
//! - [`fundamental`]: compound Poisson fundamental value.
//! - [`agents`]: forecasts, the switching rule and the order submission rules.
//! - [`ga`]: genetic algorithm over forecast weights.
//! - [`sim`]: the step loop, configuration and run records.
//! - [`calibration`]: information-cost estimation and Gaussian fit.
//! - [`stats`]: stylized-facts statistics.
//! - [`experiment`]: switching sweeps, γ analysis and the full report bundle.
//! - [`output`]: CSV/JSON persistence and config files.
//!
//! ```no_run
//! use switchmarket::sim::{run_market, AgentMix, SimConfig};
//!
//! let config = SimConfig { mix: AgentMix::with_switchers(0.15), seed: 7, ..SimConfig::default() };
//! let run = run_market(&config).unwrap();
//! println!("volatility {:.6}", run.volatility());
//! ```

// `!(x > 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agents;
pub mod book;
pub mod calibration;
pub mod experiment;
pub mod fundamental;
pub mod ga;
pub mod output;
pub mod rng;
pub mod sim;
pub mod stats;
