//! The market loop.
//!
//! Every step the fundamental value moves, all agents visit the market in a
//! freshly shuffled order, cancel whatever they left resting, draw a Poisson
//! number of orders and submit them against the live book. The step's market
//! price is the size-weighted mean of its trade prices, carried forward when
//! nothing traded.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{
    decide_order, midpoint, switcher_decide, AgentKind, AgentState, MarketView, OrderDecision, PredictorCoeffs,
    Strategy, SwitcherState,
};
use crate::book::{Order, OrderBook, OrderKind, Side, Trade};
use crate::calibration::CostDistribution;
use crate::fundamental::{FundamentalPath, FundamentalProcess, JumpDist};
use crate::ga::{evolve, fitness, Chromosome, ForecastSample, GaConfig, GaError, GenerationStats};
use crate::rng::{stream, SimRng, Stream};
use crate::stats::log_returns;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("agent fractions sum to {0}, expected 1")]
    FractionsSum(f64),
    #[error("fraction {fraction} of {n_agents} agents is not a whole number")]
    NonIntegralCount { fraction: f64, n_agents: usize },
    #[error("negative agent fraction {0}")]
    NegativeFraction(f64),
    #[error("parameter `{0}` is out of range")]
    OutOfRange(&'static str),
    #[error(transparent)]
    Ga(#[from] GaError),
}

/// Fractions of the population by trader type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentMix {
    pub informed: f64,
    pub uninformed: f64,
    pub zero_intelligence: f64,
    pub switchers: f64,
}

impl AgentMix {
    pub const fn new(informed: f64, uninformed: f64, zero_intelligence: f64, switchers: f64) -> Self {
        AgentMix { informed, uninformed, zero_intelligence, switchers }
    }

    /// 12% informed and 58% zero-intelligence; the remaining 30% is split
    /// between plain uninformed traders and switchers.
    pub fn with_switchers(rho: f64) -> Self {
        AgentMix::new(0.12, 0.30 - rho, 0.58, rho)
    }

    /// The five population structures of the switching experiments.
    pub fn switching_sweep() -> Vec<AgentMix> {
        [0.0, 0.07, 0.15, 0.22, 0.30].into_iter().map(AgentMix::with_switchers).collect()
    }

    pub fn fractions(&self) -> [f64; 4] {
        [self.informed, self.uninformed, self.zero_intelligence, self.switchers]
    }

    pub fn validate(&self, n_agents: usize) -> Result<(), ConfigError> {
        let fractions = self.fractions();
        if let Some(&f) = fractions.iter().find(|f| **f < -1e-12) {
            return Err(ConfigError::NegativeFraction(f));
        }
        let sum: f64 = fractions.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(ConfigError::FractionsSum(sum));
        }
        for fraction in fractions {
            let count = fraction * n_agents as f64;
            if (count - count.round()).abs() > 1e-6 {
                return Err(ConfigError::NonIntegralCount { fraction, n_agents });
            }
        }
        Ok(())
    }

    /// Head counts in the order informed, uninformed, zero-intelligence, switchers.
    pub fn counts(&self, n_agents: usize) -> [usize; 4] {
        self.fractions().map(|f| (f * n_agents as f64).round().max(0.0) as usize)
    }
}

impl Default for AgentMix {
    fn default() -> Self {
        AgentMix::with_switchers(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum CostPolicy {
    /// Every switcher pays the same cost.
    Fixed { value: f64 },
    /// Each switcher draws its cost once from a normal law truncated at zero.
    Gaussian { mean: f64, std: f64 },
}

impl Default for CostPolicy {
    fn default() -> Self {
        CostPolicy::Fixed { value: 0.36 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheduling {
    /// Fresh uniform permutation every step.
    #[default]
    Random,
    /// Agents always visit in id order.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub v0: f64,
    pub tick: f64,
    /// Transaction cost, applied as the limit-price offset.
    pub mu: f64,
    /// Mean number of fundamental jumps per step.
    pub jump_rate: f64,
    /// Mean number of orders per agent per step.
    pub order_rate: f64,
    /// Information lag of uninformed traders and length of the trailing price window.
    pub lag: usize,
    pub steps: usize,
    pub n_agents: usize,
    pub mix: AgentMix,
    pub cost: CostPolicy,
    pub seed: u64,
    pub ga: GaConfig,
    pub jump_dist: JumpDist,
    pub scheduling: Scheduling,
    /// Diagnostic mode: agents counted as informed trade exactly like
    /// uninformed learners.
    pub informed_as_uninformed: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            v0: 20.0,
            tick: 0.01,
            mu: 0.04,
            jump_rate: 4.0,
            order_rate: 1.0,
            lag: 1200,
            steps: 12_000,
            n_agents: 100,
            mix: AgentMix::default(),
            cost: CostPolicy::default(),
            seed: 0,
            ga: GaConfig::default(),
            jump_dist: JumpDist::Uniform,
            scheduling: Scheduling::Random,
            informed_as_uninformed: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [("v0", self.v0), ("tick", self.tick)];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ConfigError::OutOfRange(name));
            }
        }
        let non_negative = [("mu", self.mu), ("jump_rate", self.jump_rate), ("order_rate", self.order_rate)];
        for (name, value) in non_negative {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(ConfigError::OutOfRange(name));
            }
        }
        if self.n_agents == 0 {
            return Err(ConfigError::OutOfRange("n_agents"));
        }
        if self.n_agents > u32::MAX as usize {
            return Err(ConfigError::OutOfRange("n_agents"));
        }
        match self.cost {
            CostPolicy::Fixed { value } if !(value >= 0.0) => return Err(ConfigError::OutOfRange("cost.value")),
            CostPolicy::Gaussian { mean, std } if !(std > 0.0) || !mean.is_finite() => {
                return Err(ConfigError::OutOfRange("cost.std"))
            }
            _ => {}
        }
        self.mix.validate(self.n_agents)?;
        self.ga.validate()?;
        Ok(())
    }
}

/// Profit of one executed order measured against the fundamental value:
/// sellers gain `price - v`, buyers `v - price`. For resting limit orders the
/// execution price is the limit price.
pub fn order_profit(side: Side, execution_price: f64, value: f64) -> f64 {
    match side {
        Side::Sell => execution_price - value,
        Side::Buy => value - execution_price,
    }
}

/// Mean trade price from a tick sum, converted to currency.
pub fn average_price(sum_ticks: i64, count: u64, tick: f64) -> f64 {
    let per_unit = 1.0 / tick;
    let mean_ticks = sum_ticks as f64 / count as f64;
    if (per_unit - per_unit.round()).abs() < 1e-9 {
        mean_ticks / per_unit.round()
    } else {
        mean_ticks * tick
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ProfitTally {
    pub orders: u64,
    pub total: f64,
}

impl ProfitTally {
    fn add(&mut self, profit: f64) {
        self.orders += 1;
        self.total += profit;
    }

    pub fn mean(&self) -> Option<f64> {
        (self.orders > 0).then(|| self.total / self.orders as f64)
    }
}

/// Order-profit accounting by trader type.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ProfitBook {
    pub informed: ProfitTally,
    pub uninformed: ProfitTally,
    pub zero_intelligence: ProfitTally,
    pub switcher: ProfitTally,
    /// Information cost paid by switchers, once per informed step.
    pub switcher_info_cost: f64,
    pub switcher_informed_steps: u64,
}

impl ProfitBook {
    pub fn tally(&self, kind: AgentKind) -> &ProfitTally {
        match kind {
            AgentKind::Informed => &self.informed,
            AgentKind::Uninformed => &self.uninformed,
            AgentKind::ZeroIntelligence => &self.zero_intelligence,
            AgentKind::Switcher => &self.switcher,
        }
    }

    fn tally_mut(&mut self, kind: AgentKind) -> &mut ProfitTally {
        match kind {
            AgentKind::Informed => &mut self.informed,
            AgentKind::Uninformed => &mut self.uninformed,
            AgentKind::ZeroIntelligence => &mut self.zero_intelligence,
            AgentKind::Switcher => &mut self.switcher,
        }
    }

    /// Mean order profit of a type before transaction and information costs.
    pub fn mean(&self, kind: AgentKind) -> Option<f64> {
        self.tally(kind).mean()
    }

    /// Switchers' mean order profit after the information cost they paid.
    pub fn switcher_net_mean(&self) -> Option<f64> {
        let t = &self.switcher;
        (t.orders > 0).then(|| (t.total - self.switcher_info_cost) / t.orders as f64)
    }
}

/// Everything recorded by one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub config: SimConfig,
    /// Fundamental value, `steps + 1` entries.
    pub fundamental: Vec<f64>,
    /// Market price, `steps + 1` entries starting at `v0`.
    pub prices: Vec<f64>,
    /// Fraction of switchers informed on each step; empty without switchers.
    pub gamma: Vec<f64>,
    pub trades: Vec<Trade>,
    pub profits: ProfitBook,
    pub ga_trace: Vec<GenerationStats>,
    pub suppressed_orders: u64,
    pub clamped_fundamental_steps: usize,
}

impl RunResult {
    pub fn market_returns(&self) -> Vec<f64> {
        log_returns(&self.prices)
    }

    pub fn fundamental_returns(&self) -> Vec<f64> {
        log_returns(&self.fundamental)
    }

    /// Standard deviation of per-step market log-returns.
    pub fn volatility(&self) -> f64 {
        crate::stats::std_dev(&self.market_returns())
    }

    pub fn has_switchers(&self) -> bool {
        !self.gamma.is_empty()
    }
}

/// A market in progress. [`Market::step`] advances one time step.
pub struct Market {
    config: SimConfig,
    process: FundamentalProcess,
    fundamental_rng: SimRng,
    scheduler_rng: SimRng,
    ga_rng: SimRng,
    agent_rngs: Vec<SimRng>,
    order_count: Option<Poisson<f64>>,
    agents: Vec<AgentState>,
    schedule: Vec<usize>,
    book: OrderBook,
    t: usize,
    fundamental: FundamentalPath,
    prices: Vec<f64>,
    gamma: Vec<f64>,
    trades: Vec<Trade>,
    window: VecDeque<(i64, u64)>,
    window_ticks: i64,
    window_count: u64,
    history: VecDeque<ForecastSample>,
    profits: ProfitBook,
    ga_trace: Vec<GenerationStats>,
    next_order_id: u64,
    suppressed: u64,
    switchers: usize,
}

impl Market {
    pub fn new(config: SimConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let seed = config.seed;
        let mut setup = stream(seed, Stream::Setup);
        let [n_informed, n_uninformed, n_zi, n_switchers] = config.mix.counts(config.n_agents);
        let cost_draw = match config.cost {
            CostPolicy::Fixed { .. } => None,
            CostPolicy::Gaussian { mean, std } => Some(CostDistribution::new(mean, std)),
        };
        let mut agents = Vec::with_capacity(config.n_agents);
        let kinds = [
            (AgentKind::Informed, n_informed),
            (AgentKind::Uninformed, n_uninformed),
            (AgentKind::ZeroIntelligence, n_zi),
            (AgentKind::Switcher, n_switchers),
        ];
        for (kind, count) in kinds {
            for _ in 0..count {
                let coeffs = PredictorCoeffs::random(&mut setup);
                let strategy = match kind {
                    AgentKind::Informed if config.informed_as_uninformed => Strategy::Uninformed { coeffs },
                    AgentKind::Informed => Strategy::Informed,
                    AgentKind::Uninformed => Strategy::Uninformed { coeffs },
                    AgentKind::ZeroIntelligence => Strategy::ZeroIntelligence,
                    AgentKind::Switcher => {
                        let cost = match (config.cost, &cost_draw) {
                            (CostPolicy::Fixed { value }, _) => value,
                            (_, Some(d)) => d.sample(&mut setup),
                            _ => unreachable!(),
                        };
                        Strategy::Switcher(SwitcherState::new(coeffs, cost))
                    }
                };
                agents.push(AgentState { id: agents.len() as u32, kind, strategy });
            }
        }
        let agent_rngs = (0..agents.len() as u32).map(|i| stream(seed, Stream::Agent(i))).collect();
        let order_count = (config.order_rate > 0.0).then(|| Poisson::new(config.order_rate).expect("positive rate"));
        let mut fundamental = FundamentalPath { values: Vec::with_capacity(config.steps + 1), clamped_steps: 0 };
        fundamental.values.push(config.v0);
        let mut prices = Vec::with_capacity(config.steps + 1);
        prices.push(config.v0);
        let gamma = if n_switchers > 0 { vec![0.0] } else { Vec::new() };
        Ok(Market {
            process: FundamentalProcess::new(config.jump_rate, config.tick, config.jump_dist),
            fundamental_rng: stream(seed, Stream::Fundamental),
            scheduler_rng: stream(seed, Stream::Scheduler),
            ga_rng: stream(seed, Stream::Ga),
            agent_rngs,
            order_count,
            schedule: (0..agents.len()).collect(),
            agents,
            book: OrderBook::new(),
            t: 0,
            fundamental,
            prices,
            gamma,
            trades: Vec::new(),
            window: VecDeque::with_capacity(config.lag + 1),
            window_ticks: 0,
            window_count: 0,
            history: VecDeque::with_capacity(config.ga.eval_window + 1),
            profits: ProfitBook::default(),
            ga_trace: Vec::new(),
            next_order_id: 0,
            suppressed: 0,
            switchers: n_switchers,
            config,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    /// Current time index; 0 before the first step.
    pub fn time(&self) -> usize {
        self.t
    }

    pub fn is_finished(&self) -> bool {
        self.t >= self.config.steps
    }

    pub fn book(&self) -> &OrderBook {
        &self.book
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn fundamental(&self) -> &[f64] {
        &self.fundamental.values
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn trades(&self) -> &[Trade] {
        &self.trades
    }

    pub fn profits(&self) -> &ProfitBook {
        &self.profits
    }

    /// JSON snapshot of every agent's state.
    pub fn agent_snapshot_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(&self.agents)
    }

    fn trailing_average(&self, fallback: f64) -> f64 {
        if self.window_count > 0 {
            average_price(self.window_ticks, self.window_count, self.config.tick)
        } else {
            fallback
        }
    }

    fn live_midpoint(&self, p_prev: f64) -> f64 {
        let tick = self.config.tick;
        let (bid, ask) = self.book.best_quotes();
        midpoint(bid.map(|p| p.to_currency(tick)), ask.map(|p| p.to_currency(tick)), p_prev)
    }

    /// Advance one time step. Does nothing once the configured horizon is reached.
    pub fn step(&mut self) {
        if self.is_finished() {
            return;
        }
        let t = self.t + 1;
        let tick = self.config.tick;
        let mu = self.config.mu;

        let moved = self.process.step(*self.fundamental.values.last().expect("v0"), &mut self.fundamental_rng);
        self.fundamental.values.push(moved.value);
        self.fundamental.clamped_steps += usize::from(moved.clamped);
        let v_now = moved.value;
        let v_lagged = self.fundamental.lagged(t, self.config.lag);
        let p_prev = self.prices[t - 1];
        let p_ave = self.trailing_average(p_prev);
        let opening_mid = self.live_midpoint(p_prev);
        self.book.set_step(t as u64);

        if self.config.scheduling == Scheduling::Random {
            self.schedule.shuffle(&mut self.scheduler_rng);
        }

        let mut step_ticks = 0_i64;
        let mut step_trades = 0_u64;
        let mut informed_switchers = 0_usize;
        for k in 0..self.schedule.len() {
            let idx = self.schedule[k];
            let id = self.agents[idx].id;
            self.book.cancel_agent_orders(id);
            let rng = &mut self.agent_rngs[idx];
            let n = self.order_count.as_ref().map_or(0, |p| p.sample(rng) as u64);
            let (bid, ask) = self.book.best_quotes();
            let p_mid = midpoint(bid.map(|p| p.to_currency(tick)), ask.map(|p| p.to_currency(tick)), p_prev);
            let view = MarketView { v_now, v_lagged, p_ave, p_mid, p_prev, step: t as u64 };
            let prediction = match &mut self.agents[idx].strategy {
                Strategy::Informed => view.v_now,
                Strategy::Uninformed { coeffs } => view.forecast_with(coeffs),
                Strategy::ZeroIntelligence => view.forecast_with(&PredictorCoeffs::random(rng)),
                Strategy::Switcher(state) => {
                    let decision = switcher_decide(state, &view);
                    if decision.informed {
                        informed_switchers += 1;
                        self.profits.switcher_info_cost += state.info_cost;
                        self.profits.switcher_informed_steps += 1;
                    }
                    decision.prediction
                }
            };
            for _ in 0..n {
                let (bid, ask) = self.book.best_quotes();
                let intent = match decide_order(prediction, bid, ask, mu, tick, rng) {
                    OrderDecision::Submit(intent) => intent,
                    OrderDecision::Suppressed => {
                        self.suppressed += 1;
                        continue;
                    }
                };
                self.next_order_id += 1;
                let order = match intent.kind {
                    OrderKind::Limit(p) => Order::limit(self.next_order_id, id, intent.side, p),
                    OrderKind::Market => Order::market(self.next_order_id, id, intent.side),
                };
                let trade = self.book.submit(order).expect("order rules only emit valid orders");
                if let Some(trade) = trade {
                    let price = trade.price.to_currency(tick);
                    let buyer = self.agents[trade.buy_agent as usize].kind;
                    let seller = self.agents[trade.sell_agent as usize].kind;
                    self.profits.tally_mut(buyer).add(order_profit(Side::Buy, price, v_now));
                    self.profits.tally_mut(seller).add(order_profit(Side::Sell, price, v_now));
                    step_ticks += trade.price.ticks();
                    step_trades += u64::from(trade.size());
                    self.trades.push(trade);
                }
            }
        }

        let p_now = if step_trades > 0 { average_price(step_ticks, step_trades, tick) } else { p_prev };
        self.prices.push(p_now);
        if self.switchers > 0 {
            self.gamma.push(informed_switchers as f64 / self.switchers as f64);
        }

        self.window.push_back((step_ticks, step_trades));
        self.window_ticks += step_ticks;
        self.window_count += step_trades;
        if self.window.len() > self.config.lag {
            let (old_ticks, old_count) = self.window.pop_front().expect("non-empty");
            self.window_ticks -= old_ticks;
            self.window_count -= old_count;
        }

        self.history.push_back(ForecastSample { v_lagged, p_ave, p_mid: opening_mid, realized: p_now });
        if self.history.len() > self.config.ga.eval_window {
            self.history.pop_front();
        }
        self.t = t;
        if t.is_multiple_of(self.config.ga.interval) {
            self.learn();
        }
    }

    /// One GA generation over the agents currently forecasting with weights:
    /// uninformed traders and switchers that did not buy information.
    fn learn(&mut self) {
        let members: Vec<usize> = self
            .agents
            .iter()
            .enumerate()
            .filter(|(_, a)| match a.strategy {
                Strategy::Uninformed { .. } => true,
                Strategy::Switcher(s) => !s.bought_info_last,
                _ => false,
            })
            .map(|(i, _)| i)
            .collect();
        if members.len() < 2 || self.history.is_empty() {
            return;
        }
        let history: Vec<ForecastSample> = self.history.iter().copied().collect();
        let score = |c: &PredictorCoeffs| fitness(c, &history).expect("non-empty history");
        let population: Vec<Chromosome> = members
            .iter()
            .map(|&i| {
                let coeffs = self.agents[i].coeffs().expect("learners carry weights");
                Chromosome { coeffs, fitness: score(&coeffs) }
            })
            .collect();
        let next = evolve(&population, &mut self.ga_rng, &self.config.ga, score).expect("validated GA config");
        for (&i, chromosome) in members.iter().zip(&next) {
            *self.agents[i].coeffs_mut().expect("learners carry weights") = chromosome.coeffs;
        }
        let generation = self.ga_trace.len() as u64 + 1;
        self.ga_trace.push(GenerationStats::of(self.t as u64, generation, &next));
    }

    pub fn finish(self) -> RunResult {
        RunResult {
            config: self.config,
            fundamental: self.fundamental.values,
            prices: self.prices,
            gamma: self.gamma,
            trades: self.trades,
            profits: self.profits,
            ga_trace: self.ga_trace,
            suppressed_orders: self.suppressed,
            clamped_fundamental_steps: self.fundamental.clamped_steps,
        }
    }
}

/// Run a full market for `config.steps` steps.
pub fn run_market(config: &SimConfig) -> Result<RunResult, ConfigError> {
    let mut market = Market::new(config.clone())?;
    while !market.is_finished() {
        market.step();
    }
    Ok(market.finish())
}

/// Recompute the per-step market price from a trade tape.
pub fn prices_from_tape(trades: &[Trade], steps: usize, v0: f64, tick: f64) -> Vec<f64> {
    let mut sums = vec![(0_i64, 0_u64); steps + 1];
    for trade in trades {
        let slot = &mut sums[trade.step as usize];
        slot.0 += trade.price.ticks();
        slot.1 += u64::from(trade.size());
    }
    let mut prices = Vec::with_capacity(steps + 1);
    prices.push(v0);
    for &(ticks, count) in &sums[1..] {
        let prev = *prices.last().expect("v0");
        prices.push(if count > 0 { average_price(ticks, count, tick) } else { prev });
    }
    prices
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> SimConfig {
        SimConfig { steps: 300, lag: 50, seed, mix: AgentMix::with_switchers(0.3), ..SimConfig::default() }
    }

    #[test]
    fn profit_cases() {
        assert!((order_profit(Side::Sell, 20.04, 20.0) - 0.04).abs() < 1e-12);
        assert!((order_profit(Side::Buy, 20.02, 20.0) + 0.02).abs() < 1e-12);
        assert!((order_profit(Side::Buy, 19.96, 20.0) - 0.04).abs() < 1e-12);
        assert!((order_profit(Side::Sell, 19.98, 20.0) + 0.02).abs() < 1e-12);
    }

    #[test]
    fn average_price_is_size_weighted_mean() {
        assert_eq!(average_price(2000 + 2002, 2, 0.01), 20.01);
    }

    #[test]
    fn mix_validation() {
        assert!(AgentMix::with_switchers(0.07).validate(100).is_ok());
        assert!(matches!(AgentMix::with_switchers(0.07).validate(10), Err(ConfigError::NonIntegralCount { .. })));
        assert!(matches!(AgentMix::new(0.5, 0.5, 0.5, 0.0).validate(100), Err(ConfigError::FractionsSum(_))));
        for mix in AgentMix::switching_sweep() {
            assert_eq!(mix.counts(100).iter().sum::<usize>(), 100);
        }
        assert_eq!(AgentMix::with_switchers(0.22).counts(100), [12, 8, 58, 22]);
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::default().validate().is_ok());
        let bad = SimConfig { tick: 0.0, ..SimConfig::default() };
        assert_eq!(bad.validate(), Err(ConfigError::OutOfRange("tick")));
        let bad = SimConfig { cost: CostPolicy::Fixed { value: -1.0 }, ..SimConfig::default() };
        assert!(bad.validate().is_err());
        let bad = SimConfig { ga: GaConfig { interval: 0, ..GaConfig::default() }, ..SimConfig::default() };
        assert!(matches!(bad.validate(), Err(ConfigError::Ga(_))));
    }

    #[test]
    fn no_orders_means_flat_price() {
        let config = SimConfig { order_rate: 0.0, steps: 20, ..small(1) };
        let r = run_market(&config).unwrap();
        assert!(r.trades.is_empty());
        assert!(r.prices.iter().all(|&p| p == 20.0));
    }

    #[test]
    fn runs_are_deterministic() {
        let a = run_market(&small(3)).unwrap();
        let b = run_market(&small(3)).unwrap();
        assert_eq!(a, b);
        let c = run_market(&small(4)).unwrap();
        assert_ne!(a.prices, c.prices);
    }

    #[test]
    fn series_lengths_and_tape_consistency() {
        let r = run_market(&small(5)).unwrap();
        assert_eq!(r.prices.len(), 301);
        assert_eq!(r.fundamental.len(), 301);
        assert_eq!(r.gamma.len(), 301);
        assert_eq!(r.prices[0], 20.0);
        assert!(r.gamma.iter().all(|g| (0.0..=1.0).contains(g)));
        assert_eq!(prices_from_tape(&r.trades, 300, 20.0, 0.01), r.prices);
        assert!(!r.trades.is_empty());
    }

    #[test]
    fn no_switchers_no_gamma() {
        let config = SimConfig { mix: AgentMix::with_switchers(0.0), ..small(6) };
        let r = run_market(&config).unwrap();
        assert!(r.gamma.is_empty());
        assert_eq!(r.profits.switcher.orders, 0);
        assert_eq!(r.profits.switcher_net_mean(), None);
    }

    #[test]
    fn profits_sum_to_zero_across_trades() {
        let r = run_market(&small(7)).unwrap();
        let p = r.profits;
        let total = p.informed.total + p.uninformed.total + p.zero_intelligence.total + p.switcher.total;
        let orders = p.informed.orders + p.uninformed.orders + p.zero_intelligence.orders + p.switcher.orders;
        assert_eq!(orders, 2 * r.trades.len() as u64);
        assert!(total.abs() < 1e-8, "{total}");
    }

    #[test]
    fn fundamental_path_ignores_agent_mix() {
        let a = run_market(&SimConfig { mix: AgentMix::with_switchers(0.0), ..small(8) }).unwrap();
        let b = run_market(&SimConfig { mix: AgentMix::with_switchers(0.3), ..small(8) }).unwrap();
        assert_eq!(a.fundamental, b.fundamental);
    }

    #[test]
    fn book_stays_consistent_during_run() {
        let mut market = Market::new(small(9)).unwrap();
        while !market.is_finished() {
            market.step();
            assert!(market.book().is_consistent());
        }
        assert!(market.agent_snapshot_json().unwrap().contains("\"switcher\""));
    }
}
