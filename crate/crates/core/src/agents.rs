//! Trader types, their price forecasts and the order submission rules.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::book::{AgentId, OrderKind, Price, Rounding, Side};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error("predictor coefficient {0} outside [0, 1]")]
    CoeffOutOfRange(f64),
    #[error("predictor coefficients are all zero")]
    ZeroCoeffs,
}

/// Weights on the lagged fundamental, the trailing average trade price and the
/// quote midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictorCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl PredictorCoeffs {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self, AgentError> {
        for x in [a, b, c] {
            if !(0.0..=1.0).contains(&x) {
                return Err(AgentError::CoeffOutOfRange(x));
            }
        }
        if a + b + c <= 0.0 {
            return Err(AgentError::ZeroCoeffs);
        }
        Ok(PredictorCoeffs { a, b, c })
    }

    /// Independent uniform weights, redrawn until their sum is positive.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let (a, b, c) = (rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>());
            if a + b + c > 0.0 {
                return PredictorCoeffs { a, b, c };
            }
        }
    }

    pub fn genes(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    /// Weighted forecast; the weights are normalised by their sum.
    pub fn forecast(&self, lagged_value: f64, average_price: f64, midpoint: f64) -> f64 {
        (self.a * lagged_value + self.b * average_price + self.c * midpoint) / (self.a + self.b + self.c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Informed,
    Uninformed,
    ZeroIntelligence,
    Switcher,
}

impl AgentKind {
    pub const ALL: [AgentKind; 4] =
        [AgentKind::Informed, AgentKind::Uninformed, AgentKind::ZeroIntelligence, AgentKind::Switcher];

    pub fn label(self) -> &'static str {
        match self {
            AgentKind::Informed => "informed",
            AgentKind::Uninformed => "uninformed",
            AgentKind::ZeroIntelligence => "zero_intelligence",
            AgentKind::Switcher => "switcher",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitcherState {
    pub coeffs: PredictorCoeffs,
    pub info_cost: f64,
    pub bought_info_last: bool,
    /// Fundamental value seen the last time information was bought.
    pub known_value: Option<f64>,
    /// Weighted forecast formed on the previous step, informed or not.
    pub last_prediction: Option<f64>,
}

impl SwitcherState {
    pub fn new(coeffs: PredictorCoeffs, info_cost: f64) -> Self {
        assert!(info_cost >= 0.0, "information cost must be non-negative");
        SwitcherState { coeffs, info_cost, bought_info_last: false, known_value: None, last_prediction: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Strategy {
    Informed,
    Uninformed { coeffs: PredictorCoeffs },
    ZeroIntelligence,
    Switcher(SwitcherState),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: AgentId,
    /// Type used for profit accounting. Differs from the strategy only in
    /// diagnostic runs where informed agents trade as uninformed clones.
    pub kind: AgentKind,
    pub strategy: Strategy,
}

impl AgentState {
    pub fn coeffs(&self) -> Option<PredictorCoeffs> {
        match self.strategy {
            Strategy::Uninformed { coeffs } => Some(coeffs),
            Strategy::Switcher(s) => Some(s.coeffs),
            _ => None,
        }
    }

    pub fn coeffs_mut(&mut self) -> Option<&mut PredictorCoeffs> {
        match &mut self.strategy {
            Strategy::Uninformed { coeffs } => Some(coeffs),
            Strategy::Switcher(s) => Some(&mut s.coeffs),
            _ => None,
        }
    }

    /// Currently acting on bought information (switchers only).
    pub fn is_informed_switcher(&self) -> bool {
        matches!(self.strategy, Strategy::Switcher(s) if s.bought_info_last)
    }
}

/// What an agent can observe when it forms a forecast.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketView {
    /// Current fundamental value; only informed traders may use it.
    pub v_now: f64,
    /// Fundamental value `lag` steps ago.
    pub v_lagged: f64,
    /// Mean transaction price over the trailing window.
    pub p_ave: f64,
    /// Quote midpoint.
    pub p_mid: f64,
    /// Market price of the previous step.
    pub p_prev: f64,
    pub step: u64,
}

impl MarketView {
    pub fn forecast_with(&self, coeffs: &PredictorCoeffs) -> f64 {
        coeffs.forecast(self.v_lagged, self.p_ave, self.p_mid)
    }
}

/// Quote midpoint with the one-sided and empty-book fallbacks.
pub fn midpoint(bid: Option<f64>, ask: Option<f64>, p_prev: f64) -> f64 {
    match (bid, ask) {
        (Some(b), Some(a)) => 0.5 * (a + b),
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => p_prev,
    }
}

pub fn predict_informed(view: &MarketView) -> f64 {
    view.v_now
}

pub fn predict_uninformed(coeffs: &PredictorCoeffs, view: &MarketView) -> Result<f64, AgentError> {
    if coeffs.a + coeffs.b + coeffs.c <= 0.0 {
        return Err(AgentError::ZeroCoeffs);
    }
    Ok(view.forecast_with(coeffs))
}

pub fn predict_zero_intelligence<R: Rng + ?Sized>(rng: &mut R, view: &MarketView) -> f64 {
    view.forecast_with(&PredictorCoeffs::random(rng))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchDecision {
    pub informed: bool,
    pub prediction: f64,
}

/// Pay-for-information rule.
///
/// The switcher compares last step's forecast error against the error it
/// would have made using the fundamental, plus the cost. If it did not buy
/// last step it does not know `v[t-1]` and uses `p[t-1]` in its place, so the
/// informed error is zero. Ties go to buying. The weighted forecast is always
/// recomputed and stored for the next comparison.
pub fn switcher_decide(state: &mut SwitcherState, view: &MarketView) -> SwitchDecision {
    let uninformed_forecast = view.forecast_with(&state.coeffs);
    let informed = match state.last_prediction {
        // nothing to compare against on the first step
        None => false,
        Some(last) => {
            let err_uninformed = (last - view.p_prev).abs();
            let err_informed = match (state.bought_info_last, state.known_value) {
                (true, Some(v_prev)) => (v_prev - view.p_prev).abs(),
                _ => 0.0,
            };
            err_uninformed >= err_informed + state.info_cost
        }
    };
    state.bought_info_last = informed;
    state.known_value = informed.then_some(view.v_now);
    state.last_prediction = Some(uninformed_forecast);
    SwitchDecision { informed, prediction: if informed { view.v_now } else { uninformed_forecast } }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderIntent {
    pub side: Side,
    pub kind: OrderKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderDecision {
    Submit(OrderIntent),
    /// The limit price would fall below one tick.
    Suppressed,
}

fn limit_order(side: Side, price: f64, tick: f64) -> OrderDecision {
    // buys round down and sells round up, away from the trader
    let rounding = match side {
        Side::Buy => Rounding::Down,
        Side::Sell => Rounding::Up,
    };
    match Price::from_currency(price, tick, rounding) {
        Ok(p) => OrderDecision::Submit(OrderIntent { side, kind: OrderKind::Limit(p) }),
        Err(_) => OrderDecision::Suppressed,
    }
}

/// Classify one order against the current best quotes.
pub fn decide_order<R: Rng + ?Sized>(
    prediction: f64,
    bid: Option<Price>,
    ask: Option<Price>,
    mu: f64,
    tick: f64,
    rng: &mut R,
) -> OrderDecision {
    let market = |side| OrderDecision::Submit(OrderIntent { side, kind: OrderKind::Market });
    let bid = bid.map(|p| p.to_currency(tick));
    let ask = ask.map(|p| p.to_currency(tick));
    match (bid, ask) {
        (Some(bid), Some(ask)) => {
            if prediction > ask + mu {
                market(Side::Buy)
            } else if prediction < bid - mu {
                market(Side::Sell)
            } else if (ask - prediction).abs() <= (prediction - bid).abs() {
                limit_order(Side::Buy, prediction - mu, tick)
            } else {
                limit_order(Side::Sell, prediction + mu, tick)
            }
        }
        (None, Some(ask)) => {
            if prediction > ask + mu {
                market(Side::Buy)
            } else {
                limit_order(Side::Buy, prediction - mu, tick)
            }
        }
        (Some(bid), None) => {
            if prediction < bid - mu {
                market(Side::Sell)
            } else {
                limit_order(Side::Sell, prediction + mu, tick)
            }
        }
        (None, None) => {
            if rng.random_bool(0.5) {
                limit_order(Side::Buy, prediction - mu, tick)
            } else {
                limit_order(Side::Sell, prediction + mu, tick)
            }
        }
    }
}

/// `n` decisions against fixed quotes. The simulation loop calls
/// [`decide_order`] per order instead so that each order sees the live book.
pub fn make_orders<R: Rng + ?Sized>(
    prediction: f64,
    quotes: (Option<Price>, Option<Price>),
    mu: f64,
    tick: f64,
    n: usize,
    rng: &mut R,
) -> Vec<OrderDecision> {
    (0..n).map(|_| decide_order(prediction, quotes.0, quotes.1, mu, tick, rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};

    const TICK: f64 = 0.01;
    const MU: f64 = 0.04;

    fn view(v_lagged: f64, p_ave: f64, p_mid: f64) -> MarketView {
        MarketView { v_now: 20.0, v_lagged, p_ave, p_mid, p_prev: 20.0, step: 5 }
    }

    fn px(x: f64) -> Price {
        Price::from_currency(x, TICK, Rounding::Nearest).unwrap()
    }

    #[test]
    fn informed_forecast_is_current_value() {
        for v in [20.0, 19.37] {
            let mut w = view(1.0, 2.0, 3.0);
            w.v_now = v;
            assert_eq!(predict_informed(&w), v);
        }
    }

    #[test]
    fn uninformed_forecasts() {
        let w = view(19.5, 20.1, 20.4);
        let single = PredictorCoeffs::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(predict_uninformed(&single, &w).unwrap(), 19.5);
        let equal = PredictorCoeffs::new(1.0, 1.0, 1.0).unwrap();
        assert!((predict_uninformed(&equal, &w).unwrap() - 20.0).abs() < 1e-12);
        let mixed = PredictorCoeffs::new(0.2, 0.3, 0.5).unwrap();
        assert!((predict_uninformed(&mixed, &view(20.0, 21.0, 22.0)).unwrap() - 21.3).abs() < 1e-12);
    }

    #[test]
    fn zero_coeffs_rejected() {
        assert_eq!(PredictorCoeffs::new(0.0, 0.0, 0.0), Err(AgentError::ZeroCoeffs));
        assert!(matches!(PredictorCoeffs::new(1.2, 0.0, 0.0), Err(AgentError::CoeffOutOfRange(_))));
        let raw = PredictorCoeffs { a: 0.0, b: 0.0, c: 0.0 };
        assert_eq!(predict_uninformed(&raw, &view(1.0, 1.0, 1.0)), Err(AgentError::ZeroCoeffs));
    }

    #[test]
    fn zero_intelligence_with_equal_inputs() {
        let mut rng = stream(2, Stream::Agent(0));
        for _ in 0..100 {
            let p = predict_zero_intelligence(&mut rng, &view(19.25, 19.25, 19.25));
            assert!((p - 19.25).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_intelligence_mean_is_central() {
        let mut rng = stream(11, Stream::Agent(3));
        let w = view(19.0, 20.0, 21.0);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| predict_zero_intelligence(&mut rng, &w)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - 20.0).abs() < 3.0 * se, "mean {mean} se {se}");
        assert!(draws.iter().all(|&p| (19.0..=21.0).contains(&p)));
    }

    fn switcher(last_prediction: f64, bought: bool, known: f64, cost: f64) -> SwitcherState {
        SwitcherState {
            coeffs: PredictorCoeffs::new(0.5, 0.5, 0.5).unwrap(),
            info_cost: cost,
            bought_info_last: bought,
            known_value: bought.then_some(known),
            last_prediction: Some(last_prediction),
        }
    }

    #[test]
    fn switcher_stays_uninformed_when_error_below_cost() {
        let mut s = switcher(20.10, false, 0.0, 0.36);
        let w = MarketView { v_now: 20.3, v_lagged: 19.0, p_ave: 20.0, p_mid: 20.0, p_prev: 20.0, step: 9 };
        let d = switcher_decide(&mut s, &w);
        assert!(!d.informed);
        assert!((d.prediction - (19.0 + 20.0 + 20.0) / 3.0).abs() < 1e-12);
        assert!(!s.bought_info_last);
        assert_eq!(s.known_value, None);
    }

    #[test]
    fn switcher_buys_again_when_error_exceeds_cost() {
        let mut s = switcher(20.50, true, 20.00, 0.36);
        let w = MarketView { v_now: 20.07, v_lagged: 19.0, p_ave: 20.0, p_mid: 20.0, p_prev: 20.0, step: 9 };
        let d = switcher_decide(&mut s, &w);
        assert!(d.informed);
        assert_eq!(d.prediction, 20.07);
        assert!(s.bought_info_last);
        assert_eq!(s.known_value, Some(20.07));
        assert!((s.last_prediction.unwrap() - 59.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn switcher_tie_goes_to_buying() {
        // C = 0 and last forecast equal to the known value: errors tie
        let mut s = switcher(19.8, true, 19.8, 0.0);
        let w = MarketView { v_now: 20.0, v_lagged: 20.0, p_ave: 20.0, p_mid: 20.0, p_prev: 20.0, step: 3 };
        assert!(switcher_decide(&mut s, &w).informed);
    }

    #[test]
    fn switcher_zero_cost_branch_table() {
        // (e_u, e_i, buys) with p_prev = 20; dyadic offsets keep the errors exact
        let table = [
            (0.0, 0.0, true),
            (0.125, 0.0, true),
            (0.125, 0.125, true),
            (0.125, 0.25, false),
            (0.375, 0.25, true),
            (0.0625, 0.5, false),
        ];
        for (e_u, e_i, buys) in table {
            let mut s = switcher(20.0 + e_u, true, 20.0 - e_i, 0.0);
            let w = MarketView { v_now: 20.0, v_lagged: 20.0, p_ave: 20.0, p_mid: 20.0, p_prev: 20.0, step: 3 };
            assert_eq!(switcher_decide(&mut s, &w).informed, buys, "e_u={e_u} e_i={e_i}");
        }
    }

    #[test]
    fn first_step_switcher_is_uninformed() {
        let mut s = SwitcherState::new(PredictorCoeffs::new(1.0, 0.0, 0.0).unwrap(), 0.0);
        let d = switcher_decide(&mut s, &view(19.0, 20.0, 20.0));
        assert!(!d.informed);
        assert_eq!(d.prediction, 19.0);
    }

    #[test]
    fn table_rules_examples() {
        let mut rng = stream(0, Stream::Agent(0));
        let d = decide_order(20.10, Some(px(19.90)), Some(px(20.00)), MU, TICK, &mut rng);
        assert_eq!(d, OrderDecision::Submit(OrderIntent { side: Side::Buy, kind: OrderKind::Market }));

        let d = decide_order(20.00, Some(px(19.90)), Some(px(20.03)), MU, TICK, &mut rng);
        assert_eq!(d, OrderDecision::Submit(OrderIntent { side: Side::Buy, kind: OrderKind::Limit(px(19.96)) }));

        let d = decide_order(19.80, Some(px(19.90)), Some(px(20.03)), MU, TICK, &mut rng);
        assert_eq!(d, OrderDecision::Submit(OrderIntent { side: Side::Sell, kind: OrderKind::Market }));

        let d = decide_order(19.93, Some(px(19.90)), Some(px(20.03)), MU, TICK, &mut rng);
        assert_eq!(d, OrderDecision::Submit(OrderIntent { side: Side::Sell, kind: OrderKind::Limit(px(19.97)) }));
    }

    #[test]
    fn one_sided_books() {
        let mut rng = stream(0, Stream::Agent(0));
        // no bids
        let d = decide_order(20.05, None, Some(px(20.00)), MU, TICK, &mut rng);
        assert_eq!(d, OrderDecision::Submit(OrderIntent { side: Side::Buy, kind: OrderKind::Market }));
        let d = decide_order(20.04, None, Some(px(20.00)), MU, TICK, &mut rng);
        assert_eq!(d, OrderDecision::Submit(OrderIntent { side: Side::Buy, kind: OrderKind::Limit(px(20.00)) }));
        // no asks
        let d = decide_order(19.85, Some(px(19.90)), None, MU, TICK, &mut rng);
        assert_eq!(d, OrderDecision::Submit(OrderIntent { side: Side::Sell, kind: OrderKind::Market }));
        let d = decide_order(19.90, Some(px(19.90)), None, MU, TICK, &mut rng);
        assert_eq!(d, OrderDecision::Submit(OrderIntent { side: Side::Sell, kind: OrderKind::Limit(px(19.94)) }));
    }

    #[test]
    fn empty_book_splits_evenly() {
        let mut rng = stream(4, Stream::Agent(1));
        let decisions = make_orders(20.0, (None, None), MU, TICK, 10_000, &mut rng);
        let buys = decisions
            .iter()
            .filter(|d| **d == OrderDecision::Submit(OrderIntent { side: Side::Buy, kind: OrderKind::Limit(px(19.96)) }))
            .count();
        let sells = decisions
            .iter()
            .filter(|d| **d == OrderDecision::Submit(OrderIntent { side: Side::Sell, kind: OrderKind::Limit(px(20.04)) }))
            .count();
        assert_eq!(buys + sells, 10_000);
        // 10k fair coin flips: 4 standard deviations is 200
        assert!((buys as i64 - 5000).abs() < 200, "buys {buys}");
    }

    #[test]
    fn non_positive_limit_is_suppressed() {
        let mut rng = stream(0, Stream::Agent(0));
        let d = decide_order(0.03, None, Some(px(1.0)), MU, TICK, &mut rng);
        assert_eq!(d, OrderDecision::Suppressed);
    }

    #[test]
    fn midpoint_fallbacks() {
        assert_eq!(midpoint(Some(19.9), Some(20.1), 5.0), 20.0);
        assert_eq!(midpoint(Some(19.9), None, 5.0), 19.9);
        assert_eq!(midpoint(None, Some(20.1), 5.0), 20.1);
        assert_eq!(midpoint(None, None, 5.0), 5.0);
    }
}
