//! Continuous double auction order book.
//!
//! Every order is for exactly one share, prices live on an integer tick grid
//! and matching follows price-time priority. Because orders are unit sized an
//! incoming order produces at most one trade, so the submit functions return
//! an `Option<Trade>` rather than a list.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type AgentId = u32;
pub type OrderId = u64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BookError {
    #[error("order id {id} is not greater than the last accepted id {last}")]
    DuplicateOrderId { id: OrderId, last: OrderId },
    #[error("price must be at least one tick, got {0} ticks")]
    NonPositivePrice(i64),
    #[error("market order submitted with no {0:?} liquidity on the opposite side")]
    NoLiquidity(Side),
    #[error("expected a {expected} order")]
    WrongKind { expected: &'static str },
}

/// A price expressed as a whole number of ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Price(i64);

/// How a currency amount is snapped onto the tick grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    Down,
    Up,
    Nearest,
}

// Absorbs representation error in values like 19.96 / 0.01.
const GRID_EPS: f64 = 1e-7;

impl Price {
    pub fn from_ticks(ticks: i64) -> Result<Self, BookError> {
        if ticks < 1 {
            return Err(BookError::NonPositivePrice(ticks));
        }
        Ok(Price(ticks))
    }

    /// Snap a currency value onto the grid of size `tick`.
    pub fn from_currency(value: f64, tick: f64, rounding: Rounding) -> Result<Self, BookError> {
        let scaled = value / tick;
        let ticks = match rounding {
            Rounding::Down => (scaled + GRID_EPS).floor(),
            Rounding::Up => (scaled - GRID_EPS).ceil(),
            Rounding::Nearest => scaled.round(),
        };
        if !ticks.is_finite() || ticks > i64::MAX as f64 {
            return Err(BookError::NonPositivePrice(i64::MIN));
        }
        Price::from_ticks(ticks as i64)
    }

    pub fn ticks(self) -> i64 {
        self.0
    }

    pub fn to_currency(self, tick: f64) -> f64 {
        let per_unit = 1.0 / tick;
        if (per_unit - per_unit.round()).abs() < 1e-9 {
            // 2002 / 100 is correctly rounded, 2002 * 0.01 is not
            self.0 as f64 / per_unit.round()
        } else {
            self.0 as f64 * tick
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Buy => Side::Sell,
            Side::Sell => Side::Buy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderKind {
    Limit(Price),
    Market,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Order {
    pub id: OrderId,
    pub agent: AgentId,
    pub side: Side,
    pub kind: OrderKind,
    /// Submission sequence number, stamped by the book on acceptance.
    pub seq: u64,
}

impl Order {
    pub fn limit(id: OrderId, agent: AgentId, side: Side, price: Price) -> Self {
        Order { id, agent, side, kind: OrderKind::Limit(price), seq: 0 }
    }

    pub fn market(id: OrderId, agent: AgentId, side: Side) -> Self {
        Order { id, agent, side, kind: OrderKind::Market, seq: 0 }
    }

    pub fn size(&self) -> u32 {
        1
    }

    pub fn limit_price(&self) -> Option<Price> {
        match self.kind {
            OrderKind::Limit(p) => Some(p),
            OrderKind::Market => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trade {
    pub price: Price,
    pub step: u64,
    pub buy_order: OrderId,
    pub sell_order: OrderId,
    pub buy_agent: AgentId,
    pub sell_agent: AgentId,
    /// Side of the incoming order that caused the match.
    pub aggressor: Side,
    /// Whether the incoming order was a market order.
    pub aggressor_market: bool,
}

impl Trade {
    pub fn size(&self) -> u32 {
        1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Resting {
    id: OrderId,
    agent: AgentId,
    seq: u64,
}

/// Running totals used to check order conservation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BookCounters {
    pub submitted: u64,
    pub executed: u64,
    pub cancelled: u64,
}

#[derive(Debug, Clone, Default)]
pub struct OrderBook {
    bids: BTreeMap<i64, VecDeque<Resting>>,
    asks: BTreeMap<i64, VecDeque<Resting>>,
    owners: HashMap<AgentId, Vec<(OrderId, Side, i64)>>,
    resting: usize,
    last_id: Option<OrderId>,
    next_seq: u64,
    step: u64,
    counters: BookCounters,
}

impl OrderBook {
    pub fn new() -> Self {
        Self::default()
    }

    /// Time index stamped on subsequent trades.
    pub fn set_step(&mut self, step: u64) {
        self.step = step;
    }

    pub fn counters(&self) -> BookCounters {
        self.counters
    }

    pub fn resting_len(&self) -> usize {
        self.resting
    }

    pub fn best_bid(&self) -> Option<Price> {
        self.bids.last_key_value().map(|(&p, _)| Price(p))
    }

    pub fn best_ask(&self) -> Option<Price> {
        self.asks.first_key_value().map(|(&p, _)| Price(p))
    }

    pub fn best_quotes(&self) -> (Option<Price>, Option<Price>) {
        (self.best_bid(), self.best_ask())
    }

    /// Resting orders on one side in priority order as `(order id, agent, price)`.
    pub fn depth(&self, side: Side) -> Vec<(OrderId, AgentId, Price)> {
        let flatten = |(&p, q): (&i64, &VecDeque<Resting>)| {
            q.iter().map(move |r| (r.id, r.agent, Price(p))).collect::<Vec<_>>()
        };
        match side {
            Side::Buy => self.bids.iter().rev().flat_map(flatten).collect(),
            Side::Sell => self.asks.iter().flat_map(flatten).collect(),
        }
    }

    fn accept(&mut self, order: &mut Order) -> Result<(), BookError> {
        if let Some(last) = self.last_id {
            if order.id <= last {
                return Err(BookError::DuplicateOrderId { id: order.id, last });
            }
        }
        self.last_id = Some(order.id);
        self.next_seq += 1;
        order.seq = self.next_seq;
        self.counters.submitted += 1;
        Ok(())
    }

    /// Pop the best resting order on `side`, returning its price.
    fn take_best(&mut self, side: Side) -> Option<(i64, Resting)> {
        let levels = match side {
            Side::Buy => &mut self.bids,
            Side::Sell => &mut self.asks,
        };
        let mut entry = match side {
            Side::Buy => levels.last_entry()?,
            Side::Sell => levels.first_entry()?,
        };
        let price = *entry.key();
        let resting = entry.get_mut().pop_front().expect("price levels are never empty");
        if entry.get().is_empty() {
            entry.remove();
        }
        self.resting -= 1;
        if let Some(owned) = self.owners.get_mut(&resting.agent) {
            if let Some(pos) = owned.iter().position(|&(id, _, _)| id == resting.id) {
                owned.swap_remove(pos);
            }
        }
        Some((price, resting))
    }

    fn make_trade(&mut self, incoming: &Order, price: i64, resting: Resting) -> Trade {
        self.counters.executed += 2;
        let (buy_order, buy_agent, sell_order, sell_agent) = match incoming.side {
            Side::Buy => (incoming.id, incoming.agent, resting.id, resting.agent),
            Side::Sell => (resting.id, resting.agent, incoming.id, incoming.agent),
        };
        Trade {
            price: Price(price),
            step: self.step,
            buy_order,
            sell_order,
            buy_agent,
            sell_agent,
            aggressor: incoming.side,
            aggressor_market: incoming.kind == OrderKind::Market,
        }
    }

    /// Submit a limit order. A marketable order trades against the best
    /// opposite quote at the resting price; otherwise it joins its queue.
    pub fn submit_limit(&mut self, mut order: Order) -> Result<Option<Trade>, BookError> {
        let limit = order.limit_price().ok_or(BookError::WrongKind { expected: "limit" })?.0;
        self.accept(&mut order)?;
        let crosses = match order.side {
            Side::Buy => self.best_ask().is_some_and(|a| a.0 <= limit),
            Side::Sell => self.best_bid().is_some_and(|b| b.0 >= limit),
        };
        if crosses {
            let (price, resting) = self.take_best(order.side.opposite()).expect("crossing implies liquidity");
            return Ok(Some(self.make_trade(&order, price, resting)));
        }
        let queue = match order.side {
            Side::Buy => self.bids.entry(limit).or_default(),
            Side::Sell => self.asks.entry(limit).or_default(),
        };
        queue.push_back(Resting { id: order.id, agent: order.agent, seq: order.seq });
        self.owners.entry(order.agent).or_default().push((order.id, order.side, limit));
        self.resting += 1;
        Ok(None)
    }

    /// Submit a market order; it executes one share at the best opposite quote.
    pub fn submit_market(&mut self, mut order: Order) -> Result<Trade, BookError> {
        if order.kind != OrderKind::Market {
            return Err(BookError::WrongKind { expected: "market" });
        }
        let opposite = order.side.opposite();
        let has_liquidity = match opposite {
            Side::Buy => !self.bids.is_empty(),
            Side::Sell => !self.asks.is_empty(),
        };
        if !has_liquidity {
            return Err(BookError::NoLiquidity(opposite));
        }
        self.accept(&mut order)?;
        let (price, resting) = self.take_best(opposite).expect("checked above");
        Ok(self.make_trade(&order, price, resting))
    }

    /// Dispatch on the order kind.
    pub fn submit(&mut self, order: Order) -> Result<Option<Trade>, BookError> {
        match order.kind {
            OrderKind::Limit(_) => self.submit_limit(order),
            OrderKind::Market => self.submit_market(order).map(Some),
        }
    }

    /// Remove every resting order owned by `agent`; returns how many were removed.
    pub fn cancel_agent_orders(&mut self, agent: AgentId) -> usize {
        let Some(owned) = self.owners.get_mut(&agent) else {
            return 0;
        };
        let orders = std::mem::take(owned);
        for &(id, side, price) in &orders {
            let levels = match side {
                Side::Buy => &mut self.bids,
                Side::Sell => &mut self.asks,
            };
            if let Some(queue) = levels.get_mut(&price) {
                if let Some(pos) = queue.iter().position(|r| r.id == id) {
                    queue.remove(pos);
                }
                if queue.is_empty() {
                    levels.remove(&price);
                }
            }
        }
        self.resting -= orders.len();
        self.counters.cancelled += orders.len() as u64;
        orders.len()
    }

    /// Checks the structural invariants; used by tests.
    pub fn is_consistent(&self) -> bool {
        let uncrossed = match (self.best_bid(), self.best_ask()) {
            (Some(b), Some(a)) => b < a,
            _ => true,
        };
        let count: usize = self.bids.values().chain(self.asks.values()).map(VecDeque::len).sum();
        let seq_sorted = self
            .bids
            .values()
            .chain(self.asks.values())
            .all(|q| q.iter().zip(q.iter().skip(1)).all(|(x, y)| x.seq < y.seq));
        let c = self.counters;
        uncrossed
            && seq_sorted
            && count == self.resting
            && c.submitted == self.resting as u64 + c.executed + c.cancelled
    }
}

#[derive(Serialize)]
struct TapeRow {
    step: u64,
    price: f64,
    size: u32,
    buy_agent: AgentId,
    sell_agent: AgentId,
}

/// Write a trade tape as CSV with columns `step,price,size,buy_agent,sell_agent`.
pub fn write_tape_csv<W: Write>(writer: W, trades: &[Trade], tick: f64) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    for t in trades {
        out.serialize(TapeRow {
            step: t.step,
            price: t.price.to_currency(tick),
            size: t.size(),
            buy_agent: t.buy_agent,
            sell_agent: t.sell_agent,
        })?;
    }
    out.flush()?;
    Ok(())
}
