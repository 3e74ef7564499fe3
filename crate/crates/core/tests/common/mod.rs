#![allow(dead_code)]
//! Reference implementations and generators shared by the test targets.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use switchmarket::book::{AgentId, BookError, Order, OrderBook, OrderId, Price, Side};

#[derive(Debug, Clone)]
pub enum Op {
    Limit { agent: AgentId, side: Side, ticks: i64 },
    Market { agent: AgentId, side: Side },
    Cancel { agent: AgentId },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefOrder {
    pub id: OrderId,
    pub agent: AgentId,
    pub side: Side,
    pub ticks: i64,
    pub arrival: usize,
}

/// Unsorted list of resting orders; best match found by scanning.
#[derive(Default)]
pub struct Reference {
    pub resting: Vec<RefOrder>,
    arrivals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefTrade {
    pub ticks: i64,
    pub buy_order: OrderId,
    pub sell_order: OrderId,
}

impl Reference {
    pub fn best(&self, side: Side) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, o) in self.resting.iter().enumerate() {
            if o.side != side {
                continue;
            }
            let better = match best {
                None => true,
                Some(j) => {
                    let b = &self.resting[j];
                    let price_better = match side {
                        Side::Buy => o.ticks > b.ticks,
                        Side::Sell => o.ticks < b.ticks,
                    };
                    price_better || (o.ticks == b.ticks && o.arrival < b.arrival)
                }
            };
            if better {
                best = Some(i);
            }
        }
        best
    }

    pub fn fill(&mut self, id: OrderId, side: Side, limit: Option<i64>, agent: AgentId) -> Option<RefTrade> {
        self.arrivals += 1;
        let opposite = match side {
            Side::Buy => Side::Sell,
            Side::Sell => Side::Buy,
        };
        if let Some(i) = self.best(opposite) {
            let o = self.resting[i];
            let crosses = match (side, limit) {
                (_, None) => true,
                (Side::Buy, Some(l)) => o.ticks <= l,
                (Side::Sell, Some(l)) => o.ticks >= l,
            };
            if crosses {
                self.resting.remove(i);
                let (buy_order, sell_order) = match side {
                    Side::Buy => (id, o.id),
                    Side::Sell => (o.id, id),
                };
                return Some(RefTrade { ticks: o.ticks, buy_order, sell_order });
            }
        }
        if let Some(ticks) = limit {
            self.resting.push(RefOrder { id, agent, side, ticks, arrival: self.arrivals });
        }
        None
    }

    pub fn depth(&self, side: Side) -> Vec<(OrderId, AgentId, i64)> {
        let mut v: Vec<RefOrder> = self.resting.iter().copied().filter(|o| o.side == side).collect();
        v.sort_by(|a, b| {
            let by_price = match side {
                Side::Buy => b.ticks.cmp(&a.ticks),
                Side::Sell => a.ticks.cmp(&b.ticks),
            };
            by_price.then(a.arrival.cmp(&b.arrival))
        });
        v.into_iter().map(|o| (o.id, o.agent, o.ticks)).collect()
    }
}

pub fn side() -> impl Strategy<Value = Side> {
    prop_oneof![Just(Side::Buy), Just(Side::Sell)]
}

pub fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        6 => (0..4u32, side(), 1..8i64).prop_map(|(agent, side, ticks)| Op::Limit { agent, side, ticks }),
        2 => (0..4u32, side()).prop_map(|(agent, side)| Op::Market { agent, side }),
        1 => (0..4u32).prop_map(|agent| Op::Cancel { agent }),
    ]
}

pub fn depth_ticks(book: &OrderBook, side: Side) -> Vec<(OrderId, AgentId, i64)> {
    book.depth(side).into_iter().map(|(id, a, p)| (id, a, p.ticks())).collect()
}


/// Drive the book and the reference through the same operations, returning
/// the first disagreement.
pub fn replay(ops: &[Op]) -> Result<(), String> {
    let mut book = OrderBook::new();
    let mut reference = Reference::default();
    let mut next_id: OrderId = 1;
    for (step, op) in ops.iter().enumerate() {
        let fail = |what: &str| Err(format!("op {step} {op:?}: {what}"));
        match *op {
            Op::Limit { agent, side, ticks } => {
                let id = next_id;
                next_id += 1;
                let got = book.submit_limit(Order::limit(id, agent, side, Price::from_ticks(ticks).unwrap())).map_err(|e| e.to_string())?;
                let got = got.map(|t| RefTrade { ticks: t.price.ticks(), buy_order: t.buy_order, sell_order: t.sell_order });
                if got != reference.fill(id, side, Some(ticks), agent) {
                    return fail("limit fill differs");
                }
            }
            Op::Market { agent, side } => {
                let id = next_id;
                let got = book.submit_market(Order::market(id, agent, side));
                let opposite = match side { Side::Buy => Side::Sell, Side::Sell => Side::Buy };
                if reference.best(opposite).is_some() {
                    next_id += 1;
                    let want = reference.fill(id, side, None, agent).unwrap();
                    match got {
                        Ok(t) if t.aggressor_market
                            && RefTrade { ticks: t.price.ticks(), buy_order: t.buy_order, sell_order: t.sell_order } == want => {}
                        _ => return fail("market fill differs"),
                    }
                } else if !matches!(got, Err(BookError::NoLiquidity(_))) {
                    return fail("market order into an empty side");
                }
            }
            Op::Cancel { agent } => {
                let before = reference.resting.len();
                reference.resting.retain(|o| o.agent != agent);
                if book.cancel_agent_orders(agent) != before - reference.resting.len() {
                    return fail("cancel count differs");
                }
            }
        }
        if !book.is_consistent()
            || depth_ticks(&book, Side::Buy) != reference.depth(Side::Buy)
            || depth_ticks(&book, Side::Sell) != reference.depth(Side::Sell)
        {
            return fail("resting orders differ");
        }
    }
    Ok(())
}

pub fn normals(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn arch1(seed: u64, n: usize, omega: f64, b: f64) -> Vec<f64> {
    let z = normals(seed, n + 500);
    let mut prev: f64 = 0.0;
    let mut out = Vec::with_capacity(n);
    for (t, zt) in z.into_iter().enumerate() {
        let e = (omega + b * prev * prev).sqrt() * zt;
        prev = e;
        if t >= 500 {
            out.push(e);
        }
    }
    out
}

pub fn ar1(seed: u64, n: usize, phi: f64) -> Vec<f64> {
    let z = normals(seed, n + 200);
    let mut x: f64 = 0.0;
    let mut out = Vec::with_capacity(n);
    for (t, zt) in z.into_iter().enumerate() {
        x = phi * x + zt;
        if t >= 200 {
            out.push(x);
        }
    }
    out
}

/// Fractional Gaussian noise by circulant embedding (Davies-Harte).
pub fn fgn(seed: u64, n: usize, h: f64) -> Vec<f64> {
    let cov = |k: f64| 0.5 * ((k + 1.0).powf(2.0 * h) - 2.0 * k.powf(2.0 * h) + (k - 1.0).abs().powf(2.0 * h));
    let m = 2 * n;
    let mut row: Vec<Complex<f64>> = (0..m)
        .map(|j| {
            let k = if j <= n { j } else { m - j };
            Complex::new(cov(k as f64), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut row);
    let lambda: Vec<f64> = row.iter().map(|c| c.re).collect();
    assert!(lambda.iter().all(|l| *l > -1e-9), "embedding not positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = vec![Complex::new(0.0, 0.0); m];
    let scale = |k: usize| (lambda[k].max(0.0) / m as f64).sqrt();
    w[0] = Complex::new(scale(0) * rng.sample::<f64, _>(StandardNormal), 0.0);
    w[n] = Complex::new(scale(n) * rng.sample::<f64, _>(StandardNormal), 0.0);
    for k in 1..n {
        let (a, b): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
        let z = Complex::new(a, b) * (scale(k) / std::f64::consts::SQRT_2);
        w[k] = z;
        w[m - k] = z.conj();
    }
    fft.process(&mut w);
    w[..n].iter().map(|c| c.re).collect()
}
