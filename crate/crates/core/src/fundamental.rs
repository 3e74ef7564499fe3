//! Fundamental value as a compound Poisson jump process.
//!
//! Each step draws `N ~ Poisson(jump_rate)` jumps, each uniform on
//! `(-tick, tick)` (or exactly `±tick` with [`JumpDist::TwoPoint`]).

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpDist {
    /// Continuous uniform on the open interval `(-tick, tick)`.
    #[default]
    Uniform,
    /// `-tick` or `+tick` with equal probability.
    TwoPoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalStep {
    pub value: f64,
    pub jumps: u32,
    /// The raw sum went non-positive and was clamped to one tick.
    pub clamped: bool,
}

#[derive(Debug, Clone)]
pub struct FundamentalProcess {
    tick: f64,
    jump_dist: JumpDist,
    poisson: Option<Poisson<f64>>,
}

impl FundamentalProcess {
    pub fn new(jump_rate: f64, tick: f64, jump_dist: JumpDist) -> Self {
        assert!(jump_rate >= 0.0 && tick > 0.0, "invalid fundamental parameters");
        let poisson = (jump_rate > 0.0).then(|| Poisson::new(jump_rate).expect("positive rate"));
        FundamentalProcess { tick, jump_dist, poisson }
    }

    fn jump<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.jump_dist {
            JumpDist::Uniform => loop {
                let d = rng.random_range(-self.tick..self.tick);
                if d != -self.tick {
                    break d;
                }
            },
            JumpDist::TwoPoint => {
                if rng.random_bool(0.5) {
                    self.tick
                } else {
                    -self.tick
                }
            }
        }
    }

    /// Advance `value` by one step.
    pub fn step<R: Rng + ?Sized>(&self, value: f64, rng: &mut R) -> FundamentalStep {
        let jumps = self.poisson.as_ref().map_or(0, |p| p.sample(rng) as u32);
        let mut next = value;
        for _ in 0..jumps {
            next += self.jump(rng);
        }
        let clamped = next <= 0.0;
        if clamped {
            next = self.tick;
        }
        FundamentalStep { value: next, jumps, clamped }
    }

    /// Path of `steps + 1` values starting at `v0`.
    pub fn generate_path<R: Rng + ?Sized>(&self, v0: f64, steps: usize, rng: &mut R) -> FundamentalPath {
        let mut values = Vec::with_capacity(steps + 1);
        values.push(v0);
        let mut clamped_steps = 0;
        let mut v = v0;
        for _ in 0..steps {
            let s = self.step(v, rng);
            clamped_steps += usize::from(s.clamped);
            v = s.value;
            values.push(v);
        }
        FundamentalPath { values, clamped_steps }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundamentalPath {
    pub values: Vec<f64>,
    /// Number of steps that hit the positivity clamp.
    pub clamped_steps: usize,
}

impl FundamentalPath {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `v[t - lag]`, reading indices before zero as `v[0]`.
    pub fn lagged(&self, t: usize, lag: usize) -> f64 {
        self.values[t.saturating_sub(lag)]
    }
}
