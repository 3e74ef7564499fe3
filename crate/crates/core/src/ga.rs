//! Genetic algorithm over forecast weights.
//!
//! One chromosome per learning agent. A generation keeps the single best
//! chromosome, then fills the rest by tournament selection, per-gene uniform
//! crossover and clipped Gaussian mutation.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::PredictorCoeffs;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaError {
    #[error("fitness history is empty")]
    EmptyHistory,
    #[error("population needs at least two chromosomes, got {0}")]
    PopulationTooSmall(usize),
    #[error("invalid GA configuration: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    /// Steps between generations.
    pub interval: usize,
    /// Steps of history used to score a chromosome.
    pub eval_window: usize,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub mutation_scale: f64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            interval: 50,
            eval_window: 50,
            tournament_size: 2,
            crossover_rate: 0.7,
            mutation_rate: 0.1,
            mutation_scale: 0.1,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), GaError> {
        if self.interval < 1 {
            return Err(GaError::InvalidConfig("interval must be >= 1"));
        }
        if self.eval_window < 1 {
            return Err(GaError::InvalidConfig("eval_window must be >= 1"));
        }
        if self.tournament_size < 2 {
            return Err(GaError::InvalidConfig("tournament_size must be >= 2"));
        }
        for rate in [self.crossover_rate, self.mutation_rate] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(GaError::InvalidConfig("rates must lie in [0, 1]"));
            }
        }
        if !(self.mutation_scale >= 0.0) {
            return Err(GaError::InvalidConfig("mutation_scale must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chromosome {
    pub coeffs: PredictorCoeffs,
    /// Forecast error; lower is better.
    pub fitness: f64,
}

/// Inputs an agent saw on one step together with the price that followed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastSample {
    pub v_lagged: f64,
    pub p_ave: f64,
    pub p_mid: f64,
    pub realized: f64,
}

/// Mean absolute forecast error over `history`.
pub fn fitness(coeffs: &PredictorCoeffs, history: &[ForecastSample]) -> Result<f64, GaError> {
    if history.is_empty() {
        return Err(GaError::EmptyHistory);
    }
    let total: f64 = history
        .iter()
        .map(|s| (coeffs.forecast(s.v_lagged, s.p_ave, s.p_mid) - s.realized).abs())
        .sum();
    Ok(total / history.len() as f64)
}

fn best_index(population: &[Chromosome]) -> usize {
    population
        .iter()
        .enumerate()
        .min_by(|(_, x), (_, y)| x.fitness.total_cmp(&y.fitness))
        .map(|(i, _)| i)
        .expect("non-empty population")
}

fn tournament<'a, R: Rng + ?Sized>(population: &'a [Chromosome], size: usize, rng: &mut R) -> &'a Chromosome {
    let mut best = population.choose(rng).expect("non-empty population");
    for _ in 1..size {
        let c = population.choose(rng).expect("non-empty population");
        if c.fitness < best.fitness {
            best = c;
        }
    }
    best
}

/// One generation. The best chromosome is carried over unchanged at its
/// original index; `score` evaluates offspring.
pub fn evolve<R, F>(
    population: &[Chromosome],
    rng: &mut R,
    config: &GaConfig,
    mut score: F,
) -> Result<Vec<Chromosome>, GaError>
where
    R: Rng + ?Sized,
    F: FnMut(&PredictorCoeffs) -> f64,
{
    if population.len() < 2 {
        return Err(GaError::PopulationTooSmall(population.len()));
    }
    config.validate()?;
    let noise = Normal::new(0.0, config.mutation_scale).map_err(|_| GaError::InvalidConfig("mutation_scale"))?;
    let elite = best_index(population);
    let mut next = Vec::with_capacity(population.len());
    for i in 0..population.len() {
        if i == elite {
            next.push(population[elite]);
            continue;
        }
        let first = tournament(population, config.tournament_size, rng).coeffs.genes();
        let mut genes = first;
        if rng.random_bool(config.crossover_rate) {
            let second = tournament(population, config.tournament_size, rng).coeffs.genes();
            for (g, other) in genes.iter_mut().zip(second) {
                if rng.random_bool(0.5) {
                    *g = other;
                }
            }
        }
        for g in &mut genes {
            if rng.random_bool(config.mutation_rate) {
                *g = (*g + noise.sample(rng)).clamp(0.0, 1.0);
            }
        }
        let coeffs = PredictorCoeffs::new(genes[0], genes[1], genes[2])
            .unwrap_or_else(|_| PredictorCoeffs::new(first[0], first[1], first[2]).expect("parent is valid"));
        next.push(Chromosome { coeffs, fitness: score(&coeffs) });
    }
    Ok(next)
}

/// Per-generation summary for the GA trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub step: u64,
    pub generation: u64,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub population: usize,
}

impl GenerationStats {
    pub fn of(step: u64, generation: u64, population: &[Chromosome]) -> Self {
        let best = population.iter().map(|c| c.fitness).fold(f64::INFINITY, f64::min);
        let mean = population.iter().map(|c| c.fitness).sum::<f64>() / population.len().max(1) as f64;
        GenerationStats { step, generation, best_fitness: best, mean_fitness: mean, population: population.len() }
    }
}

pub fn write_trace_csv<W: std::io::Write>(writer: W, trace: &[GenerationStats]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    for row in trace {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}
