//! Genetic algorithm on a synthetic forecasting task where the realized
//! price follows the quote midpoint: the population shifts weight onto it.

use rand::Rng;
use switchmarket::agents::PredictorCoeffs;
use switchmarket::ga::{evolve, fitness, Chromosome, ForecastSample, GaConfig, GenerationStats};
use switchmarket::rng::{stream, Stream};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = stream(11, Stream::Setup);
    let history: Vec<ForecastSample> = (0..50)
        .map(|_| {
            let mid = 20.0 + rng.random_range(-0.1..0.1);
            ForecastSample { v_lagged: 19.5, p_ave: 19.8, p_mid: mid, realized: mid + rng.random_range(-0.01..0.01) }
        })
        .collect();
    let score = |c: &PredictorCoeffs| fitness(c, &history).expect("non-empty history");

    let mut init = stream(11, Stream::Agent(0));
    let mut population: Vec<Chromosome> = (0..30)
        .map(|_| {
            let coeffs = PredictorCoeffs::random(&mut init);
            Chromosome { coeffs, fitness: score(&coeffs) }
        })
        .collect();
    let config = GaConfig::default();
    let mut ga_rng = stream(11, Stream::Ga);
    for generation in 1..=100u64 {
        population = evolve(&population, &mut ga_rng, &config, score)?;
        if generation % 20 == 0 {
            let s = GenerationStats::of(generation, generation, &population);
            println!("generation {generation:>3}: best MAE {:.5}, mean MAE {:.5}", s.best_fitness, s.mean_fitness);
        }
    }
    let best = population.iter().min_by(|a, b| a.fitness.total_cmp(&b.fitness)).expect("population");
    let w = best.coeffs;
    let sum = w.a + w.b + w.c;
    println!("best weights (lagged value, average price, midpoint): ({:.3}, {:.3}, {:.3})", w.a / sum, w.b / sum, w.c / sum);
    Ok(())
}
