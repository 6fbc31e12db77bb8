//! Differential evolution, variant DE/best/1/bin.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Objective, OptResult, Tracker};
use crate::models::ModelError;

const POPULATION: usize = 50;
const SCALE_F: f64 = 0.5;
const CR: f64 = 0.5;

/// DE/best/1/bin with population 50, scale 0.5 and crossover 0.5: mutant
/// `v = best + F * (r1 - r2)`, binomial crossover with one forced
/// coordinate, greedy selection (ties accept the trial), bounds handled by
/// clipping. Stops at the budget or on the first negative value.
pub fn de_run(obj: &mut dyn Objective, budget: u64, seed: u64) -> Result<OptResult, ModelError> {
    assert!(budget >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = obj.dims();
    let bounds = obj.bounds().to_vec();
    let mut tracker = Tracker::new(budget);

    let mut pop: Vec<Vec<f64>> = Vec::with_capacity(POPULATION);
    let mut fitness = Vec::with_capacity(POPULATION);
    for _ in 0..POPULATION {
        let x: Vec<f64> = bounds.iter().map(|(lo, hi)| rng.gen_range(*lo..=*hi)).collect();
        let v = obj.eval(&x)?;
        let stop = tracker.record(&x, v);
        pop.push(x);
        fitness.push(v);
        if stop {
            return Ok(tracker.finish());
        }
    }

    let mut best_idx = argmin(&fitness);
    loop {
        for target in 0..POPULATION {
            let (r1, r2) = distinct_pair(target, &mut rng);
            let jrand = rng.gen_range(0..dims);
            let mut trial = pop[target].clone();
            for j in 0..dims {
                if rng.gen::<f64>() < CR || j == jrand {
                    let v = pop[best_idx][j] + SCALE_F * (pop[r1][j] - pop[r2][j]);
                    let (lo, hi) = bounds[j];
                    trial[j] = v.clamp(lo, hi);
                }
            }
            let v = obj.eval(&trial)?;
            let stop = tracker.record(&trial, v);
            if v <= fitness[target] {
                pop[target] = trial;
                fitness[target] = v;
                if v <= fitness[best_idx] {
                    best_idx = target;
                }
            }
            if stop {
                return Ok(tracker.finish());
            }
        }
    }
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

fn distinct_pair<R: Rng>(target: usize, rng: &mut R) -> (usize, usize) {
    loop {
        let r1 = rng.gen_range(0..POPULATION);
        let r2 = rng.gen_range(0..POPULATION);
        if r1 != r2 && r1 != target && r2 != target {
            return (r1, r2);
        }
    }
}
