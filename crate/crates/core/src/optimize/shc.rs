//! Stochastic hill climbing with Cauchy disturbances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Objective, OptResult, Tracker};
use crate::explore::cauchy_from_uniform;
use crate::models::ModelError;

/// Starts from one uniform-random point; each step perturbs the current
/// point with the same per-coordinate Cauchy disturbance as the explorers
/// (scale = range/4, modification probability 0.5) and accepts whenever the
/// objective does not increase. Stops at the budget or on the first
/// negative value.
pub fn shc_run(obj: &mut dyn Objective, budget: u64, seed: u64) -> Result<OptResult, ModelError> {
    assert!(budget >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds = obj.bounds().to_vec();
    let gamma: Vec<f64> = bounds.iter().map(|(lo, hi)| (hi - lo) / 4.0).collect();
    const CR: f64 = 0.5;

    let mut current: Vec<f64> =
        bounds.iter().map(|(lo, hi)| rng.gen_range(*lo..=*hi)).collect();
    let mut tracker = Tracker::new(budget);
    let mut current_value = obj.eval(&current)?;
    if tracker.record(&current, current_value) {
        return Ok(tracker.finish());
    }
    let mut candidate = current.clone();
    loop {
        candidate.copy_from_slice(&current);
        for (i, v) in candidate.iter_mut().enumerate() {
            if rng.gen::<f64>() < CR {
                let delta = cauchy_from_uniform(rng.gen::<f64>(), gamma[i]);
                let (lo, hi) = bounds[i];
                *v = (*v + delta).clamp(lo, hi);
            }
        }
        let value = obj.eval(&candidate)?;
        let stop = tracker.record(&candidate, value);
        if value <= current_value {
            current.copy_from_slice(&candidate);
            current_value = value;
        }
        if stop {
            return Ok(tracker.finish());
        }
    }
}
