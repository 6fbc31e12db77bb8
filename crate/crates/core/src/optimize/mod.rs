//! Robustness-minimizing optimization baselines.
//!
//! All three optimizers work on the flattened segment-value vector of an
//! input signal: stochastic hill climbing ([`shc_run`]), differential
//! evolution DE/best/1/bin ([`de_run`]) and CMA-ES ([`cmaes_run`]). A run
//! stops at its evaluation budget or at the first negative objective value
//! (a falsification).

mod cmaes;
mod de;
mod shc;

pub use cmaes::cmaes_run;
pub use de::de_run;
pub use shc::shc_run;

use crate::models::{Model, ModelError, ModelSpec};
use crate::signal::InputSignal;
use crate::stl::Formula;

/// Minimization target over a bounded real vector.
pub trait Objective {
    /// Search-space dimensionality.
    fn dims(&self) -> usize;

    /// Per-coordinate bounds.
    fn bounds(&self) -> &[(f64, f64)];

    /// Objective value; each call costs one evaluation.
    fn eval(&mut self, x: &[f64]) -> Result<f64, ModelError>;
}

/// STL robustness of a model run, over the flattened segment values.
pub struct RobustnessObjective<'a> {
    model: &'a dyn Model,
    formula: &'a Formula,
    bounds: Vec<(f64, f64)>,
    spec: ModelSpec,
}

impl<'a> RobustnessObjective<'a> {
    pub fn new(model: &'a dyn Model, formula: &'a Formula) -> Self {
        let spec = model.spec().clone();
        let per_dim = spec.input_bounds();
        let bounds = (0..spec.segments())
            .flat_map(|_| per_dim.iter().copied())
            .collect();
        Self { model, formula, bounds, spec }
    }

    /// Maps a real vector into an input signal, clipping to bounds.
    pub fn decode(&self, x: &[f64]) -> InputSignal {
        let values: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let (lo, hi) = self.bounds[i];
                v.clamp(lo, hi)
            })
            .collect();
        self.spec.input(values).expect("clipped values are valid")
    }
}

impl Objective for RobustnessObjective<'_> {
    fn dims(&self) -> usize {
        self.bounds.len()
    }

    fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    fn eval(&mut self, x: &[f64]) -> Result<f64, ModelError> {
        let u = self.decode(x);
        let sim = self.model.simulate(&u)?;
        let rho = crate::stl::robustness(self.formula, &sim.output)
            .expect("formula validated against the model's outputs");
        Ok(rho)
    }
}

/// Outcome of one optimization run.
#[derive(Debug, Clone)]
pub struct OptResult {
    pub best_x: Vec<f64>,
    pub best_value: f64,
    /// Model evaluations issued (exactly the number of simulations).
    pub evaluations: u64,
    /// Whether the best value went negative.
    pub falsified: bool,
    /// `(evaluation index, best-so-far)` whenever the best improves.
    pub history: Vec<(u64, f64)>,
    /// Internal restarts (CMA-ES only; zero for the other optimizers).
    pub restarts: u64,
}

impl OptResult {
    /// Evaluation index of the first negative value, when falsified.
    pub fn evals_to_falsification(&self) -> Option<u64> {
        self.history.iter().find(|(_, v)| *v < 0.0).map(|(i, _)| *i)
    }
}

/// Shared bookkeeping: counts evaluations, tracks the best-so-far and the
/// improvement history, and signals early exit on negative values.
pub(crate) struct Tracker {
    pub evaluations: u64,
    pub budget: u64,
    pub best_x: Vec<f64>,
    pub best_value: f64,
    pub history: Vec<(u64, f64)>,
}

impl Tracker {
    pub fn new(budget: u64) -> Self {
        Self {
            evaluations: 0,
            budget,
            best_x: Vec::new(),
            best_value: f64::INFINITY,
            history: Vec::new(),
        }
    }

    /// Records one evaluation; returns `true` when the run must stop
    /// (falsified or budget exhausted).
    pub fn record(&mut self, x: &[f64], value: f64) -> bool {
        self.evaluations += 1;
        if value < self.best_value {
            self.best_value = value;
            self.best_x = x.to_vec();
            self.history.push((self.evaluations, value));
        }
        self.best_value < 0.0 || self.evaluations >= self.budget
    }

    pub fn exhausted(&self) -> bool {
        self.best_value < 0.0 || self.evaluations >= self.budget
    }

    pub fn finish(self) -> OptResult {
        self.finish_with_restarts(0)
    }

    pub fn finish_with_restarts(self, restarts: u64) -> OptResult {
        OptResult {
            falsified: self.best_value < 0.0,
            best_x: self.best_x,
            best_value: self.best_value,
            evaluations: self.evaluations,
            history: self.history,
            restarts,
        }
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::Objective;
    use crate::models::ModelError;

    /// Plain function objective for sanity tests.
    pub struct FnObjective<F: FnMut(&[f64]) -> f64> {
        pub f: F,
        pub bounds: Vec<(f64, f64)>,
    }

    impl<F: FnMut(&[f64]) -> f64> Objective for FnObjective<F> {
        fn dims(&self) -> usize {
            self.bounds.len()
        }

        fn bounds(&self) -> &[(f64, f64)] {
            &self.bounds
        }

        fn eval(&mut self, x: &[f64]) -> Result<f64, ModelError> {
            Ok((self.f)(x))
        }
    }
}
