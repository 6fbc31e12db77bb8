//! Exploration algorithms: they build a library of output traces under a
//! simulation budget, without looking at any requirement.
//!
//! * [`ur_run`] — uniform random input sampling;
//! * [`nr_run`] — nonuniform random sampling over a dyadic value lattice,
//!   biased toward simple extreme-valued inputs;
//! * [`rw_run`] — random walk: repeatedly perturbs the latest input;
//! * [`rg_run`] — random graph: perturbs a uniformly chosen stored input;
//! * [`rrt_run`] — classic rapidly exploring random tree over output values
//!   at input-segment instants, with prefix re-simulation;
//! * [`ose_run`] — output-space exploration: the Voronoi bias applied to
//!   whole output signals through low-dimensional feature targets.

mod library;
mod rrt;
mod runners;
mod sampling;

pub use library::TraceLibrary;
pub use rrt::{rrt_run, RrtNode, RrtTree};
pub use runners::{nr_run, ose_run, rg_run, rw_run, select_nearest, ur_run, SEED_BATCH};
pub use sampling::{
    cauchy_from_uniform, feature_distance, gen_target, nr_next, perturb, sample_level,
    seeded_input, ur_next, NrLattice,
};

use serde::Serialize;

use crate::models::ModelSpec;

/// A level-`k` feature target: `k` (value, time) points restricted to the
/// output dimensions `I`.
#[derive(Debug, Clone)]
pub struct FeatureTarget {
    /// Ordered output-dimension indices (strictly increasing, non-empty).
    pub dims: Vec<usize>,
    /// `(values over dims, time on the 0.1 grid)`, one entry per level.
    pub points: Vec<(Vec<f64>, f64)>,
}

impl FeatureTarget {
    pub fn level(&self) -> usize {
        self.points.len()
    }
}

/// Parameters shared by the exploration algorithms.
#[derive(Debug, Clone, Serialize)]
pub struct ExploreParams {
    /// Output dimensions explored (indices into the model's outputs).
    pub dims: Vec<usize>,
    /// Probabilities of feature levels 1..=3.
    pub level_probs: [f64; 3],
    /// Cauchy scale per input dimension (default: a quarter of the range).
    pub gamma: Vec<f64>,
    /// Per-coordinate modification probability of the input disturbance.
    pub crossover: f64,
    /// Margin factor of the target-generation range around [LB, UB].
    pub target_margin: f64,
    pub seed: u64,
    /// Simulation budget (full-simulation equivalents).
    pub budget: f64,
}

impl ExploreParams {
    /// Defaults for a model: explore the first output dimension, level
    /// probabilities (4/7, 2/7, 1/7), gamma = range/4, CR = 0.5.
    pub fn for_model(spec: &ModelSpec, seed: u64, budget: f64) -> Self {
        Self {
            dims: vec![0],
            level_probs: [4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0],
            gamma: spec.input_dims.iter().map(|(_, lo, hi)| (hi - lo) / 4.0).collect(),
            crossover: 0.5,
            target_margin: 0.2,
            seed,
            budget,
        }
    }

    pub fn validate(&self, spec: &ModelSpec) -> Result<(), String> {
        let sum: f64 = self.level_probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(format!("level probabilities sum to {sum}, expected 1"));
        }
        if self.dims.is_empty() {
            return Err("dims must be non-empty".into());
        }
        if !self.dims.windows(2).all(|w| w[0] < w[1]) {
            return Err("dims must be strictly increasing".into());
        }
        if *self.dims.last().unwrap() >= spec.output_dims.len() {
            return Err(format!(
                "dim index {} out of range for {} outputs",
                self.dims.last().unwrap(),
                spec.output_dims.len()
            ));
        }
        if self.gamma.len() != spec.n_inputs() || self.gamma.iter().any(|&g| !(g > 0.0)) {
            return Err("gamma must be positive per input dimension".into());
        }
        if !(self.crossover > 0.0 && self.crossover < 1.0) {
            return Err(format!("crossover must be in (0,1), got {}", self.crossover));
        }
        Ok(())
    }
}
