//! Black-box model interface `M: U -> Y` and the built-in models.
//!
//! Every model consumes a piecewise-constant [`InputSignal`] and produces an
//! output [`Signal`] resampled to the fixed 0.1 grid. Models are stateless
//! evaluation functions: identical inputs give bit-identical outputs, and
//! concurrent simulations share no mutable state.

mod chasing;
mod external;
mod integrator;
mod transmission;

pub use chasing::ChasingCars;
pub use external::ExternalModel;
pub use integrator::Integrator;
pub use transmission::AutoTransmission;

use thiserror::Error;

use crate::signal::{InputSignal, Signal, SignalError};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("input has {got} dimensions, model expects {expected}")]
    InputDims { got: usize, expected: usize },
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error("failed to spawn external model `{command}`: {source}")]
    Spawn { command: String, source: std::io::Error },
    #[error("external model protocol violation at line {line}: {msg}")]
    Protocol { line: usize, msg: String },
    #[error("external model timed out after {0:?}")]
    Timeout(std::time::Duration),
    #[error("external model i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("unknown model `{0}`")]
    UnknownModel(String),
}

/// Static description of a model's interface.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub name: String,
    /// `(name, min, max)` per input dimension.
    pub input_dims: Vec<(String, f64, f64)>,
    pub output_dims: Vec<String>,
    /// Default time horizon `T`.
    pub horizon: f64,
    /// Default input segment duration `h`.
    pub segment_step: f64,
    /// Nonuniform-random sampling: control-node count per total level
    /// (index = level, so `len() - 1` is the maximum level).
    pub nr_node_counts: Vec<usize>,
}

impl ModelSpec {
    pub fn input_bounds(&self) -> Vec<(f64, f64)> {
        self.input_dims.iter().map(|(_, lo, hi)| (*lo, *hi)).collect()
    }

    pub fn n_inputs(&self) -> usize {
        self.input_dims.len()
    }

    pub fn segments(&self) -> usize {
        crate::signal::segment_count(self.horizon, self.segment_step)
    }

    /// Builds an input from flat segment-major values using the default
    /// horizon and segment step.
    pub fn input(&self, values: Vec<f64>) -> Result<InputSignal, SignalError> {
        InputSignal::new(values, self.n_inputs(), self.segment_step, self.horizon, self.input_bounds())
    }
}

/// Result of one simulation.
#[derive(Debug, Clone)]
pub struct SimResult {
    /// Output resampled onto the 0.1 grid, covering `[0, u.horizon()]`.
    pub output: Signal,
    /// Simulation cost in units of one full-horizon run (1.0 for a full
    /// simulation, `u.horizon() / T` for a prefix).
    pub sim_count_cost: f64,
}

pub trait Model: Sync + Send {
    fn spec(&self) -> &ModelSpec;

    fn simulate(&self, u: &InputSignal) -> Result<SimResult, ModelError>;

    /// Output vector at `t = 0` (the tree root for RRT).
    fn initial_output(&self) -> Vec<f64>;

    fn check_input(&self, u: &InputSignal) -> Result<(), ModelError> {
        if u.dims() != self.spec().n_inputs() {
            return Err(ModelError::InputDims { got: u.dims(), expected: self.spec().n_inputs() });
        }
        Ok(())
    }
}

/// Built-in model lookup for the CLI and benchmark registry.
pub fn by_name(name: &str) -> Result<Box<dyn Model>, ModelError> {
    match name {
        "integrator" => Ok(Box::new(Integrator::new())),
        "at" => Ok(Box::new(AutoTransmission::new())),
        "cc" => Ok(Box::new(ChasingCars::new())),
        other => Err(ModelError::UnknownModel(other.to_string())),
    }
}

pub(crate) fn cost_of(u: &InputSignal, spec: &ModelSpec) -> f64 {
    u.horizon() / spec.horizon
}
