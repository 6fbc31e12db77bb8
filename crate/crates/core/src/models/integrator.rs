//! Simple integrator: `dy/dt = u`, `y(0) = 0`, `u` in `[-1, 1]`.
//!
//! The output of a piecewise-constant input is piecewise linear, so the
//! simulation is exact: breakpoints at segment boundaries, linear
//! interpolation in between.

use super::{cost_of, Model, ModelError, ModelSpec, SimResult};
use crate::signal::{resample, InputSignal};
use crate::GRID_STEP;

pub struct Integrator {
    spec: ModelSpec,
}

impl Integrator {
    pub fn new() -> Self {
        Self {
            spec: ModelSpec {
                name: "integrator".into(),
                input_dims: vec![("u".into(), -1.0, 1.0)],
                output_dims: vec!["y".into()],
                horizon: 30.0,
                segment_step: 2.0,
                nr_node_counts: vec![15, 15, 10, 8, 6, 5, 5, 4, 4, 3, 2],
            },
        }
    }
}

impl Default for Integrator {
    fn default() -> Self {
        Self::new()
    }
}

impl Model for Integrator {
    fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    fn simulate(&self, u: &InputSignal) -> Result<SimResult, ModelError> {
        self.check_input(u)?;
        let h = u.segment_duration();
        let t_end = u.horizon();
        let mut times = Vec::with_capacity(u.segments() + 1);
        let mut values = Vec::with_capacity(u.segments() + 1);
        let mut y = 0.0;
        times.push(0.0);
        values.push(vec![0.0]);
        for s in 0..u.segments() {
            let seg_end = ((s + 1) as f64 * h).min(t_end);
            y += u.segment(s)[0] * (seg_end - s as f64 * h);
            times.push(seg_end);
            values.push(vec![y]);
        }
        let output = resample(&times, &values, GRID_STEP, t_end, self.spec.output_dims.clone())?;
        Ok(SimResult { output, sim_count_cost: cost_of(u, &self.spec) })
    }

    fn initial_output(&self) -> Vec<f64> {
        vec![0.0]
    }
}
