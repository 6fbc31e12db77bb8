//! Chasing-cars platoon: a throttle/brake driven lead car followed by four
//! cars under a linear spacing/velocity feedback law.
//!
//! Internal state: positions and velocities of cars 1 (lead) through 5.
//!
//! ```text
//! lead:      v1' = 4*throttle - 5*brake - 0.1*v1   (v1 >= 0), y1' = v1
//! follower:  vi' = min(1.0*((y_{i-1} - y_i) - 10) + 1.5*(v_{i-1} - v_i), 1.6)
//!            (chase acceleration capped, braking at full feedback
//!            strength), vi clamped to [0, 40], yi' = vi
//! ```
//!
//! Initial positions (40, 30, 20, 10, 0), all velocities zero. Integrated
//! with RK4 at a fixed step of 0.05. Outputs are the five positions ordered
//! so that `y5` is the lead car and `y1` the last follower, making gaps like
//! `y5 - y4` positive.

use super::{cost_of, Model, ModelError, ModelSpec, SimResult};
use crate::signal::{resample, InputSignal};
use crate::GRID_STEP;

const DT: f64 = 0.05;
const D_REF: f64 = 10.0;
const GAP_GAIN: f64 = 1.0;
const VEL_GAIN: f64 = 1.5;
const ACC_LIMIT: f64 = 1.6;
const V_MAX: f64 = 40.0;
const INIT_POS: [f64; 5] = [40.0, 30.0, 20.0, 10.0, 0.0];

pub struct ChasingCars {
    spec: ModelSpec,
}

impl ChasingCars {
    pub fn new() -> Self {
        Self {
            spec: ModelSpec {
                name: "cc".into(),
                input_dims: vec![("throttle".into(), 0.0, 1.0), ("brake".into(), 0.0, 1.0)],
                output_dims: vec!["y1".into(), "y2".into(), "y3".into(), "y4".into(), "y5".into()],
                horizon: 100.0,
                segment_step: 20.0,
                nr_node_counts: vec![10, 10, 8, 8, 4, 4],
            },
        }
    }
}

impl Default for ChasingCars {
    fn default() -> Self {
        Self::new()
    }
}

/// State layout: [y1..y5, v1..v5] with car 1 the lead. Velocity clamps are
/// enforced in the vector field itself (accelerations project to zero at an
/// active clamp) so positions never drift through a clamped velocity.
fn derivative(state: &[f64; 10], throttle: f64, brake: f64) -> [f64; 10] {
    let (pos, vel) = state.split_at(5);
    let mut d = [0.0; 10];
    d[0] = vel[0].max(0.0);
    for i in 1..5 {
        d[i] = vel[i].clamp(0.0, V_MAX);
    }
    let lead_acc = 4.0 * throttle - 5.0 * brake - 0.1 * vel[0];
    d[5] = if vel[0] <= 0.0 && lead_acc < 0.0 { 0.0 } else { lead_acc };
    for i in 1..5 {
        let raw = GAP_GAIN * ((pos[i - 1] - pos[i]) - D_REF) + VEL_GAIN * (vel[i - 1] - vel[i]);
        let acc = raw.min(ACC_LIMIT);
        d[5 + i] = if (vel[i] <= 0.0 && acc < 0.0) || (vel[i] >= V_MAX && acc > 0.0) {
            0.0
        } else {
            acc
        };
    }
    d
}

impl Model for ChasingCars {
    fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    fn simulate(&self, u: &InputSignal) -> Result<SimResult, ModelError> {
        self.check_input(u)?;
        let t_end = u.horizon();
        let steps = (t_end / DT).round() as usize;
        let mut state = [0.0f64; 10];
        state[..5].copy_from_slice(&INIT_POS);

        let mut times = Vec::with_capacity(steps + 1);
        let mut values = Vec::with_capacity(steps + 1);
        let emit = |state: &[f64; 10]| {
            // output y1..y5 maps to internal cars 5..1 (lead last)
            (0..5).map(|j| state[4 - j]).collect::<Vec<f64>>()
        };
        times.push(0.0);
        values.push(emit(&state));
        for step in 0..steps {
            let t = step as f64 * DT;
            let seg = u.value_at(t);
            let (throttle, brake) = (seg[0], seg[1]);
            let k1 = derivative(&state, throttle, brake);
            let mut s2 = state;
            for i in 0..10 {
                s2[i] += 0.5 * DT * k1[i];
            }
            let k2 = derivative(&s2, throttle, brake);
            let mut s3 = state;
            for i in 0..10 {
                s3[i] += 0.5 * DT * k2[i];
            }
            let k3 = derivative(&s3, throttle, brake);
            let mut s4 = state;
            for i in 0..10 {
                s4[i] += DT * k3[i];
            }
            let k4 = derivative(&s4, throttle, brake);
            for i in 0..10 {
                state[i] += DT / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            state[5] = state[5].max(0.0);
            for i in 6..10 {
                state[i] = state[i].clamp(0.0, V_MAX);
            }
            times.push((step + 1) as f64 * DT);
            values.push(emit(&state));
        }
        let output = resample(&times, &values, GRID_STEP, t_end, self.spec.output_dims.clone())?;
        Ok(SimResult { output, sim_count_cost: cost_of(u, &self.spec) })
    }

    fn initial_output(&self) -> Vec<f64> {
        (0..5).map(|j| INIT_POS[4 - j]).collect()
    }
}
