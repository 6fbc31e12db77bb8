//! Surrogate automatic transmission: a hybrid automaton with speed/RPM
//! continuous dynamics and a four-gear shift controller.
//!
//! Inputs: throttle in [0, 100], brake in [0, 325]; outputs: speed, RPM and
//! gear (the gear is emitted as a real-valued step signal taking values in
//! {1, 2, 3, 4}).
//!
//! Dynamics, integrated with classical RK4 at a fixed internal step of 0.01:
//!
//! ```text
//! speed' = 0.04 * throttle * g_ratio(gear) - 0.012 * brake - 0.02 * speed
//! RPM    = 600 + speed * rpm_per_speed(gear) + 8 * throttle
//! ```
//!
//! with speed clamped at zero. The controller shifts up after RPM > 3500
//! holds continuously for 0.1 time units and down after RPM < 1200 holds for
//! 0.1 time units; any shift starts a 0.5 time-unit lockout.

use super::{cost_of, Model, ModelError, ModelSpec, SimResult};
use crate::signal::{resample, InputSignal};
use crate::GRID_STEP;

const DT: f64 = 0.01;
const G_RATIO: [f64; 4] = [2.2, 1.5, 1.1, 0.9];
const RPM_PER_SPEED: [f64; 4] = [90.0, 55.0, 38.0, 28.0];
const RPM_BASE: f64 = 600.0;
const RPM_THROTTLE: f64 = 8.0;
const UPSHIFT_RPM: f64 = 3500.0;
const DOWNSHIFT_RPM: f64 = 1200.0;
const SHIFT_DWELL: f64 = 0.1;
const SHIFT_LOCKOUT: f64 = 0.5;

pub struct AutoTransmission {
    spec: ModelSpec,
}

impl AutoTransmission {
    pub fn new() -> Self {
        Self {
            spec: ModelSpec {
                name: "at".into(),
                input_dims: vec![("throttle".into(), 0.0, 100.0), ("brake".into(), 0.0, 325.0)],
                output_dims: vec!["speed".into(), "RPM".into(), "gear".into()],
                horizon: 30.0,
                segment_step: 5.0,
                nr_node_counts: vec![3, 3, 2, 2, 1, 1, 1],
            },
        }
    }
}

impl Default for AutoTransmission {
    fn default() -> Self {
        Self::new()
    }
}

fn rpm(speed: f64, gear: usize, throttle: f64) -> f64 {
    RPM_BASE + speed * RPM_PER_SPEED[gear - 1] + RPM_THROTTLE * throttle
}

impl Model for AutoTransmission {
    fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    fn simulate(&self, u: &InputSignal) -> Result<SimResult, ModelError> {
        self.check_input(u)?;
        let t_end = u.horizon();
        let steps = (t_end / DT).round() as usize;
        let mut times = Vec::with_capacity(steps + 1);
        let mut values = Vec::with_capacity(steps + 1);

        let mut speed = 0.0f64;
        let mut gear = 1usize;
        let mut up_timer = 0.0f64;
        let mut down_timer = 0.0f64;
        let mut lockout = 0.0f64;

        let emit = |t: f64, speed: f64, gear: usize, throttle: f64| {
            (t, vec![speed, rpm(speed, gear, throttle), gear as f64])
        };

        {
            let (t, row) = emit(0.0, speed, gear, u.value_at(0.0)[0]);
            times.push(t);
            values.push(row);
        }
        for step in 0..steps {
            let t = step as f64 * DT;
            let seg = u.value_at(t);
            let (throttle, brake) = (seg[0], seg[1]);
            let ratio = G_RATIO[gear - 1];
            let f = |s: f64| 0.04 * throttle * ratio - 0.012 * brake - 0.02 * s;
            let k1 = f(speed);
            let k2 = f(speed + 0.5 * DT * k1);
            let k3 = f(speed + 0.5 * DT * k2);
            let k4 = f(speed + DT * k3);
            speed = (speed + DT / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).max(0.0);

            let t_next = (step + 1) as f64 * DT;
            let throttle_next = u.value_at(t_next.min(t_end))[0];
            let r = rpm(speed, gear, throttle_next);
            lockout = (lockout - DT).max(0.0);
            if r > UPSHIFT_RPM {
                up_timer += DT;
            } else {
                up_timer = 0.0;
            }
            if r < DOWNSHIFT_RPM {
                down_timer += DT;
            } else {
                down_timer = 0.0;
            }
            if lockout <= 0.0 {
                if up_timer >= SHIFT_DWELL - 1e-12 && gear < 4 {
                    gear += 1;
                    lockout = SHIFT_LOCKOUT;
                    up_timer = 0.0;
                    down_timer = 0.0;
                } else if down_timer >= SHIFT_DWELL - 1e-12 && gear > 1 {
                    gear -= 1;
                    lockout = SHIFT_LOCKOUT;
                    up_timer = 0.0;
                    down_timer = 0.0;
                }
            }
            let (tt, row) = emit(t_next, speed, gear, throttle_next);
            times.push(tt);
            values.push(row);
        }
        let output = resample(&times, &values, GRID_STEP, t_end, self.spec.output_dims.clone())?;
        Ok(SimResult { output, sim_count_cost: cost_of(u, &self.spec) })
    }

    fn initial_output(&self) -> Vec<f64> {
        vec![0.0, RPM_BASE, 1.0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(throttle: f64, brake: f64) -> crate::signal::Signal {
        let m = AutoTransmission::new();
        let u = m.spec().input(vec![throttle, brake, throttle, brake, throttle, brake, throttle, brake, throttle, brake, throttle, brake]).unwrap();
        m.simulate(&u).unwrap().output
    }

    #[test]
    fn full_brake_holds_standstill() {
        let y = run(0.0, 325.0);
        for i in 0..y.len() {
            assert_eq!(y.value(i, 0), 0.0, "speed at {i}");
            assert_eq!(y.value(i, 1), 600.0, "rpm at {i}");
            assert_eq!(y.value(i, 2), 1.0, "gear at {i}");
        }
    }

    #[test]
    fn full_throttle_reaches_top_gear() {
        let y = run(100.0, 0.0);
        let gears: Vec<f64> = y.dim_values(2).collect();
        assert!(gears.iter().any(|&g| g == 4.0), "gear 4 not reached");
        let speeds: Vec<f64> = y.dim_values(0).collect();
        for w in speeds.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "speed decreased under full throttle");
        }
    }

    #[test]
    fn gear_values_discrete_and_lockout_respected() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let m = AutoTransmission::new();
        for _ in 0..5 {
            let mut vals = Vec::new();
            for _ in 0..6 {
                vals.push(rng.gen_range(0.0..=100.0));
                vals.push(rng.gen_range(0.0..=325.0));
            }
            let u = m.spec().input(vals).unwrap();
            let y = m.simulate(&u).unwrap().output;
            let gears: Vec<f64> = y.dim_values(2).collect();
            assert!(gears.iter().all(|&g| [1.0, 2.0, 3.0, 4.0].contains(&g)));
            let mut last_change: Option<usize> = None;
            for i in 1..gears.len() {
                if gears[i] != gears[i - 1] {
                    if let Some(prev) = last_change {
                        let gap = (i - prev) as f64 * GRID_STEP;
                        assert!(gap >= SHIFT_LOCKOUT - 1e-9, "shifts {prev} and {i} too close");
                    }
                    last_change = Some(i);
                }
            }
        }
    }
}
