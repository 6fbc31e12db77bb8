//! Rapidly exploring random tree over output values at input-segment
//! instants.
//!
//! Nodes live at times `0, h, 2h, ...`; extending a node at time `t`
//! re-simulates its whole input prefix plus one fresh uniform-random
//! segment, charging `(t + h) / T` of a full simulation against the budget.
//! Targets are drawn like the output-space explorer's features (per-instant
//! running bounds with an outward margin) and the nearest node at the
//! sampled instant is extended.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ExploreParams;
use crate::models::{Model, ModelError};
use crate::signal::{InputSignal, Signal};
use crate::GRID_EPS;

#[derive(Debug, Clone)]
pub struct RrtNode {
    /// Node time, a multiple of the segment step `h`.
    pub time: f64,
    /// Output values at `time` (all output dimensions).
    pub value: Vec<f64>,
    /// Input prefix whose simulation produced this node (`None` for the
    /// root).
    pub prefix: Option<InputSignal>,
    /// Cumulative simulation cost when this node was created.
    pub cost_at_creation: f64,
    /// Full output trace, kept only when the node reaches the horizon.
    pub full_trace: Option<Signal>,
}

#[derive(Debug, Clone)]
pub struct RrtTree {
    pub nodes: Vec<RrtNode>,
    /// Node indices grouped by time instant (`index = time / h`).
    pub by_instant: Vec<Vec<usize>>,
    /// Total simulation cost spent (full-simulation equivalents).
    pub cost: f64,
}

impl RrtTree {
    /// Nodes whose prefix spans the whole horizon, i.e. complete traces.
    pub fn full_trace_nodes(&self) -> impl Iterator<Item = &RrtNode> {
        self.nodes.iter().filter(|n| n.full_trace.is_some())
    }
}

/// Per-instant running bounds over every observed output sample.
struct InstantBounds {
    ub: Vec<f64>,
    lb: Vec<f64>,
    dims: usize,
}

impl InstantBounds {
    fn new(n_instants: usize, dims: usize) -> Self {
        Self {
            ub: vec![f64::NEG_INFINITY; n_instants * dims],
            lb: vec![f64::INFINITY; n_instants * dims],
            dims,
        }
    }

    fn update(&mut self, instant: usize, row: &[f64]) {
        for d in 0..self.dims {
            let k = instant * self.dims + d;
            self.ub[k] = self.ub[k].max(row[d]);
            self.lb[k] = self.lb[k].min(row[d]);
        }
    }

    fn range(&self, instant: usize, d: usize) -> (f64, f64) {
        let k = instant * self.dims + d;
        (self.lb[k], self.ub[k])
    }
}

pub fn rrt_run(model: &dyn Model, params: &ExploreParams) -> Result<RrtTree, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let spec = model.spec().clone();
    let h = spec.segment_step;
    let t_end = spec.horizon;
    let n_segments = spec.segments();
    let dims = spec.output_dims.len();
    let bounds = spec.input_bounds();
    let margin = params.target_margin;

    let root_value = model.initial_output();
    let mut tree = RrtTree {
        nodes: vec![RrtNode {
            time: 0.0,
            value: root_value.clone(),
            prefix: None,
            cost_at_creation: 0.0,
            full_trace: None,
        }],
        by_instant: vec![Vec::new(); n_segments + 1],
        cost: 0.0,
    };
    tree.by_instant[0].push(0);
    let mut bnd = InstantBounds::new(n_segments + 1, dims);
    bnd.update(0, &root_value);

    let min_cost = h / t_end;
    let mut retries = 0usize;
    while params.budget - tree.cost >= min_cost - 1e-12 && retries < 10_000 {
        // (a) target instant uniform over {0, h, ..., T-h}; instants with no
        // nodes yet fall back to the latest earlier instant that has some
        // (bounds are undefined where nothing was observed)
        let instant = rng.gen_range(0..n_segments);
        let mut sel_instant = instant;
        while tree.by_instant[sel_instant].is_empty() {
            sel_instant -= 1;
        }
        let extension_cost = ((sel_instant + 1) as f64 * h).min(t_end) / t_end;
        if tree.cost + extension_cost > params.budget + 1e-12 {
            retries += 1;
            continue;
        }
        retries = 0;
        let target: Vec<f64> = (0..dims)
            .map(|d| {
                let (lb, ub) = bnd.range(sel_instant, d);
                let delta = ub - lb;
                let r: f64 = rng.gen();
                (1.0 + 2.0 * margin) * delta * r + lb - margin * delta
            })
            .collect();

        let chosen = *tree.by_instant[sel_instant]
            .iter()
            .min_by(|&&a, &&b| {
                let da = node_metric(&tree.nodes[a].value, &target, &bnd, sel_instant);
                let db = node_metric(&tree.nodes[b].value, &target, &bnd, sel_instant);
                da.partial_cmp(&db).unwrap().then(a.cmp(&b))
            })
            .expect("instant has nodes");

        // (c) one fresh uniform segment appended to the chosen prefix
        let parent = &tree.nodes[chosen];
        let mut values = parent.prefix.as_ref().map(|p| p.flat_values().to_vec()).unwrap_or_default();
        for (lo, hi) in &bounds {
            values.push(rng.gen_range(*lo..=*hi));
        }
        let segs = values.len() / spec.n_inputs();
        let horizon = (segs as f64 * h).min(t_end);
        let prefix = InputSignal::new(values, spec.n_inputs(), h, horizon, bounds.clone())?;

        // (d) prefix re-simulation from scratch
        let sim = model.simulate(&prefix)?;
        tree.cost += sim.sim_count_cost;
        let new_instant = sel_instant + 1;
        let node_time = (new_instant as f64 * h).min(t_end);
        let value = sim.output.row(sim.output.len() - 1).to_vec();
        for i in 0..=new_instant {
            let t = (i as f64 * h).min(t_end);
            let idx = (t / sim.output.step() + GRID_EPS).floor() as usize;
            bnd.update(i, sim.output.row(idx.min(sim.output.len() - 1)));
        }
        let full = new_instant == n_segments;
        tree.nodes.push(RrtNode {
            time: node_time,
            value,
            prefix: Some(prefix),
            cost_at_creation: tree.cost,
            full_trace: full.then_some(sim.output),
        });
        let id = tree.nodes.len() - 1;
        tree.by_instant[new_instant].push(id);
    }
    Ok(tree)
}

/// Squared distance between a node value and a target, normalized by the
/// observed range at the node's instant.
fn node_metric(value: &[f64], target: &[f64], bnd: &InstantBounds, instant: usize) -> f64 {
    let mut sum = 0.0;
    for (d, (v, t)) in value.iter().zip(target).enumerate() {
        let (lb, ub) = bnd.range(instant, d);
        let denom = (ub - lb).max(1e-9);
        let z = (v - t) / denom;
        sum += z * z;
    }
    sum
}
