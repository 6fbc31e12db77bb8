//! Budget-driven exploration runs producing a [`TraceLibrary`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sampling::{feature_distance, gen_target, nr_next, perturb, sample_level, ur_next, NrLattice};
use super::{ExploreParams, TraceLibrary};
use crate::models::{Model, ModelError};

/// Number of uniform-random simulations seeding the library before any
/// target-driven iteration (the bound estimates are undefined on an empty
/// library).
pub const SEED_BATCH: usize = 10;

/// Uniform random sampling under the budget.
pub fn ur_run(model: &dyn Model, params: &ExploreParams) -> Result<TraceLibrary, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let spec = model.spec();
    let mut lib = TraceLibrary::new();
    let budget = params.budget as usize;
    for _ in 0..budget {
        let u = ur_next(spec, &mut rng);
        let sim = model.simulate(&u)?;
        lib.insert(u, sim.output);
    }
    Ok(lib)
}

/// Nonuniform random sampling: only unique lattice inputs are simulated and
/// counted against the budget; duplicates are discarded, with the total
/// number of draws capped at 100x the budget (the lattice is finite).
pub fn nr_run(model: &dyn Model, params: &ExploreParams) -> Result<TraceLibrary, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let spec = model.spec();
    let lattice = NrLattice::new(spec.n_inputs(), spec.nr_node_counts.len() - 1);
    let mut seen = vec![false; lattice.len()];
    let mut lib = TraceLibrary::new();
    let budget = params.budget as usize;
    let mut draws_left = budget.saturating_mul(100);
    while lib.len() < budget && draws_left > 0 {
        draws_left -= 1;
        let (u, combo) = nr_next(spec, &lattice, &spec.nr_node_counts, &mut rng);
        if seen[combo] {
            continue;
        }
        seen[combo] = true;
        let sim = model.simulate(&u)?;
        lib.insert(u, sim.output);
    }
    Ok(lib)
}

/// Random walk: perturbs the latest stored input.
pub fn rw_run(model: &dyn Model, params: &ExploreParams) -> Result<TraceLibrary, ModelError> {
    run_with_selector(model, params, |lib, _| lib.len() - 1)
}

/// Random graph: perturbs a uniformly chosen stored input.
pub fn rg_run(model: &dyn Model, params: &ExploreParams) -> Result<TraceLibrary, ModelError> {
    run_with_selector(model, params, |lib, rng| rng.gen_range(0..lib.len()))
}

/// Output-space exploration: picks the stored trace closest to a random
/// feature target (the Voronoi bias over output signals) and perturbs its
/// input.
pub fn ose_run(model: &dyn Model, params: &ExploreParams) -> Result<TraceLibrary, ModelError> {
    run_with_selector_and_params(model, params, &mut |lib, params, rng| {
        let k = sample_level(&params.level_probs, rng);
        let target = gen_target(lib, k, &params.dims, params.target_margin, crate::GRID_STEP, rng);
        select_nearest(lib, &target)
    })
}

/// Index of the entry minimizing the feature metric; ties break toward the
/// lowest insertion index.
pub fn select_nearest(lib: &TraceLibrary, target: &super::FeatureTarget) -> usize {
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for (i, (_, y)) in lib.entries().iter().enumerate() {
        let d = feature_distance(y, target, lib);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

fn run_with_selector(
    model: &dyn Model,
    params: &ExploreParams,
    mut select: impl FnMut(&TraceLibrary, &mut ChaCha8Rng) -> usize,
) -> Result<TraceLibrary, ModelError> {
    run_with_selector_and_params(model, params, &mut |lib, _, rng| select(lib, rng))
}

fn run_with_selector_and_params(
    model: &dyn Model,
    params: &ExploreParams,
    select: &mut dyn FnMut(&TraceLibrary, &ExploreParams, &mut ChaCha8Rng) -> usize,
) -> Result<TraceLibrary, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let spec = model.spec();
    let mut lib = TraceLibrary::new();
    let budget = params.budget as usize;
    for _ in 0..budget.min(SEED_BATCH) {
        let u = ur_next(spec, &mut rng);
        let sim = model.simulate(&u)?;
        lib.insert(u, sim.output);
    }
    while lib.len() < budget {
        let chosen = select(&lib, params, &mut rng);
        let u = perturb(&lib.entry(chosen).0, &params.gamma, params.crossover, &mut rng);
        let sim = model.simulate(&u)?;
        lib.insert(u, sim.output);
    }
    Ok(lib)
}
