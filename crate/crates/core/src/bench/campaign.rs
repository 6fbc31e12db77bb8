//! Campaign execution: algorithm x spec x repeat cells under a worker pool,
//! deterministic per base seed.

use rayon::prelude::*;
use thiserror::Error;

use super::{cell_seed, Benchmark, CampaignResult, CellResult};
use crate::explore::{self, ExploreParams, TraceLibrary};
use crate::models::{self, ModelError};
use crate::optimize::{cmaes_run, de_run, shc_run, RobustnessObjective};
use crate::signal::InputSignal;
use crate::stl::{robustness, Formula, ParseError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("benchmarks span multiple models: {0} and {1}")]
    MixedModels(String, String),
    #[error("no benchmarks selected")]
    NoSpecs,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("witness replay failed for {algo}/{spec} repeat {repeat}: {msg}")]
    WitnessReplay { algo: String, spec: String, repeat: u32, msg: String },
}

/// Exploration algorithms runnable in a campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExploreAlgo {
    Ur,
    Nr,
    Rw,
    Rg,
    Rrt,
    Ose,
}

impl ExploreAlgo {
    pub fn name(&self) -> &'static str {
        match self {
            ExploreAlgo::Ur => "ur",
            ExploreAlgo::Nr => "nr",
            ExploreAlgo::Rw => "rw",
            ExploreAlgo::Rg => "rg",
            ExploreAlgo::Rrt => "rrt",
            ExploreAlgo::Ose => "ose",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "ur" => ExploreAlgo::Ur,
            "nr" => ExploreAlgo::Nr,
            "rw" => ExploreAlgo::Rw,
            "rg" => ExploreAlgo::Rg,
            "rrt" => ExploreAlgo::Rrt,
            "ose" => ExploreAlgo::Ose,
            _ => return None,
        })
    }

    /// Budget multiplier: the tree explorer re-simulates prefixes, whose
    /// average length is half the horizon, and is granted twice the budget.
    pub fn budget_factor(&self) -> f64 {
        match self {
            ExploreAlgo::Rrt => 2.0,
            _ => 1.0,
        }
    }
}

/// Optimization baselines runnable in a campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Optimizer {
    Shc,
    De,
    Cmaes,
}

impl Optimizer {
    pub fn name(&self) -> &'static str {
        match self {
            Optimizer::Shc => "shc",
            Optimizer::De => "de",
            Optimizer::Cmaes => "cmaes",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "shc" => Optimizer::Shc,
            "de" => Optimizer::De,
            "cmaes" => Optimizer::Cmaes,
            _ => return None,
        })
    }
}

/// Optional parameter overrides applied on top of the per-model defaults.
#[derive(Debug, Clone, Default)]
pub struct ExploreOverrides {
    pub dims: Option<Vec<usize>>,
    pub level_probs: Option<[f64; 3]>,
    pub gamma: Option<Vec<f64>>,
    pub crossover: Option<f64>,
    pub target_margin: Option<f64>,
}

impl ExploreOverrides {
    pub fn apply(&self, params: &mut ExploreParams) {
        if let Some(d) = &self.dims {
            params.dims = d.clone();
        }
        if let Some(p) = self.level_probs {
            params.level_probs = p;
        }
        if let Some(g) = &self.gamma {
            params.gamma = g.clone();
        }
        if let Some(c) = self.crossover {
            params.crossover = c;
        }
        if let Some(m) = self.target_margin {
            params.target_margin = m;
        }
    }
}

fn check_same_model(specs: &[Benchmark]) -> Result<String, BenchError> {
    let first = specs.first().ok_or(BenchError::NoSpecs)?;
    for b in specs {
        if b.model != first.model {
            return Err(BenchError::MixedModels(first.model.clone(), b.model.clone()));
        }
    }
    Ok(first.model.clone())
}

fn pool(jobs: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool builds")
}

/// Runs each exploration algorithm `repeats` times under the budget and
/// checks every produced trace against every spec. One run serves all specs
/// (exploration is requirement-agnostic), so cell seeds ignore the spec id.
#[allow(clippy::too_many_arguments)]
pub fn run_exploration_campaign(
    algorithms: &[ExploreAlgo],
    model_name: &str,
    specs: &[Benchmark],
    budget: u64,
    repeats: u32,
    base_seed: u64,
    jobs: usize,
    overrides: &ExploreOverrides,
) -> Result<CampaignResult, BenchError> {
    let model_name = if model_name.is_empty() {
        check_same_model(specs)?
    } else {
        check_same_model(specs)?;
        model_name.to_string()
    };
    let formulas: Vec<Formula> =
        specs.iter().map(|b| b.parse_formula()).collect::<Result<_, _>>()?;
    {
        let probe = models::by_name(&model_name)?;
        let mut params = ExploreParams::for_model(probe.spec(), 0, budget as f64);
        overrides.apply(&mut params);
        params.validate(probe.spec()).map_err(BenchError::Params)?;
    }

    let cells: Vec<(ExploreAlgo, u32)> = algorithms
        .iter()
        .flat_map(|&a| (0..repeats).map(move |r| (a, r)))
        .collect();

    let rows: Vec<Vec<CellResult>> = pool(jobs).install(|| {
        cells
            .par_iter()
            .map(|&(algo, repeat)| explore_cell(algo, repeat, &model_name, specs, &formulas, budget, base_seed, overrides))
            .collect()
    });

    let params_snapshot = {
        let probe = models::by_name(&model_name)?;
        let mut params = ExploreParams::for_model(probe.spec(), base_seed, budget as f64);
        overrides.apply(&mut params);
        serde_json::json!({
            "mode": "exploration",
            "explore": params,
            "rrt_budget_factor": 2.0,
            "seed_batch": explore::SEED_BATCH,
        })
    };

    Ok(CampaignResult {
        model: model_name,
        algorithms: algorithms.iter().map(|a| a.name().to_string()).collect(),
        specs: specs.iter().map(|b| b.id.clone()).collect(),
        budget,
        repeats,
        base_seed,
        rows: rows.into_iter().flatten().collect(),
        params: params_snapshot,
    })
}

#[allow(clippy::too_many_arguments)]
fn explore_cell(
    algo: ExploreAlgo,
    repeat: u32,
    model_name: &str,
    specs: &[Benchmark],
    formulas: &[Formula],
    budget: u64,
    base_seed: u64,
    overrides: &ExploreOverrides,
) -> Vec<CellResult> {
    let seed = cell_seed(base_seed, algo.name(), "", repeat);
    let cell = |spec: &Benchmark| CellResult {
        algorithm: algo.name().to_string(),
        spec: spec.id.clone(),
        repeat,
        seed,
        falsified: false,
        sims_to_first: (budget as f64) * algo.budget_factor(),
        robustness: None,
        witness: None,
        witness_segments: None,
        error: None,
    };
    let run = || -> Result<Vec<CellResult>, ModelError> {
        let model = models::by_name(model_name)?;
        let mut params =
            ExploreParams::for_model(model.spec(), seed, budget as f64 * algo.budget_factor());
        overrides.apply(&mut params);
        let mut rows: Vec<CellResult> = specs.iter().map(&cell).collect();
        match algo {
            ExploreAlgo::Rrt => {
                let tree = explore::rrt_run(model.as_ref(), &params)?;
                let mut pending: Vec<usize> = (0..specs.len()).collect();
                for node in tree.nodes.iter() {
                    if pending.is_empty() {
                        break;
                    }
                    let Some(trace) = &node.full_trace else { continue };
                    pending.retain(|&si| {
                        let rho = robustness(&formulas[si], trace).expect("dims validated");
                        if rho < 0.0 {
                            let row = &mut rows[si];
                            row.falsified = true;
                            row.sims_to_first = node.cost_at_creation;
                            row.robustness = Some(rho);
                            row.witness = node.prefix.as_ref().map(|p| p.flat_values().to_vec());
                            row.witness_segments =
                                node.prefix.as_ref().map(|p| p.segments() as u32);
                            false
                        } else {
                            true
                        }
                    });
                }
                Ok(rows)
            }
            _ => {
                let lib: TraceLibrary = match algo {
                    ExploreAlgo::Ur => explore::ur_run(model.as_ref(), &params)?,
                    ExploreAlgo::Nr => explore::nr_run(model.as_ref(), &params)?,
                    ExploreAlgo::Rw => explore::rw_run(model.as_ref(), &params)?,
                    ExploreAlgo::Rg => explore::rg_run(model.as_ref(), &params)?,
                    ExploreAlgo::Ose => explore::ose_run(model.as_ref(), &params)?,
                    ExploreAlgo::Rrt => unreachable!(),
                };
                let mut pending: Vec<usize> = (0..specs.len()).collect();
                for (i, (input, output)) in lib.entries().iter().enumerate() {
                    if pending.is_empty() {
                        break;
                    }
                    pending.retain(|&si| {
                        let rho = robustness(&formulas[si], output).expect("dims validated");
                        if rho < 0.0 {
                            let row = &mut rows[si];
                            row.falsified = true;
                            row.sims_to_first = (i + 1) as f64;
                            row.robustness = Some(rho);
                            row.witness = Some(input.flat_values().to_vec());
                            row.witness_segments = Some(input.segments() as u32);
                            false
                        } else {
                            true
                        }
                    });
                }
                Ok(rows)
            }
        }
    };
    match run() {
        Ok(rows) => rows,
        Err(e) => {
            let mut rows: Vec<CellResult> = specs.iter().map(&cell).collect();
            for row in &mut rows {
                row.error = Some(e.to_string());
            }
            rows
        }
    }
}

/// Runs one optimizer per (spec, repeat) cell under the evaluation budget.
#[allow(clippy::too_many_arguments)]
pub fn run_optimization_campaign(
    optimizers: &[Optimizer],
    specs: &[Benchmark],
    budget: u64,
    repeats: u32,
    base_seed: u64,
    jobs: usize,
) -> Result<CampaignResult, BenchError> {
    let model_name = check_same_model(specs)?;
    let formulas: Vec<Formula> =
        specs.iter().map(|b| b.parse_formula()).collect::<Result<_, _>>()?;

    let cells: Vec<(Optimizer, usize, u32)> = optimizers
        .iter()
        .flat_map(|&o| {
            (0..specs.len()).flat_map(move |s| (0..repeats).map(move |r| (o, s, r)))
        })
        .collect();

    let rows: Vec<CellResult> = pool(jobs).install(|| {
        cells
            .par_iter()
            .map(|&(opt, si, repeat)| {
                optimize_cell(opt, &specs[si], &formulas[si], repeat, &model_name, budget, base_seed)
            })
            .collect()
    });

    Ok(CampaignResult {
        model: model_name,
        algorithms: optimizers.iter().map(|o| o.name().to_string()).collect(),
        specs: specs.iter().map(|b| b.id.clone()).collect(),
        budget,
        repeats,
        base_seed,
        rows,
        params: serde_json::json!({
            "mode": "optimization",
            "shc": { "crossover": 0.5, "gamma": "range/4" },
            "de": { "population": 50, "scale_f": 0.5, "crossover": 0.5 },
            "cmaes": { "lambda": "4 + floor(3 ln n)", "initial_sigma": 0.3 },
        }),
    })
}

fn optimize_cell(
    opt: Optimizer,
    spec: &Benchmark,
    formula: &Formula,
    repeat: u32,
    model_name: &str,
    budget: u64,
    base_seed: u64,
) -> CellResult {
    let seed = cell_seed(base_seed, opt.name(), &spec.id, repeat);
    let mut row = CellResult {
        algorithm: opt.name().to_string(),
        spec: spec.id.clone(),
        repeat,
        seed,
        falsified: false,
        sims_to_first: budget as f64,
        robustness: None,
        witness: None,
        witness_segments: None,
        error: None,
    };
    let mut run = || -> Result<(), ModelError> {
        let model = models::by_name(model_name)?;
        let mut obj = RobustnessObjective::new(model.as_ref(), formula);
        let result = match opt {
            Optimizer::Shc => shc_run(&mut obj, budget, seed)?,
            Optimizer::De => de_run(&mut obj, budget, seed)?,
            Optimizer::Cmaes => cmaes_run(&mut obj, budget, seed)?,
        };
        if result.falsified {
            let input = obj.decode(&result.best_x);
            row.falsified = true;
            row.sims_to_first = result.evaluations as f64;
            row.robustness = Some(result.best_value);
            row.witness = Some(input.flat_values().to_vec());
            row.witness_segments = Some(input.segments() as u32);
        }
        Ok(())
    };
    if let Err(e) = run() {
        row.error = Some(e.to_string());
    }
    row
}

/// Replays every witness: re-simulates the stored input and re-evaluates
/// robustness, requiring a negative value.
pub fn verify_witnesses(result: &CampaignResult, specs: &[Benchmark]) -> Result<usize, BenchError> {
    let mut checked = 0;
    for row in result.rows.iter().filter(|r| r.falsified) {
        let spec = specs
            .iter()
            .find(|b| b.id == row.spec)
            .unwrap_or_else(|| panic!("row references unknown spec {}", row.spec));
        let fail = |msg: String| BenchError::WitnessReplay {
            algo: row.algorithm.clone(),
            spec: row.spec.clone(),
            repeat: row.repeat,
            msg,
        };
        let witness = row.witness.as_ref().ok_or_else(|| fail("no witness stored".into()))?;
        let model = models::by_name(&spec.model)?;
        let mspec = model.spec().clone();
        let segments =
            row.witness_segments.unwrap_or(mspec.segments() as u32) as usize;
        let n_dims = mspec.n_inputs();
        if witness.len() != segments * n_dims {
            return Err(fail(format!(
                "witness has {} values for {segments} segments x {n_dims} dims",
                witness.len()
            )));
        }
        let horizon = mspec.horizon;
        let h = horizon / segments as f64;
        let u = InputSignal::new(witness.clone(), n_dims, h, horizon, mspec.input_bounds())
            .map_err(|e| fail(e.to_string()))?;
        let sim = model.simulate(&u).map_err(|e| fail(e.to_string()))?;
        let formula = spec.parse_formula()?;
        let rho = robustness(&formula, &sim.output).map_err(|e| fail(e.to_string()))?;
        if rho >= 0.0 {
            return Err(fail(format!("replayed robustness {rho} is not negative")));
        }
        checked += 1;
    }
    Ok(checked)
}
