//! Subcommand implementations.

use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::Args;
use serde::Deserialize;

use vf_core::bench::{
    self, default_registry, emit, load_registry, run_exploration_campaign,
    run_optimization_campaign, suite, Benchmark, ExploreAlgo, ExploreOverrides, Optimizer,
};
use vf_core::explore::{self, ExploreParams};
use vf_core::models::{self, ExternalModel, Model, ModelSpec};
use vf_core::optimize::{cmaes_run, de_run, shc_run, RobustnessObjective};
use vf_core::signal::{InputSignal, Signal};
use vf_core::stl::{parse, robustness, Formula};

use crate::config::{resolve_seed, FileConfig};

type CmdResult = Result<i32, String>;

fn err<T>(msg: impl Into<String>) -> Result<T, String> {
    Err(msg.into())
}

#[derive(Args)]
pub struct CommonArgs {
    /// Optional JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed (falls back to $VF_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for campaigns (default: available cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
pub struct ModelArgs {
    /// Model: integrator | at | cc | external.
    #[arg(long)]
    model: Option<String>,
    /// External model command line (whitespace-separated argv).
    #[arg(long)]
    endpoint: Option<String>,
    /// Interface declaration (JSON) for `--model external`.
    #[arg(long)]
    model_spec: Option<PathBuf>,
    /// Per-simulation timeout in seconds for external models.
    #[arg(long)]
    timeout: Option<u64>,
}

#[derive(Args)]
pub struct ExploreArgs {
    /// Output dimensions explored, comma-separated indices (default: 0).
    #[arg(long)]
    dims: Option<String>,
    /// Feature level probabilities, e.g. `4/7,2/7,1/7`.
    #[arg(long)]
    level_probs: Option<String>,
    /// Cauchy scale per input dimension (default: range/4).
    #[arg(long)]
    gamma: Option<String>,
    /// Disturbance crossover probability in (0,1).
    #[arg(long)]
    cr: Option<f64>,
    /// Target-generation margin factor (default 0.2).
    #[arg(long)]
    target_margin: Option<f64>,
}

#[derive(Args)]
pub struct FalsifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    explore: ExploreArgs,
    /// Registered spec ids, comma-separated (e.g. SI1,SI10).
    #[arg(long)]
    spec: Option<String>,
    /// File holding one formula per line (inline specs).
    #[arg(long)]
    spec_file: Option<PathBuf>,
    /// Inline formula text.
    #[arg(long)]
    formula: Option<String>,
    /// Algorithm: ur | nr | rw | rg | rrt | ose | shc | de | cmaes.
    #[arg(long)]
    algo: String,
    /// Simulation budget.
    #[arg(long)]
    budget: Option<u64>,
    /// Output directory for witness traces.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Alternative registry JSON.
    #[arg(long)]
    registry: Option<PathBuf>,
}

#[derive(Args)]
pub struct BenchArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    explore: ExploreArgs,
    /// Benchmark suite: si | at | cc.
    #[arg(long)]
    suite: String,
    /// Campaign mode: exploration | optimization.
    #[arg(long, default_value = "exploration")]
    mode: String,
    /// Algorithms, comma-separated (defaults per mode).
    #[arg(long)]
    algos: Option<String>,
    /// Budget per run (defaults: suite budget, or 2500 for optimization).
    #[arg(long)]
    budget: Option<u64>,
    /// Repeats per cell (default 10).
    #[arg(long)]
    repeats: Option<u32>,
    /// Output directory (default `bench-out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Alternative registry JSON.
    #[arg(long)]
    registry: Option<PathBuf>,
    /// Replay every witness after the campaign and fail on mismatch.
    #[arg(long)]
    verify_witnesses: bool,
}

#[derive(Args)]
pub struct MonitorArgs {
    /// Trace CSV (`t,<dims...>` header).
    #[arg(long)]
    trace: PathBuf,
    /// Formula text.
    #[arg(long)]
    formula: Option<String>,
    /// Registered spec id instead of `--formula`.
    #[arg(long)]
    spec: Option<String>,
    /// Alternative registry JSON.
    #[arg(long)]
    registry: Option<PathBuf>,
}

#[derive(Args)]
pub struct ListSpecsArgs {
    /// Restrict to one suite (si | at | cc).
    #[arg(long)]
    suite: Option<String>,
    /// Alternative registry JSON.
    #[arg(long)]
    registry: Option<PathBuf>,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// JSON file with flat segment-major input values.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output trace CSV path.
    #[arg(long)]
    out: PathBuf,
}

// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct ExternalSpecFile {
    name: String,
    input_dims: Vec<(String, f64, f64)>,
    output_dims: Vec<String>,
    horizon: f64,
    segment_step: f64,
    #[serde(default)]
    nr_node_counts: Vec<usize>,
}

fn build_model(args: &ModelArgs, config: &FileConfig) -> Result<Box<dyn Model>, String> {
    let name = args
        .model
        .clone()
        .or_else(|| config.model.clone())
        .ok_or("no model selected (--model)")?;
    if name == "external" {
        let endpoint: Vec<String> = match (&args.endpoint, &config.endpoint) {
            (Some(e), _) => e.split_whitespace().map(str::to_string).collect(),
            (None, Some(e)) => e.clone(),
            (None, None) => return err("--model external requires --endpoint"),
        };
        if endpoint.is_empty() {
            return err("--endpoint is empty");
        }
        let spec_path = args
            .model_spec
            .as_ref()
            .ok_or("--model external requires --model-spec <json>")?;
        let text = std::fs::read_to_string(spec_path)
            .map_err(|e| format!("{}: {e}", spec_path.display()))?;
        let raw: ExternalSpecFile =
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", spec_path.display()))?;
        let spec = ModelSpec {
            name: raw.name,
            input_dims: raw.input_dims,
            output_dims: raw.output_dims,
            horizon: raw.horizon,
            segment_step: raw.segment_step,
            nr_node_counts: if raw.nr_node_counts.is_empty() {
                vec![3, 3, 2, 2, 1, 1, 1]
            } else {
                raw.nr_node_counts
            },
        };
        let timeout = args
            .timeout
            .or(config.timeout_secs)
            .map(Duration::from_secs);
        Ok(Box::new(ExternalModel::new(endpoint, spec, timeout)))
    } else {
        models::by_name(&name).map_err(|e| e.to_string())
    }
}

fn parse_fraction(text: &str) -> Result<f64, String> {
    if let Some((num, den)) = text.split_once('/') {
        let n: f64 = num.trim().parse().map_err(|e| format!("{text}: {e}"))?;
        let d: f64 = den.trim().parse().map_err(|e| format!("{text}: {e}"))?;
        Ok(n / d)
    } else {
        text.trim().parse().map_err(|e| format!("{text}: {e}"))
    }
}

fn explore_overrides(args: &ExploreArgs, config: &FileConfig) -> Result<ExploreOverrides, String> {
    let mut ov = ExploreOverrides::default();
    ov.dims = config.dims.clone();
    ov.level_probs = config.level_probs;
    ov.gamma = config.gamma.clone();
    ov.crossover = config.crossover;
    ov.target_margin = config.target_margin;
    if let Some(d) = &args.dims {
        ov.dims = Some(
            d.split(',')
                .map(|s| s.trim().parse::<usize>().map_err(|e| format!("--dims: {e}")))
                .collect::<Result<_, _>>()?,
        );
    }
    if let Some(p) = &args.level_probs {
        let vals: Vec<f64> = p.split(',').map(parse_fraction).collect::<Result<_, _>>()?;
        if vals.len() != 3 {
            return err("--level-probs needs three values");
        }
        ov.level_probs = Some([vals[0], vals[1], vals[2]]);
    }
    if let Some(g) = &args.gamma {
        ov.gamma = Some(g.split(',').map(parse_fraction).collect::<Result<_, _>>()?);
    }
    if let Some(c) = args.cr {
        ov.crossover = Some(c);
    }
    if let Some(m) = args.target_margin {
        ov.target_margin = Some(m);
    }
    Ok(ov)
}

fn jobs_of(common: &CommonArgs, config: &FileConfig) -> usize {
    common
        .jobs
        .or(config.jobs)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

fn registry_of(path: &Option<PathBuf>) -> Result<Vec<Benchmark>, String> {
    match path {
        Some(p) => load_registry(p).map_err(|e| format!("{}: {e}", p.display())),
        None => Ok(default_registry()),
    }
}

/// Writes `content` to `path` atomically (staged then renamed).
fn write_staged(path: &Path, content: &str) -> Result<(), String> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, content).map_err(|e| format!("{}: {e}", tmp.display()))?;
    std::fs::rename(&tmp, path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(())
}

// ---------------------------------------------------------------------------

struct NamedSpec {
    id: String,
    formula: Formula,
}

fn collect_specs(
    args: &FalsifyArgs,
    config: &FileConfig,
    registry: &[Benchmark],
) -> Result<Vec<NamedSpec>, String> {
    let mut specs = Vec::new();
    let from_config = args.spec.is_none().then(|| config.specs.clone().map(|v| v.join(","))).flatten();
    let ids = args.spec.clone().or(from_config);
    if let Some(ids) = &ids {
        for id in ids.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let bench = registry
                .iter()
                .find(|b| b.id == id)
                .ok_or_else(|| format!("unknown spec id `{id}`"))?;
            let formula = bench.parse_formula().map_err(|e| format!("{id}: {e}"))?;
            specs.push(NamedSpec { id: id.to_string(), formula });
        }
    }
    if let Some(path) = &args.spec_file {
        let text =
            std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let formula = parse(line).map_err(|e| format!("{}:{}: {e}", path.display(), i + 1))?;
            specs.push(NamedSpec { id: format!("inline{}", i + 1), formula });
        }
    }
    if let Some(text) = &args.formula {
        let formula = parse(text).map_err(|e| e.to_string())?;
        specs.push(NamedSpec { id: "formula".into(), formula });
    }
    if specs.is_empty() {
        return err("no specs selected (--spec, --spec-file or --formula)");
    }
    Ok(specs)
}

pub fn falsify(args: FalsifyArgs) -> CmdResult {
    let config = FileConfig::load(args.common.config.as_deref())?;
    let seed = resolve_seed(args.common.seed, &config)?;
    let registry = registry_of(&args.registry)?;
    let specs = collect_specs(&args, &config, &registry)?;

    // default the model from the first registry spec when ids were given
    let model = if args.model.model.is_none() && config.model.is_none() {
        let first_id = args
            .spec
            .clone()
            .or_else(|| config.specs.clone().map(|v| v.join(",")))
            .and_then(|ids| ids.split(',').next().map(str::to_string));
        let id_model = first_id
            .and_then(|id| registry.iter().find(|b| b.id == id.trim()).map(|b| b.model.clone()));
        match id_model {
            Some(name) => models::by_name(&name).map_err(|e| e.to_string())?,
            None => return err("no model selected (--model)"),
        }
    } else {
        build_model(&args.model, &config)?
    };
    let mspec = model.spec().clone();
    for s in &specs {
        for name in s.formula.dim_names() {
            if !mspec.output_dims.iter().any(|d| d == name) {
                return err(format!("{}: unknown output dimension `{name}`", s.id));
            }
        }
    }

    let algo = args.algo.as_str();
    let budget = args.budget.or(config.budget).unwrap_or(20_000);
    let out_dir = args
        .out
        .clone()
        .or_else(|| config.out.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("falsify-out"));
    let overrides = explore_overrides(&args.explore, &config)?;

    struct Verdict {
        id: String,
        falsified: bool,
        robustness: f64,
        sims: f64,
        witness: Option<InputSignal>,
    }
    let mut verdicts: Vec<Verdict> = Vec::new();

    if let Some(ex) = ExploreAlgo::from_name(algo) {
        let mut params = ExploreParams::for_model(
            &mspec,
            seed,
            budget as f64 * ex.budget_factor(),
        );
        overrides.apply(&mut params);
        params.validate(&mspec).map_err(|e| e)?;
        let run_err = |e: vf_core::models::ModelError| e.to_string();
        match ex {
            ExploreAlgo::Rrt => {
                let tree = explore::rrt_run(model.as_ref(), &params).map_err(run_err)?;
                for s in &specs {
                    let mut v = Verdict {
                        id: s.id.clone(),
                        falsified: false,
                        robustness: f64::INFINITY,
                        sims: tree.cost,
                        witness: None,
                    };
                    for node in tree.nodes.iter() {
                        let Some(trace) = &node.full_trace else { continue };
                        let rho = robustness(&s.formula, trace).map_err(|e| e.to_string())?;
                        if rho < v.robustness {
                            v.robustness = rho;
                        }
                        if rho < 0.0 {
                            v.falsified = true;
                            v.sims = node.cost_at_creation;
                            v.witness = node.prefix.clone();
                            break;
                        }
                    }
                    verdicts.push(v);
                }
            }
            _ => {
                let lib = match ex {
                    ExploreAlgo::Ur => explore::ur_run(model.as_ref(), &params),
                    ExploreAlgo::Nr => explore::nr_run(model.as_ref(), &params),
                    ExploreAlgo::Rw => explore::rw_run(model.as_ref(), &params),
                    ExploreAlgo::Rg => explore::rg_run(model.as_ref(), &params),
                    ExploreAlgo::Ose => explore::ose_run(model.as_ref(), &params),
                    ExploreAlgo::Rrt => unreachable!(),
                }
                .map_err(run_err)?;
                for s in &specs {
                    let mut v = Verdict {
                        id: s.id.clone(),
                        falsified: false,
                        robustness: f64::INFINITY,
                        sims: lib.len() as f64,
                        witness: None,
                    };
                    for (i, (input, output)) in lib.entries().iter().enumerate() {
                        let rho = robustness(&s.formula, output).map_err(|e| e.to_string())?;
                        if rho < v.robustness {
                            v.robustness = rho;
                        }
                        if rho < 0.0 {
                            v.falsified = true;
                            v.sims = (i + 1) as f64;
                            v.witness = Some(input.clone());
                            break;
                        }
                    }
                    verdicts.push(v);
                }
            }
        }
    } else if let Some(opt) = Optimizer::from_name(algo) {
        for s in &specs {
            let mut obj = RobustnessObjective::new(model.as_ref(), &s.formula);
            let result = match opt {
                Optimizer::Shc => shc_run(&mut obj, budget, seed),
                Optimizer::De => de_run(&mut obj, budget, seed),
                Optimizer::Cmaes => cmaes_run(&mut obj, budget, seed),
            }
            .map_err(|e| e.to_string())?;
            verdicts.push(Verdict {
                id: s.id.clone(),
                falsified: result.falsified,
                robustness: result.best_value,
                sims: result.evaluations as f64,
                witness: Some(obj.decode(&result.best_x)),
            });
        }
    } else {
        return err(format!("unknown algorithm `{algo}`"));
    }

    let mut all = true;
    for v in &verdicts {
        let status = if v.falsified { "FALSIFIED" } else { "not falsified" };
        let witness_text = v
            .witness
            .as_ref()
            .filter(|_| v.falsified)
            .map(|w| {
                w.flat_values().iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
            })
            .unwrap_or_else(|| "-".into());
        println!(
            "{}: {status} robustness={:.6} sims={} witness=[{witness_text}]",
            v.id, v.robustness, v.sims
        );
        if v.falsified {
            let witness = v.witness.as_ref().expect("falsified verdicts carry a witness");
            let sim = model.simulate(witness).map_err(|e| e.to_string())?;
            let path = out_dir.join(format!("{}_witness.csv", v.id));
            write_staged(&path, &sim.output.to_csv())?;
            let input_path = out_dir.join(format!("{}_witness_input.json", v.id));
            let doc = serde_json::json!({
                "spec": v.id,
                "segments": witness.segments(),
                "segment_duration": witness.segment_duration(),
                "horizon": witness.horizon(),
                "values": witness.flat_values(),
                "robustness": v.robustness,
                "seed": seed,
                "algorithm": algo,
            });
            write_staged(&input_path, &format!("{}\n", serde_json::to_string_pretty(&doc).unwrap()))?;
        } else {
            all = false;
        }
    }
    Ok(if all { 0 } else { 1 })
}

pub fn bench(args: BenchArgs) -> CmdResult {
    let config = FileConfig::load(args.common.config.as_deref())?;
    let seed = resolve_seed(args.common.seed, &config)?;
    let jobs = jobs_of(&args.common, &config);
    let registry = registry_of(&args.registry)?;
    let specs = suite(&registry, &args.suite);
    if specs.is_empty() {
        return err(format!("unknown suite `{}`", args.suite));
    }
    let out_dir = args
        .out
        .clone()
        .or_else(|| config.out.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("bench-out"));
    let repeats = args.repeats.or(config.repeats).unwrap_or(10);

    let result = match args.mode.as_str() {
        "exploration" => {
            let budget = args.budget.or(config.budget).unwrap_or(specs[0].budget);
            let algo_names = args
                .algos
                .clone()
                .or_else(|| config.algo.clone())
                .unwrap_or_else(|| "ur,nr,rw,rg,rrt,ose".into());
            let algos: Vec<ExploreAlgo> = algo_names
                .split(',')
                .map(|n| {
                    ExploreAlgo::from_name(n.trim())
                        .ok_or_else(|| format!("unknown exploration algorithm `{n}`"))
                })
                .collect::<Result<_, _>>()?;
            let overrides = explore_overrides(&args.explore, &config)?;
            run_exploration_campaign(
                &algos, "", &specs, budget, repeats, seed, jobs, &overrides,
            )
            .map_err(|e| e.to_string())?
        }
        "optimization" => {
            let budget = args.budget.or(config.budget).unwrap_or(2500);
            let algo_names =
                args.algos.clone().or_else(|| config.algo.clone()).unwrap_or_else(|| "shc,de,cmaes".into());
            let opts: Vec<Optimizer> = algo_names
                .split(',')
                .map(|n| {
                    Optimizer::from_name(n.trim())
                        .ok_or_else(|| format!("unknown optimizer `{n}`"))
                })
                .collect::<Result<_, _>>()?;
            run_optimization_campaign(&opts, &specs, budget, repeats, seed, jobs)
                .map_err(|e| e.to_string())?
        }
        other => return err(format!("unknown mode `{other}`")),
    };

    if args.verify_witnesses {
        let checked = bench::verify_witnesses(&result, &specs).map_err(|e| e.to_string())?;
        eprintln!("verified {checked} witnesses");
    }
    emit(&result, &out_dir).map_err(|e| e.to_string())?;
    for algo in &result.algorithms {
        println!("{algo}: {} falsifications", result.success_sum(algo));
    }
    println!("results written to {}", out_dir.display());
    Ok(0)
}

pub fn monitor(args: MonitorArgs) -> CmdResult {
    let trace = Signal::read_csv(&args.trace).map_err(|e| e.to_string())?;
    let formula = match (&args.formula, &args.spec) {
        (Some(text), None) => parse(text).map_err(|e| e.to_string())?,
        (None, Some(id)) => {
            let registry = registry_of(&args.registry)?;
            let bench = registry
                .iter()
                .find(|b| &b.id == id)
                .ok_or_else(|| format!("unknown spec id `{id}`"))?;
            bench.parse_formula().map_err(|e| e.to_string())?
        }
        _ => return err("exactly one of --formula or --spec is required"),
    };
    let rho = robustness(&formula, &trace).map_err(|e| e.to_string())?;
    println!("{rho:.6}");
    Ok(if rho < 0.0 { 1 } else { 0 })
}

pub fn list_specs(args: ListSpecsArgs) -> CmdResult {
    let registry = registry_of(&args.registry)?;
    let specs = match &args.suite {
        Some(s) => {
            let list = suite(&registry, s);
            if list.is_empty() {
                return err(format!("unknown suite `{s}`"));
            }
            list
        }
        None => registry,
    };
    for b in &specs {
        println!("{}\t{}\t{}", b.id, b.model, b.formula);
    }
    Ok(0)
}

pub fn simulate(args: SimulateArgs) -> CmdResult {
    let config = FileConfig::load(args.common.config.as_deref())?;
    let seed = resolve_seed(args.common.seed, &config)?;
    let model = build_model(&args.model, &config)?;
    let mspec = model.spec().clone();
    let input = match &args.input {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let values: Vec<f64> =
                serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            mspec.input(values).map_err(|e| e.to_string())?
        }
        None => explore::seeded_input(&mspec, seed),
    };
    let sim = model.simulate(&input).map_err(|e| e.to_string())?;
    write_staged(&args.out, &sim.output.to_csv())?;
    println!("trace written to {}", args.out.display());
    Ok(0)
}
