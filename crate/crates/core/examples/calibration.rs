//! Dev tool: per-spec exploration success table for one suite.
//!
//! Usage: calibration [suite] [budget] [repeats] [seed] [algos] [dims]

use vf_core::bench::{
    default_registry, run_exploration_campaign, suite, ExploreAlgo,
};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let suite_name = args.first().cloned().unwrap_or_else(|| "si".into());
    let budget: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let repeats: u32 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(3);
    let seed: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(42);
    let algos: Vec<ExploreAlgo> = args
        .get(4)
        .map(|s| {
            s.split(',')
                .map(|n| ExploreAlgo::from_name(n).expect("algo name"))
                .collect()
        })
        .unwrap_or_else(|| {
            vec![
                ExploreAlgo::Ur,
                ExploreAlgo::Nr,
                ExploreAlgo::Rw,
                ExploreAlgo::Rg,
                ExploreAlgo::Rrt,
                ExploreAlgo::Ose,
            ]
        });

    let mut overrides = vf_core::bench::ExploreOverrides::default();
    if let Some(dims) = args.get(5) {
        overrides.dims =
            Some(dims.split(',').map(|s| s.parse().expect("dim index")).collect());
    }
    let specs = suite(&default_registry(), &suite_name);
    let start = std::time::Instant::now();
    let result = run_exploration_campaign(
        &algos,
        "",
        &specs,
        budget,
        repeats,
        seed,
        2,
        &overrides,
    )
    .expect("campaign");
    println!("# budget={budget} repeats={repeats} seed={seed} elapsed={:?}", start.elapsed());
    print!("{:6}", "spec");
    for a in &algos {
        print!(" {:>5}", a.name());
    }
    println!();
    for spec in &result.specs {
        print!("{spec:6}");
        for a in &algos {
            print!(" {:>5}", result.successes(a.name(), spec));
        }
        println!();
    }
    print!("{:6}", "sum");
    for a in &algos {
        print!(" {:>5}", result.success_sum(a.name()));
    }
    println!();
}
