//! Deterministic result emission: CSV tables plus a reproduction manifest.
//!
//! Files are staged under a temporary name and renamed into place so a
//! failed emission never leaves partial outputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::CampaignResult;

/// Writes `success.csv` (successes out of `repeats` per spec x algorithm),
/// `evals.csv` (mean simulations to first falsification, budget imputed),
/// `convergence.csv` (cumulative falsifications against simulations spent,
/// summed over repeats), `raw.csv` (every cell) and `manifest.json`.
pub fn emit(result: &CampaignResult, out_dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let files = [
        ("success.csv", success_csv(result)),
        ("evals.csv", evals_csv(result)),
        ("convergence.csv", convergence_csv(result)),
        ("raw.csv", raw_csv(result)),
        ("manifest.json", manifest_json(result)),
    ];
    for (name, content) in files {
        let tmp = out_dir.join(format!(".{name}.tmp"));
        std::fs::write(&tmp, content)?;
        std::fs::rename(&tmp, out_dir.join(name))?;
    }
    Ok(())
}

fn success_csv(r: &CampaignResult) -> String {
    let mut out = String::from("spec");
    for a in &r.algorithms {
        let _ = write!(out, ",{a}");
    }
    out.push('\n');
    for spec in &r.specs {
        let _ = write!(out, "{spec}");
        for a in &r.algorithms {
            let _ = write!(out, ",{}", r.successes(a, spec));
        }
        out.push('\n');
    }
    out
}

fn evals_csv(r: &CampaignResult) -> String {
    let mut out = String::from("spec");
    for a in &r.algorithms {
        let _ = write!(out, ",{a}");
    }
    out.push('\n');
    for spec in &r.specs {
        let _ = write!(out, "{spec}");
        for a in &r.algorithms {
            let _ = write!(out, ",{}", r.mean_evals(a, spec));
        }
        out.push('\n');
    }
    out
}

fn convergence_csv(r: &CampaignResult) -> String {
    let mut out = String::from("algorithm,simulations,cumulative_falsified\n");
    for a in &r.algorithms {
        let mut events: Vec<f64> = r
            .rows
            .iter()
            .filter(|row| &row.algorithm == a && row.falsified)
            .map(|row| row.sims_to_first)
            .collect();
        events.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (i, sims) in events.iter().enumerate() {
            let _ = writeln!(out, "{a},{sims},{}", i + 1);
        }
    }
    out
}

fn raw_csv(r: &CampaignResult) -> String {
    let mut out = String::from(
        "algorithm,spec,repeat,seed,falsified,sims_to_first,robustness,witness_segments,witness,error\n",
    );
    for row in &r.rows {
        let witness = row
            .witness
            .as_ref()
            .map(|w| w.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            row.algorithm,
            row.spec,
            row.repeat,
            row.seed,
            row.falsified,
            row.sims_to_first,
            row.robustness.map(|v| v.to_string()).unwrap_or_default(),
            row.witness_segments.map(|v| v.to_string()).unwrap_or_default(),
            witness,
            row.error.as_deref().unwrap_or(""),
        );
    }
    out
}

fn manifest_json(r: &CampaignResult) -> String {
    let mut doc = BTreeMap::new();
    doc.insert("version", serde_json::json!(env!("CARGO_PKG_VERSION")));
    doc.insert("model", serde_json::json!(r.model));
    doc.insert("algorithms", serde_json::json!(r.algorithms));
    doc.insert("specs", serde_json::json!(r.specs));
    doc.insert("budget", serde_json::json!(r.budget));
    doc.insert("repeats", serde_json::json!(r.repeats));
    doc.insert("base_seed", serde_json::json!(r.base_seed));
    doc.insert("params", r.params.clone());
    let seeds: BTreeMap<String, u64> = r
        .rows
        .iter()
        .map(|row| (format!("{}/{}/{}", row.algorithm, row.spec, row.repeat), row.seed))
        .collect();
    doc.insert("cell_seeds", serde_json::json!(seeds));
    let mut text = serde_json::to_string_pretty(&doc).expect("manifest serializes");
    text.push('\n');
    text
}
