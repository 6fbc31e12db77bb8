//! Optional JSON config file; command-line flags override its values.

use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<String>,
    pub algo: Option<String>,
    pub specs: Option<Vec<String>>,
    pub budget: Option<u64>,
    pub repeats: Option<u32>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<String>,
    /// Output dimensions explored (indices).
    pub dims: Option<Vec<usize>>,
    pub level_probs: Option<[f64; 3]>,
    pub gamma: Option<Vec<f64>>,
    pub crossover: Option<f64>,
    pub target_margin: Option<f64>,
    /// External model command line (argv) for `--model external`.
    pub endpoint: Option<Vec<String>>,
    pub timeout_secs: Option<u64>,
}

impl FileConfig {
    pub fn load(path: Option<&std::path::Path>) -> Result<Self, String> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text =
            std::fs::read_to_string(path).map_err(|e| format!("config {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("config {}: {e}", path.display()))
    }
}

/// Seed resolution: flag, then config file, then the VF_SEED environment
/// variable, then 0.
pub fn resolve_seed(flag: Option<u64>, config: &FileConfig) -> Result<u64, String> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Some(s) = config.seed {
        return Ok(s);
    }
    match std::env::var("VF_SEED") {
        Ok(v) => v.parse().map_err(|e| format!("VF_SEED: {e}")),
        Err(_) => Ok(0),
    }
}
