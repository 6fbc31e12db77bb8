//! Falsification toolkit for black-box hybrid-system models.
//!
//! The crate searches for input signals that drive a model into violating a
//! Signal Temporal Logic (STL) requirement. It provides:
//!
//! * [`signal`] — uniformly sampled signals, piecewise-constant inputs, and
//!   linear-interpolation resampling onto the fixed 0.1 evaluation grid;
//! * [`stl`] — an STL parser and discrete-time quantitative robustness;
//! * [`models`] — built-in hybrid models (integrator, automatic transmission
//!   surrogate, chasing-cars platoon) plus an external-process adapter;
//! * [`explore`] — exploration algorithms that build a library of output
//!   traces under a simulation budget: uniform and nonuniform random
//!   sampling, random walk/graph baselines, a classic RRT, and output-space
//!   exploration driven by the Voronoi bias over output signals;
//! * [`optimize`] — robustness-minimizing baselines (stochastic hill
//!   climbing, differential evolution, CMA-ES);
//! * [`bench`] — the benchmark registry, campaign runner and CSV emission.
//!
//! Everything is deterministic per seed: a campaign is a pure function of
//! `(base_seed, configuration)`.

pub mod bench;
pub mod explore;
pub mod models;
pub mod optimize;
pub mod signal;
pub mod stl;

/// Fixed evaluation grid step shared by every module (time units).
pub const GRID_STEP: f64 = 0.1;

/// Tolerance used when snapping times onto the evaluation grid.
pub const GRID_EPS: f64 = 1e-9;
