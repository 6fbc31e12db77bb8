//! Signal representation and resampling.
//!
//! A [`Signal`] is a uniformly sampled multi-dimensional time series on the
//! closed interval `[0, T]`; grid point `i` sits at time `i * step`. An
//! [`InputSignal`] is the piecewise-constant control parameterization used by
//! every model: one value per input dimension per segment of duration `h`.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::GRID_EPS;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("signal has no samples")]
    Empty,
    #[error("row {row} has {got} values, expected {expected}")]
    RaggedRow { row: usize, got: usize, expected: usize },
    #[error("non-finite value at row {row}, dimension {dim}")]
    NonFinite { row: usize, dim: usize },
    #[error("raw trace does not cover [0, {t}]: raw times span [{lo}, {hi}]")]
    HorizonNotCovered { t: f64, lo: f64, hi: f64 },
    #[error("raw times must be strictly increasing (violated at index {0})")]
    NonIncreasingTimes(usize),
    #[error("time {t} is not within {eps} of a grid point (step {step})")]
    OffGrid { t: f64, step: f64, eps: f64 },
    #[error("time {t} outside signal range [0, {horizon}]")]
    OutOfRange { t: f64, horizon: f64 },
    #[error("segment value {value} outside bounds [{min}, {max}] (segment {segment}, dimension {dim})")]
    OutOfBounds { value: f64, min: f64, max: f64, segment: usize, dim: usize },
    #[error("expected {expected} segments for horizon {horizon} and step {h}, got {got}")]
    SegmentCount { expected: usize, got: usize, horizon: f64, h: f64 },
    #[error("invalid duration: h = {h}, T = {t} (both must be positive)")]
    InvalidDuration { h: f64, t: f64 },
    #[error("trace file: {0}")]
    TraceFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Uniformly sampled multi-dimensional signal on `[0, T]`.
///
/// Stored row-major: `values[i * dims + d]` is dimension `d` at grid index
/// `i`. Both grid endpoints are included, so a signal with horizon `T` holds
/// `floor(T / step) + 1` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    step: f64,
    dims: usize,
    values: Vec<f64>,
    dim_names: Vec<String>,
}

impl Signal {
    pub fn new(step: f64, dim_names: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self, SignalError> {
        if rows.is_empty() {
            return Err(SignalError::Empty);
        }
        let dims = dim_names.len();
        let mut values = Vec::with_capacity(rows.len() * dims);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dims {
                return Err(SignalError::RaggedRow { row: i, got: row.len(), expected: dims });
            }
            for (d, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(SignalError::NonFinite { row: i, dim: d });
                }
                values.push(v);
            }
        }
        Ok(Self { step, dims, values, dim_names })
    }

    pub(crate) fn from_flat(step: f64, dim_names: Vec<String>, values: Vec<f64>) -> Self {
        let dims = dim_names.len();
        debug_assert!(dims > 0 && values.len() % dims == 0);
        Self { step, dims, values, dim_names }
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn dim_names(&self) -> &[String] {
        &self.dim_names
    }

    /// Number of grid points (time indices).
    pub fn len(&self) -> usize {
        self.values.len() / self.dims
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Horizon `T = (len - 1) * step`.
    pub fn horizon(&self) -> f64 {
        (self.len() - 1) as f64 * self.step
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dims..(i + 1) * self.dims]
    }

    pub fn value(&self, i: usize, dim: usize) -> f64 {
        self.values[i * self.dims + dim]
    }

    /// Column view of one dimension.
    pub fn dim_values(&self, dim: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().skip(dim).step_by(self.dims).copied()
    }

    pub fn dim_index(&self, name: &str) -> Option<usize> {
        self.dim_names.iter().position(|n| n == name)
    }

    /// Row at time `t`. `t` must lie on the grid within [`GRID_EPS`];
    /// off-grid queries are an error so every consumer works on the exact
    /// same grid.
    pub fn value_at(&self, t: f64) -> Result<&[f64], SignalError> {
        let idx = (t / self.step).round();
        if (t - idx * self.step).abs() > GRID_EPS {
            return Err(SignalError::OffGrid { t, step: self.step, eps: GRID_EPS });
        }
        if idx < 0.0 || idx as usize >= self.len() {
            return Err(SignalError::OutOfRange { t, horizon: self.horizon() });
        }
        Ok(self.row(idx as usize))
    }

    /// Writes the trace as CSV: header `t,<dim_names...>`, one row per grid
    /// point. Emission is deterministic (shortest round-trip float format).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push('t');
        for name in &self.dim_names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for i in 0..self.len() {
            let t = i as f64 * self.step;
            let _ = write!(out, "{t:.1}");
            for d in 0..self.dims {
                let _ = write!(out, ",{}", self.value(i, d));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), SignalError> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Reads a trace CSV produced by [`Signal::to_csv`] (or any file in the
    /// same format with a fixed step).
    pub fn read_csv(path: &Path) -> Result<Self, SignalError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_csv(&text)
    }

    pub fn parse_csv(text: &str) -> Result<Self, SignalError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| SignalError::TraceFormat("empty file".into()))?;
        let mut cols = header.split(',');
        if cols.next() != Some("t") {
            return Err(SignalError::TraceFormat("header must start with `t`".into()));
        }
        let dim_names: Vec<String> = cols.map(|s| s.trim().to_string()).collect();
        if dim_names.is_empty() {
            return Err(SignalError::TraceFormat("no signal dimensions in header".into()));
        }
        let mut times = Vec::new();
        let mut rows = Vec::new();
        for (lineno, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let parse = |s: &str, lineno: usize| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| SignalError::TraceFormat(format!("line {}: {e}", lineno + 1)))
            };
            let t = parse(
                fields
                    .next()
                    .ok_or_else(|| SignalError::TraceFormat(format!("line {}: missing time", lineno + 1)))?,
                lineno,
            )?;
            let row: Vec<f64> = fields.map(|f| parse(f, lineno)).collect::<Result<_, _>>()?;
            if row.len() != dim_names.len() {
                return Err(SignalError::TraceFormat(format!(
                    "line {}: {} values, expected {}",
                    lineno + 1,
                    row.len(),
                    dim_names.len()
                )));
            }
            times.push(t);
            rows.push(row);
        }
        if rows.len() < 2 {
            return Err(SignalError::TraceFormat("need at least two samples".into()));
        }
        let step = times[1] - times[0];
        for (i, w) in times.windows(2).enumerate() {
            if ((w[1] - w[0]) - step).abs() > GRID_EPS {
                return Err(SignalError::TraceFormat(format!(
                    "non-uniform step between rows {} and {}",
                    i + 1,
                    i + 2
                )));
            }
        }
        Signal::new(step, dim_names, rows)
    }
}

/// Piecewise-constant input: `segment_values[s][d]` holds on
/// `[s*h, (s+1)*h)`, with the last segment extended to cover `t = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSignal {
    segment_values: Vec<f64>,
    dims: usize,
    segment_duration: f64,
    horizon: f64,
    bounds: Vec<(f64, f64)>,
}

/// Number of segments needed to cover `[0, T]` with step `h` (`ceil(T/h)`,
/// robust to floating-point ratios that are integral up to 1e-9).
pub fn segment_count(horizon: f64, h: f64) -> usize {
    let ratio = horizon / h;
    if (ratio - ratio.round()).abs() < GRID_EPS {
        ratio.round() as usize
    } else {
        ratio.ceil() as usize
    }
}

impl InputSignal {
    /// `values` is segment-major: `values[s * dims + d]`.
    pub fn new(
        values: Vec<f64>,
        dims: usize,
        h: f64,
        horizon: f64,
        bounds: Vec<(f64, f64)>,
    ) -> Result<Self, SignalError> {
        if !(h > 0.0) || !(horizon > 0.0) {
            return Err(SignalError::InvalidDuration { h, t: horizon });
        }
        debug_assert_eq!(bounds.len(), dims);
        let expected = segment_count(horizon, h);
        if values.len() != expected * dims {
            return Err(SignalError::SegmentCount {
                expected,
                got: values.len() / dims.max(1),
                horizon,
                h,
            });
        }
        for (i, &v) in values.iter().enumerate() {
            let (seg, dim) = (i / dims, i % dims);
            let (min, max) = bounds[dim];
            if !(v >= min && v <= max) {
                return Err(SignalError::OutOfBounds { value: v, min, max, segment: seg, dim });
            }
        }
        Ok(Self { segment_values: values, dims, segment_duration: h, horizon, bounds })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn segments(&self) -> usize {
        self.segment_values.len() / self.dims
    }

    pub fn segment_duration(&self) -> f64 {
        self.segment_duration
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn segment(&self, s: usize) -> &[f64] {
        &self.segment_values[s * self.dims..(s + 1) * self.dims]
    }

    /// Flat segment-major view (used by the optimizers' decode).
    pub fn flat_values(&self) -> &[f64] {
        &self.segment_values
    }

    /// Segment index active at time `t`; the last segment covers `t = T`.
    pub fn segment_at(&self, t: f64) -> usize {
        let idx = ((t / self.segment_duration) + GRID_EPS).floor() as usize;
        idx.min(self.segments() - 1)
    }

    /// Value vector at time `t`.
    pub fn value_at(&self, t: f64) -> &[f64] {
        self.segment(self.segment_at(t))
    }

    /// Materializes the input on the evaluation grid.
    pub fn to_signal(&self, step: f64) -> Signal {
        let n = ((self.horizon / step) + GRID_EPS).floor() as usize + 1;
        let mut values = Vec::with_capacity(n * self.dims);
        for i in 0..n {
            let t = i as f64 * step;
            values.extend_from_slice(self.value_at(t));
        }
        let names = (0..self.dims).map(|d| format!("u{}", d + 1)).collect();
        Signal::from_flat(step, names, values)
    }

    /// Truncates to the first `segments` segments (horizon shrinks to
    /// `segments * h`). Used for prefix re-simulation.
    pub fn prefix(&self, segments: usize) -> InputSignal {
        assert!(segments >= 1 && segments <= self.segments());
        InputSignal {
            segment_values: self.segment_values[..segments * self.dims].to_vec(),
            dims: self.dims,
            segment_duration: self.segment_duration,
            horizon: segments as f64 * self.segment_duration,
            bounds: self.bounds.clone(),
        }
    }
}

/// Resamples a raw trace onto the step grid with linear interpolation.
///
/// Raw samples must strictly increase in time and cover `[0, T]`; samples
/// beyond `T` are truncated. Grid points that land on a raw sample (within
/// [`GRID_EPS`]) reproduce it exactly, which makes resampling idempotent on
/// already-gridded input.
pub fn resample(
    raw_times: &[f64],
    raw_values: &[Vec<f64>],
    step: f64,
    horizon: f64,
    dim_names: Vec<String>,
) -> Result<Signal, SignalError> {
    assert_eq!(raw_times.len(), raw_values.len());
    for (i, w) in raw_times.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(SignalError::NonIncreasingTimes(i + 1));
        }
    }
    let (Some(&lo), Some(&hi)) = (raw_times.first(), raw_times.last()) else {
        return Err(SignalError::Empty);
    };
    if lo > GRID_EPS || hi < horizon - GRID_EPS {
        return Err(SignalError::HorizonNotCovered { t: horizon, lo, hi });
    }
    let dims = dim_names.len();
    let n = ((horizon / step) + GRID_EPS).floor() as usize + 1;
    let mut values = Vec::with_capacity(n * dims);
    let mut hint = 0usize;
    for i in 0..n {
        let t = i as f64 * step;
        // advance the bracketing window; raw_times is sorted
        while hint + 1 < raw_times.len() && raw_times[hint + 1] < t - GRID_EPS {
            hint += 1;
        }
        let (k0, k1) = if hint + 1 < raw_times.len() { (hint, hint + 1) } else { (hint - 1, hint) };
        let (t0, t1) = (raw_times[k0], raw_times[k1]);
        let row: &mut dyn FnMut(usize) -> f64 = &mut |d| {
            if (t - t0).abs() <= GRID_EPS {
                raw_values[k0][d]
            } else if (t - t1).abs() <= GRID_EPS {
                raw_values[k1][d]
            } else {
                let a = (t - t0) / (t1 - t0);
                raw_values[k0][d] + a * (raw_values[k1][d] - raw_values[k0][d])
            }
        };
        for d in 0..dims {
            let v = row(d);
            if !v.is_finite() {
                return Err(SignalError::NonFinite { row: i, dim: d });
            }
            values.push(v);
        }
    }
    Ok(Signal::from_flat(step, dim_names, values))
}
