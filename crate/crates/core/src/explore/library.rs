//! The growing library of (input, output) pairs with running per-time-step
//! output bounds.

use crate::signal::{InputSignal, Signal};

/// Library of simulated traces. `UB`/`LB` hold the elementwise running
/// max/min over all stored outputs: `UB` never decreases and `LB` never
/// increases under insertion.
#[derive(Debug, Clone, Default)]
pub struct TraceLibrary {
    entries: Vec<(InputSignal, Signal)>,
    ub: Vec<f64>,
    lb: Vec<f64>,
    samples: usize,
    dims: usize,
}

impl TraceLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, i: usize) -> &(InputSignal, Signal) {
        &self.entries[i]
    }

    pub fn entries(&self) -> &[(InputSignal, Signal)] {
        &self.entries
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn output_dims(&self) -> usize {
        self.dims
    }

    pub fn insert(&mut self, input: InputSignal, output: Signal) {
        if self.entries.is_empty() {
            self.samples = output.len();
            self.dims = output.dims();
            self.ub = vec![f64::NEG_INFINITY; self.samples * self.dims];
            self.lb = vec![f64::INFINITY; self.samples * self.dims];
        } else {
            assert_eq!(output.len(), self.samples, "outputs must share the grid");
            assert_eq!(output.dims(), self.dims);
        }
        for i in 0..self.samples {
            let row = output.row(i);
            for d in 0..self.dims {
                let v = row[d];
                let k = i * self.dims + d;
                if v > self.ub[k] {
                    self.ub[k] = v;
                }
                if v < self.lb[k] {
                    self.lb[k] = v;
                }
            }
        }
        self.entries.push((input, output));
    }

    /// Running max at `(time index, dimension)`.
    pub fn ub(&self, i: usize, dim: usize) -> f64 {
        self.ub[i * self.dims + dim]
    }

    /// Running min at `(time index, dimension)`.
    pub fn lb(&self, i: usize, dim: usize) -> f64 {
        self.lb[i * self.dims + dim]
    }

    /// Scales all stored outputs and bounds by a positive factor (property
    /// tests of the scale invariance of the selection rule).
    #[doc(hidden)]
    pub fn scale_outputs(&mut self, factor: f64) {
        for x in self.ub.iter_mut().chain(self.lb.iter_mut()) {
            *x *= factor;
        }
        let entries = std::mem::take(&mut self.entries);
        for (input, output) in entries {
            let scaled: Vec<Vec<f64>> = (0..output.len())
                .map(|i| output.row(i).iter().map(|v| v * factor).collect())
                .collect();
            let output =
                Signal::new(output.step(), output.dim_names().to_vec(), scaled).expect("valid scaled signal");
            self.entries.push((input, output));
        }
    }
}
