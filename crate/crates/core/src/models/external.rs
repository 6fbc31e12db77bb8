//! Adapter for external black-box models spoken to over a child process.
//!
//! Wire protocol (newline-delimited JSON on the child's stdin/stdout), one
//! request/response pair per simulation:
//!
//! ```text
//! -> {"h": 2.0, "T": 30.0, "segments": [[0.5], [-0.25], ...]}
//! <- {"times": [0.0, 0.3, ...], "values": [[0.1], [0.2], ...]}
//! ```
//!
//! The child stays alive across simulations and exits when its input stream
//! closes. Each worker owns its own child; the adapter is never shared
//! across threads mid-simulation (a mutex serializes exchanges).

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{cost_of, Model, ModelError, ModelSpec, SimResult};
use crate::signal::{resample, InputSignal};
use crate::GRID_STEP;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Serialize)]
struct Request<'a> {
    h: f64,
    #[serde(rename = "T")]
    t: f64,
    segments: Vec<&'a [f64]>,
}

#[derive(Deserialize)]
struct Response {
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
}

struct Worker {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    lines_read: usize,
}

pub struct ExternalModel {
    spec: ModelSpec,
    command: Vec<String>,
    timeout: Duration,
    worker: Mutex<Option<Worker>>,
    initial: Mutex<Option<Vec<f64>>>,
}

impl ExternalModel {
    /// `command` is the child program and its arguments; `spec` declares the
    /// interface the child implements.
    pub fn new(command: Vec<String>, spec: ModelSpec, timeout: Option<Duration>) -> Self {
        Self {
            spec,
            command,
            timeout: timeout.unwrap_or(DEFAULT_TIMEOUT),
            worker: Mutex::new(None),
            initial: Mutex::new(None),
        }
    }

    fn spawn(&self) -> Result<Worker, ModelError> {
        let mut cmd = Command::new(&self.command[0]);
        cmd.args(&self.command[1..]).stdin(Stdio::piped()).stdout(Stdio::piped());
        let mut child = cmd
            .spawn()
            .map_err(|source| ModelError::Spawn { command: self.command.join(" "), source })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = std::sync::mpsc::channel();
        std::thread::spawn(move || {
            let reader = BufReader::new(stdout);
            for line in reader.lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Worker { child, stdin, lines: rx, lines_read: 0 })
    }

    fn exchange(&self, u: &InputSignal) -> Result<Response, ModelError> {
        let mut guard = self.worker.lock().unwrap();
        if guard.is_none() {
            *guard = Some(self.spawn()?);
        }
        let worker = guard.as_mut().unwrap();
        let segments: Vec<&[f64]> = (0..u.segments()).map(|s| u.segment(s)).collect();
        let req = Request { h: u.segment_duration(), t: u.horizon(), segments };
        let mut line = serde_json::to_string(&req).expect("request serializes");
        line.push('\n');
        worker.stdin.write_all(line.as_bytes())?;
        worker.stdin.flush()?;
        let reply = match worker.lines.recv_timeout(self.timeout) {
            Ok(Ok(l)) => l,
            Ok(Err(e)) => return Err(ModelError::Io(e)),
            Err(RecvTimeoutError::Timeout) => {
                let _ = worker.child.kill();
                *guard = None;
                return Err(ModelError::Timeout(self.timeout));
            }
            Err(RecvTimeoutError::Disconnected) => {
                let line = worker.lines_read + 1;
                *guard = None;
                return Err(ModelError::Protocol { line, msg: "child closed its output stream".into() });
            }
        };
        worker.lines_read += 1;
        serde_json::from_str(&reply).map_err(|e| ModelError::Protocol {
            line: worker.lines_read,
            msg: format!("malformed response: {e}"),
        })
    }
}

impl Drop for ExternalModel {
    fn drop(&mut self) {
        if let Ok(mut guard) = self.worker.lock() {
            if let Some(mut w) = guard.take() {
                drop(w.stdin);
                let _ = w.child.wait();
            }
        }
    }
}

impl Model for ExternalModel {
    fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    fn simulate(&self, u: &InputSignal) -> Result<SimResult, ModelError> {
        self.check_input(u)?;
        let resp = self.exchange(u)?;
        if resp.times.len() != resp.values.len() {
            return Err(ModelError::Protocol {
                line: 0,
                msg: format!("{} times but {} value rows", resp.times.len(), resp.values.len()),
            });
        }
        // truncate samples beyond the horizon before resampling
        let t_end = u.horizon();
        let keep = resp.times.iter().take_while(|&&t| t <= t_end + crate::GRID_EPS).count();
        let output = resample(
            &resp.times[..keep],
            &resp.values[..keep],
            GRID_STEP,
            t_end,
            self.spec.output_dims.clone(),
        )?;
        let mut initial = self.initial.lock().unwrap();
        if initial.is_none() {
            *initial = Some(output.row(0).to_vec());
        }
        Ok(SimResult { output, sim_count_cost: cost_of(u, &self.spec) })
    }

    /// The first observed output row; falls back to one probe simulation of
    /// the mid-range constant input when nothing has been simulated yet.
    fn initial_output(&self) -> Vec<f64> {
        if let Some(v) = self.initial.lock().unwrap().clone() {
            return v;
        }
        let mid: Vec<f64> = (0..self.spec.segments())
            .flat_map(|_| self.spec.input_dims.iter().map(|(_, lo, hi)| 0.5 * (lo + hi)))
            .collect();
        let u = self.spec.input(mid).expect("mid-range input is in bounds");
        match self.simulate(&u) {
            Ok(sim) => sim.output.row(0).to_vec(),
            Err(_) => vec![0.0; self.spec.output_dims.len()],
        }
    }
}
