//! Reference external model speaking the line-delimited JSON wire protocol:
//! it echoes the piecewise-constant input back as its output trace.
//!
//! Useful as protocol documentation, as a smoke test for the external
//! adapter, and as a template for wrapping real simulators. Fault-injection
//! flags exercise the adapter's error paths:
//!
//! * `--malformed`: reply with a non-JSON line
//! * `--short`: cover only half the requested horizon
//! * `--stall`: never reply

use std::io::{BufRead, Write};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let malformed = args.iter().any(|a| a == "--malformed");
    let short = args.iter().any(|a| a == "--short");
    let stall = args.iter().any(|a| a == "--stall");

    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    for line in stdin.lock().lines() {
        let line = match line {
            Ok(l) => l,
            Err(_) => break,
        };
        if line.trim().is_empty() {
            continue;
        }
        if stall {
            std::thread::sleep(std::time::Duration::from_secs(3600));
        }
        if malformed {
            let mut out = stdout.lock();
            let _ = writeln!(out, "this is not json");
            let _ = out.flush();
            continue;
        }
        let req: serde_json::Value = match serde_json::from_str(&line) {
            Ok(v) => v,
            Err(e) => {
                eprintln!("echo-model: bad request: {e}");
                std::process::exit(1);
            }
        };
        let h = req["h"].as_f64().unwrap();
        let t_end = req["T"].as_f64().unwrap();
        let segments = req["segments"].as_array().unwrap();
        let horizon = if short { t_end / 2.0 } else { t_end };

        let mut times = Vec::new();
        let mut values = Vec::new();
        // sample each segment at its endpoints so linear resampling
        // reproduces the piecewise-constant shape exactly
        let n_seg = segments.len();
        for (s, seg) in segments.iter().enumerate() {
            let row: Vec<f64> = seg.as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
            let start = s as f64 * h;
            let end = ((s + 1) as f64 * h).min(t_end);
            if start > horizon {
                break;
            }
            times.push(start);
            values.push(row.clone());
            let stop = end.min(horizon);
            if stop > start {
                // just before the discontinuity, then nothing: the next
                // segment opens at `end`
                if s + 1 < n_seg && stop == end {
                    times.push(end - 1e-6);
                } else {
                    times.push(stop);
                }
                values.push(row);
            }
        }
        let reply = serde_json::json!({ "times": times, "values": values });
        let mut out = stdout.lock();
        let _ = writeln!(out, "{reply}");
        let _ = out.flush();
    }
}
