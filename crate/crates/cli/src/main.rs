//! `vf` — falsification toolkit front end.
//!
//! Exit codes: 0 when every requested spec was falsified (or the monitored
//! robustness is non-negative), 1 when some spec survived (or robustness is
//! negative), 2 on configuration, parse, model or i/o errors.

mod commands;
mod config;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "vf", version, about = "Falsification toolkit for black-box hybrid systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm against one or more specs and report witnesses.
    Falsify(commands::FalsifyArgs),
    /// Run a benchmark campaign and emit result tables.
    Bench(commands::BenchArgs),
    /// Evaluate the robustness of a trace file against a formula.
    Monitor(commands::MonitorArgs),
    /// List the registered benchmark specs.
    ListSpecs(commands::ListSpecsArgs),
    /// Simulate one input and write the output trace.
    Simulate(commands::SimulateArgs),
}

fn main() {
    // die quietly when a pipe reader goes away (e.g. `vf list-specs | head`)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Falsify(args) => commands::falsify(args),
        Command::Bench(args) => commands::bench(args),
        Command::Monitor(args) => commands::monitor(args),
        Command::ListSpecs(args) => commands::list_specs(args),
        Command::Simulate(args) => commands::simulate(args),
    };
    let code = match code {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    std::process::exit(code);
}
