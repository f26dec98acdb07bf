use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bestprox::scenario::{check_hypotheses, emit, render_report, Hypotheses};
use bestprox::{parse_scenario, run_scenario, Scenario};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bestprox", version, about = "Best proximity points of cyclic multivalued maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write report.txt and trace_<k>.csv.
    Run {
        /// Scenario JSON file.
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
        /// Override the scenario's stopping tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Override the scenario's step limit.
        #[arg(long)]
        max_steps: Option<usize>,
        /// Override the scenario's RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Run trajectories on multiple threads. Output is identical.
        #[arg(long)]
        parallel: bool,
    },
    /// Check the hypotheses only. Exit 0 if all PASS, 1 otherwise.
    Check {
        /// Scenario JSON file.
        #[arg(long)]
        scenario: PathBuf,
    },
}

const EXIT_FAIL: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn load(path: &Path) -> Result<Scenario, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_PARSE)
    })?;
    parse_scenario(&text).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(EXIT_PARSE)
    })
}

fn print_check(h: &Hypotheses) {
    let line = |name: &str, v: bestprox::Verdict| println!("{name:<18} {}", v.label());
    line("contraction", h.contraction.verdict);
    line("containment", h.containment.verdict);
    line("proximity_seed", h.proximity_seed.verdict);
    line("threshold", h.threshold.verdict);
    println!("{:<18} {} (optional)", "strong_threshold", h.strong_threshold.verdict.label());
    println!("{:<18} {}", "intersecting", if h.intersecting { "yes" } else { "no" });
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario, out, tol, max_steps, seed, parallel } => {
            let base = match load(&scenario) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let s = match base.with_overrides(tol, max_steps, seed) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_PARSE);
                }
            };
            let artifacts = match run_scenario(&s, parallel) {
                Ok(a) => a,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_RUNTIME);
                }
            };
            if let Err(e) = emit(&artifacts, &out) {
                eprintln!("error: cannot write to {}: {e}", out.display());
                return ExitCode::from(EXIT_RUNTIME);
            }
            let text = render_report(&artifacts.report);
            let human = text.split("\n## Machine-readable").next().unwrap_or(&text);
            print!("{human}");
            ExitCode::SUCCESS
        }
        Command::Check { scenario } => {
            let s = match load(&scenario) {
                Ok(s) => s,
                Err(code) => return code,
            };
            match check_hypotheses(&s) {
                Ok(h) => {
                    print_check(&h);
                    if h.all_required_pass {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(EXIT_FAIL)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_RUNTIME)
                }
            }
        }
    }
}
