use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use egm_cli::front::{check_front, roots, FrontInput};
use egm_cli::{exit, parse_scenario, run, selftest, RunError, RunOptions, RunStatus, OUT_DIR_ENV};

#[derive(Parser, Debug)]
#[command(name = "egm", version, about = "Biquaternion field evolution and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario file, writing CSV series and summary.json.
    Run {
        scenario: PathBuf,
        #[arg(long, env = OUT_DIR_ENV)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        /// Single-threaded run with byte-identical output.
        #[arg(long)]
        reference: bool,
    },
    /// Check jump data on a front given as JSON.
    ShockCheck {
        front: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Characteristic roots along a unit vector.
    Roots {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        m: Vec<f64>,
    },
    /// Run the built-in invariant checks.
    Selftest,
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn usage(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    code(exit::USAGE)
}

fn print_json<S: serde::Serialize>(v: &S) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario, out, threads, reference } => {
            let text = match fs::read_to_string(&scenario) {
                Ok(t) => t,
                Err(e) => return usage(format!("{}: {e}", scenario.display())),
            };
            let sc = match parse_scenario(&text) {
                Ok(s) => s,
                Err(e) => return usage(e),
            };
            match run(&sc, &RunOptions { out_dir: out, threads, reference }) {
                Ok((report, dir)) => {
                    for d in &report.diagnostics {
                        let verdict = if d.passed { "ok" } else { "FAIL" };
                        println!("{:<14} max_linf={:.3e} {verdict}", d.name, d.max_linf);
                    }
                    if let Some(ie) = &report.interaction_energy {
                        println!("interaction    delta_w={:.6e} {}", ie.delta_w, ie.exchange);
                    }
                    if let RunStatus::NumericalAbort { last_stable_tau } = report.status {
                        eprintln!("numerical abort; last stable tau = {last_stable_tau}");
                    }
                    println!("{} steps to tau={:.6}, output in {}", report.steps, report.tau_end, dir.display());
                    code(report.exit_code())
                }
                Err(RunError::Core(egm_core::EgmError::NumericalAbort { last_stable_tau })) => {
                    eprintln!("numerical abort; last stable tau = {last_stable_tau}");
                    code(exit::ABORT)
                }
                Err(e) => usage(e),
            }
        }
        Command::ShockCheck { front, tol } => {
            let input: FrontInput = match fs::read_to_string(&front)
                .map_err(|e| e.to_string())
                .and_then(|t| serde_json::from_str(&t).map_err(|e| e.to_string()))
            {
                Ok(v) => v,
                Err(e) => return usage(e),
            };
            match check_front(&input, tol) {
                Ok(r) => {
                    print_json(&r);
                    code(if r.admissible_a && r.admissible_theta { exit::OK } else { exit::TOLERANCE })
                }
                Err(e) => usage(e),
            }
        }
        Command::Roots { m } if m.len() != 3 => usage(format!("--m takes 3 components, got {}", m.len())),
        Command::Roots { m } => match roots([m[0], m[1], m[2]]) {
            Ok(r) => {
                print_json(&r);
                code(exit::OK)
            }
            Err(e) => usage(e),
        },
        Command::Selftest => {
            let checks = selftest::run_all();
            for c in &checks {
                let verdict = if c.passed() { "PASS" } else { "FAIL" };
                println!("{verdict} {:<14} {:.3e} (tol {:.0e})", c.name, c.value, c.tolerance);
            }
            code(if checks.iter().all(|c| c.passed()) { exit::OK } else { exit::TOLERANCE })
        }
    }
}
