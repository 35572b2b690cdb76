//! Command-line front end for `revchain`.
//!
//! Exit codes: 0 success, 2 parse or usage error, 3 validation failure,
//! 4 refused computation route.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod chainfile;
mod commands;
mod error;
mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::Value;

pub use chainfile::{parse_scalar, ChainFile};
pub use error::CliError;
pub use report::{num, render_human};

use commands::{GibbsAction, McArgs, Outcome, RouteArg};
use report::Doc;

#[derive(Debug, Parser)]
#[command(name = "revchain", version, about = "Exact efficiency analysis of reversible Markov chains")]
struct Cli {
    /// Numerical tolerance; each command documents what it controls.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Print the report as a single JSON document.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues, structural flags, trace and trace lower bound.
    Spectrum { chain: PathBuf },
    /// Trace certificate: non-dominated when the trace attains its lower bound.
    CertifyMinimal { chain: PathBuf },
    /// Asymptotic variance of the ergodic average of f.
    Variance {
        chain: PathBuf,
        /// Function values: inline list ("1,0,0" or "[1,0,0]") or @file.
        #[arg(long = "f")]
        f: String,
        #[arg(long, value_enum, default_value = "auto")]
        route: RouteArg,
        /// Also run the Monte Carlo estimator.
        #[arg(long)]
        mc: bool,
        #[arg(long, default_value_t = 200_000)]
        steps: usize,
        #[arg(long, default_value_t = 16)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Bound on the neglected tail of the autocovariance series.
        #[arg(long, default_value_t = 1e-13)]
        tail_tol: f64,
    },
    /// Monte Carlo estimate of the asymptotic variance.
    Simulate {
        chain: PathBuf,
        #[arg(long = "f")]
        f: String,
        #[arg(long, default_value_t = 200_000)]
        steps: usize,
        #[arg(long, default_value_t = 16)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Efficiency, Peskun and eigenvalue dominance between two chains.
    Compare {
        first: PathBuf,
        second: PathBuf,
        /// Random candidates tried when searching for a witness function.
        #[arg(long, default_value_t = commands::DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Random-scan Gibbs samplers on a product space.
    Gibbs {
        #[command(subcommand)]
        action: GibbsCommand,
    },
}

#[derive(Debug, Subcommand)]
enum GibbsCommand {
    /// Emit the random-scan chain, or one component kernel with --component.
    Build {
        target: PathBuf,
        /// Component number, starting at 1.
        #[arg(long)]
        component: Option<usize>,
        /// Write the emitted chain as a chain file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Substitute one block of a component kernel.
    ReplaceBlock {
        target: PathBuf,
        #[arg(long)]
        component: usize,
        /// Block number, starting at 1, in lexicographic order of the other coordinates.
        #[arg(long)]
        block: usize,
        /// Replacement block: inline JSON matrix or @file.
        #[arg(long)]
        matrix: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether a block replacement improves the random-scan sampler.
    CheckImprovement {
        target: PathBuf,
        #[arg(long, requires_all = ["block", "matrix"])]
        component: Option<usize>,
        #[arg(long, requires_all = ["component", "matrix"])]
        block: Option<usize>,
        #[arg(long, requires_all = ["component", "block"])]
        matrix: Option<String>,
    },
}

fn dispatch(cli: Cli) -> Result<Outcome, CliError> {
    let tol = cli.tol;
    if let Some(t) = tol {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(CliError::Parse(format!("--tol must be a non-negative number, got {t}")));
        }
    }
    match cli.command {
        Command::Spectrum { chain } => commands::spectrum(&chain, tol),
        Command::CertifyMinimal { chain } => commands::certify_minimal(&chain, tol),
        Command::Variance {
            chain,
            f,
            route,
            mc,
            steps,
            reps,
            seed,
            tail_tol,
        } => {
            let mc = mc.then_some(McArgs { steps, reps, seed });
            commands::variance(&chain, &f, route, tail_tol, mc, tol)
        }
        Command::Simulate {
            chain,
            f,
            steps,
            reps,
            seed,
        } => commands::simulate(&chain, &f, McArgs { steps, reps, seed }),
        Command::Compare {
            first,
            second,
            budget,
            seed,
        } => commands::compare(&first, &second, budget, seed, tol),
        Command::Gibbs { action } => {
            let (target, action) = match action {
                GibbsCommand::Build {
                    target,
                    component,
                    out,
                } => (target, GibbsAction::Build { component, out }),
                GibbsCommand::ReplaceBlock {
                    target,
                    component,
                    block,
                    matrix,
                    out,
                } => (
                    target,
                    GibbsAction::ReplaceBlock {
                        component,
                        block,
                        matrix,
                        out,
                    },
                ),
                GibbsCommand::CheckImprovement {
                    target,
                    component,
                    block,
                    matrix,
                } => {
                    let replacement = match (component, block, matrix) {
                        (Some(k), Some(b), Some(m)) => Some((k, b, m)),
                        _ => None,
                    };
                    (target, GibbsAction::CheckImprovement { replacement })
                }
            };
            commands::gibbs(&target, action, tol)
        }
    }
}

/// Parses `args` (including the program name), runs the command, prints the
/// report and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let json = cli.json;
    match dispatch(cli) {
        Ok(outcome) => {
            let doc = Doc::new()
                .set("command", outcome.command)
                .set("inputs", outcome.inputs)
                .set("tolerances", outcome.tolerances)
                .set("result", outcome.result)
                .set("exit_status", 0)
                .build();
            emit(&doc, json);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            if json {
                let doc = Doc::new()
                    .set(
                        "error",
                        Doc::new().set("kind", e.kind()).set("message", e.to_string()),
                    )
                    .set("exit_status", code)
                    .build();
                emit(&doc, true);
            }
            code
        }
    }
}

fn emit(doc: &Value, json: bool) {
    let text = if json {
        serde_json::to_string_pretty(doc).expect("serializable") + "\n"
    } else {
        render_human(doc)
    };
    // A closed pipe (e.g. `| head`) is not an error worth a panic.
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}
