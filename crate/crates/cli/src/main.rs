//! `nhqm`: command-line front end for nhqm-core.
//!
//! Time evolution follows `U(t) = exp(-itH)` with ħ = 1 throughout.

mod commands;
mod failure;
mod grid;
mod verify;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use failure::Failure;

#[derive(Parser)]
#[command(name = "nhqm", version, about = "Non-Hermitian quantum mechanics toolkit (evolution convention U(t) = exp(-itH), hbar = 1)")]
struct Cli {
    /// Worker threads for sweeps and parallel checks.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a built-in operator as a JSON matrix.
    Make {
        #[command(subcommand)]
        what: Make,
    },
    /// Classify an operator (exit 2 when it is not diagonalizable).
    Classify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expectation value in a measurement context.
    Expect {
        #[arg(long)]
        obs: PathBuf,
        /// `auto`, `identity` or a path to a metric matrix.
        #[arg(long, default_value = "auto")]
        metric: String,
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evolve a state under a constant Hamiltonian; writes CSV.
    #[command(allow_negative_numbers = true)]
    Evolve {
        #[arg(long)]
        ham: PathBuf,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 2)]
        order: u8,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Transfer time |0> -> |1> for the PT-symmetric two-level Hamiltonian; writes CSV.
    #[command(allow_negative_numbers = true)]
    Brachistochrone {
        #[arg(long, default_value_t = 0.0)]
        r: f64,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        /// Grid such as `r=0:0.95:0.05`; axes r, theta, gamma.
        #[arg(long)]
        sweep: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Geometric phases of a cyclic observable evolution.
    #[command(allow_negative_numbers = true)]
    Phase {
        #[arg(long, conflicts_with = "builder")]
        ham: Option<PathBuf>,
        /// `minus-sigma-z:omega=0.3` or `twolevel:r=..,theta=..,gamma=..`
        #[arg(long)]
        builder: Option<String>,
        #[arg(long, conflicts_with = "bloch_phi")]
        x0: Option<PathBuf>,
        #[arg(long)]
        bloch_phi: Option<f64>,
        #[arg(long, default_value_t = 10.0)]
        horizon: f64,
        #[arg(long, default_value_t = 20000)]
        steps: usize,
        #[arg(long, default_value_t = 2)]
        order: u8,
        /// Hausdorff tolerance for the cycle.
        #[arg(long)]
        tol: Option<f64>,
        /// Random draws per family for the invariance checks (0 skips them).
        #[arg(long, default_value_t = 0)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Grid over `omega` and `phi`; writes CSV instead of a report.
        #[arg(long)]
        sweep: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in regression suite and print a pass/fail table.
    Verify {
        #[arg(long, default_value = "paper")]
        suite: String,
    },
}

#[derive(Subcommand)]
enum Make {
    /// Deformed Pauli matrix.
    #[command(allow_negative_numbers = true)]
    Pauli {
        #[arg(long)]
        omega: f64,
        #[arg(long, value_enum, default_value_t = Component::Z)]
        which: Component,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// `[[r e^{iθ}, γ], [γ, r e^{-iθ}]]`
    #[command(allow_negative_numbers = true)]
    Twolevel {
        #[arg(long)]
        r: f64,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Component {
    X,
    Y,
    Z,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let tol = commands::default_tol()?;
    match cli.command {
        Command::Make { what } => match what {
            Make::Pauli { omega, which, out } => {
                let idx = match which {
                    Component::X => 0,
                    Component::Y => 1,
                    Component::Z => 2,
                };
                commands::make_pauli(omega, idx, out.as_deref())
            }
            Make::Twolevel { r, theta, gamma, out } => commands::make_twolevel(r, theta, gamma, out.as_deref()),
        },
        Command::Classify { input, tol: t, out } => commands::classify(&input, t.unwrap_or(tol), out.as_deref()),
        Command::Expect { obs, metric, state, format, out } => {
            commands::expect(&obs, &metric, &state, matches!(format, Format::Csv), tol, out.as_deref())
        }
        Command::Evolve { ham, t, steps, state, order, out } => {
            commands::evolve(&ham, t, steps, &state, order, out.as_deref())
        }
        Command::Brachistochrone { r, theta, gamma, sweep, out } => {
            commands::brachistochrone(r, theta, gamma, sweep.as_deref(), out.as_deref())
        }
        Command::Phase { ham, builder, x0, bloch_phi, horizon, steps, order, tol: t, trials, seed, sweep, out } => {
            let opts = commands::PhaseOpts {
                ham,
                builder,
                x0,
                bloch_phi,
                horizon,
                steps,
                order,
                tol: t.unwrap_or(tol),
                trials,
                seed,
            };
            match sweep {
                Some(spec) => commands::phase_sweep(&opts, &spec, out.as_deref()),
                None => commands::phase(&opts, out.as_deref()),
            }
        }
        Command::Verify { suite } => verify::run(&suite),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or_default().trim_start_matches("error: ");
            return report(Failure::Config(first.to_string()));
        }
    };
    let pool = match cli.jobs {
        Some(0) => Err(Failure::Config("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| Failure::Config(e.to_string())),
        None => rayon::ThreadPoolBuilder::new().build().map_err(|e| Failure::Config(e.to_string())),
    };
    let result = pool.and_then(|pool| pool.install(|| run(cli)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(f),
    }
}

fn report(f: Failure) -> ExitCode {
    let _ = writeln!(std::io::stderr().lock(), "{}", f.envelope());
    ExitCode::from(f.exit_code())
}
