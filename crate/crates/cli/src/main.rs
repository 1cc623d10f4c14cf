mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sepcert::Error;

#[derive(Parser, Debug)]
#[command(
    name = "sepcert",
    version,
    about = "Certify separability of quantum states with adaptive polytopes"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Top-level seed; every random choice derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Convergence tolerance of the polytope adaption.
    #[arg(long, global = true, default_value_t = 1e-4)]
    pub tol: f64,
    /// Vertices per polytope (default depends on the command).
    #[arg(long, global = true)]
    pub vertices: Option<usize>,
    #[arg(long, global = true, default_value_t = 200)]
    pub max_rounds: usize,
    /// Parallel work items (sweep rows, grid points, see-saw seeds).
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Log progress to stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum RobustnessKind {
    Random,
    Absolute,
    Generalized,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Adaptive lower bound on the visibility of one state.
    Certify {
        #[arg(long)]
        state: String,
        /// sep, sep:<cut>, fsep, bsep or fbsep.
        #[arg(long, default_value = "sep")]
        class: String,
        /// Include the explicit decomposition in the report.
        #[arg(long)]
        decomposition: bool,
        /// Write the final polytope document here.
        #[arg(long)]
        save_polytope: Option<PathBuf>,
    },
    /// Visibility bounds over a parameter grid of a state family.
    Sweep {
        #[arg(long)]
        state: String,
        #[arg(long, default_value = "sep")]
        class: String,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 1.0)]
        to: f64,
        #[arg(long, default_value_t = 11)]
        points: usize,
        /// Skip the outer-polytope upper bound.
        #[arg(long)]
        no_outer: bool,
    },
    /// Class membership on the plane through the maximally mixed state and two anchors.
    CrossSection {
        #[arg(long)]
        anchor1: String,
        #[arg(long)]
        anchor2: String,
        /// Comma-separated classes.
        #[arg(long, default_value = "sep")]
        classes: String,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
        min: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        max: f64,
    },
    /// Entanglement robustness bounds of a bipartite state.
    Robustness {
        #[arg(value_enum)]
        kind: RobustnessKind,
        #[arg(long)]
        state: String,
    },
    /// See-saw towards PPT-entangled states with low visibility.
    SeesawPpt {
        #[arg(long, default_value = "horodecki2x4:b=0.25")]
        state: String,
        #[arg(long, default_value_t = 40)]
        iterations: usize,
    },
    /// See-saw towards fully biseparable three-qubit states with low FSEP visibility.
    SeesawFbsep {
        /// Independent seeds, starting at --seed.
        #[arg(long, default_value_t = 1)]
        seeds: usize,
        #[arg(long, default_value_t = 40)]
        iterations: usize,
    },
    /// FSEP visibility and Bloch geometry of the ρ(θ) family.
    GammaScan {
        #[arg(long, default_value_t = 64)]
        points: usize,
        /// Refine the minima of χ(θ) by golden-section search.
        #[arg(long)]
        refine: bool,
    },
    /// Extract a witness from an adapted polytope, or verify one.
    Witness {
        #[command(subcommand)]
        action: WitnessAction,
    },
}

#[derive(Subcommand, Debug)]
pub enum WitnessAction {
    /// Dual witness of a bipartite state (or FSEP witness of a multipartite one).
    Extract {
        #[arg(long)]
        state: String,
    },
    /// Check a witness file on random product states and optionally a state.
    Verify {
        #[arg(long)]
        witness: PathBuf,
        #[arg(long)]
        state: Option<String>,
        #[arg(long, default_value_t = 100)]
        starts: usize,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Solver(_) | Error::DegenerateInput(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
