//! `milnor`: command-line front end for the milnor library.
//!
//! Exit codes: 0 success, 2 numerical failure, 3 input or usage error, 4
//! expectation mismatch.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::CliError;

const AFTER_HELP: &str = "\
Exit codes: 0 success, 2 numerical failure, 3 input or usage error, 4 expectation mismatch.
Configuration precedence: command-line flags > --config file > built-in defaults.
INPUT is a mixed-polynomial expression such as \"z1^2*zb2 + (1-2i)*z2^3\", or a
path to a file holding one, either as an expression or as JSON
{\"n\": int, \"terms\": [{\"re\", \"im\", \"nu\", \"mu\"}]}.";

#[derive(Debug, Parser)]
#[command(name = "milnor", version, about = "Numerical tubular Milnor fibrations of mixed polynomials", after_help = AFTER_HELP)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// RNG seed [default: 0]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Fiber residual tolerance |f(z) - target| [default: 1e-9]
    #[arg(long, global = true)]
    pub tol_fiber: Option<f64>,
    /// Angle tolerance in radians [default: 1e-6]
    #[arg(long, global = true)]
    pub tol_angle: Option<f64>,
    /// Fiber radius delta [default: 1e-3 * r0^d, d = lowest radial degree of f]
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Outer ball radius r0 [default: 1.0]
    #[arg(long, global = true)]
    pub r0: Option<f64>,
    /// Inner radius r1 [default: 0.5 * r0]
    #[arg(long, global = true)]
    pub r1: Option<f64>,
    /// RK4 step of the monodromy flow, in radians of arg f [default: 0.0031415]
    #[arg(long, global = true)]
    pub ode_step: Option<f64>,
    /// Trajectories stay within r0 * (1 - margin) [default: 0.05]
    #[arg(long, global = true)]
    pub margin: Option<f64>,
    /// JSON file with any of: seed, tol_fiber, tol_angle, delta, r0, r1, ode_step, margin [default: none]
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Emit the report as JSON instead of text [default: off]
    #[arg(long, global = true)]
    pub json: bool,
    /// Write the report to this file instead of standard output [default: stdout]
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Write plot data (points, trajectory or roots) as CSV to this file [default: none]
    #[arg(long, global = true)]
    pub emit_plot_data: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Newton data, face non-degeneracy survey and tameness checks
    Analyze(AnalyzeArgs),
    /// Sample points of the fiber f^-1(delta) in the ball
    SampleFiber(SampleArgs),
    /// Flow a fiber point by the monodromy through angle theta
    Monodromy(MonodromyArgs),
    /// Estimate the number of connected components of the fiber (an upper bound)
    Components(ComponentsArgs),
    /// Compare gcd of multiplicities with the cyclic-cover model, optionally with sampling
    GcdCheck(GcdArgs),
    /// Count zeros of the Rhie lens family and compare with 5n-5
    LensRoots(LensArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub input: String,
    /// Random starts per face search
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Largest weight entry in the face survey
    #[arg(long, default_value_t = 5)]
    pub weight_bound: u32,
    /// Squared radius bound on the vanishing coordinates in tameness checks
    #[arg(long, default_value_t = 0.01)]
    pub tameness_epsilon: f64,
    /// Residual below which a trial counts as a critical point
    #[arg(long, default_value_t = 1e-10)]
    pub search_tol: f64,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    pub input: String,
    /// Number of fiber points
    #[arg(long = "N", default_value_t = 100)]
    pub points: usize,
    /// Also probe transversality of the fiber to spheres between r1 and r0 [default: off]
    #[arg(long)]
    pub probe_transversality: bool,
    /// Radii probed
    #[arg(long, default_value_t = 5)]
    pub probe_radii: usize,
    /// Samples per probed radius
    #[arg(long, default_value_t = 8)]
    pub probe_samples: usize,
}

#[derive(Debug, Args)]
pub struct MonodromyArgs {
    pub input: String,
    /// Start point as comma-separated re,im pairs [default: first sampled fiber point]
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    /// Flow angle in radians
    #[arg(long, default_value_t = std::f64::consts::TAU, allow_hyphen_values = true)]
    pub theta: f64,
}

#[derive(Debug, Args)]
pub struct ComponentsArgs {
    pub input: String,
    /// Number of fiber points
    #[arg(long = "N", default_value_t = 200)]
    pub points: usize,
    /// Random long-range pairs tried besides the neighbour graph
    #[arg(long, default_value_t = 200)]
    pub budget: usize,
    /// Neighbours per point
    #[arg(long, default_value_t = 6)]
    pub k: usize,
    /// Extra waypoint attempts per pair
    #[arg(long, default_value_t = 3)]
    pub retries: usize,
    /// Exit with code 4 unless exactly this many components are found [default: none]
    #[arg(long)]
    pub expect: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GcdArgs {
    /// Multiplicities n_1,...,n_r
    #[arg(long, value_delimiter = ',', required = true)]
    pub multiplicities: Vec<u32>,
    /// Holomorphic factor f_i, once per multiplicity; enables the sampled check [default: none]
    #[arg(long = "factor")]
    pub factors: Vec<String>,
    /// Fiber points for the sampled check
    #[arg(long = "N", default_value_t = 200)]
    pub points: usize,
    /// Random long-range pairs for the sampled check
    #[arg(long, default_value_t = 200)]
    pub budget: usize,
}

#[derive(Debug, Args)]
pub struct LensArgs {
    /// Family parameter n >= 2
    #[arg(long, default_value_t = 2)]
    pub n: u32,
    /// Ring radius a in (0, 1/2)
    #[arg(long, default_value_t = 0.3)]
    pub a: f64,
    /// Small mass epsilon in (0, a/10) [default: 1e-2, 1e-3, 1e-4 for n = 2, 3, 4; 10^-n in general]
    #[arg(long)]
    pub eps: Option<f64>,
    /// Seeds per side of the search square
    #[arg(long, default_value_t = 120)]
    pub grid: usize,
    /// Roots closer than this are merged
    #[arg(long, default_value_t = 1e-6)]
    pub dedup_radius: f64,
    /// Half-width of the search square
    #[arg(long, default_value_t = 2.0)]
    pub half_width: f64,
    /// Include the two-variable homogenization in the report [default: off]
    #[arg(long)]
    pub homogenize: bool,
    /// Report the largest epsilon below a/10 keeping the 5n-5 count, by bisection [default: off]
    #[arg(long)]
    pub bisect: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(3);
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Numerical(_) => 2,
            CliError::Input(_) => 3,
            CliError::Mismatch(_) => 4,
        }
    }
}
