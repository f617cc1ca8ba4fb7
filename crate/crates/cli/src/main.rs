use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod render;

/// Planar shock stability and Mach stem computations.
#[derive(Debug, Parser)]
#[command(name = "shockstab", version, about)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value = "json")]
    pub format: Format,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Thermodynamic quantities at one point.
    Thermo {
        #[arg(long)]
        eos: PathBuf,
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        s: f64,
    },
    /// Planar shocks.
    #[command(subcommand)]
    Shock(ShockCommand),
    /// Stability classification, V, c_star and their comparison.
    #[command(subcommand)]
    Stability(StabilityCommand),
    /// Lopatinskii determinant on the real frequency axis.
    #[command(subcommand)]
    Lopatinskii(LopatinskiiCommand),
    /// Mach stem families.
    #[command(subcommand)]
    Machstem(MachstemCommand),
    /// Closed-form first-order coefficients against finite differences.
    Asymptotics {
        #[arg(long)]
        shock: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum ShockCommand {
    /// Solve for the downstream state of a planar shock.
    Solve(ShockSolveArgs),
}

#[derive(Debug, Args)]
pub struct ShockSolveArgs {
    #[arg(long)]
    pub eos: PathBuf,
    #[arg(long)]
    pub tau0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub u: f64,
    /// Upstream normal velocity, used with --upstream-velocity.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub v0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub s0: f64,
    #[command(flatten)]
    pub strength: StrengthArgs,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct StrengthArgs {
    #[arg(long)]
    pub tau1: Option<f64>,
    #[arg(long)]
    pub mass_flux: Option<f64>,
    #[arg(long)]
    pub pressure_ratio: Option<f64>,
    #[arg(long)]
    pub upstream_velocity: bool,
}

#[derive(Debug, Args)]
pub struct StabilityInputs {
    #[arg(long)]
    pub m1: Option<f64>,
    #[arg(long)]
    pub gamma1: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub c1: f64,
    /// Read M1, Gamma1, nu and c1 from a shock file instead.
    #[arg(long, conflicts_with_all = ["m1", "gamma1", "nu"])]
    pub shock: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum StabilityCommand {
    Classify(StabilityInputs),
    V(StabilityInputs),
    Cstar(StabilityInputs),
    /// Compare V and c_star at one point, or over a seeded sweep of weak triples.
    Prop1 {
        #[command(flatten)]
        inputs: StabilityInputs,
        /// Number of pseudo-random weak-regime triples.
        #[arg(long, conflicts_with_all = ["m1", "gamma1", "nu", "shock"])]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum LopatinskiiCommand {
    /// Real zeros of z -> Delta(u_bar, z, eta).
    Scan {
        #[arg(long)]
        shock: PathBuf,
        /// Replace the tangential velocity of the shock.
        #[arg(long, allow_hyphen_values = true)]
        u_bar: Option<f64>,
        /// Set the tangential velocity to -V.
        #[arg(long, conflicts_with = "u_bar")]
        critical: bool,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        eta: f64,
        #[arg(long, allow_hyphen_values = true)]
        z_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        z_max: f64,
        #[arg(long, default_value_t = 400)]
        grid: usize,
    },
}

#[derive(Debug, Args)]
pub struct ToleranceArgs {
    #[arg(long)]
    pub rh_tol: Option<f64>,
    #[arg(long)]
    pub pressure_tol: Option<f64>,
    #[arg(long)]
    pub delta_tol: Option<f64>,
    #[arg(long)]
    pub contact_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Debug, Subcommand)]
pub enum MachstemCommand {
    /// Continue the family of patterns over an eps grid.
    Build {
        #[arg(long)]
        shock: PathBuf,
        /// `a:b:n`, n points from a to b.
        #[arg(long, allow_hyphen_values = true)]
        eps_grid: String,
        #[arg(long, value_enum, default_value = "log")]
        spacing: Spacing,
        /// Also write (eps, Theta, Phi, Psi, lambda, p0..p3) as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        tol: ToleranceArgs,
    },
    /// Re-check every invariant of a family file.
    Verify {
        family: PathBuf,
        #[command(flatten)]
        tol: ToleranceArgs,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(4)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
