//! `kgb`: command-line front end for the KGB workbench.

mod commands;
mod error;
mod out;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kgb_core::ModelCoefficients;

use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(
    name = "kgb",
    version,
    about = "Traveling waves and dynamics of the KGB system"
)]
struct Cli {
    /// Worker threads for independent runs (sweeps, epsilon lists).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify a wave speed by the eigenvalues of the linearization.
    Classify(ClassifyArgs),
    /// Compute a traveling-wave profile by Petviashvili (or Newton) iteration.
    SolveWave(SolveWaveArgs),
    /// Sample a closed-form solution on a grid.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Integrate the time-dependent system from a config file.
    Evolve(EvolveArgs),
    /// KdV-approximation error experiment over a list of epsilons.
    KdvError(KdvErrorArgs),
    /// Recompute E and F from the snapshots of an `evolve` run.
    CheckInvariants(CheckArgs),
}

/// Quadratic coefficients; unset ones default to 1.
#[derive(Args, Debug, Clone)]
pub struct CoeffArgs {
    #[arg(long = "a-uu")]
    pub a_uu: Option<f64>,
    #[arg(long = "a-uv")]
    pub a_uv: Option<f64>,
    #[arg(long = "a-vv")]
    pub a_vv: Option<f64>,
    #[arg(long = "b-uu")]
    pub b_uu: Option<f64>,
    #[arg(long = "b-uv")]
    pub b_uv: Option<f64>,
    #[arg(long = "b-vv")]
    pub b_vv: Option<f64>,
}

impl CoeffArgs {
    /// Coefficients plus the names of the keys that took their default.
    pub fn resolve(&self, alpha: f64) -> CliResult<(ModelCoefficients, Vec<String>)> {
        let mut defaults = Vec::new();
        let mut get = |name: &str, v: Option<f64>| {
            v.unwrap_or_else(|| {
                defaults.push(format!("{name}=1"));
                1.0
            })
        };
        let a = [
            get("a_uu", self.a_uu),
            get("a_uv", self.a_uv),
            get("a_vv", self.a_vv),
        ];
        let b = [
            get("b_uu", self.b_uu),
            get("b_uv", self.b_uv),
            get("b_vv", self.b_vv),
        ];
        let c = ModelCoefficients::new(alpha, a, b).map_err(kgb_core::Error::from)?;
        Ok((c, defaults))
    }
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[arg(long, required_unless_present = "sweep", allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, required_unless_present = "sweep", allow_hyphen_values = true)]
    pub cs: Option<f64>,
    #[command(flatten)]
    pub coeffs: CoeffArgs,
    /// Emit a CSV region map over an (alpha, c_s) lattice instead.
    #[arg(long)]
    pub sweep: bool,
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0.05, 2.0])]
    pub alpha_range: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0.05, 2.5])]
    pub cs_range: Vec<f64>,
    /// Lattice points per axis.
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    /// Sweep output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum MethodArg {
    Petviashvili,
    Newton,
}

#[derive(Args, Debug)]
pub struct SolveWaveArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub cs: f64,
    #[command(flatten)]
    pub coeffs: CoeffArgs,
    #[arg(long = "L")]
    pub l: Option<f64>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Minimal polynomial extrapolation over cycles of iterates.
    #[arg(long)]
    pub extrapolate: bool,
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Petviashvili)]
    pub method: MethodArg,
    /// Initial guess as CSV (x,u,v); defaults to the normal-form sech^2.
    #[arg(long)]
    pub guess: Option<PathBuf>,
    /// Output directory for profile.csv, trace.csv and wave.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum OracleCommand {
    /// Exact coupled solitary wave (a_uv = b_uu = b_vv = 0, a_uu derived).
    Csw {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        cs: f64,
        #[arg(long = "b-uv", allow_hyphen_values = true)]
        b_uv: f64,
        #[arg(long = "a-vv", allow_hyphen_values = true)]
        a_vv: f64,
        #[arg(long = "L", default_value_t = 60.0)]
        l: f64,
        #[arg(long = "N", default_value_t = 1024)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// KdV soliton for u (v = 0).
    Kdv {
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0.8)]
        c: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long = "a-uu", default_value_t = 1.0)]
        a_uu: f64,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        /// Defaults to 40/eps.
        #[arg(long = "L")]
        l: Option<f64>,
        #[arg(long = "N", default_value_t = 1024)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Improved-Boussinesq soliton with nonlinearity u^p (v = 0).
    Imbq {
        #[arg(long)]
        p: u32,
        #[arg(long, allow_hyphen_values = true)]
        cs: f64,
        #[arg(long = "L", default_value_t = 40.0)]
        l: f64,
        #[arg(long = "N", default_value_t = 1024)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    /// Flat `key = value` or JSON run description.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct KdvErrorArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps_list: Vec<f64>,
    #[arg(long = "T", default_value_t = 100.0)]
    pub t_final: f64,
    #[arg(long, default_value_t = 0.8)]
    pub c: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// Target grid spacing.
    #[arg(long, default_value_t = 0.5)]
    pub spacing: f64,
    /// Steps between error samples.
    #[arg(long, default_value_t = 100)]
    pub sample_stride: usize,
    #[command(flatten)]
    pub coeffs: CoeffArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Directory written by `evolve`.
    pub run_dir: PathBuf,
    /// Relative drift budget for E and F.
    #[arg(long, default_value_t = 1e-6)]
    pub budget: f64,
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::Invalid("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::Invalid(e.to_string()))?;
    }
    match cli.command {
        Command::Classify(a) => commands::classify(&a),
        Command::SolveWave(a) => commands::solve_wave(&a),
        Command::Oracle(o) => commands::oracle(&o),
        Command::Evolve(a) => commands::evolve(&a),
        Command::KdvError(a) => commands::kdv_error(&a),
        Command::CheckInvariants(a) => commands::check_invariants(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", out::to_json(&e.report()).trim_end());
            ExitCode::from(e.exit_code())
        }
    }
}
