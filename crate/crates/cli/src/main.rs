//! `heis`: command-line front end for heis-core.

mod commands;
mod config;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use heis_core::Exec;

use commands::{Outcome, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "heis",
    version,
    about = "Horizontal convex analysis on the Heisenberg group",
    args_override_self = true
)]
pub struct Cli {
    /// Output format. Defaults to CSV for polygon, radius and chain series
    /// and JSON otherwise.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<String>,
    /// File of key=value lines merged under the command-line flags.
    #[arg(long, global = true)]
    pub config: Option<String>,
    /// Worker threads for grid sweeps; 1 runs sequentially.
    #[arg(long, global = true, env = "HEIS_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Weak H-convexity checks.
    Convexity {
        #[arg(value_enum, default_value = "hessian")]
        mode: ConvexityMode,
        #[command(flatten)]
        common: Common,
    },
    /// Subgradient tests and subdifferential reconstruction.
    Subdiff {
        #[arg(value_enum, default_value = "reconstruct")]
        mode: SubdiffMode,
        #[command(flatten)]
        common: Common,
    },
    /// The H-normal map of radial functions.
    Normalmap {
        #[arg(value_enum, default_value = "disc")]
        mode: NormalmapMode,
        #[command(flatten)]
        common: Common,
    },
    /// Monge–Ampère densities and measures.
    Mameasure {
        #[arg(value_enum, default_value = "integrate")]
        mode: MaMode,
        #[command(flatten)]
        common: Common,
    },
    /// Horizontal chains and the reconstruction of u(g) - u(g0).
    Rockafellar {
        #[arg(value_enum, default_value = "reconstruct")]
        mode: RockMode,
        #[command(flatten)]
        common: Common,
    },
    /// Runs the full invariant suite.
    Verify {
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Convexity { .. } => "convexity",
            Command::Subdiff { .. } => "subdiff",
            Command::Normalmap { .. } => "normalmap",
            Command::Mameasure { .. } => "mameasure",
            Command::Rockafellar { .. } => "rockafellar",
            Command::Verify { .. } => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConvexityMode {
    Hessian,
    Segments,
    Radial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SubdiffMode {
    Verify,
    Reconstruct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormalmapMode {
    Circle,
    Disc,
    Monotonicity,
    Inclusion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MaMode {
    Density,
    Integrate,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RockMode {
    Build,
    Reconstruct,
}

/// Flags shared by the subcommands; each one reads the subset it needs.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Field u(x, y, t) as an expression.
    #[arg(long, allow_hyphen_values = true)]
    pub field: Option<String>,
    /// Radial family generator z(t); the field becomes ((x²+y²)² + z(t))^(1/4).
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<String>,
    /// Radial profile U(r, t).
    #[arg(long, allow_hyphen_values = true)]
    pub profile: Option<String>,
    /// Second radial profile V(r, t) for `normalmap inclusion`.
    #[arg(long, allow_hyphen_values = true)]
    pub upper: Option<String>,
    /// Region box x0:x1,y0:y1,t0:t1.
    #[arg(long = "box", default_value = "-1:1,-1:1,-1:1", allow_hyphen_values = true)]
    pub region: String,
    /// Grid points per axis.
    #[arg(long, default_value_t = 11)]
    pub grid: usize,
    /// Random samples.
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Point x,y,t.
    #[arg(long, allow_hyphen_values = true)]
    pub at: Option<String>,
    /// Horizontal vector p1,p2.
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<String>,
    /// Directions for subdifferential reconstruction.
    #[arg(long, default_value_t = 360)]
    pub dirs: usize,
    /// Bisect directions until no polygon vertex overshoots the support by more than this.
    #[arg(long)]
    pub refine: Option<f64>,
    #[arg(long, default_value = "0,0,0", allow_hyphen_values = true)]
    pub from: String,
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<String>,
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    /// Chain resolution, radial grid size or quadrature cells per axis.
    #[arg(long)]
    pub n: Option<usize>,
    /// Height t of a radial slice.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t: f64,
    /// Radius of a circle or disc.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Run the Hessian convexity check before integrating.
    #[arg(long)]
    pub certify: bool,
}

fn find_subcommand(argv: &[String], name: &str) -> Option<usize> {
    argv.iter().skip(1).position(|a| a == name).map(|i| i + 1)
}

fn parse_cli(argv: Vec<String>) -> Result<Cli, clap::Error> {
    let cli = Cli::try_parse_from(&argv)?;
    let Some(path) = cli.config.clone() else { return Ok(cli) };
    let extra = config::config_args(&path).map_err(|m| clap::Error::raw(clap::error::ErrorKind::Io, m + "\n"))?;
    let at = find_subcommand(&argv, cli.command.name()).expect("subcommand present after a successful parse");
    Cli::try_parse_from(config::splice(&argv, at, extra))
}

fn emit(cli: &Cli, report: &Report) -> std::io::Result<()> {
    let format = cli
        .format
        .unwrap_or(if report.prefer_csv { Format::Csv } else { Format::Json });
    let body = match (format, &report.csv) {
        (Format::Csv, Some(csv)) => csv.clone(),
        (Format::Csv, None) => {
            log::warn!("no CSV form for this result; writing JSON");
            report.json_text()
        }
        (Format::Json, _) => report.json_text(),
    };
    match &cli.output {
        Some(path) => fs::write(path, body),
        None => std::io::stdout().lock().write_all(body.as_bytes()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match parse_cli(std::env::args().collect()) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let exec = match cli.threads {
        Some(0) => {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        Some(1) => Exec::Sequential,
        Some(n) => {
            if !heis_core::exec::init_threads(n) {
                log::warn!("could not configure {n} worker threads");
            }
            Exec::Parallel
        }
        None => Exec::Parallel,
    };
    match commands::run(&cli.command, exec) {
        Outcome::Done(report) => {
            if let Err(e) = emit(&cli, &report) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(if report.passed { 0 } else { 1 })
        }
        Outcome::Failed { code, message } => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
