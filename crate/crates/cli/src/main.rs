//! `billiard`: polygonal billiards on the plane, the hyperbolic plane and the
//! sphere from the command line.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use billiard_core::builtins;
use billiard_core::io::{load_table, SpecError};
use billiard_core::polygon::Polygon;

/// Polygonal billiards on surfaces of constant curvature.
#[derive(Debug, Parser)]
#[command(name = "billiard", version)]
struct Cli {
    /// Report format on standard output.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Seed of every sampled search.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Directory for trajectory and figure files.
    #[arg(long, env = "BILLIARD_OUTPUT_DIR", default_value = ".", global = true)]
    output_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// A table: a built-in name or the path of a TOML spec file.
#[derive(Debug, Clone, Args)]
pub struct TableArg {
    /// `square`, `hyperbolic-pentagon`, `sphere-triangle` or a spec file.
    pub table: String,
    /// Angle at the pole of `sphere-triangle`, in radians.
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
}

#[derive(Debug, Clone, Args)]
pub struct StartArgs {
    /// Side label (1-based) of the initial collision.
    #[arg(long)]
    pub side: Option<usize>,
    /// Arc-length position on the side.
    #[arg(long)]
    pub s: Option<f64>,
    /// Direction angle from the side tangent, in (0, π).
    #[arg(long)]
    pub psi: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Forward,
    Backward,
    Both,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Follow an orbit with the collision map, or the extended flow in a
    /// vertex chart when `--vertex` is given.
    Simulate {
        #[command(flatten)]
        table: TableArg,
        #[command(flatten)]
        start: StartArgs,
        /// Labels to record in each direction, the initial side included.
        #[arg(long, default_value_t = 10)]
        bounces: usize,
        #[arg(long, value_enum, default_value_t = DirectionArg::Forward)]
        direction: DirectionArg,
        /// Stop when the orbit returns to its start within this distance.
        #[arg(long)]
        periodic_tol: Option<f64>,
        /// Vertex label (1-based) whose chart to integrate in.
        #[arg(long, requires_all = ["r", "gamma", "beta"], conflicts_with_all = ["side", "s", "psi"])]
        vertex: Option<usize>,
        /// Chart distance to the vertex.
        #[arg(long)]
        r: Option<f64>,
        /// Chart angular position, in [0, 2θ).
        #[arg(long)]
        gamma: Option<f64>,
        /// Chart direction angle.
        #[arg(long)]
        beta: Option<f64>,
        /// Extended-flow time to integrate in the chart.
        #[arg(long, default_value_t = 1.0)]
        duration: f64,
    },
    /// Draw the unfolded trajectory as an SVG figure.
    Unfold {
        #[command(flatten)]
        table: TableArg,
        #[command(flatten)]
        start: StartArgs,
        #[arg(long, default_value_t = 20)]
        bounces: usize,
        /// View direction of the orthographic projection (sphere), `x,y,z`.
        #[arg(long, value_delimiter = ',', num_args = 3)]
        view: Option<Vec<f64>>,
    },
    /// Search periodic orbits by sampling and root polishing.
    Periodic {
        #[command(flatten)]
        table: TableArg,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Longest period searched.
        #[arg(long, default_value_t = 50)]
        bounces: usize,
    },
    /// List generalized diagonals (vertex to vertex trajectories).
    Diagonals {
        #[command(flatten)]
        table: TableArg,
        #[arg(long, default_value_t = 20)]
        depth: usize,
        /// Longest diagonal; 4π by default.
        #[arg(long)]
        length: Option<f64>,
        #[arg(long, default_value_t = billiard_core::collision::DIAGONAL_RESOLUTION)]
        resolution: usize,
    },
    /// Find conjugated vertices (spherical tables).
    Conjugate {
        #[command(flatten)]
        table: TableArg,
        #[arg(long, default_value_t = 20)]
        depth: usize,
        #[arg(long)]
        length: Option<f64>,
        #[arg(long, default_value_t = billiard_core::collision::DIAGONAL_RESOLUTION)]
        resolution: usize,
    },
    /// Decide expansiveness of the billiard flow with a certificate.
    Expansivity {
        #[command(flatten)]
        table: TableArg,
        #[arg(long, default_value_t = 1000)]
        horizon: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 50)]
        bounces: usize,
        #[arg(long, default_value_t = 20)]
        depth: usize,
        #[arg(long)]
        length: Option<f64>,
        #[arg(long, default_value_t = 1e-5)]
        pair_offset: f64,
        #[arg(long, default_value_t = 8)]
        pair_directions: usize,
        /// Random nearby pairs whose itineraries are compared as well.
        #[arg(long, default_value_t = 0)]
        survey: usize,
        /// Horizon of the survey comparisons.
        #[arg(long, default_value_t = 100)]
        survey_horizon: usize,
    },
    /// Double surface invariants and the fundamental group of the phase space.
    Topology {
        #[command(flatten)]
        table: TableArg,
    },
}

/// Failures and their exit codes: 2 for unusable input, 1 otherwise.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Run(String),
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Run(_) => 1,
        }
    }
}

pub fn run_error(context: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Run(format!("{context}: {e}"))
}

impl TableArg {
    pub fn load(&self) -> Result<Polygon, CliError> {
        match self.table.as_str() {
            "square" => Ok(builtins::square()),
            "hyperbolic-pentagon" => Ok(builtins::hyperbolic_pentagon()),
            "sphere-triangle" => builtins::sphere_triangle(self.theta)
                .map_err(|e| CliError::Input(format!("sphere-triangle --theta {}: {e}", self.theta))),
            path => Ok(load_table(path.as_ref())?),
        }
    }
}

fn dispatch(cli: &Cli) -> Result<report::Report, CliError> {
    let out = &cli.output_dir;
    match &cli.command {
        Command::Simulate { table, start, bounces, direction, periodic_tol, vertex, r, gamma, beta, duration } => {
            let poly = table.load()?;
            match vertex {
                Some(v) => commands::simulate_chart(
                    &poly,
                    table,
                    *v,
                    (r.unwrap(), gamma.unwrap(), beta.unwrap()),
                    *duration,
                    out,
                ),
                None => commands::simulate(&poly, table, start, *bounces, *direction, *periodic_tol, out),
            }
        }
        Command::Unfold { table, start, bounces, view } => {
            let poly = table.load()?;
            commands::unfold(&poly, table, start, *bounces, view.as_deref(), out)
        }
        Command::Periodic { table, samples, bounces } => {
            commands::periodic(&table.load()?, table, *samples, *bounces, cli.seed)
        }
        Command::Diagonals { table, depth, length, resolution } => {
            commands::diagonals(&table.load()?, table, *depth, *length, *resolution, false)
        }
        Command::Conjugate { table, depth, length, resolution } => {
            commands::diagonals(&table.load()?, table, *depth, *length, *resolution, true)
        }
        Command::Expansivity {
            table,
            horizon,
            samples,
            bounces,
            depth,
            length,
            pair_offset,
            pair_directions,
            survey,
            survey_horizon,
        } => {
            let budget = billiard_core::expansivity::Budget {
                horizon: *horizon,
                samples: *samples,
                periodic_bounces: *bounces,
                diagonal_depth: *depth,
                diagonal_length: length.unwrap_or(4.0 * std::f64::consts::PI),
                pair_offset: *pair_offset,
                pair_directions: *pair_directions,
                seed: cli.seed,
                ..Default::default()
            };
            commands::expansivity(&table.load()?, table, &budget, *survey, *survey_horizon)
        }
        Command::Topology { table } => commands::topology(&table.load()?, table),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(r) => {
            print!("{}", r.render(cli.format));
            ExitCode::SUCCESS
        }
        Err(e) => {
            let (CliError::Input(m) | CliError::Run(m)) = &e;
            eprintln!("error: {m}");
            ExitCode::from(e.code())
        }
    }
}
