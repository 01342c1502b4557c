use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use distortion_core::distortion;
use distortion_core::geodesic::{self, NormalFrame};
use distortion_core::table::{Format, Table};
use distortion_core::verification::{self, Resolution, ANALYSIS_RADIUS};
use distortion_core::{Error, ManifoldSpec, MetricField};

/// Exponential map and equal-area radial distortion of two-dimensional metrics.
#[derive(Parser, Debug)]
#[command(name = "distortion", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate the length-preserving radial profile r_prime -> r_hat.
    SolveExp {
        #[command(flatten)]
        common: Common,
        /// Largest r_prime in the table (defaults to the distance to the chart rim, or 2).
        #[arg(long)]
        span: Option<f64>,
    },
    /// Tabulate the volume-preserving radial profile r -> (r_prime, r_hat, slip, g).
    SolveDistortion {
        #[command(flatten)]
        common: Common,
        /// Largest synthetic radius r; rows stop at r_max when it is smaller.
        #[arg(long, default_value_t = ANALYSIS_RADIUS)]
        span: f64,
    },
    /// Run the verification suite; exits with 1 if any check fails.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate the radial geodesic along the first chart axis: t, x, y, vx, vy, g_speed.
    Table {
        #[command(flatten)]
        common: Common,
        /// Arc length of the geodesic (defaults to 90% of the distance to the chart rim, at most 2).
        #[arg(long)]
        length: Option<f64>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Manifold spec file (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// RK4 steps of the radial solvers, and geodesic steps per unit length.
    #[arg(long, default_value_t = 2000)]
    steps: usize,
    /// Number of table intervals.
    #[arg(long, default_value_t = 100)]
    grid: usize,
    /// Output file (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
    Text,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
            OutputFormat::Text => Format::Text,
        }
    }
}

enum Failure {
    Config(String),
    Runtime(String),
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Spec(_) | Error::InvalidArgument(_) | Error::NotRadial(_) | Error::Step(_) => {
                Failure::Config(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

impl Common {
    fn load(&self) -> std::result::Result<(ManifoldSpec, MetricField), Failure> {
        if self.steps < 2 || self.grid < 2 {
            return Err(Failure::Config("--steps and --grid must be at least 2".into()));
        }
        let spec = ManifoldSpec::load(&self.spec)?;
        let metric = spec.metric()?;
        Ok((spec, metric))
    }

    fn emit(&self, text: &str) -> Outcome {
        match &self.out {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn positive(name: &str, v: f64) -> std::result::Result<f64, Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Failure::Config(format!("--{name} must be positive and finite, got {v}")))
    }
}

/// `grid + 1` equally spaced values on `[0, span]`, the last one exactly `span`.
fn rows(span: f64, grid: usize) -> Vec<f64> {
    (0..=grid).map(|k| if k == grid { span } else { span * k as f64 / grid as f64 }).collect()
}

fn solve_exp(common: &Common, span: Option<f64>) -> Outcome {
    let (_, m) = common.load()?;
    let rc = m.radial().ok_or_else(|| Error::NotRadial(m.name().to_string()))?;
    let boundary = distortion::radial_boundary_length(&|r| rc.g_rr(r), rc.radius());
    let span = match span {
        Some(s) => {
            let s = positive("span", s)?;
            if s > boundary {
                return Err(Failure::Config(format!("--span {s} exceeds the distance {boundary} to the chart rim")));
            }
            s
        }
        None if boundary.is_finite() => boundary,
        None => ANALYSIS_RADIUS,
    };
    let profile = distortion::chart_length_profile(&m, span, common.steps)?;
    let end = profile.r_prime_end();
    let grid: Vec<f64> = rows(span, common.grid).into_iter().map(|r| r.min(end)).collect();
    common.emit(&profile.table(&grid)?.render(common.format.into()))
}

fn solve_distortion(common: &Common, span: f64) -> Outcome {
    let (_, m) = common.load()?;
    let span = positive("span", span)?;
    let profile = distortion::chart_distortion_profile(&m, span, common.steps)?;
    let end = profile.r_end();
    let mut grid: Vec<f64> = rows(span, common.grid).into_iter().filter(|r| *r <= end).collect();
    if grid.last().is_some_and(|r| *r < end) {
        grid.push(end);
    }
    common.emit(&profile.table(&grid)?.render(common.format.into()))
}

fn verify(common: &Common) -> Outcome {
    let (spec, _) = common.load()?;
    let res = Resolution { steps: common.steps, grid: common.grid, ..Resolution::default() };
    let report = verification::run_suite(&spec, res)?;
    common.emit(&report.render(common.format.into()))?;
    if report.passed_all() {
        return Ok(());
    }
    for c in report.failures() {
        match &c.error {
            Some(e) => eprintln!("check failed: {} [{}]: {e}", c.name, c.anchor),
            None => eprintln!("check failed: {} [{}]: residual {:.3e} > {:.0e}", c.name, c.anchor, c.residual, c.tolerance),
        }
    }
    Err(Failure::Checks)
}

fn geodesic_table(common: &Common, length: Option<f64>) -> Outcome {
    let (_, m) = common.load()?;
    let length = match length {
        Some(l) => positive("length", l)?,
        None => verification::geodesic_reach(&m),
    };
    let frame = NormalFrame::orthonormalize(&m, verification::base_point(&m))?;
    let per_row = ((common.steps as f64 * length / common.grid as f64).ceil() as usize).max(1);
    let curve = geodesic::geodesic_shoot(&m, &frame, frame.basis[0].components, length, per_row * common.grid)?;
    let full = curve.to_table()?;
    let mut table = Table::new(full.headers.clone());
    for row in full.rows.into_iter().step_by(per_row) {
        table.push(row);
    }
    common.emit(&table.render(common.format.into()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::SolveExp { common, span } => solve_exp(common, *span),
        Command::SolveDistortion { common, span } => solve_distortion(common, *span),
        Command::Verify { common } => verify(common),
        Command::Table { common, length } => geodesic_table(common, *length),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
