//! `cmcrot`: equilibria, series, traces, cones, phase portraits and the
//! invariant suite for rotational constant mean curvature hypersurfaces.

mod args;
mod output;
mod portrait;
mod report;
mod svg;
mod trace;
mod verify;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cmcrot_core::manifolds::Branch;

use args::{Dims, NumArgs, ParamArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    Io(std::io::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numeric(m) => f.write_str(m),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<cmcrot_core::Error> for CliError {
    fn from(e: cmcrot_core::Error) -> Self {
        use cmcrot_core::Error as E;
        match e {
            E::InvalidDimensions { .. }
            | E::InvalidArgument(_)
            | E::NonFiniteCurvature(_)
            | E::OffQuadrant { .. }
            | E::NotNearOrigin(_) => CliError::Usage(e.to_string()),
            E::SingularSystem { .. } | E::StepUnderflow { .. } | E::TaxonomyViolation(_) => {
                CliError::Numeric(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

#[derive(Parser, Debug)]
#[command(name = "cmcrot", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BranchArg {
    Unstable,
    Stable,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Unstable => Branch::UnstableP5,
            BranchArg::Stable => Branch::StableP6,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Singular points of the flow on the exceptional divisor.
    Equilibria {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        num: NumArgs,
        /// Output file [default: stdout].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Power-series coefficients of an origin branch.
    Series {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        num: NumArgs,
        #[arg(long, default_value_t = 6, value_parser = args::order)]
        order: u32,
        #[arg(long, value_enum, default_value_t = BranchArg::Unstable)]
        branch: BranchArg,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Traces a profile curve and reports its events.
    Trace(trace::TraceArgs),
    /// The minimal cone and a trace started on it.
    Cone {
        #[command(flatten)]
        dims: Dims,
        #[command(flatten)]
        num: NumArgs,
        #[arg(long, default_value_t = 0.1)]
        t_min: f64,
        #[arg(long, default_value_t = 100.0)]
        t_max: f64,
        /// Arclength of the drift check.
        #[arg(long, default_value_t = 1000.0)]
        length: f64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// JSON report [default: stdout].
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV of the exact cone.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// SVG phase portrait of the flow on the exceptional divisor.
    Portrait {
        #[command(flatten)]
        dims: Dims,
        #[command(flatten)]
        num: NumArgs,
        /// Seeds per row of the grid of integral curves.
        #[arg(long, default_value_t = 12)]
        density: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the invariant suite over a parameter sweep (TAP output).
    Verify(verify::VerifyArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Equilibria { params, num, out } => {
            let par = params.params()?;
            num.integrator()?;
            let v = report::equilibria(&par);
            output::write_json(&v, &mut *output::sink(out.as_deref())?)?;
        }
        Command::Series {
            params,
            num,
            order,
            branch,
            format,
            out,
        } => {
            let par = params.params()?;
            num.integrator()?;
            let r = report::series(&par, branch.into(), order as usize)?;
            let mut w = output::sink(out.as_deref())?;
            match format {
                Format::Json => output::write_json(&r.json, &mut *w)?,
                Format::Csv => {
                    writeln!(w, "i,l,k")?;
                    for (i, l, k) in &r.rows {
                        writeln!(w, "{i},{l:.16e},{k:.16e}")?;
                    }
                    w.flush()?;
                }
            }
        }
        Command::Trace(a) => trace::run(&a)?,
        Command::Cone {
            dims,
            num,
            t_min,
            t_max,
            length,
            samples,
            out,
            csv,
            svg,
        } => {
            if !(t_min > 0.0 && t_max > t_min && length > 0.0) {
                return Err(CliError::Usage(
                    "need 0 < t-min < t-max and a positive length".into(),
                ));
            }
            let par = cmcrot_core::Params::new(dims.p, dims.q, 0.0)?;
            let cfg = num.integrator()?;
            let r = report::cone_report(&par, t_min, t_max, samples, length, &cfg)?;
            output::write_json(&r.json, &mut *output::sink(out.as_deref())?)?;
            if let Some(path) = csv {
                output::write_csv(&r.exact, &mut *output::sink(Some(&path))?)?;
            }
            if let Some(path) = svg {
                let title = format!("minimal cone, p = {}, q = {}", dims.p, dims.q);
                std::fs::write(path, svg::profile(&r.exact, &[], &title))?;
            }
        }
        Command::Portrait {
            dims,
            num,
            density,
            out,
        } => {
            let par = cmcrot_core::Params::new(dims.p, dims.q, 0.0)?;
            let cfg = num.integrator()?;
            let text = portrait::render(&par, density.max(1), &cfg);
            let mut w = output::sink(out.as_deref())?;
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        Command::Verify(a) => verify::run(&a)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CMCROT_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
