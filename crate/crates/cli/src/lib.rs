//! Command-line front end: `denoise`, `add-noise`, `metrics` and
//! `check-operators`.
//!
//! Exit codes are 0 on success, 1 for usage errors (bad flags or config
//! files), 2 for data errors (unreadable or invalid meshes) and 3 for
//! numerical failures, including a failed operator self-check.

pub mod config;

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::Context;
use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use semisparse::io::{self, ReadOptions};
use semisparse::{
    checks, compute_metrics, denoise, DenoiseParams, DirectionMode, NoiseSpec, SolverParams,
    ThresholdMode, TriMesh, VertexUpdateParams,
};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "semisparse",
    version,
    about = "Semi-sparse triangle mesh denoising"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Filter the face normals of a mesh and move its vertices to match.
    Denoise(DenoiseArgs),
    /// Displace every vertex by seeded Gaussian noise.
    AddNoise(AddNoiseArgs),
    /// Compare a mesh with a ground truth of identical connectivity.
    Metrics(MetricsArgs),
    /// Run the operator self-tests on a mesh.
    CheckOperators(CheckArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Fan-triangulate polygonal faces instead of rejecting them.
    #[arg(long)]
    pub triangulate: bool,
    /// File of `key = value` lines supplying any option not given on the
    /// command line.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Fidelity weight: how strongly the filtered normals stay close to the
    /// noisy ones.
    #[arg(long, default_value_t = SolverParams::default().beta)]
    pub beta: f64,
    /// Weight of the group-L1 term keeping normal jumps across edges close
    /// to those of the input.
    #[arg(long, default_value_t = SolverParams::default().alpha1)]
    pub alpha1: f64,
    /// Weight of the L0 term counting stencils with a nonzero second
    /// difference; larger values flatten more.
    #[arg(long, default_value_t = SolverParams::default().alpha2)]
    pub alpha2: f64,
    /// Initial ADMM penalty on the edge-jump splitting constraint.
    #[arg(long, default_value_t = SolverParams::default().rho1)]
    pub rho1: f64,
    /// Initial ADMM penalty on the second-difference splitting constraint.
    #[arg(long, default_value_t = SolverParams::default().rho2)]
    pub rho2: f64,
    /// Factor applied to both penalties after every iteration (1 keeps them
    /// fixed).
    #[arg(long, default_value_t = SolverParams::default().rho_growth)]
    pub rho_growth: f64,
    /// Upper bound for either penalty while growing.
    #[arg(long, default_value_t = SolverParams::default().rho_max)]
    pub rho_max: f64,
    /// Maximum number of ADMM iterations.
    #[arg(long, default_value_t = SolverParams::default().max_iter)]
    pub max_iter: usize,
    /// Stop once both relative constraint residuals fall below this.
    #[arg(long, default_value_t = SolverParams::default().primal_tol)]
    pub primal_tol: f64,
    /// Hard threshold rule of the L0 step: `paper-literal` (alpha2/rho2) or
    /// `prox-derived` (sqrt(2 alpha2/rho2)).
    #[arg(long, default_value_t = SolverParams::default().threshold_mode)]
    pub threshold_mode: ThresholdMode,
    /// Vertex update sweeps after normal filtering.
    #[arg(long, default_value_t = VertexUpdateParams::default().iterations)]
    pub vertex_iterations: usize,
    /// Step size of each vertex update sweep, in (0, 1].
    #[arg(long, default_value_t = VertexUpdateParams::default().step)]
    pub vertex_step: f64,
}

impl SolverArgs {
    pub fn params(&self) -> DenoiseParams {
        DenoiseParams {
            solver: SolverParams {
                beta: self.beta,
                alpha1: self.alpha1,
                alpha2: self.alpha2,
                rho1: self.rho1,
                rho2: self.rho2,
                rho_growth: self.rho_growth,
                rho_max: self.rho_max,
                max_iter: self.max_iter,
                primal_tol: self.primal_tol,
                threshold_mode: self.threshold_mode,
            },
            vertex: VertexUpdateParams {
                iterations: self.vertex_iterations,
                step: self.vertex_step,
            },
        }
    }

    fn set(&mut self, key: &str, value: &str) -> Result<bool, UsageError> {
        match key {
            "beta" => self.beta = parse_value(key, value)?,
            "alpha1" => self.alpha1 = parse_value(key, value)?,
            "alpha2" => self.alpha2 = parse_value(key, value)?,
            "rho1" => self.rho1 = parse_value(key, value)?,
            "rho2" => self.rho2 = parse_value(key, value)?,
            "rho_growth" => self.rho_growth = parse_value(key, value)?,
            "rho_max" => self.rho_max = parse_value(key, value)?,
            "max_iter" => self.max_iter = parse_value(key, value)?,
            "primal_tol" => self.primal_tol = parse_value(key, value)?,
            "threshold_mode" => self.threshold_mode = parse_value(key, value)?,
            "vertex_iterations" => self.vertex_iterations = parse_value(key, value)?,
            "vertex_step" => self.vertex_step = parse_value(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    /// Noisy mesh (.obj or .off).
    pub input: PathBuf,
    /// Where to write the denoised mesh; the format follows the extension.
    pub output: PathBuf,
    #[command(flatten)]
    pub input_args: InputArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Write per-iteration diagnostics as CSV.
    #[arg(long, value_name = "FILE")]
    pub diagnostics: Option<PathBuf>,
    /// Record wall-clock seconds in the diagnostics; without it the column
    /// is 0 and the file is reproducible byte for byte.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct AddNoiseArgs {
    /// Clean mesh (.obj or .off).
    pub input: PathBuf,
    /// Noisy output mesh. Parameters are echoed to `<OUTPUT>.meta`.
    pub output: PathBuf,
    #[command(flatten)]
    pub input_args: InputArgs,
    /// Standard deviation as a multiple of the mean edge length.
    #[arg(long, default_value_t = NoiseSpec::default().sigma_rel)]
    pub sigma_rel: f64,
    /// Displacement direction: `random-unit` or `vertex-normal`.
    #[arg(long, default_value_t = NoiseSpec::default().direction_mode)]
    pub direction_mode: DirectionMode,
    /// Random seed; the same seed always gives the same noise.
    #[arg(long, default_value_t = NoiseSpec::default().seed)]
    pub seed: u64,
}

impl AddNoiseArgs {
    fn set(&mut self, key: &str, value: &str) -> Result<bool, UsageError> {
        match key {
            "sigma_rel" => self.sigma_rel = parse_value(key, value)?,
            "direction_mode" => self.direction_mode = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    pub denoised: PathBuf,
    pub ground_truth: PathBuf,
    #[command(flatten)]
    pub input_args: InputArgs,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub input_args: InputArgs,
    /// Random field pairs per check.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl CheckArgs {
    fn set(&mut self, key: &str, value: &str) -> Result<bool, UsageError> {
        match key {
            "trials" => self.trials = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }
}

impl InputArgs {
    fn set(&mut self, key: &str, value: &str) -> Result<bool, UsageError> {
        match key {
            "triangulate" => self.triangulate = parse_value(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }
}

/// Bad flags, bad option files, or a config key that does not apply.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// The operator self-test ran but some residual exceeded the tolerance.
#[derive(Debug)]
pub struct CheckFailed(pub f64);

impl fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "operator checks failed: max residual {:e} exceeds {:e}",
            self.0,
            checks::CHECK_TOLERANCE
        )
    }
}

impl std::error::Error for CheckFailed {}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, UsageError>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| UsageError(format!("invalid value {value:?} for {key}: {e}")))
}

/// Applies option-file entries for every key the user did not pass on the
/// command line. Returns an error for keys no option of this subcommand
/// accepts.
fn apply_config(
    matches: &ArgMatches,
    path: &Path,
    mut set: impl FnMut(&str, &str) -> Result<bool, UsageError>,
) -> anyhow::Result<()> {
    let text = fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
    let entries = config::parse_config(&text).map_err(|e| UsageError(e.to_string()))?;
    for (key, value) in entries {
        // `value_source` panics on unknown ids, so probe with `try_get_raw`.
        let explicit = matches.try_get_raw(&key).ok().flatten().is_some()
            && matches.value_source(&key) == Some(ValueSource::CommandLine);
        if explicit {
            continue;
        }
        if !set(&key, &value)? {
            return Err(UsageError(format!("unknown config key {key:?}")).into());
        }
    }
    Ok(())
}

fn read(path: &Path, args: &InputArgs) -> anyhow::Result<TriMesh> {
    let options = ReadOptions {
        triangulate: args.triangulate,
    };
    io::read_mesh(path, options).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, mesh: &TriMesh) -> anyhow::Result<()> {
    io::write_mesh(path, mesh).with_context(|| format!("writing {}", path.display()))
}

fn run_denoise(mut args: DenoiseArgs, matches: &ArgMatches) -> anyhow::Result<()> {
    if let Some(path) = args.input_args.config.clone() {
        apply_config(matches, &path, |k, v| {
            Ok(args.solver.set(k, v)? || args.input_args.set(k, v)?)
        })?;
    }
    let params = args.solver.params();
    params.solver.validate()?;
    params.vertex.validate()?;
    let mesh = read(&args.input, &args.input_args)?;
    let out = denoise::denoise(&mesh, &params)?;
    write(&args.output, &out.mesh)?;
    if let Some(path) = &args.diagnostics {
        let mut buf = Vec::new();
        out.diagnostics.write_csv(&mut buf, args.timing)?;
        fs::write(path, buf).with_context(|| format!("writing {}", path.display()))?;
    }
    let last = out.diagnostics.records.last();
    eprintln!(
        "{} iterations, {}, final relative residual {:e}",
        out.diagnostics.records.len(),
        if out.diagnostics.converged {
            "converged"
        } else {
            "iteration limit reached"
        },
        last.map_or(0.0, |r| r.max_relative_residual())
    );
    Ok(())
}

fn run_add_noise(mut args: AddNoiseArgs, matches: &ArgMatches) -> anyhow::Result<()> {
    if let Some(path) = args.input_args.config.clone() {
        apply_config(matches, &path, |k, v| {
            Ok(args.set(k, v)? || args.input_args.set(k, v)?)
        })?;
    }
    let spec = NoiseSpec {
        sigma_rel: args.sigma_rel,
        direction_mode: args.direction_mode,
        seed: args.seed,
    };
    spec.validate()?;
    let mesh = read(&args.input, &args.input_args)?;
    let noisy = semisparse::add_noise(&mesh, &spec)?;
    write(&args.output, &noisy)?;
    let mut meta_path = args.output.clone().into_os_string();
    meta_path.push(".meta");
    let meta = spec.meta(&mesh, &args.input.display().to_string());
    fs::write(&meta_path, meta)
        .with_context(|| format!("writing {}", Path::new(&meta_path).display()))?;
    Ok(())
}

fn run_metrics(mut args: MetricsArgs, matches: &ArgMatches) -> anyhow::Result<()> {
    if let Some(path) = args.input_args.config.clone() {
        apply_config(matches, &path, |k, v| args.input_args.set(k, v))?;
    }
    let denoised = read(&args.denoised, &args.input_args)?;
    let truth = read(&args.ground_truth, &args.input_args)?;
    let report = compute_metrics(&denoised, &truth)?;
    println!("{report}");
    Ok(())
}

fn run_check(mut args: CheckArgs, matches: &ArgMatches) -> anyhow::Result<()> {
    if let Some(path) = args.input_args.config.clone() {
        apply_config(matches, &path, |k, v| {
            Ok(args.set(k, v)? || args.input_args.set(k, v)?)
        })?;
    }
    let mesh = read(&args.input, &args.input_args)?;
    let report = checks::run_operator_checks(&mesh, args.trials, args.seed)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for (name, value) in report.lines() {
        writeln!(out, "{name}={value:e}")?;
    }
    if !report.passed() {
        return Err(CheckFailed(report.max_residual()).into());
    }
    writeln!(out, "all checks passed")?;
    Ok(())
}

/// Exit code for an error returned by a subcommand.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    if err.downcast_ref::<CheckFailed>().is_some() {
        return EXIT_NUMERICAL;
    }
    match err.downcast_ref::<semisparse::Error>() {
        Some(semisparse::Error::InvalidParameter(_)) => EXIT_USAGE,
        Some(e) if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_DATA,
    }
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code. Messages go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match Cli::command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return EXIT_USAGE;
        }
    };
    let sub = matches
        .subcommand()
        .map(|(_, m)| m)
        .expect("a subcommand is required");
    let result = match cli.command {
        Command::Denoise(a) => run_denoise(a, sub),
        Command::AddNoise(a) => run_add_noise(a, sub),
        Command::Metrics(a) => run_metrics(a, sub),
        Command::CheckOperators(a) => run_check(a, sub),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}
