//! Command-line front end. [`run`] parses arguments, runs one subcommand and
//! returns the process exit code: 0 on success, 2 for usage or parse errors,
//! 3 for domain errors.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::Error;
use crate::linalg::ComplexMatrix;
use crate::measures::{self, MeasureReport};
use crate::operators::OperatorRegistry;
use crate::order::{self, OrderReport, SweepConfig};
use crate::qutrit::{self, DynamicsCase, SimulationTrace};
use crate::schmidt::{BipartiteState, Subsystem};
use crate::stats::{self, CorrelationReport, ObservableOperator};

pub const FORMAT_VERSION: u32 = 1;

/// Squared-norm tolerance for amplitudes read from a state file.
pub const FILE_NORM_TOL: f64 = 1e-8;

pub const SEED_ENV: &str = "SCHMIDT_LAB_SEED";

pub const TRACE_HEADER: &str =
    "t,lambda1,lambda2,lambda3,concurrence,tangle,robustness,schmidt_number,\
p_uu,p_uo,p_ud,p_ou,p_oo,p_od,p_du,p_do,p_dd";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "schmidt-lab",
    version,
    about = "Schmidt decompositions, entanglement measures and qutrit dynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print every entanglement measure of a state file as JSON.
    Measures { state: PathBuf },
    /// Evolve a two-qutrit state under the Heisenberg coupling and write a CSV trace.
    Simulate(SimulateArgs),
    /// Correlation statistics of two observables in a state.
    Stats(StatsArgs),
    /// Sample random states and check the ordering of the normalized measures.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("initial").required(true).args(["case", "state"])))]
struct SimulateArgs {
    /// Canonical initial state: 0 = uu, 1 = uo, 2 = ud, 3 = oo.
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=3))]
    case: Option<u8>,
    /// 3x3 state file to use as the initial state.
    #[arg(long)]
    state: Option<PathBuf>,
    /// End of the time grid in ps.
    #[arg(long, default_value_t = std::f64::consts::TAU)]
    t_max: f64,
    /// Number of grid points, including both ends.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(2..))]
    steps: u64,
    /// Coupling in rad/ps.
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    /// Write the trace here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    state: PathBuf,
    /// `NAME[@a|@b]` with NAME in sx, sy, sz, id, p<k>, or an inline JSON matrix. Defaults to side a.
    #[arg(long)]
    observable_a: String,
    /// Same grammar as --observable-a. Defaults to side b.
    #[arg(long)]
    observable_b: String,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Random states per shape.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    /// Comma-separated shapes such as 2x2,3x4.
    #[arg(long, default_value = "2x2,3x3", value_parser = parse_shapes)]
    dims: Shapes,
    /// Defaults to $SCHMIDT_LAB_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone)]
struct Shapes(Vec<(usize, usize)>);

fn parse_shapes(s: &str) -> std::result::Result<Shapes, String> {
    let shapes = s
        .split(',')
        .map(|part| {
            let (a, b) = part
                .trim()
                .split_once(['x', 'X'])
                .ok_or_else(|| format!("shape `{part}` is not of the form AxB"))?;
            let a = a
                .parse::<usize>()
                .map_err(|e| format!("shape `{part}`: {e}"))?;
            let b = b
                .parse::<usize>()
                .map_err(|e| format!("shape `{part}`: {e}"))?;
            Ok((a, b))
        })
        .collect::<std::result::Result<Vec<_>, String>>()?;
    Ok(Shapes(shapes))
}

/// Failure of a subcommand, tagged with its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Domain(_) => EXIT_DOMAIN,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Domain(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_domain_error() {
            CliError::Domain(e)
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// On-disk state: row-major `[re, im]` amplitudes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dim_a: usize,
    pub dim_b: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn from_state(state: &BipartiteState) -> Self {
        Self {
            dim_a: state.dim_a(),
            dim_b: state.dim_b(),
            amplitudes: state.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// Checks length and the file norm tolerance, then rescales to unit norm.
    pub fn to_state(&self) -> CliResult<BipartiteState> {
        if self.dim_a == 0 || self.dim_b == 0 {
            return Err(CliError::Usage("dim_a and dim_b must be positive".into()));
        }
        if self.amplitudes.len() != self.dim_a * self.dim_b {
            return Err(CliError::Usage(format!(
                "expected {} amplitudes for {}x{}, found {}",
                self.dim_a * self.dim_b,
                self.dim_a,
                self.dim_b,
                self.amplitudes.len()
            )));
        }
        if self.amplitudes.iter().flatten().any(|x| !x.is_finite()) {
            return Err(CliError::Usage("amplitudes must be finite".into()));
        }
        let amps: Vec<Complex64> = self
            .amplitudes
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        let deficit = (crate::linalg::norm_sqr(&amps) - 1.0).abs();
        if deficit > FILE_NORM_TOL {
            return Err(CliError::Domain(Error::Normalization {
                deficit,
                tolerance: FILE_NORM_TOL,
            }));
        }
        Ok(BipartiteState::new_normalized(
            self.dim_a, self.dim_b, amps,
        )?)
    }
}

/// Pretty JSON with every float written as `{:.16e}` (17 significant digits).
struct FixedFloatFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for FixedFloatFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes `value` as versioned JSON followed by a newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    #[derive(Serialize)]
    struct Versioned<'a, T> {
        format_version: u32,
        #[serde(flatten)]
        body: &'a T,
    }
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut buf,
        FixedFloatFormatter(PrettyFormatter::new()),
    );
    Versioned {
        format_version: FORMAT_VERSION,
        body: value,
    }
    .serialize(&mut ser)
    .expect("serializing to memory cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// CSV trace with one row per grid point.
pub fn trace_csv(trace: &SimulationTrace) -> String {
    let mut out = String::with_capacity(64 + trace.points.len() * 17 * 24);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for p in &trace.points {
        let m = &p.measures;
        let row = [p.t]
            .iter()
            .chain(&p.lambdas)
            .chain(&[
                m.concurrence_norm,
                m.tangle_norm,
                m.robustness_norm,
                m.schmidt_number_norm,
            ])
            .chain(&p.projectors)
            .map(|x| format!("{x:.16e}"))
            .collect::<Vec<_>>()
            .join(",");
        out.push_str(&row);
        out.push('\n');
    }
    out
}

/// Resolves an observable spec against a state's local dimensions.
pub fn parse_observable(
    spec: &str,
    default_side: Subsystem,
    dim_a: usize,
    dim_b: usize,
) -> CliResult<ObservableOperator> {
    let spec = spec.trim();
    let (body, side) = match spec.rsplit_once('@') {
        Some((body, "a" | "A")) => (body, Some(Subsystem::A)),
        Some((body, "b" | "B")) => (body, Some(Subsystem::B)),
        Some((_, other)) => {
            return Err(CliError::Usage(format!(
                "unknown side `{other}`; use @a or @b"
            )))
        }
        None => (spec, None),
    };
    let local_dim = |s: Subsystem| match s {
        Subsystem::A => dim_a,
        Subsystem::B => dim_b,
    };
    let other_dim = |s: Subsystem| match s {
        Subsystem::A => dim_b,
        Subsystem::B => dim_a,
    };
    if body.starts_with('[') {
        let m = parse_inline_matrix(body)?;
        let full = dim_a * dim_b;
        let side = match side {
            Some(s) => s,
            None if m.rows() == full => return Ok(ObservableOperator::new(m)?),
            None => default_side,
        };
        if m.rows() != local_dim(side) {
            return Err(CliError::Usage(format!(
                "inline matrix is {}x{} but side {:?} has dimension {}",
                m.rows(),
                m.cols(),
                side,
                local_dim(side)
            )));
        }
        return Ok(ObservableOperator::new(m)?.lift(side, other_dim(side)));
    }
    let side = side.unwrap_or(default_side);
    let m = OperatorRegistry::builtin().build(body, local_dim(side))?;
    Ok(ObservableOperator::new(m)?.lift(side, other_dim(side)))
}

/// Square matrix given as rows of numbers or `[re, im]` pairs.
fn parse_inline_matrix(text: &str) -> CliResult<ComplexMatrix> {
    let bad = |msg: &str| CliError::Usage(format!("inline matrix: {msg}"));
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| bad(&e.to_string()))?;
    let rows = value
        .as_array()
        .ok_or_else(|| bad("expected an array of rows"))?;
    let n = rows.len();
    let mut data = Vec::with_capacity(n * n);
    for row in rows {
        let row = row
            .as_array()
            .ok_or_else(|| bad("each row must be an array"))?;
        if row.len() != n {
            return Err(bad("matrix must be square"));
        }
        for entry in row {
            let z = match entry {
                serde_json::Value::Number(x) => {
                    Complex64::new(x.as_f64().ok_or_else(|| bad("bad number"))?, 0.0)
                }
                serde_json::Value::Array(pair) if pair.len() == 2 => {
                    let re = pair[0].as_f64().ok_or_else(|| bad("bad real part"))?;
                    let im = pair[1].as_f64().ok_or_else(|| bad("bad imaginary part"))?;
                    Complex64::new(re, im)
                }
                _ => return Err(bad("entries must be numbers or [re, im] pairs")),
            };
            data.push(z);
        }
    }
    ComplexMatrix::new(n, n, data).map_err(|e| bad(&e.to_string()))
}

fn seed_from_env() -> CliResult<u64> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|e| CliError::Usage(format!("{SEED_ENV}={s}: {e}"))),
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(e) => Err(CliError::Usage(format!("{SEED_ENV}: {e}"))),
    }
}

pub fn cmd_measures(path: &Path) -> CliResult<MeasureReport> {
    let state = StateFile::read(path)?.to_state()?;
    Ok(measures::all_measures(&state)?)
}

fn cmd_simulate(args: &SimulateArgs) -> CliResult<SimulationTrace> {
    let psi0 = match (args.case, &args.state) {
        (Some(k), _) => DynamicsCase::try_from(k)?.initial_state(),
        (None, Some(path)) => {
            let state = StateFile::read(path)?.to_state()?;
            if (state.dim_a(), state.dim_b()) != (3, 3) {
                return Err(CliError::Usage(format!(
                    "simulate needs a 3x3 state, got {}x{}",
                    state.dim_a(),
                    state.dim_b()
                )));
            }
            state.amplitudes().to_vec()
        }
        (None, None) => unreachable!("clap enforces the argument group"),
    };
    let grid = qutrit::uniform_grid(args.t_max, args.steps as usize)?;
    Ok(qutrit::simulate(&psi0, &grid, args.omega)?)
}

#[derive(Debug, Serialize)]
pub struct StatsOutput {
    pub observable_a: String,
    pub observable_b: String,
    #[serde(flatten)]
    pub report: CorrelationReport,
}

fn cmd_stats(args: &StatsArgs) -> CliResult<StatsOutput> {
    let state = StateFile::read(&args.state)?.to_state()?;
    let (da, db) = (state.dim_a(), state.dim_b());
    let a = parse_observable(&args.observable_a, Subsystem::A, da, db)?;
    let b = parse_observable(&args.observable_b, Subsystem::B, da, db)?;
    let report = stats::uncertainty_check(&a, &b, state.amplitudes())?;
    Ok(StatsOutput {
        observable_a: args.observable_a.clone(),
        observable_b: args.observable_b.clone(),
        report,
    })
}

#[derive(Debug, Serialize)]
pub struct VerifyOutput {
    pub config: SweepConfig,
    pub passed: bool,
    #[serde(flatten)]
    pub report: OrderReport,
}

fn cmd_verify(args: &VerifyArgs) -> CliResult<VerifyOutput> {
    let seed = match args.seed {
        Some(s) => s,
        None => seed_from_env()?,
    };
    let config = SweepConfig {
        shapes: args.dims.0.clone(),
        samples_per_shape: args.samples as usize,
        seed,
        ..SweepConfig::default()
    };
    let report = order::run_order_sweep(&config)?;
    Ok(VerifyOutput {
        config,
        passed: report.passed(),
        report,
    })
}

/// Runs the CLI with explicit argument list and output streams.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    match execute(&cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: &Command, stdout: &mut dyn Write) -> CliResult<i32> {
    match command {
        Command::Measures { state } => {
            stdout.write_all(to_json(&cmd_measures(state)?).as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Simulate(args) => {
            let csv = trace_csv(&cmd_simulate(args)?);
            match &args.out {
                Some(path) => fs::write(path, csv)
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
                None => stdout.write_all(csv.as_bytes())?,
            }
            Ok(EXIT_OK)
        }
        Command::Stats(args) => {
            stdout.write_all(to_json(&cmd_stats(args)?).as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Verify(args) => {
            let out = cmd_verify(args)?;
            stdout.write_all(to_json(&out).as_bytes())?;
            Ok(if out.passed { EXIT_OK } else { 1 })
        }
    }
}
