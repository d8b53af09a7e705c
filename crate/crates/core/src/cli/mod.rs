//! `fpp-lab` command line: argument parsing, experiment dispatch and output.

mod experiments;
mod report;

pub use experiments::run_report;
pub use report::{emit, format_float, Report, Value};

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::engines::{ClockDistribution, EngineKind, SimConfig, StripSpec, DEFAULT_STRIP_CONSTANT};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, ValueEnum)]
pub enum Command {
    Hit,
    Grow,
    VarianceScan,
    Shape,
    Lemma2,
    Strip,
    EnginesCompare,
    CltCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Hit => "hit",
            Command::Grow => "grow",
            Command::VarianceScan => "variance-scan",
            Command::Shape => "shape",
            Command::Lemma2 => "lemma2",
            Command::Strip => "strip",
            Command::EnginesCompare => "engines-compare",
            Command::CltCheck => "clt-check",
        }
    }

    /// Commands whose outcome is a pass/fail check (exit 2 on failure).
    pub fn is_check(self) -> bool {
        matches!(
            self,
            Command::EnginesCompare | Command::Lemma2 | Command::CltCheck
        )
    }

    fn needs_n(self) -> bool {
        matches!(
            self,
            Command::Hit | Command::Grow | Command::Strip | Command::EnginesCompare
        )
    }

    fn default_n(self) -> Option<u64> {
        match self {
            Command::Shape => Some(100_000),
            Command::CltCheck => Some(10_000),
            Command::Lemma2 => Some(1_000_000),
            _ => None,
        }
    }

    fn default_scales(self) -> Vec<u64> {
        match self {
            Command::Shape => vec![50, 100, 200],
            _ => vec![16, 32, 64, 128, 256, 512],
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Everything needed to run and reproduce one experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub command: Command,
    pub config: SimConfig,
    /// `None` writes to stdout.
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub scales: Vec<u64>,
    pub window: f64,
    pub fuzz: u64,
    /// Thread count for the replicate farm; never affects output.
    pub workers: usize,
}

/// A parse failure or an informational exit (help, version).
#[derive(Clone, Debug, PartialEq)]
pub struct UsageError {
    pub message: String,
    pub code: i32,
}

impl UsageError {
    fn usage(message: impl Into<String>) -> Self {
        UsageError {
            message: message.into(),
            code: EXIT_ERROR,
        }
    }
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "fpp-lab",
    version,
    about = "Monte Carlo laboratory for exponential first-passage percolation on Z^2"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Sub {
    /// Passage time and hit index to the target, one row per replicate
    Hit,
    /// Grow for exactly --n steps, one row per replicate
    Grow,
    /// Variance and window mass of T across --scales
    VarianceScan,
    /// Time constant, growth constant and their consistency
    Shape,
    /// Deterministic sequence-inequality checks and fuzzing
    Lemma2,
    /// Strip-restricted runs against unrestricted ones
    Strip,
    /// Pairwise KS comparison of the three engines
    EnginesCompare,
    /// Normality of the resampled sum on a fixed boundary sequence
    CltCheck,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Hit => Command::Hit,
            Sub::Grow => Command::Grow,
            Sub::VarianceScan => Command::VarianceScan,
            Sub::Shape => Command::Shape,
            Sub::Lemma2 => Command::Lemma2,
            Sub::Strip => Command::Strip,
            Sub::EnginesCompare => Command::EnginesCompare,
            Sub::CltCheck => Command::CltCheck,
        }
    }
}

#[derive(Args, Debug)]
struct Flags {
    /// Master seed
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Replicates (resamples for clt-check)
    #[arg(long, global = true, default_value_t = 1000)]
    replicates: u64,
    /// Target index, step count or sequence length, depending on the command
    #[arg(long, global = true)]
    n: Option<u64>,
    /// Direction dx,dy (normalized)
    #[arg(long, global = true, default_value = "1,0", allow_hyphen_values = true)]
    direction: String,
    #[arg(long, global = true, default_value = "eden", value_parser = parse_from_str::<EngineKind>)]
    engine: EngineKind,
    /// Richardson clock law
    #[arg(long, global = true, default_value = "exponential", value_parser = parse_from_str::<ClockDistribution>)]
    clock: ClockDistribution,
    /// Strip exponent in (0,1)
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Strip width multiplier
    #[arg(long, global = true, default_value_t = DEFAULT_STRIP_CONSTANT)]
    strip_constant: f64,
    /// Comma-separated scales [default: 16,...,512; shape: 50,100,200]
    #[arg(long, global = true)]
    scales: Option<String>,
    /// Tightness window
    #[arg(long, global = true, default_value_t = 0.5)]
    window: f64,
    /// Output path, `-` for stdout
    #[arg(long, global = true, default_value = "-")]
    out: String,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Keep full traces (hit, grow)
    #[arg(long, global = true)]
    retain_trace: bool,
    /// Worker threads [default: available parallelism]
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Random sequences for lemma2
    #[arg(long, global = true, default_value_t = 10_000)]
    fuzz: u64,
    /// Step cap per run [default: 8 n^2 + 10^4]
    #[arg(long, global = true)]
    max_steps: Option<u64>,
}

fn parse_from_str<T: FromStr<Err = String>>(s: &str) -> Result<T, String> {
    s.parse()
}

fn parse_direction(s: &str) -> Result<(f64, f64), UsageError> {
    let bad = || UsageError::usage(format!("invalid --direction `{s}` (expected dx,dy)"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let dx: f64 = a.trim().parse().map_err(|_| bad())?;
    let dy: f64 = b.trim().parse().map_err(|_| bad())?;
    let norm = dx.hypot(dy);
    if !(norm.is_finite() && norm > 0.0) {
        return Err(bad());
    }
    let (ux, uy) = (dx / norm, dy / norm);
    // exact axes stay exact
    let snap = |c: f64| {
        if (c.abs() - 1.0).abs() < 1e-15 {
            c.signum()
        } else if c.abs() < 1e-15 {
            0.0
        } else {
            c
        }
    };
    Ok((snap(ux), snap(uy)))
}

fn parse_scales(s: &str) -> Result<Vec<u64>, UsageError> {
    let scales: Result<Vec<u64>, _> = s.split(',').map(|t| t.trim().parse::<u64>()).collect();
    match scales {
        Ok(v) if !v.is_empty() && v.iter().all(|&n| n > 0) => Ok(v),
        _ => Err(UsageError::usage(format!(
            "invalid --scales `{s}` (expected positive integers a,b,c)"
        ))),
    }
}

/// Parse a full argv (program name first).
pub fn parse_args<I, T>(argv: I) -> Result<ExperimentSpec, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        UsageError {
            message: e.render().to_string(),
            code,
        }
    })?;
    let command = Command::from(cli.command);
    let f = cli.flags;
    let n = match (f.n, command.default_n()) {
        (Some(n), _) => n,
        (None, Some(d)) => d,
        (None, None) if command.needs_n() => {
            return Err(UsageError::usage(format!(
                "missing required flag --n for `{command}`"
            )));
        }
        (None, None) => 1,
    };
    if n == 0 {
        return Err(UsageError::usage("--n must be positive"));
    }
    if f.replicates == 0 || f.replicates > u32::MAX as u64 {
        return Err(UsageError::usage("--replicates must be in 1..=4294967295"));
    }
    if command == Command::Strip && f.alpha.is_none() {
        return Err(UsageError::usage(
            "missing required flag --alpha for `strip`",
        ));
    }
    if let Some(a) = f.alpha {
        if !(a > 0.0 && a < 1.0) {
            return Err(UsageError::usage(format!("--alpha {a} must lie in (0,1)")));
        }
    }
    if !(f.strip_constant > 0.0 && f.strip_constant.is_finite()) {
        return Err(UsageError::usage("--strip-constant must be positive"));
    }
    if f.window.is_nan() || f.window < 0.0 {
        return Err(UsageError::usage("--window must be nonnegative"));
    }
    if f.max_steps == Some(0) {
        return Err(UsageError::usage("--max-steps must be positive"));
    }
    let workers = match f.workers {
        Some(0) => return Err(UsageError::usage("--workers must be positive")),
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |p| p.get()),
    };
    let scales = match &f.scales {
        Some(s) => parse_scales(s)?,
        None => command.default_scales(),
    };
    let config = SimConfig {
        direction: parse_direction(&f.direction)?,
        n,
        engine: f.engine,
        clock: f.clock,
        strip: f.alpha.map(|alpha| StripSpec {
            alpha,
            constant: f.strip_constant,
        }),
        max_steps: f.max_steps,
        master_seed: f.seed,
        replicates: f.replicates,
        retain_trace: f.retain_trace,
    };
    Ok(ExperimentSpec {
        command,
        config,
        output_path: (f.out != "-").then(|| PathBuf::from(&f.out)),
        format: f.format,
        scales,
        window: f.window,
        fuzz: f.fuzz,
        workers,
    })
}

/// Run a parsed spec and write its output; returns the exit code.
pub fn run_experiment(spec: &ExperimentSpec) -> i32 {
    let report = match run_report(spec) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("fpp-lab: error: {e}");
            return EXIT_ERROR;
        }
    };
    if let Err(e) = emit(&report, spec.format, spec.output_path.as_deref()) {
        eprintln!("fpp-lab: error: cannot write output: {e}");
        return EXIT_ERROR;
    }
    match report.check_passed {
        Some(false) if spec.command.is_check() => {
            eprintln!("fpp-lab: {} check failed", spec.command);
            EXIT_CHECK_FAILED
        }
        _ => EXIT_OK,
    }
}

pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match parse_args(argv) {
        Ok(spec) => run_experiment(&spec),
        Err(e) if e.code == EXIT_OK => {
            print!("{}", e.message);
            EXIT_OK
        }
        Err(e) => {
            eprint!("{}", e.message);
            if !e.message.ends_with('\n') {
                eprintln!();
            }
            EXIT_ERROR
        }
    }
}
