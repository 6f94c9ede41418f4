//! The `orlicz-polytope` batch runner.
//!
//! Every subcommand reads a flat `key = value` config (or a saved
//! `manifest.json`) overridden by flags, writes its files under `--out`, and
//! records a `manifest.json` that replays the run. Exit codes: 0 success,
//! 1 failed validation, 2 configuration or I/O error, 3 numeric failure.

mod commands;
mod config;
mod output;
mod validate;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use config::{load_config_file, RunConfig, SEED_ENV};

/// Subcommand tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Estimate,
    Scan,
    MeanWidth,
    Directions,
    Validate,
    TabulateM,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Estimate => "estimate",
            Self::Scan => "scan",
            Self::MeanWidth => "meanwidth",
            Self::Directions => "directions",
            Self::Validate => "validate",
            Self::TabulateM => "tabulate-m",
        }
    }
}

/// Why a run stopped; each kind has its own exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad configuration or unwritable output.
    Config(String),
    /// A numerical routine failed.
    Numeric(String),
    /// `validate` ran and at least one check failed.
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 1,
            Self::Config(_) => 2,
            Self::Numeric(_) => 3,
        }
    }

    pub(crate) fn numeric(e: crate::Error) -> Self {
        Self::Numeric(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(m) => write!(f, "config error: {m}"),
            Self::Numeric(m) => write!(f, "numeric error: {m}"),
            Self::Validation(m) => write!(f, "validation failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

#[derive(Parser, Debug)]
#[command(name = "orlicz-polytope", version, about = "Expected support functions and mean widths of random polytopes")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Orlicz estimate and Monte Carlo oracle of E h_{K_N}(θ).
    Estimate(Common),
    /// Estimates over an N grid with a log-log-N exponent fit.
    Scan(Common),
    /// Mean-width scan with a fit of width² against log N.
    Meanwidth(Common),
    /// Per-direction estimates over the sphere with measure fractions.
    Directions(Common),
    /// Cross-representation and sampler checks.
    Validate(Common),
    /// Tabulates M_θ on a log grid.
    #[command(name = "tabulate-m")]
    TabulateM(Common),
}

/// Flags shared by every subcommand; each is also a config-file key.
#[derive(Args, Debug, Default)]
struct Common {
    /// Flat `key = value` file, or a `manifest.json` to replay.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Exponent of the body, a number >= 1 or `inf`.
    #[arg(long)]
    p: Option<String>,
    /// Dimension.
    #[arg(long)]
    n: Option<String>,
    /// Number of points; repeat or comma-separate for a grid.
    #[arg(long = "N", value_name = "N", value_delimiter = ',')]
    n_grid: Vec<String>,
    /// `e<j>`, `random[:count]` or a comma-separated vector.
    #[arg(long, allow_hyphen_values = true)]
    dir: Option<String>,
    /// Monte Carlo polytopes per N (0 disables the oracle).
    #[arg(long)]
    trials: Option<String>,
    /// Directions for mean widths and direction scans.
    #[arg(long)]
    dirs: Option<String>,
    /// Directions per Monte Carlo mean-width trial.
    #[arg(long = "mc-dirs")]
    mc_dirs: Option<String>,
    /// Uniform points behind empirical marginals.
    #[arg(long)]
    samples: Option<String>,
    /// Run seed; falls back to ORLICZ_POLYTOPE_SEED, then 0.
    #[arg(long)]
    seed: Option<String>,
    /// Worker threads; outputs do not depend on it.
    #[arg(long)]
    threads: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Shrink factor of the general upper bound.
    #[arg(long)]
    alpha: Option<String>,
    /// Measure exponent of the direction scan.
    #[arg(long)]
    r: Option<String>,
    /// Relative quadrature tolerance.
    #[arg(long = "rel-tol")]
    rel_tol: Option<String>,
    /// Also write plot.svg.
    #[arg(long)]
    plot: bool,
    /// Exponents checked by `validate`.
    #[arg(long = "grid-p")]
    grid_p: Option<String>,
    /// Dimensions checked by `validate`.
    #[arg(long = "grid-n")]
    grid_n: Option<String>,
    /// Smallest tabulation argument.
    #[arg(long = "t-min")]
    t_min: Option<String>,
    /// Largest tabulation argument.
    #[arg(long = "t-max")]
    t_max: Option<String>,
    /// Tabulation points.
    #[arg(long)]
    points: Option<String>,
    #[arg(long, hide = true)]
    perturb: bool,
}

impl Common {
    fn flags(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let opts = [
            ("p", &self.p),
            ("n", &self.n),
            ("dir", &self.dir),
            ("trials", &self.trials),
            ("dirs", &self.dirs),
            ("mc_dirs", &self.mc_dirs),
            ("samples", &self.samples),
            ("seed", &self.seed),
            ("threads", &self.threads),
            ("out", &self.out),
            ("alpha", &self.alpha),
            ("r", &self.r),
            ("rel_tol", &self.rel_tol),
            ("grid_p", &self.grid_p),
            ("grid_n", &self.grid_n),
            ("t_min", &self.t_min),
            ("t_max", &self.t_max),
            ("points", &self.points),
        ];
        for (k, v) in opts {
            if let Some(v) = v {
                m.insert(k.to_string(), v.clone());
            }
        }
        if !self.n_grid.is_empty() {
            m.insert("N".into(), self.n_grid.join(","));
        }
        if self.plot {
            m.insert("plot".into(), "true".into());
        }
        if self.perturb {
            m.insert("perturb".into(), "true".into());
        }
        m
    }
}

/// One run in progress: its configuration and the manifest steps so far.
pub(crate) struct Run {
    pub cfg: RunConfig,
    steps: Vec<Value>,
    started: Instant,
}

impl Run {
    /// Runs `f` as a named step governed by `seed`, recording its wall time.
    pub(crate) fn step<T>(&mut self, name: &str, seed: u64, f: impl FnOnce() -> crate::Result<T>) -> Result<T, CliError> {
        let t0 = Instant::now();
        let out = f().map_err(CliError::numeric)?;
        self.steps.push(json!({ "name": name, "seed": seed, "wall_seconds": t0.elapsed().as_secs_f64() }));
        Ok(out)
    }

    fn manifest(&self) -> Value {
        json!({
            "version": crate::VERSION,
            "rng_algorithm": crate::rng::RNG_ALGORITHM,
            "command": self.cfg.command.name(),
            "config": self.cfg.echo,
            "steps": self.steps,
            "wall_seconds": self.started.elapsed().as_secs_f64(),
        })
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code. Messages go to stdout and stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (command, common) = match cli.command {
        Sub::Estimate(c) => (Command::Estimate, c),
        Sub::Scan(c) => (Command::Scan, c),
        Sub::Meanwidth(c) => (Command::MeanWidth, c),
        Sub::Directions(c) => (Command::Directions, c),
        Sub::Validate(c) => (Command::Validate, c),
        Sub::TabulateM(c) => (Command::TabulateM, c),
    };
    let file = match &common.config {
        Some(path) => load_config_file(path, command)?,
        None => BTreeMap::new(),
    };
    let cfg = RunConfig::resolve(command, file, common.flags(), std::env::var(SEED_ENV).ok())?;
    let threads = cfg.threads;
    let mut run = Run { cfg, steps: Vec::new(), started: Instant::now() };
    let result = match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Config(format!("threads: {e}")))?;
            pool.install(|| dispatch(&mut run))
        }
        None => dispatch(&mut run),
    };
    match result {
        Ok(()) | Err(CliError::Validation(_)) => {
            output::write_json(&run.cfg.out, "manifest.json", &run.manifest())?;
            result
        }
        Err(e) => Err(e),
    }
}

fn dispatch(run: &mut Run) -> Result<(), CliError> {
    match run.cfg.command {
        Command::Estimate => commands::estimate(run),
        Command::Scan => commands::scan(run),
        Command::MeanWidth => commands::mean_width(run),
        Command::Directions => commands::directions(run),
        Command::Validate => validate::validate(run),
        Command::TabulateM => commands::tabulate_m(run),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_errors_exit_two() {
        assert_eq!(main_with_args(["orlicz-polytope", "estimate", "--bogus"]), 2);
        assert_eq!(main_with_args(["orlicz-polytope"]), 2);
        assert_eq!(main_with_args(["orlicz-polytope", "--version"]), 0);
    }

    #[test]
    fn repeated_and_delimited_grids_merge() {
        let cli = Cli::try_parse_from(["x", "scan", "--N", "10,100", "--N", "1000"]).unwrap();
        let Sub::Scan(c) = cli.command else { panic!() };
        assert_eq!(c.flags()["N"], "10,100,1000");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Validation(String::new()).exit_code(), 1);
        assert_eq!(CliError::Config(String::new()).exit_code(), 2);
        assert_eq!(CliError::Numeric(String::new()).exit_code(), 3);
    }
}
