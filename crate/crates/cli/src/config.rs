use std::io::Write;
use std::path::PathBuf;

use bdk_core::invariants::Truncation;
use bdk_core::RadiusGuard;
use clap::{Args, ValueEnum};

use crate::error::CliError;

pub const DEFAULT_LEVEL: usize = 40;
pub const DEFAULT_RMAX: f64 = 0.9;
pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// Truncation level N.
    #[arg(long, env = "BDK_LEVEL", default_value_t = DEFAULT_LEVEL)]
    pub level: usize,
    /// Refinement step Δ used for certification (default N/2; 0 disables it).
    #[arg(long)]
    pub delta: Option<usize>,
    /// Evaluation radius r_max.
    #[arg(long, default_value_t = DEFAULT_RMAX)]
    pub rmax: f64,
    /// Pass/fail tolerance.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Seed for randomized grids.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads (0 uses all cores).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Output path, or - for stdout.
    #[arg(short = 'o', long, default_value = "-")]
    pub output: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Output {
    Stdout,
    File(PathBuf),
}

impl Output {
    pub fn write(&self, bytes: &[u8]) -> Result<(), CliError> {
        match self {
            Output::Stdout => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes)?;
                out.flush()?;
            }
            Output::File(path) => std::fs::write(path, bytes)?,
        }
        Ok(())
    }
}

/// Validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub level: usize,
    pub delta: Option<usize>,
    pub guard: RadiusGuard,
    pub tolerance: f64,
    pub seed: u64,
    pub jobs: usize,
    pub output: Output,
    pub format: Format,
}

impl RunConfig {
    pub fn truncation(&self) -> Truncation {
        Truncation {
            delta: self.delta,
            guard: self.guard,
        }
    }

    pub fn pool(&self) -> Result<rayon::ThreadPool, CliError> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

impl TryFrom<&ConfigArgs> for RunConfig {
    type Error = CliError;

    fn try_from(args: &ConfigArgs) -> Result<Self, CliError> {
        if args.level < 4 {
            return Err(CliError::Config(format!(
                "level must be at least 4, got {}",
                args.level
            )));
        }
        if !(args.rmax > 0.0 && args.rmax < 1.0) {
            return Err(CliError::Config(format!(
                "rmax must lie in (0, 1), got {}",
                args.rmax
            )));
        }
        if !(args.tol > 0.0 && args.tol.is_finite()) {
            return Err(CliError::Config(format!(
                "tol must be positive, got {}",
                args.tol
            )));
        }
        let guard = RadiusGuard::new(args.rmax).map_err(|e| CliError::Config(e.to_string()))?;
        let output = match args.output.as_str() {
            "-" => Output::Stdout,
            path => Output::File(PathBuf::from(path)),
        };
        Ok(Self {
            level: args.level,
            delta: args.delta,
            guard,
            tolerance: args.tol,
            seed: args.seed,
            jobs: args.jobs,
            output,
            format: args.format,
        })
    }
}
