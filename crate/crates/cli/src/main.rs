use std::process::ExitCode;

use bdk_cli::commands::{
    evaluate_grid, parse_second, render_reports, render_values, run_suite, GridSpec, Oracle, Suite,
    SweepQuantity, Target,
};
use bdk_cli::config::{ConfigArgs, RunConfig};
use bdk_cli::grammar::{parse_blaschke, parse_generators, parse_orders, parse_point};
use bdk_cli::CliError;
use bdk_core::BiPoint;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "bdk",
    version,
    about = "Invariants and identities for submodules of the Hardy space over the bidisk"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct TargetArgs {
    /// Comma-separated generator polynomials in z and w, e.g. "z-w, z^2".
    #[arg(short = 'g', long)]
    generators: String,
    /// Inner function substituted for z (e.g. "zeros=0.5;gamma=1" or "z^2").
    #[arg(long)]
    theta: Option<String>,
    /// Inner function substituted for w.
    #[arg(long)]
    phi: Option<String>,
    /// Replace the generic engine by closed forms.
    #[arg(long, value_enum)]
    oracle: Option<Oracle>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Σ_k values at one or more points.
    Invariants {
        #[command(flatten)]
        target: TargetArgs,
        /// Point "a,b"; repeatable.
        #[arg(short = 'p', long = "point", required = true)]
        points: Vec<String>,
        /// Orders k, e.g. "0,1".
        #[arg(short = 'k', long, default_value = "0,1")]
        orders: String,
        #[arg(long, value_enum, default_value_t = SweepQuantity::Sigma)]
        quantity: SweepQuantity,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Run a verification suite and write JSON reports.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        /// Replace the default source submodules by this generator list.
        #[arg(short = 'g', long)]
        generators: Option<String>,
        /// Replace the default symbol pairs by (theta, phi).
        #[arg(long, requires = "phi")]
        theta: Option<String>,
        #[arg(long, requires = "theta")]
        phi: Option<String>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Evaluate an invariant over a grid and write CSV rows in grid order.
    Sweep {
        #[command(flatten)]
        target: TargetArgs,
        /// Grid "polar:RxA" (a polar, b fixed) or "moduli:RxS" (real pairs).
        #[arg(long, conflicts_with = "points")]
        grid: Option<String>,
        /// Fixed second coordinate for polar grids.
        #[arg(long, requires = "grid")]
        second: Option<String>,
        /// Explicit points "a,b"; repeatable.
        #[arg(short = 'p', long = "point")]
        points: Vec<String>,
        #[arg(short = 'k', long, default_value = "1")]
        orders: String,
        #[arg(long, value_enum, default_value_t = SweepQuantity::Sigma)]
        quantity: SweepQuantity,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

fn target(args: &TargetArgs) -> Result<Target, CliError> {
    Ok(Target {
        generators: parse_generators(&args.generators)?,
        theta: args.theta.as_deref().map(parse_blaschke).transpose()?,
        phi: args.phi.as_deref().map(parse_blaschke).transpose()?,
        oracle: args.oracle,
    })
}

fn points(raw: &[String]) -> Result<Vec<BiPoint>, CliError> {
    raw.iter().map(|p| parse_point(p)).collect()
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Invariants {
            target: t,
            points: raw,
            orders,
            quantity,
            config,
        } => {
            let config = RunConfig::try_from(&config)?;
            let target = target(&t)?;
            let pts = points(&raw)?;
            let orders = parse_orders(&orders)?;
            let values = evaluate_grid(&target, &pts, &orders, quantity, &config)?;
            config.output.write(&render_values(&values, config.format)?)
        }
        Command::Sweep {
            target: t,
            grid,
            second,
            points: raw,
            orders,
            quantity,
            config,
        } => {
            let config = RunConfig::try_from(&config)?;
            let target = target(&t)?;
            let pts = match grid {
                Some(spec) => GridSpec::parse(&spec, parse_second(second.as_deref())?)?
                    .points(config.guard.radius()),
                None => points(&raw)?,
            };
            let orders = parse_orders(&orders)?;
            let values = evaluate_grid(&target, &pts, &orders, quantity, &config)?;
            config.output.write(&render_values(&values, config.format)?)
        }
        Command::Verify {
            suite,
            generators,
            theta,
            phi,
            config,
        } => {
            let config = RunConfig::try_from(&config)?;
            let sources = generators.as_deref().map(parse_generators).transpose()?;
            let maps = match (theta, phi) {
                (Some(t), Some(p)) => Some((parse_blaschke(&t)?, parse_blaschke(&p)?)),
                _ => None,
            };
            let reports = run_suite(suite, &config, sources.as_deref(), maps)?;
            for r in &reports {
                eprintln!(
                    "{:<22} {} max residual {:.3e} (tolerance {:.1e})",
                    r.identity,
                    if r.pass { "PASS" } else { "FAIL" },
                    r.max_residual,
                    r.tolerance
                );
            }
            config
                .output
                .write(&render_reports(suite, &reports, &config)?)?;
            match reports.iter().filter(|r| !r.pass).count() {
                0 => Ok(()),
                n => Err(CliError::Failed(n)),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bdk: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
