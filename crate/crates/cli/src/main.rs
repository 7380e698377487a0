use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spraylab_cli::{run, Command, Format, Overrides, RunConfig, ScenarioName};

/// Pointwise numerical checks for sprays, Finsler functions and projective
/// deformations.
#[derive(Parser, Debug)]
#[command(name = "spraylab", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Jacobi endomorphism, isotropy fit and scalar flag curvature fit per sample.
    Curvature,
    /// Both sides of the Funk equation for the factor against the spray.
    Funk,
    /// Whether the spray is the geodesic spray of the metric.
    Metrizability,
    /// Transformation laws of the connection and Jacobi endomorphism under the factor.
    DeformCheck,
    /// Replays a named scenario and writes its report.
    Scenario {
        #[arg(value_enum)]
        name: ScenarioName,
    },
}

#[derive(Args, Debug)]
struct Flags {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Metric spec: euclidean, poincare[:k], funk, constant:<rows>, oneform:<a>, expr:<src>.
    #[arg(long, global = true)]
    metric: Option<String>,
    /// Spray spec: geodesic, flat or expr:<G1>;<G2>;...
    #[arg(long, global = true)]
    spray: Option<String>,
    /// Factor spec: zero, funk, expr:<src>, lift:<a> or metric[:<c>].
    #[arg(long, global = true)]
    factor: Option<String>,
    /// Factor spec deforming the spray; repeat to compose.
    #[arg(long, global = true)]
    deform: Vec<String>,
    #[arg(long, global = true)]
    dim: Option<usize>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Largest base point norm sampled.
    #[arg(long, global = true)]
    max_norm: Option<f64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Basic function a(x) of the theorem scenario.
    #[arg(long, global = true)]
    base_function: Option<String>,
    /// Coefficient b(x) of the degenerate 1-form metric in the theorem scenario.
    #[arg(long, global = true)]
    coefficient: Option<String>,
}

impl Flags {
    fn overrides(self) -> Overrides {
        Overrides {
            metric: self.metric,
            spray: self.spray,
            factor: self.factor,
            deform: self.deform,
            dim: self.dim,
            samples: self.samples,
            seed: self.seed,
            max_norm: self.max_norm,
            out: self.out,
            format: self.format,
            lambda: self.lambda,
            base_function: self.base_function,
            coefficient: self.coefficient,
        }
    }
}

const EXIT_VERDICT: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[cfg(feature = "parallel")]
fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("SPRAYLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .map_err(|_| format!("SPRAYLAB_THREADS: expected a thread count, got `{value}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| format!("SPRAYLAB_THREADS: {e}"))
}

#[cfg(not(feature = "parallel"))]
fn configure_threads() -> Result<(), String> {
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(message) = configure_threads() {
        eprintln!("error: {message}");
        return ExitCode::from(EXIT_CONFIG);
    }
    let command = match cli.command {
        Cmd::Curvature => Command::Curvature,
        Cmd::Funk => Command::Funk,
        Cmd::Metrizability => Command::Metrizability,
        Cmd::DeformCheck => Command::DeformCheck,
        Cmd::Scenario { name } => Command::Scenario(name),
    };
    let mut config = match &cli.flags.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
        },
        None => RunConfig::default(),
    };
    config.apply(&cli.flags.overrides());
    match run(command, &config) {
        Ok(outcome) => {
            eprintln!("{}", outcome.summary);
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VERDICT)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
