use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use blaschke_frames::commands::{self, Artifact, ExportFormat, VectorSpec};
use blaschke_frames::verify::Suite;
use blaschke_frames::{CliError, ExitStatus, Format, Overrides, RunConfig, THREADS_ENV};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "blaschke",
    version,
    about = "Blaschke frame analysis on truncated isometries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Truncation size N, overriding the config.
    #[arg(long)]
    dim: Option<usize>,
    /// Seed for random roots and randomized checks.
    #[arg(long)]
    seed: Option<u64>,
    /// Taylor order K, overriding the default rule.
    #[arg(long)]
    series_order: Option<usize>,
}

impl Common {
    fn load(&self, out: Option<PathBuf>, format: Option<Format>) -> Result<RunConfig, CliError> {
        let mut c = RunConfig::load(&self.config)?;
        c.apply(&Overrides {
            dim: self.dim,
            seed: self.seed,
            series_order: self.series_order,
            out,
            format,
        });
        Ok(c)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build the frame and write the redundancy report.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Run verification suites.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
    },
    /// Reconstruct a vector, optionally after deleting frame vectors.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        /// `e<m>` or `random[:<seed>]`.
        #[arg(long)]
        vector: VectorSpec,
        /// Comma-separated labels to delete before reconstructing.
        #[arg(long, value_delimiter = ',')]
        drop: Vec<usize>,
    },
    /// Write an intermediate object in one of the file formats.
    Export {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        what: Artifact,
        #[arg(long, value_enum, default_value = "json")]
        format: ExportFormat,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value.parse().map_err(|_| {
        CliError::Config(blaschke_frames::ConfigError::new(
            THREADS_ENV,
            format_args!("`{value}` is not a thread count"),
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Invariant(e.to_string()))
}

fn run(cli: Cli) -> Result<ExitStatus, CliError> {
    configure_threads()?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut err = io::stderr();
    match cli.command {
        Command::Analyze {
            common,
            out: path,
            format,
        } => {
            let c = common.load(path, format)?;
            commands::analyze(&c, &mut out, &mut err)
        }
        Command::Verify { common, suite } => {
            commands::verify(&common.load(None, None)?, suite, &mut out)
        }
        Command::Reconstruct {
            common,
            vector,
            drop,
        } => {
            commands::reconstruct_cmd(&common.load(None, None)?, vector, &drop, &mut out, &mut err)
        }
        Command::Export {
            common,
            what,
            format,
            out: path,
        } => commands::export(
            &common.load(None, None)?,
            what,
            format,
            path.as_deref(),
            &mut out,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = match run(cli) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(io::stderr(), "error: {e}");
            e.status()
        }
    };
    ExitCode::from(status.code() as u8)
}
