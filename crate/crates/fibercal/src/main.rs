use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fibercal::{commands, Result};

/// Calibration and inference for a seven-channel optical-fiber tactile sensor.
#[derive(Debug, Parser)]
#[command(name = "fibercal", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic calibration grid and midpoint test set.
    Simulate {
        /// TOML grid and sensor config; defaults to the reference noisy setup.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Calibration dataset to write.
        #[arg(long)]
        out: PathBuf,
        /// Test dataset to write.
        #[arg(long)]
        test_out: PathBuf,
    },
    /// Fit R, K and C from a phased dataset and write a model file.
    Calibrate {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Append force and geometry predictions to every dataset row.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print mean absolute errors against the dataset's ground truth.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        /// Per-sample residual CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for true-versus-predicted CSVs, one per quantity.
        #[arg(long)]
        plot_dir: Option<PathBuf>,
    },
    /// Answer frame lines on stdin, or on a TCP port when given.
    Serve {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        port: Option<u16>,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Exit after this many TCP clients.
        #[arg(long)]
        max_clients: Option<usize>,
    },
}

fn run(command: Command) -> Result<()> {
    let mut out = io::stdout().lock();
    match command {
        Command::Simulate {
            config,
            seed,
            out: calibration,
            test_out,
        } => commands::simulate(config.as_deref(), seed, &calibration, &test_out, &mut out),
        Command::Calibrate {
            dataset,
            out: model,
        } => commands::calibrate(&dataset, &model, &mut out).map(drop),
        Command::Predict {
            model,
            dataset,
            out: path,
        } => {
            drop(out);
            commands::predict(&model, &dataset, path.as_deref())
        }
        Command::Evaluate {
            model,
            dataset,
            out: residuals,
            plot_dir,
        } => commands::evaluate(
            &model,
            &dataset,
            residuals.as_deref(),
            plot_dir.as_deref(),
            &mut out,
        )
        .map(drop),
        Command::Serve {
            model, port: None, ..
        } => commands::serve_stream(&model, io::stdin().lock(), out).map(drop),
        Command::Serve {
            model,
            port: Some(port),
            host,
            max_clients,
        } => {
            // Keep stdout free for the stream; status goes to stderr.
            drop(out);
            commands::serve_tcp(&model, &host, port, max_clients, &mut io::stderr())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        // A closed downstream pipe (`fibercal predict ... | head`) is not a failure.
        Err(fibercal::Error::Io { source, .. }) if source.kind() == io::ErrorKind::BrokenPipe => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            let _ = io::stdout().flush();
            eprintln!("fibercal: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
