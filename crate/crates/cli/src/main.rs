use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use ctrecon::NoiseSpec;
use ctrecon_cli::pipeline::{
    cmd_fbp, cmd_mask, cmd_metrics, cmd_phantom, cmd_project, cmd_reconstruct, cmd_sweep,
};
use ctrecon_cli::{CliResult, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "ctrecon",
    version,
    about = "Parallel-beam CT reconstruction experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the modified Shepp-Logan phantom as CTMAT plus a PGM preview.
    Phantom {
        #[arg(long, default_value_t = 256)]
        size: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Project a CTMAT image to a sinogram (angles kπ/K).
    Project {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        angles: usize,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Ram-Lak filtered back projection of a CTMAT sinogram.
    Fbp {
        #[arg(long)]
        sinogram: PathBuf,
        /// Side length of the reconstructed image.
        #[arg(long)]
        size: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Edge mask of an image's difference field at threshold τ.
    Mask {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every method in a config file and write report.csv.
    Reconstruct {
        #[arg(long)]
        config: PathBuf,
    },
    /// Repeat a config over a list of parameter values.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// One of n_angles, tau, lambda_masked, lambda_tv, sigma.
        #[arg(long)]
        parameter: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<String>,
    },
    /// Relative error ‖u − x‖ / ‖x‖ between two CTMAT images.
    Metrics {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        reference: PathBuf,
    },
}

fn run(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Phantom { size, out } => cmd_phantom(size, &out),
        Command::Project {
            image,
            angles,
            sigma,
            seed,
            out,
        } => cmd_project(&image, angles, &NoiseSpec { sigma, seed }, &out),
        Command::Fbp {
            sinogram,
            size,
            out,
        } => cmd_fbp(&sinogram, size, &out),
        Command::Mask { image, tau, out } => {
            let zeros = cmd_mask(&image, tau, &out)?;
            println!("mask_zero_count={zeros}");
            Ok(())
        }
        Command::Reconstruct { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            for row in cmd_reconstruct(&cfg)?.rows {
                println!(
                    "{}: relative_error={} iterations={} time={:.3}s",
                    row.method, row.relative_error, row.iterations, row.wall_time_seconds
                );
            }
            Ok(())
        }
        Command::Sweep {
            config,
            parameter,
            values,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            for r in cmd_sweep(&cfg, &parameter, &values)? {
                println!(
                    "{}={} {}: relative_error={}",
                    r.parameter, r.value, r.row.method, r.row.relative_error
                );
            }
            Ok(())
        }
        Command::Metrics { image, reference } => {
            println!("relative_error={}", cmd_metrics(&image, &reference)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
