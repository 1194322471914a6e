use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use simtrans_core::cli;

/// Certified simultaneous approximation by translates of an entire function.
#[derive(Parser)]
#[command(name = "simtrans", version)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the configured window schedule and write the series archive.
    Build {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-verify every certificate of an archive on a sample grid.
    Verify {
        archive: PathBuf,
        /// Grid points per axis; defaults to the archived configuration.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Extract one witness sequence serving all directions for target g.
    Extract {
        archive: PathBuf,
        /// Coefficients of g, constant term first, e.g. "0,1" or "1,0.5+2i".
        #[arg(long, allow_hyphen_values = true)]
        g: String,
        #[arg(long)]
        horizon: usize,
    },
    /// Evaluate the series at z.
    Eval {
        archive: PathBuf,
        /// The point as re,im.
        #[arg(long, allow_hyphen_values = true)]
        z: String,
    },
    /// Write f sampled on an n x n mesh of a disc's bounding square as CSV.
    ExportGrid {
        archive: PathBuf,
        /// The disc as cx,cy,r.
        #[arg(long, allow_hyphen_values = true)]
        disc: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let args = Args::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = match &args.command {
        Command::Build { config, out: path } => cli::cmd_build(config, path, &mut out),
        Command::Verify { archive, grid } => cli::cmd_verify(archive, *grid, &mut out),
        Command::Extract { archive, g, horizon } => cli::cmd_extract(archive, g, *horizon, &mut out),
        Command::Eval { archive, z } => cli::cmd_eval(archive, z, &mut out),
        Command::ExportGrid {
            archive,
            disc,
            n,
            out: path,
        } => cli::cmd_export_grid(archive, disc, *n, path, &mut out),
    };
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
