use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use nrflow_cli::{certify_cmd, rootlocus_cmd, simulate, sweep_cmd};

#[derive(Parser)]
#[command(name = "nrflow", version, about = "Tracking-control simulations and alpha-stability certification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its trace CSV.
    Simulate {
        config: PathBuf,
        /// Trace path; platoon runs derive per-agent files from it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a linear system for alpha-stability.
    Certify {
        config: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Dump closed-loop root paths over a gain list.
    Rootlocus {
        config: PathBuf,
        /// `start:stop:count` (log-spaced), a comma list, or one value.
        #[arg(long, default_value = "1:1e4:50")]
        alphas: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a scenario at each gain and tabulate the tail errors.
    SweepAlpha {
        config: PathBuf,
        #[arg(long, default_value = "1,10,100")]
        alphas: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    let result = match &cli.command {
        Command::Simulate { config, out } => simulate(config, out.as_deref(), &mut w),
        Command::Certify { config, json } => certify_cmd(config, *json, &mut w),
        Command::Rootlocus { config, alphas, out } => rootlocus_cmd(config, alphas, out.as_deref(), &mut w),
        Command::SweepAlpha { config, alphas, out } => sweep_cmd(config, alphas, out.as_deref(), &mut w),
    };
    let _ = w.flush();
    let code = match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
