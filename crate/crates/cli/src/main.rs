use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qsflow_cli::commands::{cmd_flow, cmd_masses, Overrides};
use qsflow_cli::output::resolve_out_dir;
use qsflow_cli::verify::{cmd_verify, render_table, Selection, VerifyOptions};
use qsflow_cli::{CliError, Result};

#[derive(Debug, Parser)]
#[command(
    name = "qsflow",
    version,
    about = "Quasi-spherical flow and quasi-local mass laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the radial flow; writes trace.csv, summary.json and timing.json.
    Flow {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: $QSFLOW_OUT, then ./qsflow-out).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the band limit of the sphere grid.
        #[arg(long = "grid-L")]
        grid_l: Option<usize>,
        /// Seed for `random` boundary data.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate the quasi-local masses of a surface; writes masses.json.
    Masses {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run invariant suites: spectral, flow, masses, penrose or all.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "grid-L")]
        grid_l: Option<usize>,
    },
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Flow {
            config,
            out,
            grid_l,
            seed,
        } => {
            let out = resolve_out_dir(out);
            let overrides = Overrides {
                band_limit: grid_l,
                seed,
            };
            let summary = cmd_flow(&config, &out, overrides)?;
            let show = |x: Option<f64>| x.map_or("null".to_owned(), |v| format!("{v:.10}"));
            println!(
                "steps {}  m0_estimate {}  Q(r_max) {:.6e}  limit_consistency {}",
                summary.steps,
                show(summary.m0_estimate),
                summary.q_rmax,
                show(summary.limit_consistency)
            );
            println!("wrote {}", out.display());
        }
        Command::Masses { config, out } => {
            let (_, path) = cmd_masses(&config, &resolve_out_dir(out))?;
            println!("wrote {}", path.display());
        }
        Command::Verify {
            suite,
            out,
            seed,
            grid_l,
        } => {
            let selection: Selection = suite.parse()?;
            let options = VerifyOptions {
                seed,
                band_limit: grid_l,
            };
            let reports = cmd_verify(&selection, &resolve_out_dir(out), options)?;
            print!("{}", render_table(&reports));
            let failed: usize = reports.iter().map(|r| r.failures()).sum();
            if failed > 0 {
                return Err(CliError::VerifyFailed(failed));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qsflow: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
