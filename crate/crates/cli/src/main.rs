use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ell0_cli::commands::{self, OutDir, EXIT_ERROR};

/// Sparse single- and multiobjective optimization experiments
#[derive(Parser, Debug)]
#[command(name = "ell0", version, about)]
struct Cli {
    /// Directory for relative output paths
    #[arg(long, global = true, env = "ELL0_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one algorithm from a JSON config; writes a trace CSV and a summary
    Solve { config: PathBuf },
    /// Run the two algorithm blocks of a config side by side
    Compare { config: PathBuf },
    /// Enumerate every support subspace of a quadratic problem
    Oracle {
        config: PathBuf,
        /// Raise the dimension cap from 12 to 20
        #[arg(long)]
        allow_large: bool,
    },
    /// Render a trace CSV as SVG
    Plot {
        trace: PathBuf,
        /// Output file (default: plot.svg in the output directory)
        svg: Option<PathBuf>,
        /// Only draw the total-value panel (any dimension)
        #[arg(long)]
        value_only: bool,
    },
    /// Run the acceptance checks and print a pass/fail table
    Selftest,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Exit codes 2 and 3 are reserved for solver outcomes.
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    let out = OutDir(cli.out_dir);
    let result = match &cli.command {
        Command::Solve { config } => commands::solve(config, &out),
        Command::Compare { config } => commands::compare(config, &out),
        Command::Oracle { config, allow_large } => commands::oracle(config, &out, *allow_large),
        Command::Plot { trace, svg, value_only } => commands::plot(trace, svg.as_ref(), &out, *value_only),
        Command::Selftest => Ok(commands::selftest()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
