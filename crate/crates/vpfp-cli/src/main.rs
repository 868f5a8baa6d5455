use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vpfp_cli::commands::{cmd_plot, cmd_run, cmd_sweep, cmd_verify, Overrides, EXIT_FAILURE};

#[derive(Parser)]
#[command(name = "vpfp", version, about = "VPFP kinetic simulator and hypocoercivity diagnostics")]
struct Cli {
    /// Worker threads for sweep members and z-nodes (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run file.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Provenance seed; also reseeds random_smooth initial data.
    #[arg(long)]
    seed: Option<u64>,
    /// Steps between ledger samples.
    #[arg(long)]
    stride: Option<usize>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides { seed: self.seed, stride: self.stride }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one config (or every member of its sweep) and write artifacts.
    Run(RunArgs),
    /// Run the sweep members and compare rates and limit gaps across ε.
    Sweep(RunArgs),
    /// Run the no-dynamics property suite.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the report as verify.toml here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Draw ledger columns of a run as an SVG line chart.
    Plot {
        /// Run directory holding ledger.csv; the chart is written next to it.
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Ledger CSV to read instead of <out-dir>/ledger.csv.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Comma-separated column names.
        #[arg(long, value_delimiter = ',')]
        columns: Vec<String>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: worker pool: {e}");
            return ExitCode::from(EXIT_FAILURE as u8);
        }
    }
    let code = match &cli.command {
        Command::Run(a) => cmd_run(&a.config, &a.out_dir, &a.overrides()),
        Command::Sweep(a) => cmd_sweep(&a.config, &a.out_dir, &a.overrides()),
        Command::Verify { seed, out_dir } => cmd_verify(*seed, out_dir.as_deref()),
        Command::Plot { out_dir, input, columns } => {
            let input = input.clone().unwrap_or_else(|| out_dir.join("ledger.csv"));
            cmd_plot(&input, &out_dir.join("ledger.svg"), columns)
        }
    };
    ExitCode::from(code as u8)
}
