use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use mimo_ee::cli::{execute, Command, Invocation};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    /// Monte Carlo vs deterministic spectral efficiency over n_t
    SeCurve,
    /// Energy-efficient training length and antenna counts over SNR
    Optimize,
    /// Iterative optimizer vs exhaustive lattice search over SNR
    CompareOracle,
    /// Run the self-check suite; exit 1 if any check fails
    Validate,
}

#[derive(Debug, Parser)]
#[command(
    name = "mimo-ee-opt",
    version,
    about = "Energy efficiency of large MIMO links with transmit RF impairments"
)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// INI config file; Table I defaults are used for anything missing
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config entry, e.g. --set system.delta=0,0.15
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
    /// Output CSV path (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials per point
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    let inv = Invocation {
        command: match args.command {
            Cmd::SeCurve => Command::SeCurve,
            Cmd::Optimize => Command::Optimize,
            Cmd::CompareOracle => Command::CompareOracle,
            Cmd::Validate => Command::Validate,
        },
        config: args.config,
        overrides: args.set,
        out: args.out,
        seed: args.seed,
        trials: args.trials,
    };
    match execute(&inv) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
