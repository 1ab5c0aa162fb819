//! `pseudoflat`: config-driven runs of the incidence laboratory.

mod manifest;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pseudoflat_core::selftest::{selftest, Faults};

#[derive(Debug, Parser)]
#[command(name = "pseudoflat", version, about = "Exact rich-flat counting and bound certification")]
struct Cli {
    /// Worker threads; defaults to the config value, then to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate, count, diagnose and certify as the config describes.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, env = "PSEUDOFLAT_OUT", default_value = "pseudoflat-out")]
        out: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the embedded oracle suite.
    Selftest {
        /// Only checks whose `module/name` contains this string.
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, hide = true)]
        inject_fault: Option<Fault>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Fault {
    Canonical,
}

fn init_threads(n: Option<usize>) {
    if let Some(n) = n {
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, seed } => {
            let opts = pipeline::RunOptions {
                config,
                out,
                seed,
                threads: cli.threads,
                verbose: cli.verbose,
            };
            match pipeline::run(&opts, init_threads) {
                Ok(outcome) => {
                    if cli.verbose || !outcome.all_pass {
                        eprint!("{}", outcome.summary);
                    }
                    if outcome.all_pass {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(2)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Command::Selftest { filter, inject_fault } => {
            init_threads(cli.threads);
            let faults = Faults {
                corrupt_canonical: matches!(inject_fault, Some(Fault::Canonical)),
            };
            let report = selftest(filter.as_deref(), &faults);
            print!("{}", report.summary());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
