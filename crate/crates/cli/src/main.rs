use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use floorlab_cli::{list_catalog, run, ExperimentConfig};

#[derive(Parser)]
#[command(name = "floorlab", version, about = "Run floor-sequence equidistribution and recurrence experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config and write its JSON summary and CSV detail.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to the config's `output` or `.`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List function families, systems and named constants.
    Catalog {
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match cli.command {
        Command::Catalog { json } => {
            print!("{}", list_catalog(json));
            ExitCode::SUCCESS
        }
        Command::Run { config, out, seed } => {
            let result = ExperimentConfig::load(&config).and_then(|mut cfg| {
                if let Some(s) = seed {
                    cfg.seed = s;
                }
                let dir = out
                    .or_else(|| cfg.output.as_ref().map(PathBuf::from))
                    .unwrap_or_else(|| PathBuf::from("."));
                run(&cfg, &dir)
            });
            match result {
                Ok(outcome) => {
                    println!(
                        "{} {} {}",
                        if outcome.pass { "pass" } else { "FAIL" },
                        outcome.summary.display(),
                        outcome.detail.display()
                    );
                    ExitCode::from(outcome.exit_code() as u8)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
