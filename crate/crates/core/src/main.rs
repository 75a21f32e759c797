use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use inter_mdm::experiment::{
    compare_dir, parse_config, run_experiment, run_full, ConfigOverrides, DETAIL_FILE, SUMMARY_FILE,
};
use inter_mdm::metrics::kappa_band;
use inter_mdm::Error;

#[derive(Parser)]
#[command(name = "inter-mdm", version, about = "Two-agent naming game simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one (variant, method, condition) cell.
    Run {
        #[arg(long)]
        variant: Option<String>,
        #[arg(long)]
        method: Option<String>,
        #[arg(long, allow_negative_numbers = true)]
        condition: Option<i64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Parallel trials (0 = all cores, 1 = sequential).
        #[arg(long)]
        jobs: Option<usize>,
        /// JSON config file; flags override its values.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run all 24 cells of the grid.
    Full {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print measured vs. published scores for a results directory.
    Compare {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } => 2,
        Error::Io { .. } => 3,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run {
            variant,
            method,
            condition,
            trials,
            iterations,
            seed,
            out,
            jobs,
            config,
        } => {
            let flags = ConfigOverrides {
                variant,
                method,
                condition,
                trials,
                iterations,
                seed,
                output: out,
                jobs,
            };
            let cfg = parse_config(config.as_deref(), &flags)?;
            let s = run_experiment(&cfg)?;
            println!(
                "{} {} condition {}: ARI_A {:.3} ({:.3})  ARI_B {:.3} ({:.3})",
                s.key.variant, s.key.method, s.key.condition, s.ari_a.mean, s.ari_a.sd, s.ari_b.mean, s.ari_b.sd
            );
            if let Some(k) = s.kappa {
                println!("kappa {:.3} ({:.3}), {}", k.mean, k.sd, kappa_band(k.mean));
            }
            println!(
                "wrote {} and {}",
                cfg.output.join(DETAIL_FILE).display(),
                cfg.output.join(SUMMARY_FILE).display()
            );
        }
        Command::Full {
            seed,
            out,
            trials,
            iterations,
            jobs,
            config,
        } => {
            let flags = ConfigOverrides {
                seed,
                output: out,
                trials,
                iterations,
                jobs,
                ..ConfigOverrides::default()
            };
            let cfg = parse_config(config.as_deref(), &flags)?;
            let summaries = run_full(&cfg)?;
            println!("ran {} cells into {}", summaries.len(), cfg.output.display());
            print!("{}", compare_dir(&cfg.output)?);
        }
        Command::Compare { input } => {
            print!("{}", compare_dir(&input)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
