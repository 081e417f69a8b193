use adamant_cli::commands::{coherence, power, simulate, test};
use adamant_cli::init_thread_pool;
use anyhow::Result;
use clap::{Parser, Subcommand};

/// Adaptive Mantel association testing between two high-dimensional feature
/// sets, with ridge-kernel grids, permutation inference, synthetic data
/// generators, and EEG coherence feature extraction.
#[derive(Parser)]
#[command(name = "adamant", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the adaptive Mantel test on two feature matrices.
    Test(test::TestArgs),
    /// Generate synthetic data sets.
    Simulate(simulate::SimulateArgs),
    /// Extract band-averaged coherence features from epoch files.
    Coherence(coherence::CoherenceArgs),
    /// Estimate rejection rates over generator replicates.
    Power(power::PowerArgs),
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    init_thread_pool()?;
    let cli = Cli::parse();
    match cli.command {
        Command::Test(args) => {
            let report = test::run(&args)?;
            eprintln!(
                "adaptive p = {} (selected pair {}:{}) -> {}",
                report.adaptive_p,
                report.selected.lambda_x,
                report.selected.lambda_y,
                args.out.display()
            );
        }
        Command::Simulate(args) => simulate::run(&args)?,
        Command::Coherence(args) => {
            let written = coherence::run(&args)?;
            for path in written {
                eprintln!("wrote {}", path.display());
            }
        }
        Command::Power(args) => {
            power::run(&args)?;
            eprintln!("wrote {}", args.out.display());
        }
    }
    Ok(())
}
