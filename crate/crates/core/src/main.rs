use clap::{Parser, ValueEnum};
use qelab::experiments::{exit_code, run_and_write, ExperimentConfig, Subcommand, SCHEMA};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Transform,
    Geodesics,
    ThinPart,
    SpectralAction,
    MaassSelberg,
    Trace,
    Weyl,
    Variance,
    ErgodicDecay,
    SystoleProb,
    /// Print the config JSON schema.
    Schema,
}

/// Spectral-geometry experiments on hyperbolic surfaces.
#[derive(Debug, Parser)]
#[command(name = "qelab", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON config; defaults apply to anything omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for the JSON report and CSV curves.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Cap on parallel worker threads.
    #[arg(long)]
    workers: Option<usize>,
}

fn subcommand(c: Command) -> Option<Subcommand> {
    Some(match c {
        Command::Transform => Subcommand::Transform,
        Command::Geodesics => Subcommand::Geodesics,
        Command::ThinPart => Subcommand::ThinPart,
        Command::SpectralAction => Subcommand::SpectralAction,
        Command::MaassSelberg => Subcommand::MaassSelberg,
        Command::Trace => Subcommand::Trace,
        Command::Weyl => Subcommand::Weyl,
        Command::Variance => Subcommand::Variance,
        Command::ErgodicDecay => Subcommand::ErgodicDecay,
        Command::SystoleProb => Subcommand::SystoleProb,
        Command::Schema => return None,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(cmd) = subcommand(cli.command) else {
        print!("{SCHEMA}");
        return ExitCode::SUCCESS;
    };
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let text = match &cli.config {
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", p.display());
                return ExitCode::from(2);
            }
        },
        None => "{}".to_string(),
    };
    let mut cfg = match ExperimentConfig::from_json(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    match run_and_write(cmd, &cfg, &cli.out) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
