use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use motility::config::{parse_config, parse_sweep_config, RunConfig};
use motility::runner::{cmd_run, cmd_stability, cmd_sweep, fig1_config, CliError, CliOptions, DEFAULT_SEED};

#[derive(Parser)]
#[command(name = "motility", version, about = "Simulate and analyse the density-suppressed motility system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for random initial data, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Parallel sweep workers (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write its artifacts.
    Run { config: PathBuf },
    /// Linear stability report for the configuration's constant state.
    Stability { config: PathBuf },
    /// Run every cell of a parameter sweep.
    Sweep { config: PathBuf },
    /// Built-in configurations.
    Preset {
        #[command(subcommand)]
        preset: Preset,
    },
}

#[derive(Subcommand)]
enum Preset {
    /// Pattern formation on (0, 20) from a perturbed (4, 4, 0).
    Fig1 {
        /// Signal diffusivity D.
        #[arg(long = "d")]
        dcoef: f64,
        /// Print the configuration instead of running it.
        #[arg(long)]
        emit_config: bool,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn apply_overrides(cfg: &mut RunConfig, cli: &Cli) {
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
}

fn main_inner(cli: &Cli) -> Result<(), CliError> {
    let opts = CliOptions { quiet: cli.quiet };
    match &cli.command {
        Command::Run { config } => {
            let mut cfg = parse_config(&read(config)?)?;
            apply_overrides(&mut cfg, cli);
            let exe = cmd_run(&cfg, opts)?;
            if !cli.quiet {
                print!("{}", exe.asymptotics.to_text());
            }
        }
        Command::Stability { config } => {
            let mut cfg = parse_config(&read(config)?)?;
            apply_overrides(&mut cfg, cli);
            let out = cli.out.as_deref();
            let report = cmd_stability(&cfg, out)?;
            print!("{}", report.to_text());
        }
        Command::Sweep { config } => {
            let mut sweep = parse_sweep_config(&read(config)?)?;
            apply_overrides(&mut sweep.base, cli);
            if let Some(w) = cli.workers {
                sweep.workers = w;
            }
            let outcome = cmd_sweep(&sweep, opts)?;
            print!("{}", outcome.csv);
            for v in &outcome.violations {
                eprintln!("coherence: {v}");
            }
        }
        Command::Preset { preset: Preset::Fig1 { dcoef, emit_config } } => {
            let mut cfg = fig1_config(*dcoef, DEFAULT_SEED)?;
            apply_overrides(&mut cfg, cli);
            if *emit_config {
                print!("{}", cfg.to_text());
            } else {
                let exe = cmd_run(&cfg, opts)?;
                if !cli.quiet {
                    print!("{}", exe.asymptotics.to_text());
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
