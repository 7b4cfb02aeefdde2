use std::fs;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use crg_core::experiment::{self, ExperimentConfig, OutputFiles};

#[derive(Parser)]
#[command(
    name = "crg",
    version,
    about = "Run sequential crowding-game experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config file.
    Run {
        config: String,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run a named preset.
    Preset {
        name: String,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// List the available presets.
    ListPresets,
}

#[derive(Args)]
struct RunOpts {
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per grid point, overriding the config.
    #[arg(long)]
    trials: Option<usize>,
    /// Output path prefix.
    #[arg(long)]
    out: Option<String>,
    /// Worker threads (default: one per core). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::ListPresets => {
            print!("{}", experiment::list_presets());
            Ok(())
        }
        Command::Run { config, opts } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {config}"))?;
            let cfg = experiment::parse_config(&text).with_context(|| format!("in {config}"))?;
            let default_prefix = config.strip_suffix(".json").unwrap_or(&config).to_string();
            execute(cfg, opts, default_prefix)
        }
        Command::Preset { name, opts } => {
            let cfg = experiment::preset(&name)
                .ok_or_else(|| anyhow!("unknown preset `{name}`; see `crg list-presets`"))?;
            execute(cfg, opts, name)
        }
    }
}

fn execute(mut cfg: ExperimentConfig, opts: RunOpts, default_prefix: String) -> Result<()> {
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = opts.trials {
        if trials == 0 {
            return Err(anyhow!("--trials must be at least 1"));
        }
        cfg.trials = trials;
    }
    let prefix = opts
        .out
        .or_else(|| cfg.out.clone())
        .unwrap_or(default_prefix);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().context("starting worker threads")?;
    let files: OutputFiles = pool.install(|| experiment::run_experiment(&cfg, &prefix))?;
    for path in [&files.utilities, &files.metrics, &files.manifest] {
        println!("{}", path.display());
    }
    Ok(())
}
