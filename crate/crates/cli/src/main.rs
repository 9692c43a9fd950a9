use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use phaselab_cli::{failures, render, run, CliError, EnsembleKind, Experiment, Format, Overrides, RunConfig, SEED_ENV};

#[derive(Parser)]
#[command(name = "phaselab", version, about = "Seeded experiments on random phase coupling channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expected output purity and entropy against the Lemma-style bounds
    Lemma1(Common),
    /// Joint coherent information with an erasure channel
    Joint(Common),
    /// Holevo information of standard input families against the bound 2
    Holevo(Common),
    /// Reversal, entanglement and classical back-assisted protocols
    Backassist(Common),
    /// Clifford group order and 2-design twirl check
    Design(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    /// Root seed; overrides the PHASELAB_SEED environment variable
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(EnsembleKind))]
    ensemble: Option<EnsembleKind>,
    #[arg(long, value_parser = clap::value_parser!(Format))]
    format: Option<Format>,
    /// Write to this file instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
    /// TOML file with any of the flag keys
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("phaselab: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: Cli) -> Result<ExitCode, CliError> {
    let (experiment, args) = match cli.command {
        Command::Lemma1(a) => (Experiment::Lemma1, a),
        Command::Joint(a) => (Experiment::Joint, a),
        Command::Holevo(a) => (Experiment::Holevo, a),
        Command::Backassist(a) => (Experiment::Backassist, a),
        Command::Design(a) => (Experiment::Design, a),
    };
    let file = match &args.config {
        Some(p) => Overrides::from_file(p)?,
        None => Overrides::default(),
    };
    let flags = Overrides {
        d: args.d,
        n: args.n,
        samples: args.samples,
        seed: args.seed,
        ensemble: args.ensemble,
        format: args.format,
        output: args.output,
        threads: args.threads,
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    let cfg = RunConfig::resolve(experiment, flags, file, env_seed.as_deref())?;
    let rows = run(&cfg)?;
    let text = render(&rows, cfg.format)?;
    match &cfg.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    let failed = failures(&rows);
    if failed.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("criterion failure: {}; seed={}", failed.join(", "), cfg.seed);
        Ok(ExitCode::from(1))
    }
}
