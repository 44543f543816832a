//! Batch front-end: declarative experiment configs in, reproducible
//! observable tables out.
//!
//! Exit codes: 0 success, 2 config error, 4 I/O error, 3 any runtime
//! invariant breach (norm drift, singular systems, ...).

use clap::{Args, Parser, Subcommand};
use qlga::config::{parse_config, ExperimentKind};
use qlga::experiment::{exit_code_for, run_experiment};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qlga", version, about = "Lattice quantum dynamics experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment config file (key-value sections; see the README).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV/JSON artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override the seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the embarrassingly parallel sweeps.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Time-evolve a configured system (run-brick or run-qlga configs).
    Run(CommonArgs),
    /// Measure a dispersion relation and fit the emergent mass.
    Dispersion(CommonArgs),
    /// Convergence study against the fine-grid reference integrator.
    Converge(CommonArgs),
    /// Compare dense and sector representations on the same dynamics.
    OracleCheck(CommonArgs),
    /// Per-step gate counts and the classical-cost contrast.
    GateCount(CommonArgs),
    /// Entry density of the inverse of the circulant single-step matrix.
    MInverse(CommonArgs),
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::Run(a)
            | Command::Dispersion(a)
            | Command::Converge(a)
            | Command::OracleCheck(a)
            | Command::GateCount(a)
            | Command::MInverse(a) => a,
        }
    }

    fn accepts(&self, kind: ExperimentKind) -> bool {
        matches!(
            (self, kind),
            (Command::Run(_), ExperimentKind::RunBrick)
                | (Command::Run(_), ExperimentKind::RunQlga)
                | (Command::Dispersion(_), ExperimentKind::Dispersion)
                | (Command::Converge(_), ExperimentKind::Converge)
                | (Command::OracleCheck(_), ExperimentKind::OracleCheck)
                | (Command::GateCount(_), ExperimentKind::GateCount)
                | (Command::MInverse(_), ExperimentKind::MInverse)
        )
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = cli.command.args();

    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(4);
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(errors) => {
            eprintln!("config error(s) in {}:", args.config.display());
            for e in errors {
                eprintln!("  {e}");
            }
            return ExitCode::from(2);
        }
    };
    if !cli.command.accepts(cfg.kind) {
        eprintln!(
            "error: config kind `{}` does not match this subcommand",
            cfg.kind.as_str()
        );
        return ExitCode::from(2);
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(threads) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: cannot configure {threads} threads: {e}");
            return ExitCode::from(3);
        }
    }
    match run_experiment(&cfg, &args.out) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}
