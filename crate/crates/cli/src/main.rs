//! Batch experiment driver for the cell-free uplink laboratory.
//!
//! Every subcommand is a pure function of (config file, seed) to output
//! bytes. Exit codes: 0 success, 1 config error, 2 validation failure
//! (a cross-check outside tolerance), 3 runtime error.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "cellfree", version, about = "Cell-free uplink experiment driver")]
struct Cli {
    /// Path to the TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the config file's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (overrides [output].directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Applies a scale preset on top of the config file.
    #[arg(long, global = true, value_parser = ["desk", "paper"])]
    preset: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form outage vs Monte Carlo on a threshold grid or K sweep.
    Outage,
    /// Density normalization and PDF/CDF coherence checks.
    PdfCheck,
    /// Enumerate the cluster-configuration action space.
    ClusterEnum,
    /// Joint clustering/beamforming baseline solve on one interval.
    Baseline,
    /// Train the hybrid DDPG-DDQN agent.
    Train,
    /// Evaluate a trained agent against the joint solver on held-out
    /// realizations.
    Compare {
        /// Agent source: checkpoint | oracle | random.
        #[arg(long, default_value = "checkpoint")]
        agent: String,
    },
    /// One-off Monte-Carlo estimand.
    Mc {
        /// outage | rate | histogram
        #[arg(long, default_value = "rate")]
        estimand: String,
    },
}

fn load_config(cli: &Cli) -> anyhow::Result<(ExperimentConfig, String)> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| anyhow::anyhow!("--config PATH is required"))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
    let mut cfg = ExperimentConfig::from_toml(&text)?;
    if let Some(preset) = &cli.preset {
        cfg.apply_preset(preset)?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok((cfg, text))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cfg, config_text) = match load_config(&cli) {
        Ok(pair) => pair,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let hash = report::config_hash(&config_text);
    let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.directory));

    let result = match &cli.command {
        Command::Outage => commands::cmd_outage(&cfg, &hash, &out_dir),
        Command::PdfCheck => commands::cmd_pdf_check(&cfg, &hash, &out_dir),
        Command::ClusterEnum => commands::cmd_cluster_enum(&cfg, &hash, &out_dir),
        Command::Baseline => commands::cmd_baseline(&cfg, &hash, &out_dir),
        Command::Train => commands::cmd_train(&cfg, &hash, &out_dir),
        Command::Compare { agent } => commands::cmd_compare(&cfg, &hash, &out_dir, agent),
        Command::Mc { estimand } => commands::cmd_mc(&cfg, &hash, &out_dir, estimand),
    };
    match result {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            if outcome.validation_failed {
                eprintln!("validation failure: cross-check outside tolerance");
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            // configuration-shaped problems exit 1, runtime failures 3
            let text = format!("{e:#}");
            if text.contains("config") || text.contains("unknown") || text.contains("needs") {
                eprintln!("config error: {text}");
                ExitCode::from(1)
            } else {
                eprintln!("runtime error: {text}");
                ExitCode::from(3)
            }
        }
    }
}
