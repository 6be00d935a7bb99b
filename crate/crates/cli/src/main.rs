use std::path::{Path, PathBuf};
use std::process::ExitCode;

use acrr::config::ScenarioConfig;
use acrr::harness::{self, Summary, SweepPlan};
use acrr::PolicyKind;
use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

/// Seeded MANET route-discovery experiments.
#[derive(Parser)]
#[command(name = "acrr-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario's replications.
    Run {
        /// Config file, or a preset name (desk, table1).
        config: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a built-in sweep (fig2..fig6, naive-vs-acrr) or `field=v1,v2[;policies=a,b]`.
    Sweep {
        sweep: String,
        #[arg(long)]
        out: PathBuf,
        /// Base config file or preset; defaults to desk.
        #[arg(long, default_value = "desk")]
        config: String,
        #[command(flatten)]
        common: Common,
    },
    /// Check a config and print it fully resolved.
    Validate {
        config: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Base seed; replication i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<u32>,
    #[arg(long)]
    policy: Option<PolicyKind>,
    /// Override a config key, e.g. `--set policy.alpha=0.9`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Worker threads.
    #[arg(long, default_value_t = default_jobs())]
    jobs: usize,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn load(source: &str, common: &Common) -> Result<ScenarioConfig> {
    let path = Path::new(source);
    let mut cfg = if path.exists() {
        ScenarioConfig::from_file(path)?
    } else {
        ScenarioConfig::preset(source).with_context(|| format!("`{source}` is neither a file nor a preset"))?
    };
    for kv in &common.sets {
        let (k, v) = kv
            .split_once('=')
            .with_context(|| format!("--set expects KEY=VALUE, got `{kv}`"))?;
        cfg.set(k.trim(), v)?;
    }
    if let Some(seed) = common.seed {
        cfg.base_seed = seed;
    }
    if let Some(r) = common.replications {
        cfg.replications = r;
    }
    if let Some(p) = common.policy {
        cfg.policy = p;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report(summary: &Summary) {
    eprintln!("{} runs written", summary.runs);
    if let Some(msg) = summary.refusal_message() {
        eprintln!("{msg}");
    }
    for f in &summary.files {
        eprintln!("  {}", f.display());
    }
}

fn main_inner() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config, out, common } => {
            let cfg = load(&config, &common)?;
            report(&harness::run_scenario(&cfg, &out, common.jobs)?);
        }
        Command::Sweep {
            sweep,
            out,
            config,
            common,
        } => {
            let base = load(&config, &common)?;
            let mut plan = SweepPlan::parse(&sweep)?;
            if let Some(p) = common.policy {
                plan.policies = vec![p];
            }
            report(&harness::run_sweep(&plan, &base, &out, common.jobs)?);
        }
        Command::Validate { config, common } => {
            let cfg = load(&config, &common)?;
            print!("{}", cfg.to_text());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
