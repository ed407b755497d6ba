use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use ewmix::config::RunConfig;
use ewmix::simulate::{read_components, simulate, Study};

#[derive(Parser)]
#[command(name = "ewmix", version, about = "Dirichlet process mixtures of censored order-statistics sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration with flat dotted keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.mcmc.seed = seed;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Draw a synthetic dataset plus its ground truth.
    Simulate {
        /// study1, study2 or custom.
        #[arg(long, default_value = "study1")]
        study: String,
        /// JSON list of components, required for the custom study.
        #[arg(long)]
        atoms: Option<PathBuf>,
        #[arg(long = "n-obs", default_value_t = 500)]
        n_obs: usize,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the mixture and write the trace, partition and summaries.
    Fit {
        #[arg(long, required_unless_present = "emit_default_config")]
        data: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
        #[arg(long, required_unless_present = "emit_default_config")]
        out: Option<PathBuf>,
        /// Print the default configuration (or the named preset) and exit.
        #[arg(long)]
        emit_default_config: bool,
        #[arg(long, default_value = "vague")]
        preset: String,
    },
    /// Recompute the co-membership matrix and partition from a trace.
    Partition {
        #[arg(long)]
        trace: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Trace series, autocorrelations and effective sample sizes.
    Diagnose {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Posterior predictive check of aggregate competition per cluster.
    PpCheck {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { study, atoms, n_obs, n, seed, out } => {
            let study = match (study.as_str(), atoms) {
                ("custom", Some(p)) => Study::Custom(read_components(&p)?),
                ("custom", None) => bail!("--study custom needs --atoms"),
                (name, _) => Study::parse(name)?,
            };
            let sim = simulate(&study, n_obs, n, seed)?;
            sim.write(&out)?;
            eprintln!("wrote {} rows to {}", sim.dataset.len(), out.join("data.csv").display());
        }
        Command::Fit { data, common, out, emit_default_config, preset } => {
            if emit_default_config {
                print!("{}", RunConfig::preset(&preset)?.to_json_string());
                return Ok(());
            }
            let (data, out) = (data.expect("required by clap"), out.expect("required by clap"));
            let cfg = common.load()?;
            let res = ewmix::report::fit(&data, &cfg, &out)?;
            eprintln!(
                "retained {} samples, modal N* = {}, partition has {} clusters (K = {})",
                res.summary.retained_samples,
                res.summary.modal_n_star,
                res.summary.partition.n_clusters,
                res.summary.partition.k_star
            );
        }
        Command::Partition { trace, common, out } => {
            let p = ewmix::report::partition_from_trace(&trace, &common.load()?, &out)?;
            eprintln!("{} clusters at K = {}, score {}", p.n_clusters(), p.k_star, p.score);
        }
        Command::Diagnose { trace, out } => {
            ewmix::report::diagnose_trace(&trace, &out)?;
        }
        Command::PpCheck { trace, data, common, out } => {
            for r in ewmix::report::pp_check(&trace, &data, &common.load()?, &out)? {
                eprintln!(
                    "cluster {}: observed {:.4}, band [{:.4}, {:.4}], p = {:.3}",
                    r.label, r.observed, r.lower, r.upper, r.p_value
                );
            }
        }
    }
    Ok(())
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
