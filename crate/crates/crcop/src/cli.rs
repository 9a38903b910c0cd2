use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands;
use crate::config::{EstimatorKind, FitModel, RunConfig, SamplerKind, SweepVariable};
use crate::error::CliError;

/// Structural copula competing-risks models: simulate, study, sweep, fit.
#[derive(Debug, Parser)]
#[command(name = "crcop", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (default `out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Full-size replication counts and sample sizes.
    #[arg(long, global = true)]
    pub full: bool,
    /// Kendall's tau of the simulated copula (sets theta = 1/(1 - tau)).
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    #[arg(long, global = true)]
    pub sampler: Option<SamplerKind>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw one dataset and write it as CSV.
    Simulate {
        #[arg(long)]
        n: Option<usize>,
    },
    /// Monte Carlo coverage study over a (tau, n) grid.
    Study {
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        taus: Option<Vec<f64>>,
        #[arg(long)]
        estimator: Option<EstimatorKind>,
    },
    /// Cause-specific Cox fits along a grid of one design parameter.
    Sweep {
        #[arg(long)]
        variable: Option<SweepVariable>,
        #[arg(long, allow_hyphen_values = true)]
        from: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        to: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        reps_per_point: Option<usize>,
        #[arg(long)]
        n_per_rep: Option<usize>,
    },
    /// Fit a model to a `t,delta,z1,...` dataset.
    Fit {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        model: Option<FitModel>,
    },
}

fn set<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

/// Loads the config file (if any) and applies the flags on top.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.global.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let g = &cli.global;
    set(&mut cfg.seed, g.seed);
    set(&mut cfg.out, g.out.clone());
    if g.full {
        cfg.full = Some(true);
    }
    if let Some(tau) = g.tau {
        if !(0.0..1.0).contains(&tau) {
            return Err(CliError::Config(format!(
                "--tau must lie in [0, 1), got {tau}"
            )));
        }
        cfg.dgp.theta = Some(1.0 / (1.0 - tau));
    }
    set(&mut cfg.dgp.sampler, g.sampler);
    match &cli.command {
        Command::Simulate { n } => set(&mut cfg.dgp.n, *n),
        Command::Study {
            reps,
            sizes,
            taus,
            estimator,
        } => {
            set(&mut cfg.study.reps, *reps);
            set(&mut cfg.study.sizes, sizes.clone());
            set(&mut cfg.study.taus, taus.clone());
            set(&mut cfg.study.estimator, *estimator);
        }
        Command::Sweep {
            variable,
            from,
            to,
            step,
            reps_per_point,
            n_per_rep,
        } => {
            let s = &mut cfg.sweep;
            set(&mut s.variable, *variable);
            set(&mut s.from, *from);
            set(&mut s.to, *to);
            set(&mut s.step, *step);
            set(&mut s.reps_per_point, *reps_per_point);
            set(&mut s.n_per_rep, *n_per_rep);
        }
        Command::Fit { input, model } => {
            set(&mut cfg.fit.input, input.clone());
            set(&mut cfg.fit.model, *model);
        }
    }
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let cfg = resolve_config(cli)?;
    match cli.command {
        Command::Simulate { .. } => commands::cmd_simulate(&cfg),
        Command::Study { .. } => commands::cmd_study(&cfg),
        Command::Sweep { .. } => commands::cmd_sweep(&cfg),
        Command::Fit { .. } => commands::cmd_fit(&cfg),
    }
}
