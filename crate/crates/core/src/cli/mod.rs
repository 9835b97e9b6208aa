//! Command-line harness for the `fp-expander` binary.
//!
//! Every option can come from a flat config file (`--config`) and be
//! overridden on the command line. Exit codes: 0 success, 1 verification
//! failure, 2 usage or configuration error.

pub mod commands;
pub mod config;
pub mod records;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub use commands::{Outcome, Status};
pub use config::ExperimentConfig;

#[derive(Debug, Parser)]
#[command(name = "fp-expander", version, about = "Exact expander-bound experiments over prime fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full counting chain on each trial; exit 1 on any violation.
    Verify(RunArgs),
    /// Sweep |A| over `--sizes` and write per-trial records plus an exponent table.
    Experiment(RunArgs),
    /// Point/plane incidence statistics per trial.
    Incidence(RunArgs),
    /// Tabulate both bound evaluators over `--sizes`.
    Bounds(RunArgs),
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// Flat `key = value` file; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub p: Option<String>,
    /// mult, add or both.
    #[arg(long)]
    pub variant: Option<String>,
    /// random:<n>, interval:<s>:<n>, geometric:<s>:<r>:<n>, subgroup:<d>, explicit:<v1;v2;...>
    #[arg(long = "family-A")]
    pub family_a: Option<String>,
    /// A set family, or a translate of A (`A`, `A+1`).
    #[arg(long = "family-B")]
    pub family_b: Option<String>,
    /// A set family, or a translate of A or B.
    #[arg(long = "family-C")]
    pub family_c: Option<String>,
    /// identity, constant:<c>, inverse, monomial:<k>, explicit:<path>
    #[arg(long)]
    pub g: Option<String>,
    #[arg(long)]
    pub h: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Comma-separated size grid, e.g. `8,16,32`.
    #[arg(long)]
    pub sizes: Option<String>,
    /// Adds conditional-growth columns to the experiment table.
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Fiber multiplicity used by `bounds`.
    #[arg(long)]
    pub m: Option<String>,
    /// Record file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exponent table for `experiment`.
    #[arg(long = "aggregate-out")]
    pub aggregate_out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<String>,
    /// Omit timestamps so identical inputs give identical bytes.
    #[arg(long)]
    pub deterministic: bool,
    /// Re-read the written records and check their invariants.
    #[arg(long)]
    pub selfcheck: bool,
    #[arg(long = "collinear-budget")]
    pub collinear_budget: Option<String>,
    #[arg(long = "oracle-budget")]
    pub oracle_budget: Option<String>,
    #[arg(long = "grouped-budget")]
    pub grouped_budget: Option<String>,
}

impl RunArgs {
    /// Config file values with command-line overrides applied.
    pub fn merged(&self) -> crate::Result<BTreeMap<String, String>> {
        let mut map = match &self.config {
            Some(path) => config::read_kv_file(path)?,
            None => BTreeMap::new(),
        };
        let flags: [(&str, Option<String>); 18] = [
            ("p", self.p.clone()),
            ("variant", self.variant.clone()),
            ("family-A", self.family_a.clone()),
            ("family-B", self.family_b.clone()),
            ("family-C", self.family_c.clone()),
            ("g", self.g.clone()),
            ("h", self.h.clone()),
            ("trials", self.trials.clone()),
            ("seed", self.seed.clone()),
            ("sizes", self.sizes.clone()),
            ("epsilon", self.epsilon.clone()),
            ("m", self.m.clone()),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("aggregate-out", self.aggregate_out.as_ref().map(|p| p.display().to_string())),
            ("format", self.format.clone()),
            ("collinear-budget", self.collinear_budget.clone()),
            ("oracle-budget", self.oracle_budget.clone()),
            ("grouped-budget", self.grouped_budget.clone()),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                map.insert(k.to_string(), v);
            }
        }
        if self.deterministic {
            map.insert("deterministic".into(), "true".into());
        }
        if self.selfcheck {
            map.insert("selfcheck".into(), "true".into());
        }
        Ok(map)
    }
}

/// Parses `args` and runs the chosen subcommand.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    type Handler = fn(&ExperimentConfig) -> crate::Result<Outcome>;
    let (cmd, args): (Handler, _) = match &cli.command {
        Command::Verify(a) => (commands::verify, a),
        Command::Experiment(a) => (commands::experiment, a),
        Command::Incidence(a) => (commands::incidence, a),
        Command::Bounds(a) => (commands::bounds, a),
    };
    let cfg = match args.merged().and_then(|m| ExperimentConfig::from_map(&m)) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match cmd(&cfg) {
        Ok(outcome) => {
            for msg in &outcome.messages {
                eprintln!("{msg}");
            }
            ExitCode::from(outcome.status as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Status::Usage as u8)
        }
    }
}
