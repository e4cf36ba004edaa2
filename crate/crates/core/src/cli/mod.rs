//! Config-driven command line front end.
//!
//! Every subcommand reads a [`RunConfig`] (or the defaults), applies flag
//! overrides, runs one pipeline and writes a JSON report plus CSV density
//! profiles into the output directory. Reports embed the config hash and
//! contain nothing run-dependent, so identical inputs give identical bytes.

mod config;
mod run;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{
    FamilyConfig, GenericityConfig, RunConfig, ScheduleConfig, SpanConfig, TargetConfig, Thresholds, CONFIG_SCHEMA,
};
pub use run::{error_json, exit_code, run, Artifact, Command, RunOutput, REPORT_SCHEMA};

use crate::error::{Error, Result};
use crate::scalar::ArithmeticMode;

#[derive(Debug, Parser)]
#[command(name = "harmonic-trees", version, about = "Harmonic functions and universal witnesses on weighted trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Build the tree and report its shape.
    Build,
    /// Synthesize and certify an X-schedule witness.
    WitnessX,
    /// Synthesize and certify a U_FM-schedule witness.
    WitnessUfm,
    /// Check span inclusion over random combinations of witness components.
    SpanCheck,
    /// Build the dense family and certify its ρ gaps.
    DenseFamily,
    /// Compare F₁ and F₂ span samples against a fixed reference ball.
    DoubleGenericity,
    /// Re-run hit certification on a saved witness.
    Certify {
        #[arg(long)]
        witness: PathBuf,
    },
}

#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// JSON config file; defaults apply when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    #[arg(long, global = true)]
    pub width: Option<usize>,
    /// Seeds both the tree and the run.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    #[arg(long, global = true)]
    pub warmup: Option<usize>,
    /// `exact` or `float`.
    #[arg(long, global = true)]
    pub mode: Option<ArithmeticMode>,
    /// X-schedule growth factor, as `p/q` or an integer.
    #[arg(long, global = true)]
    pub growth: Option<String>,
    #[arg(long, global = true)]
    pub block_length: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<String>,
}

impl Overrides {
    pub fn load(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_json(&std::fs::read_to_string(path)?)?,
            None => RunConfig::default(),
        };
        if let Some(d) = self.depth {
            c.tree.depth = d;
        }
        if let Some(d) = self.dim {
            c.dim = d;
        }
        if let Some(w) = self.width {
            c.width = w;
        }
        if let Some(s) = self.seed {
            c.seed = s;
            c.tree.seed = s;
        }
        if let Some(h) = self.horizon {
            c.horizon = Some(h);
        }
        if let Some(w) = self.warmup {
            c.warmup = Some(w);
        }
        if let Some(m) = self.mode {
            c.mode = m;
        }
        if let Some(g) = &self.growth {
            c.schedule.growth = g.clone();
        }
        if let Some(l) = self.block_length {
            c.schedule.block_length = l;
        }
        if let Some(o) = &self.out {
            c.out = o.clone();
        }
        Ok(c)
    }
}

impl From<&Sub> for Command {
    fn from(s: &Sub) -> Self {
        match s {
            Sub::Build => Command::Build,
            Sub::WitnessX => Command::WitnessX,
            Sub::WitnessUfm => Command::WitnessUfm,
            Sub::SpanCheck => Command::SpanCheck,
            Sub::DenseFamily => Command::DenseFamily,
            Sub::DoubleGenericity => Command::DoubleGenericity,
            Sub::Certify { witness } => Command::Certify {
                witness: witness.clone(),
            },
        }
    }
}

fn execute(cli: &Cli) -> Result<RunOutput> {
    let config = cli.overrides.load()?;
    let out = run(&config, &Command::from(&cli.command))?;
    for path in out.write(config.out.as_ref())? {
        println!("wrote {}", path.display());
    }
    for line in &out.summary {
        println!("{line}");
    }
    Ok(out)
}

/// Parses `args`, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(out) if out.invariant_failures.is_empty() => 0,
        Ok(out) => {
            let e = Error::Invariant(out.invariant_failures.join("; "));
            eprintln!("{}", error_json(&e));
            exit_code(&e)
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            exit_code(&e)
        }
    }
}
