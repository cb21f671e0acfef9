//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::config::{Overrides, RunConfig};
use crate::error::Result;
use crate::pipeline::{Pipeline, Stage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Ingest,
    Index,
    Signals,
    Label,
    Dataset,
    Train,
    Importance,
    Sweep,
    /// Every stage in order.
    All,
    /// Write synthetic inputs to the configured input paths.
    Synth,
}

#[derive(Debug, Parser)]
#[command(name = "fearlab", version, about = "Implied-volatility index, alt-data signals and direction forecasting")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fit label thresholds on the whole series instead of the training span.
    #[arg(long)]
    pub paper_compat: bool,
    /// Subtract the next-term variance when interpolating the index.
    #[arg(long)]
    pub paper_eq2_minus: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Args {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            paper_compat: self.paper_compat,
            paper_eq2_minus: self.paper_eq2_minus,
            out_dir: self.out.clone(),
        }
    }
}

fn execute(args: &Args, out: &mut dyn Write) -> Result<()> {
    let cfg = RunConfig::load(&args.config, &args.overrides())?;
    let lines = match args.command {
        Command::Synth => {
            let s = crate::synth::write_inputs(&cfg)?;
            vec![format!(
                "synth: {} quotes, {} tweets, {} trend knots",
                s.quotes, s.tweets, s.trend_knots
            )]
        }
        Command::All => Pipeline::new(cfg).run_all()?,
        single => {
            let stage = match single {
                Command::Ingest => Stage::Ingest,
                Command::Index => Stage::Index,
                Command::Signals => Stage::Signals,
                Command::Label => Stage::Label,
                Command::Dataset => Stage::Dataset,
                Command::Train => Stage::Train,
                Command::Importance => Stage::Importance,
                Command::Sweep => Stage::Sweep,
                Command::All | Command::Synth => unreachable!(),
            };
            vec![Pipeline::new(cfg).run(stage)?]
        }
    };
    for line in lines {
        let _ = writeln!(out, "{line}");
    }
    Ok(())
}

/// Parses `argv` and runs the command; returns the process exit status.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match execute(&args, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
