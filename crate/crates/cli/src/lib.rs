//! Command-line harness for the `rarefall` outage estimators: single
//! estimates, threshold sweeps, required-run efficiency tables and
//! oracle validation, all as plot-ready CSV.

pub mod acceptance;
pub mod config;
pub mod error;
pub mod fixtures;
pub mod output;
pub mod run;
pub mod validate;

pub use config::{Cli, Command, RunConfig, RunKind};
pub use error::{CliError, Result};

use std::io::Write;

/// Execute one parsed command line.
pub fn execute(cli: Cli) -> Result<()> {
    let (kind, args) = match cli.command {
        Command::Estimate(a) => (RunKind::Estimate, a),
        Command::Sweep(a) => (RunKind::Sweep, a),
        Command::Efficiency(a) => (RunKind::Efficiency, a),
        Command::Validate(a) => return validate::run_validate(&a).map(|_| ()),
    };
    let cfg = RunConfig::resolve(kind, args)?;
    // open the output first so a bad path fails before the simulation
    let mut out = output::open_output(cfg.out.as_deref())?;
    let rows = run::run_rows(&cfg)?;
    output::write_rows(&mut out, &rows)?;
    out.flush()?;
    Ok(())
}
