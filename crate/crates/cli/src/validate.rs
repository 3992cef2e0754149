//! `validate`: fixture checks, optionally followed by the acceptance suite.
//!
//! The report has one line per check, `name,status,measured,bound`, where
//! `status` is `PASS` or `FAIL`.

use std::io::Write;

use crate::acceptance::{run_suite, Settings};
use crate::config::ValidateArgs;
use crate::error::{config, CliError, Result};
use crate::fixtures::{parse_fixtures, DEFAULT_FIXTURES};
use crate::output::{float_cell, open_output};

/// Outcome of a single comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub bound: f64,
    /// Why the check could not be evaluated, if it could not.
    pub note: Option<String>,
}

impl Check {
    /// Passes when `measured ≤ bound`; NaN fails.
    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self { name: name.into(), passed: measured <= bound, measured, bound, note: None }
    }

    /// Passes when `measured ≥ bound`; NaN fails.
    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self { name: name.into(), passed: measured >= bound, measured, bound, note: None }
    }

    pub fn failed(name: impl Into<String>, why: impl Into<String>) -> Self {
        Self { name: name.into(), passed: false, measured: f64::NAN, bound: f64::NAN, note: Some(why.into()) }
    }

    pub fn status(&self) -> &'static str {
        if self.passed {
            "PASS"
        } else {
            "FAIL"
        }
    }

    pub fn line(&self) -> String {
        format!("{},{},{},{}", self.name, self.status(), float_cell(self.measured), float_cell(self.bound))
    }
}

/// Run the validation and write the report. Fails with a validation error
/// (exit code 3) when any check fails.
pub fn run_validate(args: &ValidateArgs) -> Result<Vec<Check>> {
    let (text, source) = match &args.fixtures {
        Some(path) => (
            std::fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))?,
            path.display().to_string(),
        ),
        None => (DEFAULT_FIXTURES.to_owned(), "built-in fixtures".to_owned()),
    };
    let lanes = args.chunks.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).max(1);
    let mut out = open_output(args.out.as_deref())?;
    writeln!(out, "name,status,measured,bound")?;
    let fixtures = match parse_fixtures(&text, &source) {
        Ok(f) => f,
        Err(e) => {
            writeln!(out, "fixtures,FAIL,,")?;
            out.flush()?;
            return Err(e);
        }
    };
    let mut checks = Vec::new();
    let mut emit = |c: Check, out: &mut dyn Write| -> Result<()> {
        writeln!(out, "{}", c.line())?;
        if let Some(note) = &c.note {
            eprintln!("{}: {note}", c.name);
        }
        checks.push(c);
        Ok(())
    };
    for f in &fixtures {
        emit(f.check(lanes), &mut out)?;
    }
    if args.full {
        for report in run_suite(&Settings { lanes }, |r| eprintln!("{}", r.summary())) {
            for c in report.checks.iter().cloned() {
                emit(c, &mut out)?;
            }
            emit(report.as_check(), &mut out)?;
        }
    }
    out.flush()?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::Validation(format!("{failed} of {} checks failed", checks.len())));
    }
    Ok(checks)
}
