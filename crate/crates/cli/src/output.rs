//! Plot-ready CSV. Undefined quantities are empty cells; floats use the
//! shortest representation that round-trips, so equal results give equal
//! bytes.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use crate::error::Result;

pub const COLUMNS: [&str; 16] = [
    "scenario",
    "L",
    "N",
    "gamma_th_db",
    "gamma0",
    "method",
    "M",
    "p_hat",
    "std_err",
    "rel_err",
    "p_tilde",
    "cv2",
    "runs_for_target",
    "accept_rate",
    "seed",
    "chunks",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub scenario: &'static str,
    pub branches: usize,
    pub combined: usize,
    pub gamma_th_db: f64,
    pub gamma0: f64,
    pub method: &'static str,
    pub samples: u64,
    pub p_hat: f64,
    pub std_err: f64,
    pub rel_err: Option<f64>,
    pub p_tilde: Option<f64>,
    pub cv2: Option<f64>,
    pub runs_for_target: Option<u64>,
    pub accept_rate: Option<f64>,
    pub seed: u64,
    /// Random-stream blocks behind the estimate.
    pub chunks: u64,
}

/// Shortest round-trip scientific form; non-finite values become empty.
pub fn float_cell(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        String::new()
    }
}

fn db_cell(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        String::new()
    }
}

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

impl Row {
    pub fn cells(&self) -> [String; 16] {
        [
            self.scenario.to_owned(),
            self.branches.to_string(),
            self.combined.to_string(),
            db_cell(self.gamma_th_db),
            float_cell(self.gamma0),
            self.method.to_owned(),
            self.samples.to_string(),
            float_cell(self.p_hat),
            float_cell(self.std_err),
            opt(self.rel_err, float_cell),
            opt(self.p_tilde, float_cell),
            opt(self.cv2, float_cell),
            opt(self.runs_for_target, |n| n.to_string()),
            opt(self.accept_rate, float_cell),
            self.seed.to_string(),
            self.chunks.to_string(),
        ]
    }
}

pub fn write_rows<W: Write>(out: W, rows: &[Row]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for row in rows {
        w.write_record(row.cells())?;
    }
    w.flush()?;
    Ok(())
}

/// Writer for `path`, or stdout.
pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undefined_values_are_empty_cells() {
        assert_eq!(float_cell(f64::NAN), "");
        assert_eq!(float_cell(f64::INFINITY), "");
        assert_eq!(float_cell(1.5e-9), "1.5e-9");
        assert_eq!(db_cell(-9.0), "-9");
        assert_eq!(db_cell(0.5), "0.5");
    }

    #[test]
    fn header_then_rows() {
        let row = Row {
            scenario: "inid-rayleigh",
            branches: 4,
            combined: 4,
            gamma_th_db: -9.0,
            gamma0: 0.7,
            method: "naive",
            samples: 10,
            p_hat: 0.0,
            std_err: 0.0,
            rel_err: None,
            p_tilde: None,
            cv2: None,
            runs_for_target: None,
            accept_rate: None,
            seed: 1,
            chunks: 1,
        };
        let mut buf = Vec::new();
        write_rows(&mut buf, &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], COLUMNS.join(","));
        assert_eq!(lines[1], "inid-rayleigh,4,4,-9,7e-1,naive,10,0e0,0e0,,,,,,1,1");
        assert!(!text.contains("NaN"));
    }
}
