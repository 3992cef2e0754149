//! Oracle fixture table.
//!
//! One row per fixture, comma separated:
//!
//! ```text
//! name, op, inputs, value, error_bound, oracle_kind
//! ```
//!
//! `inputs` is a space-separated list of `key=value` pairs, lists joined
//! with `;`. Blank lines and lines starting with `#` are ignored. For
//! `oracle_kind = mc` the error bound is a standard error and the check
//! allows three of them; otherwise it is an absolute error bound.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rarefall::estimators::estimate_sphere_is;
use rarefall::mrc_oracle::mrc_outage;
use rarefall::specfun::{bessel_i, hypoexp_cdf, marcum_q};
use rarefall::{FadingScenario, OutageProblem, RunSpec};

use crate::error::{CliError, Result};
use crate::validate::Check;

/// Fixtures shipped with the binary.
pub const DEFAULT_FIXTURES: &str = include_str!("../fixtures/oracle_values.txt");

/// Implementation tolerance added to the oracle's own error bound.
const IMPL_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    BesselI,
    MarcumQ,
    HypoexpCdf,
    MrcOutage,
    /// Sphere-IS estimate of the EGC outage probability.
    SphereIs,
}

impl FromStr for Op {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "bessel_i" => Op::BesselI,
            "marcum_q" => Op::MarcumQ,
            "hypoexp_cdf" => Op::HypoexpCdf,
            "mrc_outage" => Op::MrcOutage,
            "sphere_is" => Op::SphereIs,
            other => return Err(format!("unknown op {other:?}")),
        })
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Op::BesselI => "bessel_i",
            Op::MarcumQ => "marcum_q",
            Op::HypoexpCdf => "hypoexp_cdf",
            Op::MrcOutage => "mrc_outage",
            Op::SphereIs => "sphere_is",
        })
    }
}

/// `key=value` inputs of one fixture.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Inputs(BTreeMap<String, String>);

impl FromStr for Inputs {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut map = BTreeMap::new();
        for pair in s.split_whitespace() {
            let (k, v) = pair.split_once('=').ok_or_else(|| format!("input {pair:?} is not key=value"))?;
            if map.insert(k.to_owned(), v.to_owned()).is_some() {
                return Err(format!("input {k:?} given twice"));
            }
        }
        Ok(Inputs(map))
    }
}

impl Inputs {
    fn raw(&self, key: &str) -> std::result::Result<&str, String> {
        self.0.get(key).map(String::as_str).ok_or_else(|| format!("missing input {key:?}"))
    }

    pub fn num(&self, key: &str) -> std::result::Result<f64, String> {
        let raw = self.raw(key)?;
        raw.parse().map_err(|_| format!("input {key}={raw:?} is not a number"))
    }

    pub fn int<T: FromStr>(&self, key: &str) -> std::result::Result<T, String> {
        let raw = self.raw(key)?;
        raw.parse().map_err(|_| format!("input {key}={raw:?} is not a non-negative integer"))
    }

    pub fn list(&self, key: &str) -> std::result::Result<Vec<f64>, String> {
        let raw = self.raw(key)?;
        raw.split(';').map(|x| x.parse().map_err(|_| format!("input {key}={raw:?} is not a number list"))).collect()
    }

    /// Scenario described by the inputs; powers and scales are linear.
    pub fn scenario(&self) -> std::result::Result<FadingScenario, String> {
        let s = match self.raw("scenario")? {
            "inid-rayleigh" => FadingScenario::inid_rayleigh(self.list("omega")?),
            "corr-rayleigh" => FadingScenario::exp_corr_rayleigh(self.num("sigma")?, self.num("rho")?, self.int("L")?),
            "iid-rice" => FadingScenario::iid_rice(self.num("k")?, self.num("omega")?, self.int("L")?),
            "ordered-rayleigh" => FadingScenario::ordered_inid_rayleigh(self.list("omega")?, self.int("N")?),
            other => return Err(format!("unknown scenario {other:?}")),
        };
        s.map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub name: String,
    pub line: usize,
    pub op: Op,
    pub inputs: Inputs,
    pub value: f64,
    pub error_bound: f64,
    pub oracle_kind: String,
}

impl Fixture {
    fn is_statistical_oracle(&self) -> bool {
        self.oracle_kind == "mc"
    }

    /// Compare the implementation against the fixture value.
    pub fn check(&self, lanes: usize) -> Check {
        match self.evaluate(lanes) {
            Ok((measured, bound)) => Check::at_most(&self.name, (measured - self.value).abs(), bound),
            Err(e) => Check::failed(&self.name, e),
        }
    }

    /// Implementation value and the allowed deviation from the fixture.
    fn evaluate(&self, lanes: usize) -> std::result::Result<(f64, f64), String> {
        let i = &self.inputs;
        let num = |r: rarefall::Result<f64>| r.map_err(|e| e.to_string());
        let deterministic_tol = |v: f64| {
            if self.is_statistical_oracle() {
                3.0 * self.error_bound
            } else {
                self.error_bound + IMPL_REL_TOL * v.abs().max(1.0)
            }
        };
        match self.op {
            Op::BesselI => {
                let v = num(bessel_i(i.int("nu")?, i.num("x")?))?;
                Ok((v, self.error_bound + IMPL_REL_TOL * self.value.abs().max(1.0)))
            }
            Op::MarcumQ => {
                let v = num(marcum_q(i.int("mu")?, i.num("a")?, i.num("b")?))?;
                Ok((v, deterministic_tol(self.value)))
            }
            Op::HypoexpCdf => {
                let v = num(hypoexp_cdf(&i.list("means")?, i.num("t")?))?;
                // relative criterion: the CDF can be tiny
                Ok((v, self.error_bound + IMPL_REL_TOL * self.value.abs()))
            }
            Op::MrcOutage => {
                let v = num(mrc_outage(&i.scenario()?, i.num("g0")?))?;
                Ok((v, deterministic_tol(self.value)))
            }
            Op::SphereIs => {
                let problem = OutageProblem::new(i.scenario()?, i.num("g0")?).map_err(|e| e.to_string())?;
                let run = RunSpec::new(i.int("samples")?, i.int("seed")?).with_lanes(lanes);
                let r = estimate_sphere_is(&problem, &run).map_err(|e| e.to_string())?;
                let bound = if self.is_statistical_oracle() {
                    3.0 * r.std_err.hypot(self.error_bound)
                } else {
                    3.0 * r.std_err + self.error_bound
                };
                Ok((r.p_hat, bound))
            }
        }
    }
}

/// Parse a fixture table; any malformed row is a validation failure.
pub fn parse_fixtures(text: &str, source: &str) -> Result<Vec<Fixture>> {
    let bad = |line: usize, msg: String| CliError::Validation(format!("{source}:{line}: corrupted fixture: {msg}"));
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 6 {
            return Err(bad(line, format!("expected 6 fields, found {}", fields.len())));
        }
        let number = |s: &str, what: &str| -> Result<f64> {
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(bad(line, format!("{what} {s:?} is not a finite number"))),
            }
        };
        let fixture = Fixture {
            name: fields[0].to_owned(),
            line,
            op: fields[1].parse().map_err(|e| bad(line, e))?,
            inputs: fields[2].parse().map_err(|e| bad(line, e))?,
            value: number(fields[3], "value")?,
            error_bound: number(fields[4], "error bound")?,
            oracle_kind: fields[5].to_owned(),
        };
        if fixture.error_bound < 0.0 {
            return Err(bad(line, "negative error bound".into()));
        }
        if out.iter().any(|f: &Fixture| f.name == fixture.name) {
            return Err(bad(line, format!("duplicate fixture name {:?}", fixture.name)));
        }
        out.push(fixture);
    }
    if out.is_empty() {
        return Err(CliError::Validation(format!("{source}: no fixtures found")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_fixtures_parse() {
        let f = parse_fixtures(DEFAULT_FIXTURES, "default").unwrap();
        assert!(f.len() >= 10);
        assert!(f.iter().filter(|f| f.op == Op::SphereIs).count() >= 3);
    }

    #[test]
    fn malformed_rows_are_reported_with_line() {
        let e = parse_fixtures("# c\nx, bessel_i, nu=0 x=1, 1.2\n", "t.txt").unwrap_err();
        assert!(e.to_string().contains("t.txt:2"), "{e}");
        assert_eq!(e.exit_code(), 3);
        assert!(parse_fixtures("x, nope, a=1, 1, 0, series\n", "t").is_err());
        assert!(parse_fixtures("x, bessel_i, a, 1, 0, series\n", "t").is_err());
        assert!(parse_fixtures("x, bessel_i, nu=0, NaN, 0, series\n", "t").is_err());
        assert!(parse_fixtures("", "t").is_err());
    }

    #[test]
    fn wrong_value_fails_the_check() {
        let ok = parse_fixtures("i0, bessel_i, nu=0 x=0, 1, 0, series\n", "t").unwrap();
        assert!(ok[0].check(1).passed);
        let bad = parse_fixtures("i0, bessel_i, nu=0 x=0, 1.001, 0, series\n", "t").unwrap();
        assert!(!bad[0].check(1).passed);
        let missing = parse_fixtures("i0, bessel_i, x=0, 1, 0, series\n", "t").unwrap();
        assert!(!missing[0].check(1).passed);
    }
}
