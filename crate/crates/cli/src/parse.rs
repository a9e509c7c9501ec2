//! Numbers, matrix literals and grids as they appear in scenario files and
//! on the command line.

use std::f64::consts::PI;
use std::str::FromStr;

use errdist::{Operator, C64};

use crate::CliError;

/// A real number, optionally a multiple or fraction of `pi`:
/// `0.5`, `pi`, `2pi`, `-pi/2`, `0.25pi`, `3pi/4`.
pub fn parse_real(s: &str) -> Result<f64, CliError> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || CliError::Input(format!("invalid number '{s}'"));
    let value = if let Some(pos) = t.find("pi") {
        let (coef, rest) = t.split_at(pos);
        let rest = &rest[2..];
        let coef = match coef {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.trim_end_matches('*').parse::<f64>().map_err(|_| bad())?,
        };
        let div = match rest {
            "" => 1.0,
            r => r
                .strip_prefix('/')
                .ok_or_else(bad)?
                .parse::<f64>()
                .map_err(|_| bad())?,
        };
        coef * PI / div
    } else {
        t.parse::<f64>().map_err(|_| bad())?
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

/// Closed interval with inclusive endpoints and an explicit point count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * k as f64 / n
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = CliError;

    /// `start:stop:count`
    fn from_str(s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::Input(format!(
                "grid '{s}' must have the form start:stop:count"
            )));
        }
        let count: usize = parts[2].trim().parse().map_err(|_| {
            CliError::Input(format!(
                "grid count '{}' is not a positive integer",
                parts[2]
            ))
        })?;
        if count == 0 {
            return Err(CliError::Input("grid count must be at least 1".into()));
        }
        Ok(Grid {
            start: parse_real(parts[0])?,
            stop: parse_real(parts[1])?,
            count,
        })
    }
}

fn parse_entry(s: &str) -> Result<C64, CliError> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let z =
        C64::from_str(&t).map_err(|_| CliError::Input(format!("invalid complex entry '{s}'")))?;
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(CliError::Input(format!("non-finite entry '{s}'")))
    }
}

/// Row-major matrix literal `[a, b; c, d]` with complex entries such as
/// `1`, `-i`, `0.5+0.5i`.
pub fn parse_matrix(s: &str) -> Result<Operator, CliError> {
    let inner = s
        .trim()
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| CliError::Input(format!("matrix literal must be enclosed in [ ]: '{s}'")))?;
    let rows = inner
        .split(';')
        .map(|row| {
            row.split(',')
                .map(parse_entry)
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Operator::from_rows(&rows).map_err(CliError::from)
}

pub fn format_real(x: f64) -> String {
    format!("{x:?}")
}

/// `re+imi` with both parts in the same notation as [`format_real`].
pub fn format_complex(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:?}{sign}{:?}i", z.re, z.im.abs())
}
