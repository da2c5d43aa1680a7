//! Line-oriented text format shared by densities and BV test functions:
//!
//! ```text
//! # comment
//! breakpoints 0 0.5 1
//! piece 1.5
//! piece 0.5 0 0 0
//! jump 0.25 -1
//! ```
//!
//! `piece` rows hold monomial coefficients c0..c3 (missing ones are zero)
//! in global x. `jump` rows are only meaningful for BV functions.

use std::fmt::Write;

use super::density::DensitySpec;
use super::poly::{Cubic, PiecewisePoly};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseText {
    pub poly: PiecewisePoly,
    pub jumps: Vec<(f64, f64)>,
}

fn numbers(fields: &[&str], line: usize) -> Result<Vec<f64>> {
    fields
        .iter()
        .map(|s| {
            s.parse::<f64>().map_err(|_| Error::Parse { line, message: format!("`{s}` is not a number") })
        })
        .collect()
}

pub fn parse(text: &str) -> Result<PiecewiseText> {
    let mut bps: Option<Vec<f64>> = None;
    let mut coeffs: Vec<Cubic> = Vec::new();
    let mut jumps = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        match fields[0] {
            "breakpoints" => {
                if bps.is_some() {
                    return Err(Error::Parse { line, message: "duplicate breakpoints row".into() });
                }
                bps = Some(numbers(&fields[1..], line)?);
            }
            "piece" => {
                let v = numbers(&fields[1..], line)?;
                if v.is_empty() || v.len() > 4 {
                    return Err(Error::Parse { line, message: "piece needs 1 to 4 coefficients".into() });
                }
                let mut c = [0.0; 4];
                c[..v.len()].copy_from_slice(&v);
                coeffs.push(c);
            }
            "jump" => {
                let v = numbers(&fields[1..], line)?;
                if v.len() != 2 {
                    return Err(Error::Parse { line, message: "jump needs location and size".into() });
                }
                jumps.push((v[0], v[1]));
            }
            other => {
                return Err(Error::Parse { line, message: format!("unknown row kind `{other}`") });
            }
        }
    }
    let bps = bps.ok_or(Error::Parse { line: 0, message: "missing breakpoints row".into() })?;
    Ok(PiecewiseText { poly: PiecewisePoly::new(bps, coeffs)?, jumps })
}

pub fn format(poly: &PiecewisePoly, jumps: &[(f64, f64)]) -> String {
    let mut out = String::from("breakpoints");
    for b in poly.breakpoints() {
        write!(out, " {b}").unwrap();
    }
    out.push('\n');
    for c in poly.coeffs() {
        writeln!(out, "piece {} {} {} {}", c[0], c[1], c[2], c[3]).unwrap();
    }
    for (loc, size) in jumps {
        writeln!(out, "jump {loc} {size}").unwrap();
    }
    out
}

impl DensitySpec {
    /// Parses and validates a density; `jump` rows are rejected.
    pub fn from_text(text: &str) -> Result<Self> {
        let parsed = parse(text)?;
        if !parsed.jumps.is_empty() {
            return Err(Error::InvalidDensity("densities cannot carry jump rows".into()));
        }
        DensitySpec::new(parsed.poly)
    }

    pub fn to_text(&self) -> String {
        format(self.poly(), &[])
    }
}
