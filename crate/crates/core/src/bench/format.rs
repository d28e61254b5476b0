use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::solver::SolutionTable;

pub const MIN_PLACES: usize = 4;
pub const MAX_PLACES: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "text" => Ok(OutputFormat::Text),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::InvalidArgument(format!(
                "unknown output format '{other}' (expected text or csv)"
            ))),
        }
    }
}

pub fn check_places(places: usize) -> Result<()> {
    if !(MIN_PLACES..=MAX_PLACES).contains(&places) {
        return Err(Error::InvalidArgument(format!(
            "places must lie in [{MIN_PLACES}, {MAX_PLACES}], got {places}"
        )));
    }
    Ok(())
}

/// `value` with `places` significant digits, e.g. `1.0636984E+00` for 8.
pub fn sci(value: f64, places: usize) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    let value = if value == 0.0 { 0.0 } else { value };
    let raw = format!("{:.*e}", places.saturating_sub(1), value);
    let (mantissa, exp) = raw.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}E{sign}{:02}", exp.abs())
}

fn sorted_order(keys: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]));
    idx
}

/// Rows by μ ascending, columns by τ ascending, incoming boundary cells zeroed.
pub fn emit(table: &SolutionTable, format: OutputFormat, places: usize) -> Result<String> {
    check_places(places)?;
    let rows = sorted_order(&table.mus);
    let cols = sorted_order(&table.taus);
    let meta = &table.meta;
    let mut out = String::new();
    let clamp_note = if meta.omega_clamped {
        format!(" (clamped from {})", meta.omega_requested)
    } else {
        String::new()
    };
    let _ = writeln!(
        out,
        "# {} intensity, N = {} ({} weighted), omega = {}{}",
        table.part, meta.n, meta.n_real, meta.omega_used, clamp_note
    );
    let _ = writeln!(out, "# tau1: {}", table.tau1);
    let _ = writeln!(out, "# places: {places}");
    match format {
        OutputFormat::Csv => {
            out.push_str("mu");
            for &c in &cols {
                out.push(',');
                out.push_str(&table.tau_labels[c]);
            }
            out.push('\n');
            for &r in &rows {
                out.push_str(&sci(table.mus[r], 4));
                for &c in &cols {
                    out.push(',');
                    out.push_str(&sci(table.display_value(r, c), places));
                }
                out.push('\n');
            }
        }
        OutputFormat::Text => {
            let width = places + 7;
            let _ = write!(out, "{:>10}", "mu \\ tau");
            for &c in &cols {
                let _ = write!(out, " {:>width$}", table.tau_labels[c]);
            }
            out.push('\n');
            for &r in &rows {
                let _ = write!(out, "{:>10}", sci(table.mus[r], 4));
                for &c in &cols {
                    let _ = write!(out, " {:>width$}", sci(table.display_value(r, c), places));
                }
                out.push('\n');
            }
        }
    }
    Ok(out)
}
