use std::path::Path;

use crate::error::{Error, Result};
use crate::solver::SolutionTable;

use super::config::Depth;
use super::format::{check_places, sci};

/// Cells below this count as zero in comparisons.
pub const ZERO_CELL: f64 = 1e-14;
/// Grid positions match within this tolerance.
pub const GRID_TOL: f64 = 1e-12;

const EMBEDDED: [(&str, &str); 4] = [
    ("ia", include_str!("../../data/tables/table_ia.csv")),
    ("ib", include_str!("../../data/tables/table_ib.csv")),
    ("iia", include_str!("../../data/tables/table_iia.csv")),
    ("iib", include_str!("../../data/tables/table_iib.csv")),
];

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTable {
    pub title: String,
    pub mus: Vec<f64>,
    pub taus: Vec<f64>,
    pub tau_labels: Vec<String>,
    /// `values[row][col]`
    pub values: Vec<Vec<f64>>,
    pub places: usize,
    pub tau1: f64,
}

fn header_value<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let rest = line.trim_start_matches('#').trim();
    let (k, v) = rest.split_once(':')?;
    (k.trim().eq_ignore_ascii_case(key)).then(|| v.trim())
}

impl ReferenceTable {
    pub fn embedded_names() -> impl Iterator<Item = &'static str> {
        EMBEDDED.iter().map(|(name, _)| *name)
    }

    pub fn embedded(name: &str) -> Result<Self> {
        let key = name.to_ascii_lowercase();
        let key = key.trim_start_matches("table_").trim_start_matches("table");
        EMBEDDED
            .iter()
            .find(|(n, _)| *n == key)
            .map(|(_, text)| Self::parse(text))
            .unwrap_or_else(|| {
                Err(Error::Table(format!(
                    "no embedded table named '{name}' (known: ia, ib, iia, iib)"
                )))
            })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| {
            Error::Table(format!("cannot read {}: {e}", path.as_ref().display()))
        })?;
        Self::parse(&text)
    }

    /// An embedded table name, or else a path.
    pub fn load(name: &str) -> Result<Self> {
        match Self::embedded(name) {
            Ok(t) => Ok(t),
            Err(_) => Self::from_path(name),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut title = String::new();
        let mut tau1: Option<f64> = None;
        let mut places: Option<usize> = None;
        let mut header: Option<Vec<String>> = None;
        let mut mus = Vec::new();
        let mut values = Vec::new();

        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('#') {
                if let Some(v) = header_value(line, "tau1") {
                    tau1 = Some(v.parse().map_err(|_| {
                        Error::Table(format!("line {}: bad tau1 '{v}'", lineno + 1))
                    })?);
                } else if let Some(v) = header_value(line, "places") {
                    places = Some(v.parse().map_err(|_| {
                        Error::Table(format!("line {}: bad places '{v}'", lineno + 1))
                    })?);
                } else if title.is_empty() {
                    title = line.trim_start_matches('#').trim().to_string();
                }
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            match header {
                None => header = Some(fields[1..].iter().map(|s| s.to_string()).collect()),
                Some(ref h) => {
                    if fields.len() != h.len() + 1 {
                        return Err(Error::Table(format!(
                            "line {}: expected {} cells, found {}",
                            lineno + 1,
                            h.len() + 1,
                            fields.len()
                        )));
                    }
                    let parse = |s: &str| {
                        s.parse::<f64>()
                            .ok()
                            .filter(|v| v.is_finite())
                            .ok_or_else(|| Error::Table(format!("line {}: bad number '{s}'", lineno + 1)))
                    };
                    mus.push(parse(fields[0])?);
                    values.push(fields[1..].iter().map(|s| parse(s)).collect::<Result<Vec<_>>>()?);
                }
            }
        }

        let labels = header.ok_or_else(|| Error::Table("missing header row".into()))?;
        if values.is_empty() || labels.is_empty() {
            return Err(Error::Table("table has no cells".into()));
        }
        let tau1 = tau1.ok_or_else(|| Error::Table("missing '# tau1:' header".into()))?;
        let places = places.ok_or_else(|| Error::Table("missing '# places:' header".into()))?;
        check_places(places).map_err(|e| Error::Table(e.to_string()))?;
        let taus = labels
            .iter()
            .map(|l| l.parse::<Depth>().map(|d| d.resolve(tau1)))
            .collect::<Result<Vec<_>>>()?;

        let table = ReferenceTable {
            title,
            mus,
            taus,
            tau_labels: labels,
            values,
            places,
            tau1,
        };
        table.check_incoming_zeros()?;
        Ok(table)
    }

    fn check_incoming_zeros(&self) -> Result<()> {
        for (r, &mu) in self.mus.iter().enumerate() {
            for (c, &tau) in self.taus.iter().enumerate() {
                let incoming = (mu > GRID_TOL && tau.abs() <= GRID_TOL)
                    || (mu < -GRID_TOL && (tau - self.tau1).abs() <= GRID_TOL * self.tau1.max(1.0));
                if incoming && self.values[r][c] != 0.0 {
                    return Err(Error::Table(format!(
                        "incoming boundary cell (mu = {mu}, tau = {tau}) must be zero"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discrepancy {
    pub mu: f64,
    pub tau: f64,
    pub tau_label: String,
    pub computed: f64,
    pub reference: f64,
    pub computed_rounded: String,
    pub reference_rounded: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub places: usize,
    pub cells: usize,
    pub discrepancies: Vec<Discrepancy>,
}

impl Comparison {
    pub fn is_clean(&self) -> bool {
        self.discrepancies.is_empty()
    }

    pub fn render(&self) -> String {
        let mut s = format!(
            "{} of {} cells disagree at {} significant digits\n",
            self.discrepancies.len(),
            self.cells,
            self.places
        );
        for d in &self.discrepancies {
            s.push_str(&format!(
                "  mu = {:>7}  tau = {:>5}  computed {}  reference {}\n",
                sci(d.mu, 4),
                d.tau_label,
                d.computed_rounded,
                d.reference_rounded
            ));
        }
        s
    }
}

fn match_axis(what: &str, ours: &[f64], theirs: &[f64], scale: f64) -> Result<Vec<usize>> {
    if ours.len() != theirs.len() {
        return Err(Error::GridMismatch(format!(
            "{what}: {} computed vs {} reference entries",
            ours.len(),
            theirs.len()
        )));
    }
    theirs
        .iter()
        .map(|&t| {
            ours.iter()
                .position(|&o| (o - t).abs() <= GRID_TOL * scale)
                .ok_or_else(|| Error::GridMismatch(format!("{what} {t} has no computed counterpart")))
        })
        .collect()
}

/// Compares an arbitrary value grid with a reference at `places` significant digits.
pub fn compare_grid(
    mus: &[f64],
    taus: &[f64],
    values: &[Vec<f64>],
    reference: &ReferenceTable,
    places: usize,
) -> Result<Comparison> {
    check_places(places)?;
    let rows = match_axis("direction", mus, &reference.mus, 1.0)?;
    let cols = match_axis("depth", taus, &reference.taus, reference.tau1.abs().max(1.0))?;
    let mut discrepancies = Vec::new();
    for (rr, &r) in rows.iter().enumerate() {
        for (rc, &c) in cols.iter().enumerate() {
            let computed = values[r][c];
            let expected = reference.values[rr][rc];
            let (a, b) = (sci(computed, places), sci(expected, places));
            let both_zero = computed.abs() < ZERO_CELL && expected.abs() < ZERO_CELL;
            if !both_zero && a != b {
                discrepancies.push(Discrepancy {
                    mu: reference.mus[rr],
                    tau: reference.taus[rc],
                    tau_label: reference.tau_labels[rc].clone(),
                    computed,
                    reference: expected,
                    computed_rounded: a,
                    reference_rounded: b,
                });
            }
        }
    }
    Ok(Comparison {
        places,
        cells: rows.len() * cols.len(),
        discrepancies,
    })
}

/// Compares the displayed values of `computed` (incoming cells zeroed).
pub fn compare(computed: &SolutionTable, reference: &ReferenceTable, places: usize) -> Result<Comparison> {
    let shown: Vec<Vec<f64>> = (0..computed.mus.len())
        .map(|r| (0..computed.taus.len()).map(|c| computed.display_value(r, c)).collect())
        .collect();
    compare_grid(&computed.mus, &computed.taus, &shown, reference, places)
}
