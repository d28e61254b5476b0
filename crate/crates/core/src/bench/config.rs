use std::path::PathBuf;
use std::str::FromStr;

use crate::accel::{converge, ConvergeFailure, ConvergeOptions, ConvergenceReport, EditGrid, Schedule};
use crate::error::{Error, Result};
use crate::phase::PhaseFunction;
use crate::quadrature::QuadratureKind;
use crate::solver::{solve_at_order, IntensityPart, SlabProblem, SolutionTable};

use super::reference::ReferenceTable;

#[derive(Debug, Clone, PartialEq)]
pub enum PhaseSource {
    Isotropic,
    Linear(f64),
    CloudC1,
    File(PathBuf),
}

impl FromStr for PhaseSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        if lower == "isotropic" {
            Ok(PhaseSource::Isotropic)
        } else if lower == "cloudc1" {
            Ok(PhaseSource::CloudC1)
        } else if let Some(b) = lower.strip_prefix("linear:") {
            b.parse()
                .map(PhaseSource::Linear)
                .map_err(|_| Error::InvalidArgument(format!("bad linear coefficient in '{s}'")))
        } else if s.is_empty() {
            Err(Error::InvalidArgument("empty phase source".into()))
        } else {
            Ok(PhaseSource::File(PathBuf::from(s)))
        }
    }
}

impl PhaseSource {
    pub fn load(&self) -> Result<PhaseFunction> {
        match self {
            PhaseSource::Isotropic => Ok(PhaseFunction::isotropic()),
            PhaseSource::Linear(b1) => PhaseFunction::linear(*b1),
            PhaseSource::CloudC1 => PhaseFunction::cloudc1(),
            PhaseSource::File(path) => PhaseFunction::from_path(path, false),
        }
    }
}

/// An edit depth: a fraction of τ₁, τ₁ itself, or an absolute optical depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Depth {
    Fraction(u32, u32),
    Tau1,
    Absolute(f64),
}

impl FromStr for Depth {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidArgument(format!("cannot read depth '{s}'"));
        if s.eq_ignore_ascii_case("tau1") {
            return Ok(Depth::Tau1);
        }
        if let Some((a, b)) = s.split_once('/') {
            let num: u32 = a.trim().parse().map_err(|_| bad())?;
            let den: u32 = b.trim().parse().map_err(|_| bad())?;
            if den == 0 || num > den {
                return Err(Error::InvalidArgument(format!(
                    "fractional depth '{s}' must lie in [0, 1]"
                )));
            }
            return Ok(Depth::Fraction(num, den));
        }
        let v: f64 = s.parse().map_err(|_| bad())?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(bad());
        }
        Ok(Depth::Absolute(v))
    }
}

impl Depth {
    pub fn resolve(&self, tau1: f64) -> f64 {
        match *self {
            Depth::Fraction(a, b) => tau1 * a as f64 / b as f64,
            Depth::Tau1 => tau1,
            Depth::Absolute(v) => v,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Depth::Fraction(a, b) => format!("{a}/{b}"),
            Depth::Tau1 => "tau1".into(),
            Depth::Absolute(v) => v.to_string(),
        }
    }
}

/// Comma-separated list of `T`.
pub fn parse_list<T: FromStr>(s: &str) -> std::result::Result<Vec<T>, T::Err> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(|p| p.trim().parse()).collect()
}

/// μ = −1, −0.8, …, 1.
pub fn fifth_cosines() -> Vec<f64> {
    (-5..=5).map(|k| k as f64 / 5.0).collect()
}

/// μ = −1, −0.9, …, 1.
pub fn tenth_cosines() -> Vec<f64> {
    (-10..=10).map(|k| k as f64 / 10.0).collect()
}

pub fn asymmetric_depths() -> Vec<Depth> {
    vec![
        Depth::Absolute(0.0),
        Depth::Fraction(1, 20),
        Depth::Fraction(1, 5),
        Depth::Fraction(1, 2),
        Depth::Fraction(3, 4),
        Depth::Tau1,
    ]
}

pub fn uniform_depths() -> Vec<Depth> {
    let mut d = vec![Depth::Absolute(0.0)];
    d.extend((1..5).map(|k| Depth::Fraction(k, 5)));
    d.push(Depth::Tau1);
    d
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub tau1: f64,
    pub omega: f64,
    pub phase_source: PhaseSource,
    pub quad: QuadratureKind,
    pub edit_mus: Vec<f64>,
    pub edit_taus: Vec<Depth>,
    pub tol: f64,
    pub schedule: Schedule,
    pub part: IntensityPart,
}

impl Default for BenchmarkConfig {
    /// Conservative 64 mfp slab with the cloud kernel, edited on the asymmetric depth grid.
    fn default() -> Self {
        BenchmarkConfig {
            tau1: 64.0,
            omega: 1.0,
            phase_source: PhaseSource::CloudC1,
            quad: QuadratureKind::Radau,
            edit_mus: fifth_cosines(),
            edit_taus: asymmetric_depths(),
            tol: 5e-8,
            schedule: Schedule::default(),
            part: IntensityPart::Diffuse,
        }
    }
}

impl BenchmarkConfig {
    /// Default problem edited on the grid of `reference`.
    pub fn for_reference(reference: &ReferenceTable) -> Result<Self> {
        let edit_taus = reference
            .tau_labels
            .iter()
            .map(|l| l.parse())
            .collect::<Result<Vec<Depth>>>()?;
        Ok(BenchmarkConfig {
            tau1: reference.tau1,
            edit_mus: reference.mus.clone(),
            edit_taus,
            ..Default::default()
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau1 > 0.0 && self.tau1.is_finite()) {
            return Err(Error::InvalidArgument(format!("tau1 must be positive, got {}", self.tau1)));
        }
        if !(0.0..=1.0).contains(&self.omega) {
            return Err(Error::InvalidArgument(format!("omega {} outside [0, 1]", self.omega)));
        }
        if let Some(mu) = self.edit_mus.iter().find(|m| !(-1.0..=1.0).contains(*m)) {
            return Err(Error::InvalidArgument(format!("edit direction {mu} outside [-1, 1]")));
        }
        if let Some(d) = self.edit_taus.iter().find(|d| d.resolve(self.tau1) > self.tau1) {
            return Err(Error::InvalidArgument(format!(
                "edit depth {} exceeds tau1 = {}",
                d.label(),
                self.tau1
            )));
        }
        if self.edit_mus.is_empty() || self.edit_taus.is_empty() {
            return Err(Error::InvalidArgument("edit grid is empty".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", self.tol)));
        }
        self.schedule.validate()
    }

    pub fn problem(&self) -> Result<SlabProblem> {
        self.validate()?;
        SlabProblem::normal_beam(self.tau1, self.omega, self.phase_source.load()?)
    }

    pub fn grid(&self) -> EditGrid {
        EditGrid {
            mus: self.edit_mus.clone(),
            taus: self.edit_taus.iter().map(|d| d.resolve(self.tau1)).collect(),
        }
    }

    fn labelled(&self, mut table: SolutionTable) -> SolutionTable {
        table.tau_labels = self.edit_taus.iter().map(Depth::label).collect();
        table
    }

    /// Edit table at a single quadrature order.
    pub fn solve_at(&self, n: usize) -> Result<SolutionTable> {
        let problem = self.problem()?;
        let grid = self.grid();
        let sol = solve_at_order(&problem, self.quad, n, &grid.mus)?;
        Ok(self.labelled(sol.table(&grid.mus, &grid.taus, self.part)?))
    }

    /// Convergence sweep; the table is the one at the last order reached.
    pub fn run(&self) -> Result<(SolutionTable, ConvergenceReport)> {
        self.run_with(false).map_err(Error::from)
    }

    pub fn run_with(
        &self,
        speculative: bool,
    ) -> std::result::Result<(SolutionTable, ConvergenceReport), ConvergeFailure> {
        let setup_failure = |error| ConvergeFailure {
            error,
            partial: ConvergenceReport {
                orders: Vec::new(),
                edit_snapshots: Vec::new(),
                final_rel_err: f64::INFINITY,
                converged: false,
                accelerated: None,
                grid: self.grid(),
                last_table: None,
            },
        };
        let problem = self.problem().map_err(setup_failure)?;
        let opts = ConvergeOptions {
            tol: self.tol,
            schedule: self.schedule,
            part: self.part,
            speculative,
        };
        let mut report = converge(&problem, self.quad, &self.grid(), &opts)?;
        let table = report
            .last_table
            .take()
            .map(|t| self.labelled(t))
            .expect("a successful sweep solves at least one order");
        report.last_table = Some(table.clone());
        Ok((table, report))
    }
}
