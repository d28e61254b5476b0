//! Single-order slab solves: problem definition, the quadrature → scatter →
//! eigensystem → interior pipeline, and edit tables on a (μ, τ) grid.

use crate::error::{Error, Result};
use crate::phase::{build_scatter_matrices, PhaseFunction};
use crate::quadrature::{DirectionSet, QuadratureKind, NODE_MATCH_TOL};
use crate::response::{
    assemble, beam_boundary, eigendecompose, BoundaryData, EigenSystem, ScaledCoefficients,
};

/// Albedos above this are run at this value; ω = 1 exactly leaves `A` defective.
pub const OMEGA_CLAMP: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum BoundarySource {
    /// Normally incident beam at `mu0` carrying `Σ w I⁺ = strength`.
    Beam { mu0: f64, strength: f64 },
    /// Angle-independent incoming intensities at the near and far faces.
    Uniform { plus: f64, minus: f64 },
}

#[derive(Debug, Clone)]
pub struct SlabProblem {
    pub tau0: f64,
    pub tau1: f64,
    pub omega: f64,
    pub phase: PhaseFunction,
    pub source: BoundarySource,
}

impl SlabProblem {
    pub fn new(
        tau0: f64,
        tau1: f64,
        omega: f64,
        phase: PhaseFunction,
        source: BoundarySource,
    ) -> Result<Self> {
        if !(tau0.is_finite() && tau1.is_finite() && tau1 > tau0) {
            return Err(Error::InvalidArgument(format!(
                "slab bounds must satisfy tau0 < tau1, got [{tau0}, {tau1}]"
            )));
        }
        if !(0.0..=1.0).contains(&omega) {
            return Err(Error::InvalidArgument(format!("albedo {omega} outside [0, 1]")));
        }
        match source {
            BoundarySource::Beam { mu0, strength } => {
                if !(mu0 > 0.0 && mu0 <= 1.0) || !(strength >= 0.0 && strength.is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "beam needs mu0 in (0, 1] and finite strength >= 0, got mu0 = {mu0}, strength = {strength}"
                    )));
                }
            }
            BoundarySource::Uniform { plus, minus } => {
                if !(plus >= 0.0 && minus >= 0.0 && plus.is_finite() && minus.is_finite()) {
                    return Err(Error::InvalidArgument(
                        "uniform incoming intensities must be finite and non-negative".into(),
                    ));
                }
            }
        }
        Ok(SlabProblem {
            tau0,
            tau1,
            omega,
            phase,
            source,
        })
    }

    /// Slab `[0, tau1]` lit by a beam of strength ½ along the normal, dark at the far face.
    pub fn normal_beam(tau1: f64, omega: f64, phase: PhaseFunction) -> Result<Self> {
        Self::new(
            0.0,
            tau1,
            omega,
            phase,
            BoundarySource::Beam {
                mu0: 1.0,
                strength: 0.5,
            },
        )
    }

    pub fn effective_omega(&self) -> f64 {
        self.omega.min(OMEGA_CLAMP)
    }

    pub fn boundary_data(&self, dirs: &DirectionSet) -> Result<BoundaryData> {
        match self.source {
            BoundarySource::Beam { mu0, strength } => beam_boundary(dirs, mu0, strength),
            BoundarySource::Uniform { plus, minus } => {
                BoundaryData::new(vec![plus; dirs.n()], vec![minus; dirs.n()])
            }
        }
    }
}

/// Which part of the intensity an edit reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntensityPart {
    Total,
    /// Total minus the uncollided incoming radiation.
    Diffuse,
}

impl std::str::FromStr for IntensityPart {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "total" => Ok(IntensityPart::Total),
            "diffuse" => Ok(IntensityPart::Diffuse),
            other => Err(Error::InvalidArgument(format!(
                "unknown intensity component '{other}' (expected total or diffuse)"
            ))),
        }
    }
}

impl std::fmt::Display for IntensityPart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            IntensityPart::Total => "total",
            IntensityPart::Diffuse => "diffuse",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionMeta {
    pub n: usize,
    pub n_real: usize,
    pub omega_requested: f64,
    pub omega_used: f64,
    pub omega_clamped: bool,
    /// Reciprocal condition estimate of the boundary coefficient system.
    pub rcond: f64,
}

pub struct SlabSolution {
    dirs: DirectionSet,
    es: EigenSystem,
    coeffs: ScaledCoefficients,
    bd: BoundaryData,
    /// `ω f(μ_m, 0) w_m`, the weights of the source function at μ = 0.
    source_weights: Vec<f64>,
    meta: SolutionMeta,
}

/// Quadrature of `kind` and order `n`, with `edit_mus` merged in as faux directions.
pub fn direction_set(kind: QuadratureKind, n: usize, edit_mus: &[f64]) -> Result<DirectionSet> {
    let rule = kind.half_rule(n)?;
    let edits: Vec<f64> = edit_mus.iter().map(|m| m.abs()).filter(|m| *m > 0.0).collect();
    DirectionSet::build(&rule, &edits)
}

pub fn solve(problem: &SlabProblem, dirs: DirectionSet) -> Result<SlabSolution> {
    let omega = problem.effective_omega();
    let scatter = build_scatter_matrices(&problem.phase, &dirs, omega)?;
    let tm = assemble(&scatter, &dirs)?;
    let es = eigendecompose(&tm)?;
    let bd = problem.boundary_data(&dirs)?;
    let coeffs = ScaledCoefficients::solve(&es, &bd, problem.tau0, problem.tau1)?;
    let source_weights = dirs
        .nodes()
        .iter()
        .zip(dirs.weights())
        .map(|(&mu, &w)| Ok(omega * w * problem.phase.eval(mu, 0.0)?))
        .collect::<Result<Vec<f64>>>()?;
    let meta = SolutionMeta {
        n: dirs.n(),
        n_real: dirs.real_count(),
        omega_requested: problem.omega,
        omega_used: omega,
        omega_clamped: omega != problem.omega,
        rcond: coeffs.rcond(),
    };
    Ok(SlabSolution {
        dirs,
        es,
        coeffs,
        bd,
        source_weights,
        meta,
    })
}

impl SlabSolution {
    pub fn meta(&self) -> &SolutionMeta {
        &self.meta
    }

    pub fn directions(&self) -> &DirectionSet {
        &self.dirs
    }

    pub fn eigensystem(&self) -> &EigenSystem {
        &self.es
    }

    pub fn boundary_data(&self) -> &BoundaryData {
        &self.bd
    }

    pub fn tau_bounds(&self) -> (f64, f64) {
        (self.coeffs.tau0, self.coeffs.tau1)
    }

    /// Total intensities `(I⁺(τ), I⁻(τ))` at every direction node.
    pub fn intensities(&self, tau: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        self.coeffs.evaluate(&self.es, tau)
    }

    /// Uncollided intensity at node `m`, travelling forward if `plus`.
    pub fn uncollided(&self, m: usize, plus: bool, tau: f64) -> f64 {
        let (tau0, tau1) = self.tau_bounds();
        let mu = self.dirs.nodes()[m];
        if plus {
            let v = self.bd.in_plus[m];
            if v == 0.0 { 0.0 } else { v * (-(tau - tau0) / mu).exp() }
        } else {
            let v = self.bd.in_minus[m];
            if v == 0.0 { 0.0 } else { v * (-(tau1 - tau) / mu).exp() }
        }
    }

    /// Scattering source at μ = 0, which is also the intensity there.
    fn grazing(plus: &[f64], minus: &[f64], weights: &[f64]) -> f64 {
        weights
            .iter()
            .zip(plus.iter().zip(minus))
            .map(|(w, (p, m))| w * (p + m))
            .sum()
    }

    fn node_of(&self, mu_abs: f64) -> Result<usize> {
        self.dirs.index_of(mu_abs).ok_or(Error::NotAQuadratureNode(mu_abs))
    }

    /// Intensity in signed direction `mu` at each depth in `taus`.
    pub fn values_at(&self, mus: &[f64], taus: &[f64], part: IntensityPart) -> Result<Vec<Vec<f64>>> {
        let idx = mus
            .iter()
            .map(|&mu| {
                if !(-1.0..=1.0).contains(&mu) {
                    Err(Error::InvalidArgument(format!("edit direction {mu} outside [-1, 1]")))
                } else if mu.abs() <= NODE_MATCH_TOL {
                    Ok(None)
                } else {
                    self.node_of(mu.abs()).map(Some)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let mut grid = vec![vec![0.0; taus.len()]; mus.len()];
        for (j, &tau) in taus.iter().enumerate() {
            let (plus, minus) = self.intensities(tau)?;
            for (i, (&mu, node)) in mus.iter().zip(&idx).enumerate() {
                grid[i][j] = match node {
                    None => Self::grazing(&plus, &minus, &self.source_weights),
                    Some(m) => {
                        let forward = mu > 0.0;
                        let total = if forward { plus[*m] } else { minus[*m] };
                        match part {
                            IntensityPart::Total => total,
                            IntensityPart::Diffuse => total - self.uncollided(*m, forward, tau),
                        }
                    }
                };
            }
        }
        Ok(grid)
    }

    pub fn table(&self, mus: &[f64], taus: &[f64], part: IntensityPart) -> Result<SolutionTable> {
        let values = self.values_at(mus, taus, part)?;
        let (tau0, tau1) = self.tau_bounds();
        Ok(SolutionTable {
            mus: mus.to_vec(),
            taus: taus.to_vec(),
            tau_labels: taus.iter().map(|t| t.to_string()).collect(),
            values,
            tau0,
            tau1,
            part,
            meta: self.meta.clone(),
        })
    }

    /// Exiting and incident partial currents `(out, in)` over real directions.
    pub fn partial_currents(&self) -> Result<(f64, f64)> {
        let (tau0, tau1) = self.tau_bounds();
        let (out_plus, _) = self.intensities(tau1)?;
        let (_, out_minus) = self.intensities(tau0)?;
        let mut exiting = 0.0;
        let mut incident = 0.0;
        for (m, (&mu, &w)) in self.dirs.nodes().iter().zip(self.dirs.weights()).enumerate() {
            exiting += w * mu * (out_plus[m] + out_minus[m]);
            incident += w * mu * (self.bd.in_plus[m] + self.bd.in_minus[m]);
        }
        Ok((exiting, incident))
    }
}

/// Edit values on a grid of signed directions (rows) and absolute depths (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionTable {
    pub mus: Vec<f64>,
    pub taus: Vec<f64>,
    /// Column headings; the plain depths unless a caller supplies labels.
    pub tau_labels: Vec<String>,
    /// `values[row][col]`
    pub values: Vec<Vec<f64>>,
    pub tau0: f64,
    pub tau1: f64,
    pub part: IntensityPart,
    pub meta: SolutionMeta,
}

impl SolutionTable {
    /// True when the cell carries radiation entering the slab at that face.
    pub fn is_incoming_cell(&self, row: usize, col: usize) -> bool {
        let mu = self.mus[row];
        let tau = self.taus[col];
        let tol = NODE_MATCH_TOL * self.tau1.abs().max(1.0);
        (mu > NODE_MATCH_TOL && (tau - self.tau0).abs() <= tol)
            || (mu < -NODE_MATCH_TOL && (tau - self.tau1).abs() <= tol)
    }

    /// The value as tables print it: incoming boundary cells read zero.
    pub fn display_value(&self, row: usize, col: usize) -> f64 {
        if self.is_incoming_cell(row, col) {
            0.0
        } else {
            self.values[row][col]
        }
    }

    pub fn flat_values(&self) -> Vec<f64> {
        self.values.iter().flatten().copied().collect()
    }
}

/// Convenience for a one-shot solve at a single order.
pub fn solve_at_order(
    problem: &SlabProblem,
    kind: QuadratureKind,
    n: usize,
    edit_mus: &[f64],
) -> Result<SlabSolution> {
    solve(problem, direction_set(kind, n, edit_mus)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs())
    }

    #[test]
    fn problem_validation() {
        let iso = PhaseFunction::isotropic;
        assert!(SlabProblem::normal_beam(0.0, 0.5, iso()).is_err());
        assert!(SlabProblem::normal_beam(1.0, 1.1, iso()).is_err());
        assert!(SlabProblem::new(0.0, 1.0, 0.5, iso(), BoundarySource::Uniform { plus: -1.0, minus: 0.0 }).is_err());
        assert!(SlabProblem::new(0.0, 1.0, 0.5, iso(), BoundarySource::Beam { mu0: 0.0, strength: 0.5 }).is_err());
    }

    #[test]
    fn omega_one_is_clamped_and_recorded() {
        let p = SlabProblem::normal_beam(1.0, 1.0, PhaseFunction::isotropic()).unwrap();
        let sol = solve_at_order(&p, QuadratureKind::Radau, 8, &[]).unwrap();
        assert!(sol.meta().omega_clamped);
        assert_eq!(sol.meta().omega_used, OMEGA_CLAMP);
        let p = SlabProblem::normal_beam(1.0, 0.9, PhaseFunction::isotropic()).unwrap();
        let sol = solve_at_order(&p, QuadratureKind::Radau, 8, &[]).unwrap();
        assert!(!sol.meta().omega_clamped);
    }

    #[test]
    fn pure_absorber_beam_table() {
        let p = SlabProblem::normal_beam(1.0, 0.0, PhaseFunction::isotropic()).unwrap();
        let sol = solve_at_order(&p, QuadratureKind::Radau, 4, &[0.5]).unwrap();
        let w1 = *sol.directions().weights().last().unwrap();
        let t = sol.table(&[-0.5, 0.0, 0.5, 1.0], &[0.0, 1.0], IntensityPart::Total).unwrap();
        assert!(close(t.values[3][1], 0.5 / w1 * (-1.0f64).exp(), 1e-13));
        assert!(t.values[0].iter().chain(&t.values[1]).chain(&t.values[2]).all(|v| v.abs() < 1e-15));
        let d = sol.table(&[1.0], &[0.0, 0.5, 1.0], IntensityPart::Diffuse).unwrap();
        assert!(d.values[0].iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn grazing_edit_is_the_source_function() {
        // with isotropic scattering, I(τ, 0) = (ω/2) Σ w (I⁺ + I⁻)
        let p = SlabProblem::normal_beam(2.0, 0.7, PhaseFunction::isotropic()).unwrap();
        let sol = solve_at_order(&p, QuadratureKind::Radau, 12, &[]).unwrap();
        let (plus, minus) = sol.intensities(0.8).unwrap();
        let w = sol.directions().weights();
        let expect: f64 = 0.35 * (0..12).map(|m| w[m] * (plus[m] + minus[m])).sum::<f64>();
        let got = sol.values_at(&[0.0], &[0.8], IntensityPart::Total).unwrap()[0][0];
        assert!(close(got, expect, 1e-14));
    }

    #[test]
    fn uniform_illumination_of_conservative_slab() {
        // isotropic incident intensity 1 on both faces of a conservative slab
        // keeps I ≡ 1 everywhere
        let p = SlabProblem::new(
            0.0,
            3.0,
            1.0,
            PhaseFunction::isotropic(),
            BoundarySource::Uniform { plus: 1.0, minus: 1.0 },
        )
        .unwrap();
        let sol = solve_at_order(&p, QuadratureKind::Gauss, 10, &[0.3, 1.0]).unwrap();
        let t = sol.table(&[-1.0, -0.3, 0.0, 0.3, 1.0], &[0.0, 1.5, 3.0], IntensityPart::Total).unwrap();
        for v in t.flat_values() {
            assert!((v - 1.0).abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn edits_must_be_present() {
        let p = SlabProblem::normal_beam(1.0, 0.5, PhaseFunction::isotropic()).unwrap();
        let sol = solve_at_order(&p, QuadratureKind::Radau, 4, &[]).unwrap();
        assert!(matches!(
            sol.values_at(&[0.123], &[0.5], IntensityPart::Total),
            Err(Error::NotAQuadratureNode(_))
        ));
        assert!(sol.values_at(&[1.0], &[1.5], IntensityPart::Total).is_err());
    }

    #[test]
    fn incoming_cells() {
        let p = SlabProblem::normal_beam(2.0, 0.5, PhaseFunction::isotropic()).unwrap();
        let sol = solve_at_order(&p, QuadratureKind::Radau, 4, &[0.5]).unwrap();
        let t = sol.table(&[-1.0, 0.0, 0.5], &[0.0, 1.0, 2.0], IntensityPart::Total).unwrap();
        assert!(t.is_incoming_cell(0, 2) && t.is_incoming_cell(2, 0));
        assert!(!t.is_incoming_cell(0, 0) && !t.is_incoming_cell(1, 0) && !t.is_incoming_cell(2, 1));
    }
}
