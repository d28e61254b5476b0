//! Convergence in quadrature order and Wynn-epsilon acceleration of the
//! per-edit sequences it produces.

use std::fmt;

use crate::error::{Error, Result};
use crate::quadrature::QuadratureKind;
use crate::solver::{direction_set, solve, IntensityPart, SlabProblem, SolutionTable};

/// Relative-error denominator floor.
pub const REL_FLOOR: f64 = 1e-300;
/// Edits smaller than this take no part in the stopping rule.
pub const NEGLIGIBLE_EDIT: f64 = 1e-14;
/// Epsilon-table growth stops at differences below this.
pub const WYNN_TINY: f64 = 1e-300;

/// Accelerated limit of `seq`: the last entry of the highest even column of
/// the epsilon table that could be built.
pub fn wynn_epsilon(seq: &[f64]) -> Result<f64> {
    if seq.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "Wynn epsilon needs at least 3 terms, got {}",
            seq.len()
        )));
    }
    let mut prev = vec![0.0; seq.len() + 1];
    let mut cur = seq.to_vec();
    let mut best = *seq.last().unwrap();
    let mut column = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let den = cur[i + 1] - cur[i];
            if den.abs() < WYNN_TINY {
                return Ok(best);
            }
            next.push(prev[i + 1] + 1.0 / den);
        }
        column += 1;
        if column % 2 == 0 {
            best = *next.last().unwrap();
        }
        prev = cur;
        cur = next;
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schedule {
    pub n_start: usize,
    pub n_step: usize,
    pub n_max: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            n_start: 50,
            n_step: 25,
            n_max: 400,
        }
    }
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if self.n_start < 2 || self.n_step < 1 || self.n_max < self.n_start {
            return Err(Error::InvalidArgument(format!(
                "schedule needs n_start >= 2, n_step >= 1, n_max >= n_start; got ({}, {}, {})",
                self.n_start, self.n_step, self.n_max
            )));
        }
        Ok(())
    }

    pub fn orders(&self) -> impl Iterator<Item = usize> {
        (self.n_start..=self.n_max).step_by(self.n_step)
    }
}

/// Edit grid: signed directions and absolute depths.
#[derive(Debug, Clone, PartialEq)]
pub struct EditGrid {
    pub mus: Vec<f64>,
    pub taus: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub orders: Vec<usize>,
    /// Row-major edit values per order, matching `grid`.
    pub edit_snapshots: Vec<Vec<f64>>,
    pub final_rel_err: f64,
    pub converged: bool,
    /// Per-edit Wynn-epsilon limits, once three or more orders are available.
    pub accelerated: Option<Vec<f64>>,
    pub grid: EditGrid,
    /// Table at the last successful order.
    pub last_table: Option<SolutionTable>,
}

impl ConvergenceReport {
    fn empty(grid: EditGrid) -> Self {
        ConvergenceReport {
            orders: Vec::new(),
            edit_snapshots: Vec::new(),
            final_rel_err: f64::INFINITY,
            converged: false,
            accelerated: None,
            grid,
            last_table: None,
        }
    }

    /// Accelerated values laid out like the edit grid.
    pub fn accelerated_grid(&self) -> Option<Vec<Vec<f64>>> {
        let cols = self.grid.taus.len();
        self.accelerated
            .as_ref()
            .map(|v| v.chunks(cols.max(1)).map(|c| c.to_vec()).collect())
    }

    fn accelerate(&mut self) {
        if self.edit_snapshots.len() < 3 {
            self.accelerated = None;
            return;
        }
        let edits = self.edit_snapshots[0].len();
        let per_edit = (0..edits)
            .map(|k| {
                let seq: Vec<f64> = self.edit_snapshots.iter().map(|s| s[k]).collect();
                wynn_epsilon(&seq).expect("sequence has at least 3 terms")
            })
            .collect();
        self.accelerated = Some(per_edit);
    }
}

/// A failed solve inside a sweep, with everything gathered before it.
#[derive(Debug)]
pub struct ConvergeFailure {
    pub error: Error,
    pub partial: ConvergenceReport,
}

impl fmt::Display for ConvergeFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (after {} successful orders)", self.error, self.partial.orders.len())
    }
}

impl std::error::Error for ConvergeFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<ConvergeFailure> for Error {
    fn from(f: ConvergeFailure) -> Self {
        f.error
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergeOptions {
    pub tol: f64,
    pub schedule: Schedule,
    pub part: IntensityPart,
    /// Solve the next order on a second thread while the current one is judged.
    pub speculative: bool,
}

impl Default for ConvergeOptions {
    fn default() -> Self {
        ConvergeOptions {
            tol: 1e-7,
            schedule: Schedule::default(),
            part: IntensityPart::Diffuse,
            speculative: false,
        }
    }
}

fn solve_table(
    problem: &SlabProblem,
    kind: QuadratureKind,
    n: usize,
    grid: &EditGrid,
    part: IntensityPart,
) -> Result<SolutionTable> {
    let dirs = direction_set(kind, n, &grid.mus)?;
    let sol = solve(problem, dirs)?;
    let table = sol.table(&grid.mus, &grid.taus, part)?;
    if table.flat_values().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("edit values"));
    }
    Ok(table)
}

/// Largest relative change between two snapshots over the edits that count.
fn relative_change(prev: &[f64], cur: &[f64], counted: &[bool]) -> f64 {
    prev.iter()
        .zip(cur)
        .zip(counted)
        .filter(|(_, &c)| c)
        .map(|((p, v), _)| {
            if v.abs() < NEGLIGIBLE_EDIT {
                0.0
            } else {
                (v - p).abs() / v.abs().max(REL_FLOOR)
            }
        })
        .fold(0.0, f64::max)
}

/// Raises the quadrature order along `opts.schedule` until successive edit
/// tables agree to `opts.tol`. Cells holding incoming boundary data are not
/// part of the stopping rule.
pub fn converge(
    problem: &SlabProblem,
    kind: QuadratureKind,
    grid: &EditGrid,
    opts: &ConvergeOptions,
) -> std::result::Result<ConvergenceReport, ConvergeFailure> {
    let mut report = ConvergenceReport::empty(grid.clone());
    let fail = |error: Error, partial: ConvergenceReport| ConvergeFailure { error, partial };
    if !(opts.tol > 0.0) {
        return Err(fail(
            Error::InvalidArgument(format!("tolerance must be positive, got {}", opts.tol)),
            report,
        ));
    }
    if let Err(e) = opts.schedule.validate() {
        return Err(fail(e, report));
    }

    let orders: Vec<usize> = opts.schedule.orders().collect();
    let mut counted: Option<Vec<bool>> = None;
    let mut i = 0;
    while i < orders.len() {
        // results for orders[i] and, when speculating, orders[i + 1]
        let batch: Vec<(usize, Result<SolutionTable>)> = if opts.speculative && i + 1 < orders.len() {
            let (a, b) = (orders[i], orders[i + 1]);
            let (ra, rb) = std::thread::scope(|s| {
                let hb = s.spawn(|| solve_table(problem, kind, b, grid, opts.part));
                let ra = solve_table(problem, kind, a, grid, opts.part);
                let rb = hb.join().unwrap_or_else(|_| Err(Error::EigenFailure));
                (ra, rb)
            });
            vec![(a, ra), (b, rb)]
        } else {
            vec![(orders[i], solve_table(problem, kind, orders[i], grid, opts.part))]
        };

        for (n, result) in batch {
            i += 1;
            let table = match result {
                Ok(t) => t,
                Err(e) => {
                    report.converged = false;
                    report.accelerate();
                    return Err(fail(
                        Error::AtOrder {
                            n,
                            source: Box::new(e),
                        },
                        report,
                    ));
                }
            };
            let values = table.flat_values();
            let mask = counted.get_or_insert_with(|| {
                (0..table.mus.len())
                    .flat_map(|r| (0..table.taus.len()).map(move |c| (r, c)))
                    .map(|(r, c)| !table.is_incoming_cell(r, c))
                    .collect()
            });
            if let Some(prev) = report.edit_snapshots.last() {
                report.final_rel_err = relative_change(prev, &values, mask);
            }
            report.orders.push(n);
            report.edit_snapshots.push(values);
            report.last_table = Some(table);
            if report.orders.len() >= 2 && report.final_rel_err <= opts.tol {
                report.converged = true;
                report.accelerate();
                return Ok(report);
            }
        }
    }
    report.accelerate();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::PhaseFunction;

    #[test]
    fn wynn_constant_sequence() {
        assert_eq!(wynn_epsilon(&[3.25, 3.25, 3.25, 3.25]).unwrap(), 3.25);
    }

    #[test]
    fn wynn_geometric_is_exact() {
        assert_eq!(wynn_epsilon(&[1.0, 1.5, 1.75]).unwrap(), 2.0);
    }

    #[test]
    fn wynn_rejects_short_input() {
        assert!(wynn_epsilon(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn schedule_validation() {
        assert!(Schedule { n_start: 1, n_step: 1, n_max: 4 }.validate().is_err());
        assert!(Schedule { n_start: 4, n_step: 0, n_max: 8 }.validate().is_err());
        let s = Schedule { n_start: 8, n_step: 8, n_max: 30 };
        assert_eq!(s.orders().collect::<Vec<_>>(), vec![8, 16, 24]);
    }

    #[test]
    fn pure_absorber_converges_at_second_order() {
        let p = SlabProblem::normal_beam(1.0, 0.0, PhaseFunction::isotropic()).unwrap();
        let grid = EditGrid {
            mus: vec![-0.5, 0.5, 1.0],
            taus: vec![0.0, 0.5, 1.0],
        };
        let opts = ConvergeOptions {
            tol: 1e-12,
            schedule: Schedule { n_start: 4, n_step: 2, n_max: 20 },
            part: IntensityPart::Diffuse,
            speculative: false,
        };
        let r = converge(&p, QuadratureKind::Radau, &grid, &opts).unwrap();
        assert!(r.converged);
        assert_eq!(r.orders, vec![4, 6]);
    }

    #[test]
    fn unconverged_sweep_is_reported_not_raised() {
        let p = SlabProblem::normal_beam(2.0, 0.9, PhaseFunction::linear(1.0).unwrap()).unwrap();
        let grid = EditGrid {
            mus: vec![-1.0, 0.5],
            taus: vec![0.0, 1.0],
        };
        let opts = ConvergeOptions {
            tol: 1e-15,
            schedule: Schedule { n_start: 4, n_step: 2, n_max: 10 },
            ..Default::default()
        };
        let r = converge(&p, QuadratureKind::Radau, &grid, &opts).unwrap();
        assert!(!r.converged);
        assert_eq!(r.orders, vec![4, 6, 8, 10]);
        assert!(r.final_rel_err > 1e-15);
        assert_eq!(r.accelerated.as_ref().unwrap().len(), 4);
    }

    #[test]
    fn failure_carries_order_and_partial_report() {
        // an edit depth outside the slab fails at the very first order
        let p = SlabProblem::normal_beam(1.0, 0.5, PhaseFunction::isotropic()).unwrap();
        let grid = EditGrid {
            mus: vec![1.0],
            taus: vec![2.0],
        };
        let opts = ConvergeOptions {
            schedule: Schedule { n_start: 4, n_step: 4, n_max: 12 },
            ..Default::default()
        };
        let f = converge(&p, QuadratureKind::Radau, &grid, &opts).unwrap_err();
        assert!(matches!(f.error, Error::AtOrder { n: 4, .. }));
        assert!(f.partial.orders.is_empty() && !f.partial.converged);
    }

    #[test]
    fn speculative_sweep_matches_sequential() {
        let p = SlabProblem::normal_beam(3.0, 0.8, PhaseFunction::linear(0.6).unwrap()).unwrap();
        let grid = EditGrid {
            mus: vec![-1.0, -0.25, 0.0, 0.25, 1.0],
            taus: vec![0.0, 1.5, 3.0],
        };
        let base = ConvergeOptions {
            tol: 1e-6,
            schedule: Schedule { n_start: 4, n_step: 3, n_max: 40 },
            ..Default::default()
        };
        let seq = converge(&p, QuadratureKind::Radau, &grid, &base).unwrap();
        let ahead = converge(
            &p,
            QuadratureKind::Radau,
            &grid,
            &ConvergeOptions { speculative: true, ..base },
        )
        .unwrap();
        assert_eq!(seq.orders, ahead.orders);
        assert_eq!(seq.edit_snapshots, ahead.edit_snapshots);
        assert_eq!(seq.accelerated, ahead.accelerated);
        assert_eq!(seq.converged, ahead.converged);
    }
}
