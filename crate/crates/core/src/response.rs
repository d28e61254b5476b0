//! Transport matrix, its eigendecomposition, and the scaled response-matrix
//! solution of the discrete ordinates equations.
//!
//! With `I = [I⁺; I⁻]` the angularly discretized equations read
//! `dI/dτ = A I`, `A = [[-att, coup], [-coup, att]]`, where
//! `att = M⁻¹(I − C⁺⁺W)` and `coup = M⁻¹ C⁺⁻W`. Diagonalizing
//! `A = T λ T⁻¹` with the negative eigenvalues first gives the formal
//! solution, whose positive exponentials overflow in thick slabs. Inserting
//! `diag(I, Γ⁻(τ₁ − τ₀)) · diag(I, Γ⁻(τ₁ − τ₀))⁻¹` between the exponential and
//! `T⁻¹` turns every exponential into a decaying one. What remains is
//!
//! ```text
//! I⁺(τ) = T₁ Γ⁻(τ − τ₀) a + T₂ Γ⁻(τ₁ − τ) b
//! I⁻(τ) = T₃ Γ⁻(τ − τ₀) a + T₄ Γ⁻(τ₁ − τ) b
//! ```
//!
//! with the coefficient vectors `a`, `b` fixed by the incoming intensities at
//! both faces. Evaluated at the faces it yields the response matrix `R`
//! mapping `[I⁺(τ₀); I⁻(τ₁)]` to `[I⁺(τ₁); I⁻(τ₀)]`.

use faer::diag::Diag;
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self, ComputeEigenvectors};
use faer::{Mat, Par};

use crate::error::{Error, Result};
use crate::linalg::{block, from_blocks, mat_vec, Lu};
use crate::phase::ScatterMatrices;
use crate::quadrature::DirectionSet;

/// Imaginary parts up to `REAL_REL_TOL·|Re| + REAL_ABS_TOL` are discarded.
pub const REAL_REL_TOL: f64 = 1e-10;
pub const REAL_ABS_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct TransportMatrix {
    pub att: Mat<f64>,
    pub coup: Mat<f64>,
    pub full: Mat<f64>,
}

impl TransportMatrix {
    pub fn n(&self) -> usize {
        self.att.nrows()
    }
}

pub fn assemble(scatter: &ScatterMatrices, dirs: &DirectionSet) -> Result<TransportMatrix> {
    let n = dirs.n();
    if scatter.n() != n || scatter.pm.nrows() != n {
        return Err(Error::DimensionMismatch {
            what: "scatter matrices vs direction set",
            expected: n,
            actual: scatter.n(),
        });
    }
    let mu = dirs.nodes();
    let att = Mat::from_fn(n, n, |i, j| {
        let identity = if i == j { 1.0 } else { 0.0 };
        (identity - scatter.pp[(i, j)]) / mu[i]
    });
    let coup = Mat::from_fn(n, n, |i, j| scatter.pm[(i, j)] / mu[i]);
    let neg_att = Mat::from_fn(n, n, |i, j| -att[(i, j)]);
    let neg_coup = Mat::from_fn(n, n, |i, j| -coup[(i, j)]);
    let full = from_blocks(&neg_att, &coup, &neg_coup, &att);
    if !full.as_ref().is_all_finite() {
        return Err(Error::NonFinite("transport matrix"));
    }
    Ok(TransportMatrix { att, coup, full })
}

/// Eigenvalues split by sign and the matching partitions of the eigenvector
/// matrix `T = [[t1, t2], [t3, t4]]`. Column `k` of `t1`/`t3` belongs to
/// `lambdas_neg[k]`, column `k` of `t2`/`t4` to `lambdas_pos[k]`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub lambdas_neg: Vec<f64>,
    pub lambdas_pos: Vec<f64>,
    pub t1: Mat<f64>,
    pub t2: Mat<f64>,
    pub t3: Mat<f64>,
    pub t4: Mat<f64>,
}

impl EigenSystem {
    pub fn n(&self) -> usize {
        self.lambdas_neg.len()
    }

    /// Decay rates `|λ|` bound to the columns of the left partition.
    pub fn rates_neg(&self) -> Vec<f64> {
        self.lambdas_neg.iter().map(|l| -l).collect()
    }

    /// Decay rates bound to the columns of the right partition.
    pub fn rates_pos(&self) -> Vec<f64> {
        self.lambdas_pos.clone()
    }

    pub fn eigenvector_matrix(&self) -> Mat<f64> {
        from_blocks(&self.t1, &self.t2, &self.t3, &self.t4)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.lambdas_neg.iter().chain(&self.lambdas_pos).copied().collect()
    }

    /// `T diag(λ) T⁻¹`, formed with a transposed solve.
    pub fn reconstruct(&self) -> Result<Mat<f64>> {
        let t = self.eigenvector_matrix();
        let lams = self.eigenvalues();
        let t_lambda = Mat::from_fn(t.nrows(), t.ncols(), |i, j| t[(i, j)] * lams[j]);
        let lu = Lu::new(&t, "eigenvector matrix")?;
        let rhs = t_lambda.transpose().to_owned();
        Ok(lu.solve_transpose(&rhs).transpose().to_owned())
    }
}

pub fn eigendecompose(tm: &TransportMatrix) -> Result<EigenSystem> {
    let a = &tm.full;
    let dim = a.nrows();
    let n = tm.n();
    if !a.as_ref().is_all_finite() {
        return Err(Error::NonFinite("transport matrix"));
    }

    let mut s_re = Diag::<f64>::zeros(dim);
    let mut s_im = Diag::<f64>::zeros(dim);
    let mut u = Mat::<f64>::zeros(dim, dim);
    let par = Par::Seq;
    let mut mem = MemBuffer::new(evd::evd_scratch::<f64>(
        dim,
        ComputeEigenvectors::No,
        ComputeEigenvectors::Yes,
        par,
        Default::default(),
    ));
    evd::evd_real(
        a.as_ref(),
        s_re.as_mut(),
        s_im.as_mut(),
        None,
        Some(u.as_mut()),
        par,
        MemStack::new(&mut mem),
        Default::default(),
    )
    .map_err(|_| Error::EigenFailure)?;

    let re = s_re.column_vector();
    let im = s_im.column_vector();
    // (eigenvalue, column of u holding its real eigenvector)
    let mut modes: Vec<(f64, usize)> = Vec::with_capacity(dim);
    let mut k = 0;
    while k < dim {
        let (lr, li) = (re[k], im[k]);
        if li.abs() > REAL_REL_TOL * lr.abs() + REAL_ABS_TOL {
            return Err(Error::ComplexEigenvalue { re: lr, im: li });
        }
        if li != 0.0 && k + 1 < dim {
            // conjugate pair stored as (real part, imaginary part) columns;
            // both span the nearly real invariant subspace
            modes.push((lr, k));
            modes.push((re[k + 1], k + 1));
            k += 2;
        } else {
            modes.push((lr, k));
            k += 1;
        }
    }
    modes.sort_by(|x, y| x.0.total_cmp(&y.0));

    let negatives = modes.iter().filter(|m| m.0 < 0.0).count();
    let positives = modes.iter().filter(|m| m.0 > 0.0).count();
    if negatives != n || positives != n {
        return Err(Error::SpectrumSplit {
            expected: n,
            found: negatives,
        });
    }

    let mut t = Mat::<f64>::zeros(dim, dim);
    for (col, &(_, src)) in modes.iter().enumerate() {
        let norm = (0..dim).map(|i| u[(i, src)] * u[(i, src)]).sum::<f64>().sqrt();
        // fix the sign so the largest component is positive
        let pivot = (0..dim)
            .max_by(|&i, &j| u[(i, src)].abs().total_cmp(&u[(j, src)].abs()))
            .unwrap_or(0);
        let sign = if u[(pivot, src)] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..dim {
            t[(i, col)] = sign * u[(i, src)] / norm;
        }
    }

    Ok(EigenSystem {
        lambdas_neg: modes[..n].iter().map(|m| m.0).collect(),
        lambdas_pos: modes[n..].iter().map(|m| m.0).collect(),
        t1: block(&t, 0, 0, n, n),
        t2: block(&t, 0, n, n, n),
        t3: block(&t, n, 0, n, n),
        t4: block(&t, n, n, n, n),
    })
}

/// Diagonal of `Γ⁻(t) = diag{e^{-r_k t}}`. Only non-negative distances and
/// positive rates are accepted, so no exponent argument is ever positive.
pub fn gamma_minus(rates: &[f64], t: f64) -> Result<Vec<f64>> {
    if !(t >= 0.0) {
        return Err(Error::NegativeDistance(t));
    }
    rates
        .iter()
        .map(|&r| {
            if !(r > 0.0) {
                Err(Error::NonPositiveRate(r))
            } else {
                Ok((-r * t).exp())
            }
        })
        .collect()
}

fn scale_columns(m: &Mat<f64>, s: &[f64]) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s[j])
}

fn check_bounds(tau0: f64, tau1: f64) -> Result<()> {
    if !(tau1 > tau0) || !tau0.is_finite() || !tau1.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "slab bounds must satisfy tau0 < tau1, got [{tau0}, {tau1}]"
        )));
    }
    Ok(())
}

/// The incoming-data matrix `[[T₁, T₂Γ⁻(τ₁−τ₀)], [T₃Γ⁻(τ₁−τ₀), T₄]]`, factored.
struct BoundarySystem {
    lu: Lu,
    g_neg: Vec<f64>,
    g_pos: Vec<f64>,
}

impl BoundarySystem {
    fn new(es: &EigenSystem, tau0: f64, tau1: f64) -> Result<Self> {
        check_bounds(tau0, tau1)?;
        let width = tau1 - tau0;
        let g_neg = gamma_minus(&es.rates_neg(), width)?;
        let g_pos = gamma_minus(&es.rates_pos(), width)?;
        let m = from_blocks(
            &es.t1,
            &scale_columns(&es.t2, &g_pos),
            &scale_columns(&es.t3, &g_neg),
            &es.t4,
        );
        let lu = Lu::new(&m, "boundary coefficient system")?;
        Ok(BoundarySystem { lu, g_neg, g_pos })
    }
}

#[derive(Debug, Clone)]
pub struct ResponseMatrix {
    pub r: Mat<f64>,
    pub tau0: f64,
    pub tau1: f64,
}

impl ResponseMatrix {
    pub fn n(&self) -> usize {
        self.r.nrows() / 2
    }

    /// `∂I⁺(τ₁)/∂I⁺(τ₀)`
    pub fn transmission_plus(&self) -> Mat<f64> {
        block(&self.r, 0, 0, self.n(), self.n())
    }

    /// `∂I⁺(τ₁)/∂I⁻(τ₁)`
    pub fn reflection_far(&self) -> Mat<f64> {
        block(&self.r, 0, self.n(), self.n(), self.n())
    }

    /// `∂I⁻(τ₀)/∂I⁺(τ₀)`
    pub fn reflection_near(&self) -> Mat<f64> {
        block(&self.r, self.n(), 0, self.n(), self.n())
    }

    /// `∂I⁻(τ₀)/∂I⁻(τ₁)`
    pub fn transmission_minus(&self) -> Mat<f64> {
        block(&self.r, self.n(), self.n(), self.n(), self.n())
    }
}

/// Builds `R` from the eigensystem. `Γ⁻` factors are measured from `τ₀`.
pub fn response_matrix(es: &EigenSystem, tau0: f64, tau1: f64) -> Result<ResponseMatrix> {
    let sys = BoundarySystem::new(es, tau0, tau1)?;
    let outgoing = from_blocks(
        &scale_columns(&es.t1, &sys.g_neg),
        &es.t2,
        &es.t3,
        &scale_columns(&es.t4, &sys.g_pos),
    );
    // R = O B⁻¹  ⇔  Bᵀ Rᵀ = Oᵀ
    let rt = sys.lu.solve_transpose(&outgoing.transpose().to_owned());
    let r = rt.transpose().to_owned();
    if !r.as_ref().is_all_finite() {
        return Err(Error::NonFinite("response matrix"));
    }
    Ok(ResponseMatrix { r, tau0, tau1 })
}

/// Incoming intensities `I⁺(τ₀)` and `I⁻(τ₁)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub in_plus: Vec<f64>,
    pub in_minus: Vec<f64>,
}

impl BoundaryData {
    pub fn new(in_plus: Vec<f64>, in_minus: Vec<f64>) -> Result<Self> {
        if in_plus.len() != in_minus.len() {
            return Err(Error::DimensionMismatch {
                what: "incoming intensity vectors",
                expected: in_plus.len(),
                actual: in_minus.len(),
            });
        }
        if in_plus.iter().chain(&in_minus).any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument(
                "incoming intensities must be finite and non-negative".into(),
            ));
        }
        Ok(BoundaryData { in_plus, in_minus })
    }

    pub fn zeros(n: usize) -> Self {
        BoundaryData {
            in_plus: vec![0.0; n],
            in_minus: vec![0.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.in_plus.len()
    }

    fn stacked(&self) -> Vec<f64> {
        self.in_plus.iter().chain(&self.in_minus).copied().collect()
    }
}

/// Discrete delta at the real node `mu0`, normalized so `Σ w_m I⁺_m = strength`.
pub fn beam_boundary(dirs: &DirectionSet, mu0: f64, strength: f64) -> Result<BoundaryData> {
    let idx = dirs
        .index_of(mu0)
        .filter(|&i| !dirs.is_faux(i) && dirs.weights()[i] > 0.0)
        .ok_or(Error::NotAQuadratureNode(mu0))?;
    let mut bd = BoundaryData::zeros(dirs.n());
    bd.in_plus[idx] = strength / dirs.weights()[idx];
    BoundaryData::new(bd.in_plus, bd.in_minus)
}

/// Returns `(I⁺(τ₁), I⁻(τ₀))`.
pub fn solve_boundary(rm: &ResponseMatrix, bd: &BoundaryData) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = rm.n();
    if bd.n() != n {
        return Err(Error::DimensionMismatch {
            what: "boundary data vs response matrix",
            expected: n,
            actual: bd.n(),
        });
    }
    let out = mat_vec(&rm.r, &bd.stacked());
    let (plus, minus) = out.split_at(n);
    Ok((plus.to_vec(), minus.to_vec()))
}

/// The coefficient vectors `a`, `b` of the scaled interior representation,
/// solved once for a given set of incoming intensities.
#[derive(Debug, Clone)]
pub struct ScaledCoefficients {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub tau0: f64,
    pub tau1: f64,
    rates_neg: Vec<f64>,
    rates_pos: Vec<f64>,
    rcond: f64,
}

impl ScaledCoefficients {
    pub fn solve(es: &EigenSystem, bd: &BoundaryData, tau0: f64, tau1: f64) -> Result<Self> {
        let n = es.n();
        if bd.n() != n {
            return Err(Error::DimensionMismatch {
                what: "boundary data vs eigensystem",
                expected: n,
                actual: bd.n(),
            });
        }
        let sys = BoundarySystem::new(es, tau0, tau1)?;
        let ab = sys.lu.solve_vec(&bd.stacked());
        if ab.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("interior coefficients"));
        }
        let (a, b) = ab.split_at(n);
        Ok(ScaledCoefficients {
            a: a.to_vec(),
            b: b.to_vec(),
            tau0,
            tau1,
            rates_neg: es.rates_neg(),
            rates_pos: es.rates_pos(),
            rcond: sys.lu.rcond(),
        })
    }

    /// Reciprocal condition estimate of the coefficient system.
    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    /// `(I⁺(τ), I⁻(τ))`.
    pub fn evaluate(&self, es: &EigenSystem, tau: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        if !(tau >= self.tau0 && tau <= self.tau1) {
            return Err(Error::DepthOutOfSlab {
                tau,
                tau0: self.tau0,
                tau1: self.tau1,
            });
        }
        let g_neg = gamma_minus(&self.rates_neg, tau - self.tau0)?;
        let g_pos = gamma_minus(&self.rates_pos, self.tau1 - tau)?;
        let ga: Vec<f64> = self.a.iter().zip(&g_neg).map(|(x, g)| x * g).collect();
        let gb: Vec<f64> = self.b.iter().zip(&g_pos).map(|(x, g)| x * g).collect();
        let plus: Vec<f64> = mat_vec(&es.t1, &ga)
            .iter()
            .zip(mat_vec(&es.t2, &gb))
            .map(|(x, y)| x + y)
            .collect();
        let minus: Vec<f64> = mat_vec(&es.t3, &ga)
            .iter()
            .zip(mat_vec(&es.t4, &gb))
            .map(|(x, y)| x + y)
            .collect();
        if plus.iter().chain(&minus).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("interior intensity"));
        }
        Ok((plus, minus))
    }
}

/// Interior intensities `(I⁺(τ), I⁻(τ))` at each requested depth.
pub fn interior(
    es: &EigenSystem,
    bd: &BoundaryData,
    tau0: f64,
    tau1: f64,
    taus: &[f64],
) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    if let Some(&tau) = taus.iter().find(|&&t| !(t >= tau0 && t <= tau1)) {
        return Err(Error::DepthOutOfSlab { tau, tau0, tau1 });
    }
    let coeffs = ScaledCoefficients::solve(es, bd, tau0, tau1)?;
    taus.iter().map(|&t| coeffs.evaluate(es, t)).collect()
}

/// Interior intensities from the unscaled form `I(τ) = T e^{λ(τ−τ₀)} c`,
/// where `c = T⁻¹ I(τ₀)` is fixed by the incoming data. This carries the
/// growing exponentials explicitly and only serves as a cross-check on thin
/// slabs; it fails with [`Error::NonFinite`] once they overflow.
pub fn interior_unscaled(
    es: &EigenSystem,
    bd: &BoundaryData,
    tau0: f64,
    tau1: f64,
    taus: &[f64],
) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    check_bounds(tau0, tau1)?;
    let n = es.n();
    let width = tau1 - tau0;
    let grow_neg: Vec<f64> = es.lambdas_neg.iter().map(|l| (l * width).exp()).collect();
    let grow_pos: Vec<f64> = es.lambdas_pos.iter().map(|l| (l * width).exp()).collect();
    let m = from_blocks(
        &es.t1,
        &es.t2,
        &scale_columns(&es.t3, &grow_neg),
        &scale_columns(&es.t4, &grow_pos),
    );
    if !m.as_ref().is_all_finite() {
        return Err(Error::NonFinite("unscaled boundary system"));
    }
    let lu = Lu::new_unguarded(&m, "unscaled boundary system")?;
    let c = lu.solve_vec(&bd.stacked());
    let t = es.eigenvector_matrix();
    let lams = es.eigenvalues();
    taus.iter()
        .map(|&tau| {
            if !(tau >= tau0 && tau <= tau1) {
                return Err(Error::DepthOutOfSlab { tau, tau0, tau1 });
            }
            let modal: Vec<f64> = c
                .iter()
                .zip(&lams)
                .map(|(ci, l)| ci * (l * (tau - tau0)).exp())
                .collect();
            let full = mat_vec(&t, &modal);
            if full.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("unscaled interior intensity"));
            }
            Ok((full[..n].to_vec(), full[n..].to_vec()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::{build_scatter_matrices, PhaseFunction};
    use crate::quadrature::radau_right;

    fn system(pf: &PhaseFunction, n: usize, omega: f64) -> (DirectionSet, TransportMatrix) {
        let dirs = DirectionSet::from_rule(radau_right(n).unwrap());
        let sc = build_scatter_matrices(pf, &dirs, omega).unwrap();
        let tm = assemble(&sc, &dirs).unwrap();
        (dirs, tm)
    }

    #[test]
    fn pure_absorber_assembly() {
        let (dirs, tm) = system(&PhaseFunction::isotropic(), 3, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 / dirs.nodes()[i] } else { 0.0 };
                assert_eq!(tm.att[(i, j)], expect);
                assert_eq!(tm.coup[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn isotropic_conservative_assembly_entry() {
        let (_, tm) = system(&PhaseFunction::isotropic(), 2, 1.0);
        assert!((tm.att[(0, 0)] - 1.875).abs() < 1e-14);
    }

    #[test]
    fn full_matrix_block_signs() {
        let (_, tm) = system(&PhaseFunction::linear(1.2).unwrap(), 4, 0.7);
        let n = tm.n();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(tm.full[(i, j)], -tm.att[(i, j)]);
                assert_eq!(tm.full[(i, j + n)], tm.coup[(i, j)]);
                assert_eq!(tm.full[(i + n, j)], -tm.coup[(i, j)]);
                assert_eq!(tm.full[(i + n, j + n)], tm.att[(i, j)]);
            }
        }
    }

    #[test]
    fn assemble_rejects_mismatched_sizes() {
        let dirs2 = DirectionSet::from_rule(radau_right(2).unwrap());
        let dirs3 = DirectionSet::from_rule(radau_right(3).unwrap());
        let sc = build_scatter_matrices(&PhaseFunction::isotropic(), &dirs2, 0.5).unwrap();
        assert!(matches!(assemble(&sc, &dirs3), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn pure_absorber_spectrum() {
        let (_, tm) = system(&PhaseFunction::isotropic(), 2, 0.0);
        let es = eigendecompose(&tm).unwrap();
        let lams = es.eigenvalues();
        for (got, want) in lams.iter().zip([-3.0, -1.0, 1.0, 3.0]) {
            assert!((got - want).abs() < 1e-13, "{lams:?}");
        }
    }

    #[test]
    fn gamma_minus_contract() {
        assert_eq!(gamma_minus(&[1.0, 3.0], 0.0).unwrap(), vec![1.0, 1.0]);
        let g = gamma_minus(&[1.0, 3.0], 1.0).unwrap();
        assert_eq!(g, vec![(-1.0f64).exp(), (-3.0f64).exp()]);
        let deep = gamma_minus(&[0.5, 2.0, 1e4], 700.0).unwrap();
        assert!(deep.iter().all(|v| v.is_finite() && *v >= 0.0 && *v <= (-0.5f64 * 700.0).exp()));
        assert!(matches!(gamma_minus(&[1.0], -1e-15), Err(Error::NegativeDistance(_))));
        assert!(matches!(gamma_minus(&[0.0], 1.0), Err(Error::NonPositiveRate(_))));
    }

    #[test]
    fn pure_streaming_response() {
        let (_, tm) = system(&PhaseFunction::isotropic(), 2, 0.0);
        let es = eigendecompose(&tm).unwrap();
        let rm = response_matrix(&es, 0.0, 2.0).unwrap();
        let expect = [(-6.0f64).exp(), (-2.0f64).exp(), (-6.0f64).exp(), (-2.0f64).exp()];
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == j { expect[i] } else { 0.0 };
                assert!((rm.r[(i, j)] - e).abs() < 1e-15, "R[{i},{j}] = {}", rm.r[(i, j)]);
            }
        }
    }

    #[test]
    fn response_rejects_inverted_slab() {
        let (_, tm) = system(&PhaseFunction::isotropic(), 2, 0.5);
        let es = eigendecompose(&tm).unwrap();
        assert!(response_matrix(&es, 1.0, 1.0).is_err());
        assert!(response_matrix(&es, 2.0, 1.0).is_err());
    }

    #[test]
    fn zero_incoming_gives_zero_outgoing() {
        let (_, tm) = system(&PhaseFunction::linear(1.0).unwrap(), 4, 0.8);
        let es = eigendecompose(&tm).unwrap();
        let rm = response_matrix(&es, 0.0, 1.5).unwrap();
        let (p, m) = solve_boundary(&rm, &BoundaryData::zeros(4)).unwrap();
        assert!(p.iter().chain(&m).all(|v| *v == 0.0));
    }

    #[test]
    fn beam_attenuation_without_scattering() {
        let (dirs, tm) = system(&PhaseFunction::isotropic(), 3, 0.0);
        let es = eigendecompose(&tm).unwrap();
        let rm = response_matrix(&es, 0.0, 1.0).unwrap();
        let mut bd = BoundaryData::zeros(3);
        bd.in_plus[2] = 0.7;
        let (p, m) = solve_boundary(&rm, &bd).unwrap();
        assert_eq!(dirs.nodes()[2], 1.0);
        assert!((p[2] - 0.7 * (-1.0f64).exp()).abs() < 1e-15);
        assert!(p[..2].iter().chain(&m).all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn beam_boundary_discrete_delta() {
        let dirs = DirectionSet::from_rule(radau_right(2).unwrap());
        let bd = beam_boundary(&dirs, 1.0, 0.5).unwrap();
        assert_eq!(bd.in_plus[0], 0.0);
        assert!((bd.in_plus[1] - 2.0).abs() < 1e-14);
        assert_eq!(bd.in_minus, vec![0.0, 0.0]);
    }

    #[test]
    fn beam_boundary_rejects_faux_and_missing_nodes() {
        let rule = radau_right(4).unwrap();
        let dirs = DirectionSet::build(&rule, &[0.5]).unwrap();
        assert!(matches!(beam_boundary(&dirs, 0.5, 0.5), Err(Error::NotAQuadratureNode(_))));
        assert!(matches!(beam_boundary(&dirs, 0.77, 0.5), Err(Error::NotAQuadratureNode(_))));
    }

    #[test]
    fn boundary_data_validation() {
        assert!(BoundaryData::new(vec![1.0], vec![1.0, 2.0]).is_err());
        assert!(BoundaryData::new(vec![-1.0], vec![0.0]).is_err());
        assert!(BoundaryData::new(vec![f64::NAN], vec![0.0]).is_err());
    }

    #[test]
    fn interior_faces_reproduce_boundary_solution() {
        let (dirs, tm) = system(&PhaseFunction::linear(1.5).unwrap(), 6, 0.9);
        let es = eigendecompose(&tm).unwrap();
        let bd = beam_boundary(&dirs, 1.0, 0.5).unwrap();
        let rm = response_matrix(&es, 0.0, 3.0).unwrap();
        let (out_plus, out_minus) = solve_boundary(&rm, &bd).unwrap();
        let sol = interior(&es, &bd, 0.0, 3.0, &[0.0, 3.0]).unwrap();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300) + 1e-15;
        for i in 0..6 {
            assert!(close(sol[0].0[i], bd.in_plus[i]));
            assert!(close(sol[0].1[i], out_minus[i]));
            assert!(close(sol[1].0[i], out_plus[i]));
            assert!(close(sol[1].1[i], bd.in_minus[i]));
        }
    }

    #[test]
    fn interior_rejects_depths_outside_slab() {
        let (dirs, tm) = system(&PhaseFunction::isotropic(), 3, 0.5);
        let es = eigendecompose(&tm).unwrap();
        let bd = beam_boundary(&dirs, 1.0, 0.5).unwrap();
        assert!(matches!(
            interior(&es, &bd, 0.0, 1.0, &[1.5]),
            Err(Error::DepthOutOfSlab { .. })
        ));
    }
}
