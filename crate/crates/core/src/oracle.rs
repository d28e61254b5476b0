//! Brute-force reference for the response matrix, built from a dense matrix
//! exponential and never from an eigendecomposition.
//!
//! A single exponential of a thick slab is useless here: the modes grow like
//! `e^{|λ| D}` and the rearrangement into an input/output map cancels
//! catastrophically long before anything overflows. Instead the slab is cut
//! into `2^k` sublayers thin enough that `‖A‖₁ d ≤ SUBLAYER_NORM`. The
//! response of one sublayer comes from its propagator by a well-conditioned
//! rearrangement, and sublayers are combined by repeated doubling.

use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg::{block, from_blocks, norm_one, Lu};
use crate::response::{ResponseMatrix, TransportMatrix};

/// Largest admissible `‖A t‖₁` for [`expm_dense`]; bounds every mode by `e^{40}`.
pub const EXPM_MODE_LIMIT: f64 = 40.0;
/// Scaled-norm target of the Taylor core.
pub const TAYLOR_TARGET: f64 = 0.5;
/// Norm bound on a single sublayer before doubling.
pub const SUBLAYER_NORM: f64 = 0.5;
const MAX_DOUBLINGS: u32 = 60;

#[derive(Debug, Clone)]
pub struct OracleResult {
    /// Propagator `exp(A d)` of one sublayer.
    pub expm: Mat<f64>,
    pub response: ResponseMatrix,
    /// `‖A‖₁ d` for the sublayer actually exponentiated.
    pub condition_note: f64,
    pub sublayer: f64,
    pub doublings: u32,
}

fn identity(n: usize) -> Mat<f64> {
    Mat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
}

/// `exp(A t)` by Taylor series with scaling and squaring.
pub fn expm_dense(a: &Mat<f64>, t: f64) -> Result<Mat<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            what: "matrix exponential of a non-square matrix",
            expected: n,
            actual: a.ncols(),
        });
    }
    if !t.is_finite() || !a.as_ref().is_all_finite() {
        return Err(Error::NonFinite("matrix exponential input"));
    }
    let bound = norm_one(a) * t.abs();
    if bound > EXPM_MODE_LIMIT {
        return Err(Error::RegimeViolation {
            bound,
            limit: EXPM_MODE_LIMIT,
        });
    }
    let mut squarings = 0;
    let mut scale = t;
    while norm_one(a) * scale.abs() > TAYLOR_TARGET {
        scale *= 0.5;
        squarings += 1;
    }
    let b = Mat::from_fn(n, n, |i, j| a[(i, j)] * scale);

    let mut sum = identity(n);
    let mut term = identity(n);
    for k in 1..=40 {
        let next = &term * &b;
        let inv_k = 1.0 / k as f64;
        term = Mat::from_fn(n, n, |i, j| next[(i, j)] * inv_k);
        sum += &term;
        if norm_one(&term) <= 1e-18 * norm_one(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    Ok(sum)
}

/// Blocks of a response map: `[[t_plus, r_far], [r_near, t_minus]]`.
struct Layer {
    t_plus: Mat<f64>,
    r_far: Mat<f64>,
    r_near: Mat<f64>,
    t_minus: Mat<f64>,
}

impl Layer {
    /// From the propagator `I(τ + d) = E I(τ)`: eliminate `I⁻(τ)`, which is an output.
    fn from_propagator(e: &Mat<f64>, n: usize) -> Result<Self> {
        let e11 = block(e, 0, 0, n, n);
        let e12 = block(e, 0, n, n, n);
        let e21 = block(e, n, 0, n, n);
        let e22 = block(e, n, n, n, n);
        let lu = Lu::new(&e22, "sublayer propagator block")?;
        let t_minus = lu.solve(&identity(n));
        let x = lu.solve(&e21);
        let r_near = Mat::from_fn(n, n, |i, j| -x[(i, j)]);
        let t_plus = &e11 - &e12 * &x;
        let r_far = &e12 * &t_minus;
        Ok(Layer {
            t_plus,
            r_far,
            r_near,
            t_minus,
        })
    }

    /// `self` above `below`, coupled through the shared interface.
    fn stack(&self, below: &Layer) -> Result<Layer> {
        let n = self.t_plus.nrows();
        let coupling = &identity(n) - &self.r_far * &below.r_near;
        let lu = Lu::new(&coupling, "interface coupling")?;
        let down = lu.solve(&self.t_plus);
        let up_from_far = lu.solve(&(&self.r_far * &below.t_minus));
        let t_plus = &below.t_plus * &down;
        let r_far = &below.r_far + &below.t_plus * &up_from_far;
        let r_near = &self.r_near + &self.t_minus * &below.r_near * &down;
        let t_minus = &self.t_minus * &(&below.t_minus + &below.r_near * &up_from_far);
        Ok(Layer {
            t_plus,
            r_far,
            r_near,
            t_minus,
        })
    }
}

/// Reference response of the slab `[tau0, tau1]` for the transport matrix `tm`.
pub fn reference_response(tm: &TransportMatrix, tau0: f64, tau1: f64) -> Result<OracleResult> {
    if !(tau1 > tau0) || !tau0.is_finite() || !tau1.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "slab bounds must satisfy tau0 < tau1, got [{tau0}, {tau1}]"
        )));
    }
    let n = tm.n();
    let width = tau1 - tau0;
    let anorm = norm_one(&tm.full);
    let mut doublings = 0;
    let mut d = width;
    while anorm * d > SUBLAYER_NORM {
        d *= 0.5;
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(Error::RegimeViolation {
                bound: anorm * width,
                limit: SUBLAYER_NORM * 2f64.powi(MAX_DOUBLINGS as i32),
            });
        }
    }
    let e = expm_dense(&tm.full, d)?;
    let mut layer = Layer::from_propagator(&e, n)?;
    for _ in 0..doublings {
        layer = layer.stack(&layer)?;
    }
    let r = from_blocks(&layer.t_plus, &layer.r_far, &layer.r_near, &layer.t_minus);
    if !r.as_ref().is_all_finite() {
        return Err(Error::NonFinite("reference response"));
    }
    Ok(OracleResult {
        expm: e,
        response: ResponseMatrix { r, tau0, tau1 },
        condition_note: anorm * d,
        sublayer: d,
        doublings,
    })
}
