//! Angular quadratures for the half range `0 < μ ≤ 1`.
//!
//! Rules are generated by the Golub–Welsch method: the nodes are the
//! eigenvalues of the symmetric Jacobi matrix of the Legendre recurrence and
//! the weights come from the first components of its normalized eigenvectors.
//! The Radau rule fixes the right endpoint `μ = 1` by modifying the last
//! diagonal entry of the Jacobi matrix.
//!
//! A [`DirectionSet`] is a half-range rule augmented with zero-weight "faux"
//! directions. They take part in the transport sweep, so the solver reports
//! intensities along them, but carry no quadrature weight and therefore do
//! not change the solution anywhere else.

use std::fmt;
use std::str::FromStr;

use faer::{Mat, Side};

use crate::error::{Error, Result};

/// Two cosines closer than this are treated as the same direction.
pub const NODE_MATCH_TOL: f64 = 1e-12;

/// A quadrature rule on an arbitrary interval.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }
}

/// Half-range rule: nodes strictly increasing in `(0, 1]`, non-negative weights.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfQuadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl HalfQuadrature {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                what: "half-range weights",
                expected: nodes.len(),
                actual: weights.len(),
            });
        }
        if nodes.is_empty() {
            return Err(Error::InvalidArgument("empty half-range quadrature".into()));
        }
        if nodes.iter().any(|&m| !(m > 0.0 && m <= 1.0)) {
            return Err(Error::InvalidArgument("half-range nodes must lie in (0, 1]".into()));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("half-range nodes must be strictly increasing".into()));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument("quadrature weights must be finite and non-negative".into()));
        }
        Ok(HalfQuadrature { nodes, weights })
    }

    /// Gauss–Legendre rule with `n` points on `[0, 1]`.
    pub fn gauss(n: usize) -> Result<Self> {
        let rule = gauss_legendre(n, 0.0, 1.0)?;
        HalfQuadrature::new(rule.nodes, rule.weights)
    }

    pub fn radau(n: usize) -> Result<Self> {
        radau_right(n)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_m μ_m^k`
    pub fn moment(&self, k: i32) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(m, w)| w * m.powi(k)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureKind {
    Gauss,
    Radau,
}

impl QuadratureKind {
    pub fn half_rule(self, n: usize) -> Result<HalfQuadrature> {
        match self {
            QuadratureKind::Gauss => HalfQuadrature::gauss(n),
            QuadratureKind::Radau => HalfQuadrature::radau(n),
        }
    }
}

impl FromStr for QuadratureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gauss" => Ok(QuadratureKind::Gauss),
            "radau" => Ok(QuadratureKind::Radau),
            other => Err(Error::InvalidArgument(format!("unknown quadrature '{other}'"))),
        }
    }
}

impl fmt::Display for QuadratureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QuadratureKind::Gauss => "gauss",
            QuadratureKind::Radau => "radau",
        })
    }
}

/// Off-diagonal entries of the Legendre Jacobi matrix on `[-1, 1]`.
fn legendre_offdiag(n: usize) -> Vec<f64> {
    (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect()
}

/// Eigen-solves the symmetric tridiagonal matrix and returns `(nodes, weights)`
/// on `[-1, 1]`, sorted by node, with weights `2 v₀²`.
fn golub_welsch(diag: &[f64], offdiag: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    let jacobi = Mat::from_fn(n, n, |i, j| {
        if i == j {
            diag[i]
        } else if i + 1 == j {
            offdiag[i]
        } else if j + 1 == i {
            offdiag[j]
        } else {
            0.0
        }
    });
    let evd = jacobi
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::EigenFailure)?;
    let values = evd.S().column_vector();
    let vectors = evd.U();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (values[k], 2.0 * vectors[(0, k)] * vectors[(0, k)]))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs.into_iter().unzip())
}

/// Gauss–Legendre rule with `n` points on `[a, b]`, exact for polynomials of
/// degree `2n − 1`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::InvalidArgument("Gauss rule needs at least one point".into()));
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!("invalid interval [{a}, {b}]")));
    }
    let (x, w) = golub_welsch(&vec![0.0; n], &legendre_offdiag(n))?;
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    Ok(QuadratureRule {
        nodes: x.iter().map(|x| mid + half * x).collect(),
        weights: w.iter().map(|w| half * w).collect(),
    })
}

/// Radau rule with `n` points on `(0, 1]` whose last node is fixed at `μ = 1`.
/// Exact for polynomials of degree `2n − 2`.
pub fn radau_right(n: usize) -> Result<HalfQuadrature> {
    if n < 2 {
        return Err(Error::InvalidArgument("Radau rule needs at least two points".into()));
    }
    let off = legendre_offdiag(n);
    // Solve (J_{n-1} - I) δ = b²_{n-1} e_{n-1} with the Thomas algorithm; the
    // shifted matrix is negative definite so no pivoting is required.
    let m = n - 1;
    let rhs_last = off[m - 1] * off[m - 1];
    let mut c_prime = vec![0.0; m];
    let mut d_prime = vec![0.0; m];
    for i in 0..m {
        let lower = if i > 0 { off[i - 1] } else { 0.0 };
        let upper = if i + 1 < m { off[i] } else { 0.0 };
        let rhs = if i + 1 == m { rhs_last } else { 0.0 };
        let denom = -1.0 - lower * if i > 0 { c_prime[i - 1] } else { 0.0 };
        c_prime[i] = upper / denom;
        d_prime[i] = (rhs - lower * if i > 0 { d_prime[i - 1] } else { 0.0 }) / denom;
    }
    // back substitution only needs the last component
    let delta_last = d_prime[m - 1];
    let mut diag = vec![0.0; n];
    diag[n - 1] = 1.0 + delta_last;

    let (x, w) = golub_welsch(&diag, &off)?;
    let mut nodes: Vec<f64> = x.iter().map(|x| 0.5 * (x + 1.0)).collect();
    let weights: Vec<f64> = w.iter().map(|w| 0.5 * w).collect();
    nodes[n - 1] = 1.0;
    HalfQuadrature::new(nodes, weights)
}

/// Quadrature directions plus zero-weight edit directions, sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    half: HalfQuadrature,
    faux_mask: Vec<bool>,
}

impl DirectionSet {
    /// Merges `edit_mus` into `rule` as faux directions. An edit within
    /// [`NODE_MATCH_TOL`] of a real node (or of an earlier edit) is absorbed.
    pub fn build(rule: &HalfQuadrature, edit_mus: &[f64]) -> Result<Self> {
        if let Some(bad) = edit_mus.iter().find(|&&m| !(m > 0.0 && m <= 1.0)) {
            return Err(Error::InvalidArgument(format!(
                "edit direction {bad} is outside (0, 1]"
            )));
        }
        let mut entries: Vec<(f64, f64, bool)> = rule
            .nodes()
            .iter()
            .zip(rule.weights())
            .map(|(&m, &w)| (m, w, false))
            .collect();
        for &mu in edit_mus {
            if entries.iter().all(|e| (e.0 - mu).abs() > NODE_MATCH_TOL) {
                entries.push((mu, 0.0, true));
            }
        }
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        let faux_mask = entries.iter().map(|e| e.2).collect();
        let (nodes, weights) = entries.iter().map(|e| (e.0, e.1)).unzip();
        Ok(DirectionSet {
            half: HalfQuadrature::new(nodes, weights)?,
            faux_mask,
        })
    }

    /// A direction set with no faux directions.
    pub fn from_rule(rule: HalfQuadrature) -> Self {
        let n = rule.len();
        DirectionSet {
            half: rule,
            faux_mask: vec![false; n],
        }
    }

    /// Total half-range count N, faux directions included.
    pub fn n(&self) -> usize {
        self.half.len()
    }

    pub fn half(&self) -> &HalfQuadrature {
        &self.half
    }

    pub fn nodes(&self) -> &[f64] {
        self.half.nodes()
    }

    pub fn weights(&self) -> &[f64] {
        self.half.weights()
    }

    pub fn faux_mask(&self) -> &[bool] {
        &self.faux_mask
    }

    pub fn is_faux(&self, i: usize) -> bool {
        self.faux_mask[i]
    }

    pub fn real_count(&self) -> usize {
        self.faux_mask.iter().filter(|f| !**f).count()
    }

    /// Index of the direction matching `mu` within [`NODE_MATCH_TOL`].
    pub fn index_of(&self, mu: f64) -> Option<usize> {
        self.nodes().iter().position(|m| (m - mu).abs() <= NODE_MATCH_TOL)
    }
}
