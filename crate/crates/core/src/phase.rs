//! Legendre-expanded, azimuthally averaged scattering phase functions.
//!
//! The kernel is `f(μ', μ) = ½ Σ_{l=0}^{L} β_l P_l(μ') P_l(μ)` with `β_0 = 1`,
//! so that `∫_{-1}^{1} f(μ', μ) dμ = 1` for every incident cosine.

use std::io::BufRead;
use std::path::{Path, PathBuf};

use faer::Mat;

use crate::error::{Error, Result};
use crate::quadrature::DirectionSet;

/// Tolerance on `β_0 = 1` for files loaded without renormalization.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Environment variable that overrides the location of the Cloud C.1 data file.
pub const CLOUDC1_ENV: &str = "RMDOM_CLOUDC1";

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseFunction {
    coefficients: Vec<f64>,
}

impl PhaseFunction {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::PhaseFormat("no coefficients".into()));
        }
        if let Some((l, b)) = coefficients.iter().enumerate().find(|(_, b)| !b.is_finite()) {
            return Err(Error::PhaseFormat(format!("coefficient beta_{l} = {b} is not finite")));
        }
        if (coefficients[0] - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::PhaseFormat(format!(
                "beta_0 = {} but the expansion must be normalized to beta_0 = 1",
                coefficients[0]
            )));
        }
        let mut coefficients = coefficients;
        coefficients[0] = 1.0;
        Ok(PhaseFunction { coefficients })
    }

    pub fn isotropic() -> Self {
        PhaseFunction {
            coefficients: vec![1.0],
        }
    }

    /// `f = ½ (1 + β₁ μ' μ)`
    pub fn linear(beta1: f64) -> Result<Self> {
        PhaseFunction::new(vec![1.0, beta1])
    }

    /// Parses one coefficient per line, `β_0` first. Blank lines and lines
    /// starting with `#` are skipped. With `renormalize` every coefficient is
    /// divided by `β_0`.
    pub fn from_reader(reader: impl BufRead, renormalize: bool) -> Result<Self> {
        let mut coefficients = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let text = line.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let value: f64 = text.parse().map_err(|_| {
                Error::PhaseFormat(format!("line {}: '{}' is not a number", lineno + 1, text))
            })?;
            coefficients.push(value);
        }
        if coefficients.is_empty() {
            return Err(Error::PhaseFormat("coefficient stream is empty".into()));
        }
        if renormalize {
            let b0 = coefficients[0];
            if b0 == 0.0 {
                return Err(Error::PhaseFormat("cannot renormalize: beta_0 = 0".into()));
            }
            coefficients.iter_mut().for_each(|b| *b /= b0);
        }
        PhaseFunction::new(coefficients)
    }

    pub fn from_path(path: impl AsRef<Path>, renormalize: bool) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| {
            Error::PhaseFormat(format!("cannot open {}: {e}", path.display()))
        })?;
        PhaseFunction::from_reader(std::io::BufReader::new(file), renormalize)
    }

    /// Location of the bundled Cloud C.1 coefficient file.
    pub fn cloudc1_path() -> PathBuf {
        std::env::var_os(CLOUDC1_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("data/cloudc1.txt"))
    }

    /// The 300-term Cloud C.1 kernel (Garcia and Siewert, 1985).
    pub fn cloudc1() -> Result<Self> {
        let path = Self::cloudc1_path();
        if !path.exists() {
            return Err(Error::PhaseFormat(format!(
                "Cloud C.1 coefficients (Garcia & Siewert 1985 tabulation) not found at {}; \
                 set {CLOUDC1_ENV} to the coefficient file",
                path.display()
            )));
        }
        PhaseFunction::from_path(path, false)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Highest Legendre order L.
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval(&self, mu_in: f64, mu_out: f64) -> Result<f64> {
        for mu in [mu_in, mu_out] {
            if !(-1.0..=1.0).contains(&mu) {
                return Err(Error::InvalidArgument(format!("cosine {mu} outside [-1, 1]")));
            }
        }
        let p_in = legendre_values(mu_in, self.order());
        let p_out = legendre_values(mu_out, self.order());
        Ok(0.5
            * self
                .coefficients
                .iter()
                .zip(p_in.iter().zip(&p_out))
                .map(|(b, (a, c))| b * a * c)
                .sum::<f64>())
    }
}

/// `P_0(μ) … P_L(μ)` by the three-term upward recurrence.
pub fn legendre_values(mu: f64, order: usize) -> Vec<f64> {
    let mut p = Vec::with_capacity(order + 1);
    p.push(1.0);
    if order >= 1 {
        p.push(mu);
    }
    for l in 1..order {
        let lf = l as f64;
        let next = ((2.0 * lf + 1.0) * mu * p[l] - lf * p[l - 1]) / (lf + 1.0);
        p.push(next);
    }
    p
}

/// `C⁺⁺W` and `C⁺⁻W`; the other two blocks follow from `f(-a,-b) = f(a,b)`.
#[derive(Debug, Clone)]
pub struct ScatterMatrices {
    pub pp: Mat<f64>,
    pub pm: Mat<f64>,
    pub omega: f64,
}

impl ScatterMatrices {
    pub fn n(&self) -> usize {
        self.pp.nrows()
    }
}

/// `pp[m'][m] = ω w_m f(μ_m', μ_m)`, `pm[m'][m] = ω w_m f(μ_m', -μ_m)`.
pub fn build_scatter_matrices(
    pf: &PhaseFunction,
    dirs: &DirectionSet,
    omega: f64,
) -> Result<ScatterMatrices> {
    if !(0.0..=1.0).contains(&omega) {
        return Err(Error::InvalidArgument(format!("albedo {omega} outside [0, 1]")));
    }
    let n = dirs.n();
    let order = pf.order();
    let table: Vec<Vec<f64>> = dirs.nodes().iter().map(|&m| legendre_values(m, order)).collect();
    let beta = pf.coefficients();
    let mut pp = Mat::<f64>::zeros(n, n);
    let mut pm = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        let pi = &table[i];
        for j in 0..n {
            let w = dirs.weights()[j];
            if w == 0.0 {
                continue;
            }
            let pj = &table[j];
            let (mut even, mut odd) = (0.0, 0.0);
            for l in 0..=order {
                let term = beta[l] * pi[l] * pj[l];
                if l % 2 == 0 {
                    even += term;
                } else {
                    odd += term;
                }
            }
            let scale = 0.5 * omega * w;
            pp[(i, j)] = scale * (even + odd);
            pm[(i, j)] = scale * (even - odd);
        }
    }
    Ok(ScatterMatrices { pp, pm, omega })
}
