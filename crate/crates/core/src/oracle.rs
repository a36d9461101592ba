//! Finite-difference eigenvalues for radial and one-dimensional operators.
//!
//! Shares no code with the iteration engine: plain `f64`, second-order
//! central differences, Sturm-sequence bisection, Richardson extrapolation.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::OracleError;

/// Smallest accepted grid size.
pub const MIN_GRID: usize = 200;

/// `−d²/dr² + V(r)` on `[r_min, r_max]` with Dirichlet ends and `grid`
/// interior points.
#[derive(Clone)]
pub struct RadialOperatorSpec {
    potential: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub r_min: f64,
    pub r_max: f64,
    pub grid: usize,
}

impl std::fmt::Debug for RadialOperatorSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialOperatorSpec")
            .field("r_min", &self.r_min)
            .field("r_max", &self.r_max)
            .field("grid", &self.grid)
            .finish()
    }
}

impl RadialOperatorSpec {
    pub fn new(
        potential: impl Fn(f64) -> f64 + Send + Sync + 'static,
        r_min: f64,
        r_max: f64,
        grid: usize,
    ) -> Result<Self, OracleError> {
        if grid < MIN_GRID {
            return Err(OracleError::GridTooSmall(grid));
        }
        if !(r_min.is_finite() && r_max.is_finite() && r_min < r_max) {
            return Err(OracleError::InvalidDomain(r_min, r_max));
        }
        Ok(RadialOperatorSpec {
            potential: Arc::new(potential),
            r_min,
            r_max,
            grid,
        })
    }

    /// Radial domain `(0, r_max]`.
    pub fn radial(
        potential: impl Fn(f64) -> f64 + Send + Sync + 'static,
        r_max: f64,
        grid: usize,
    ) -> Result<Self, OracleError> {
        Self::new(potential, 0.0, r_max, grid)
    }

    pub fn with_grid(&self, grid: usize) -> Result<Self, OracleError> {
        if grid < MIN_GRID {
            return Err(OracleError::GridTooSmall(grid));
        }
        Ok(RadialOperatorSpec { grid, ..self.clone() })
    }

    pub fn potential(&self, r: f64) -> f64 {
        (self.potential)(r)
    }

    pub fn step(&self) -> f64 {
        (self.r_max - self.r_min) / (self.grid + 1) as f64
    }

    /// Interior grid points.
    pub fn points(&self) -> Vec<f64> {
        let h = self.step();
        (1..=self.grid).map(|i| self.r_min + h * i as f64).collect()
    }

    /// Diagonal and (constant) off-diagonal of the symmetric tridiagonal matrix.
    pub fn tridiagonal(&self) -> Result<(Vec<f64>, f64), OracleError> {
        let h = self.step();
        let inv = 1.0 / (h * h);
        let diag = self
            .points()
            .into_iter()
            .map(|r| {
                let v = self.potential(r);
                if v.is_finite() {
                    Ok(2.0 * inv + v)
                } else {
                    Err(OracleError::NonFinite(r))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok((diag, -inv))
    }
}

/// Eigenvalues with any warnings raised on the way.
#[derive(Clone, Debug, PartialEq)]
pub struct FdEigenvalues {
    pub values: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix
/// with diagonal `diag` and constant off-diagonal `off`.
pub fn sturm_count(diag: &[f64], off: f64, x: f64) -> usize {
    let off2 = off * off;
    let mut count = 0;
    let mut q = 1.0;
    for (i, d) in diag.iter().enumerate() {
        q = if i == 0 { d - x } else { d - x - off2 / q };
        if q == 0.0 {
            q = f64::EPSILON * (d.abs() + off.abs()).max(1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The lowest `count` eigenvalues by bisection on the Sturm count.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: f64, count: usize) -> Result<Vec<f64>, OracleError> {
    if count > diag.len() {
        return Err(OracleError::TooMany {
            requested: count,
            size: diag.len(),
        });
    }
    let radius = 2.0 * off.abs();
    let lo0 = diag.iter().fold(f64::INFINITY, |m, d| m.min(d - radius));
    let hi0 = diag.iter().fold(f64::NEG_INFINITY, |m, d| m.max(d + radius));
    Ok((0..count)
        .into_par_iter()
        .map(|i| {
            let (mut lo, mut hi) = (lo0, hi0);
            while hi - lo > 1e-15 * hi.abs().max(lo.abs()).max(1.0) {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if sturm_count(diag, off, mid) > i {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect())
}

/// Lowest `count` eigenvalues of the discretized operator.
///
/// Warns when the potential at an open end lies below the highest
/// eigenvalue found, i.e. the domain ends inside the allowed region.
pub fn fd_eigenvalues(spec: &RadialOperatorSpec, count: usize) -> Result<FdEigenvalues, OracleError> {
    let (diag, off) = spec.tridiagonal()?;
    let values = tridiagonal_eigenvalues(&diag, off, count)?;
    let mut warnings = Vec::new();
    if let Some(top) = values.last() {
        let h = spec.step();
        let ends: &[(&str, f64)] = if spec.r_min == 0.0 {
            &[("r_max", spec.r_max - h)]
        } else {
            &[("r_min", spec.r_min + h), ("r_max", spec.r_max - h)]
        };
        for (name, r) in ends {
            if spec.potential(*r) < *top {
                warnings.push(format!(
                    "{name} = {r} lies before the classical turning point of eigenvalue {top}"
                ));
            }
        }
    }
    Ok(FdEigenvalues { values, warnings })
}

/// Order-2 Richardson extrapolation from grids `M` and `2M + 1` (which
/// halves the step exactly).
pub fn richardson_eigenvalues(spec: &RadialOperatorSpec, count: usize) -> Result<FdEigenvalues, OracleError> {
    let coarse = fd_eigenvalues(spec, count)?;
    let fine = fd_eigenvalues(&spec.with_grid(2 * spec.grid + 1)?, count)?;
    let values = coarse
        .values
        .iter()
        .zip(&fine.values)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect();
    let mut warnings = coarse.warnings;
    warnings.extend(fine.warnings);
    warnings.dedup();
    Ok(FdEigenvalues { values, warnings })
}

/// `V = k²r² + J(J+1)/r²`, whose eigenvalues are `E_eff`.
pub fn oscillator_operator(k: f64, j: u32, r_max: f64, grid: usize) -> Result<RadialOperatorSpec, OracleError> {
    let c = f64::from(j) * f64::from(j + 1);
    RadialOperatorSpec::radial(move |r| k * k * r * r + c / (r * r), r_max, grid)
}

/// `V = Λ(Λ+1)/ρ² − 1/ρ` on `(0, ρ_max]`; see [`coulomb_xi`].
pub fn coulomb_operator(lambda: f64, rho_max: f64, grid: usize) -> Result<RadialOperatorSpec, OracleError> {
    let c = lambda * (lambda + 1.0);
    RadialOperatorSpec::radial(move |r| c / (r * r) - 1.0 / r, rho_max, grid)
}

/// `ξ = 1/(2√(−ε))` for a bound eigenvalue `ε < 0` of [`coulomb_operator`]
/// (the operator is `−d²/dρ² − ξ/ρ + …` rescaled by `ρ → ρ/ξ`).
pub fn coulomb_xi(eps: f64) -> Option<f64> {
    (eps < 0.0).then(|| 0.5 / (-eps).sqrt())
}

/// Settings for the self-consistent anharmonic oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct AnharmonicOracle {
    pub beta: f64,
    /// Index among the eigenvalues on the full line (0 ground, 2 first even excited).
    pub state: usize,
    /// Number of γ-orders summed.
    pub order: usize,
    pub half_width: f64,
    pub grid: usize,
    pub gammas: Vec<f64>,
    pub fit_degree: usize,
    pub relaxation: f64,
    pub max_iterations: usize,
    pub tol: f64,
}

impl AnharmonicOracle {
    /// `β = 5`, order 5, `[−3, 3]` with 2000 points, 15 values of γ in
    /// `[−0.3, 0.1]`, degree-12 fit, relaxation 0.5.
    pub fn standard(state: usize) -> Self {
        AnharmonicOracle {
            beta: 5.0,
            state,
            order: 5,
            half_width: 3.0,
            grid: 2000,
            gammas: (0..15).map(|i| -0.3 + 0.4 * i as f64 / 14.0).collect(),
            fit_degree: 12,
            relaxation: 0.5,
            max_iterations: 400,
            tol: 1e-12,
        }
    }

    /// `−F'' + (β²r²(1 − γ) + 2Er⁴ − γr⁸) F` on `[−w, w]`.
    pub fn operator(&self, energy: f64, gamma: f64) -> Result<RadialOperatorSpec, OracleError> {
        let b2 = self.beta * self.beta;
        RadialOperatorSpec::new(
            move |r| {
                let r2 = r * r;
                let r4 = r2 * r2;
                b2 * r2 * (1.0 - gamma) + 2.0 * energy * r4 - gamma * r4 * r4
            },
            -self.half_width,
            self.half_width,
            self.grid,
        )
    }

    /// `E` with `ε(E) = E² − 1`, `ε` the selected eigenvalue of the
    /// operator at that `E`, by damped fixed-point iteration.
    pub fn self_consistent(&self, gamma: f64) -> Result<f64, OracleError> {
        let mut e = 2.0;
        let mut trace = Vec::new();
        for _ in 0..self.max_iterations {
            let eps = richardson_eigenvalues(&self.operator(e, gamma)?, self.state + 1)?.values[self.state];
            if eps + 1.0 <= 0.0 || !eps.is_finite() {
                trace.push(eps);
                return Err(OracleError::FixedPointDiverged { gamma, trace });
            }
            let next = (1.0 - self.relaxation) * e + self.relaxation * (eps + 1.0).sqrt();
            trace.push(next);
            if trace.len() > 8 {
                trace.remove(0);
            }
            if (next - e).abs() < self.tol {
                return Ok(next);
            }
            e = next;
        }
        Err(OracleError::FixedPointDiverged { gamma, trace })
    }

    pub fn run(&self) -> Result<AnharmonicOracleResult, OracleError> {
        let energies: Vec<f64> = self
            .gammas
            .par_iter()
            .map(|&g| self.self_consistent(g))
            .collect::<Result<_, _>>()?;
        let coefficients = polynomial_fit(&self.gammas, &energies, self.fit_degree)?;
        let total = coefficients.iter().take(self.order + 1).sum();
        Ok(AnharmonicOracleResult {
            gammas: self.gammas.clone(),
            energies,
            coefficients,
            total,
        })
    }
}

/// Self-consistent energies on the γ grid and their Taylor coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct AnharmonicOracleResult {
    pub gammas: Vec<f64>,
    pub energies: Vec<f64>,
    /// Coefficients of `γ⁰, γ¹, …` of the fitted polynomial.
    pub coefficients: Vec<f64>,
    /// Sum of the first `order + 1` coefficients.
    pub total: f64,
}

/// Least-squares polynomial coefficients `c₀ … c_degree` (SVD, with the
/// abscissae rescaled to `[−1, 1]` for conditioning).
pub fn polynomial_fit(x: &[f64], y: &[f64], degree: usize) -> Result<Vec<f64>, OracleError> {
    if x.len() != y.len() || x.len() <= degree {
        return Err(OracleError::Fit(format!(
            "{} points for a degree-{degree} fit",
            x.len().min(y.len())
        )));
    }
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let a = DMatrix::from_fn(x.len(), degree + 1, |i, j| (x[i] / scale).powi(j as i32));
    let b = DVector::from_column_slice(y);
    let sol = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| OracleError::Fit(e.to_string()))?;
    Ok(sol.iter().enumerate().map(|(j, c)| c / scale.powi(j as i32)).collect())
}

/// Gauss-Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// `∫_a^b f` with `n`-point Gauss-Legendre.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let (x, w) = gauss_legendre(n);
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    x.iter().zip(&w).map(|(xi, wi)| wi * f(m + r * xi)).sum::<f64>() * r
}
