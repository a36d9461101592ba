//! Closed-form spectrum and eigenfunctions of the solvable family
//!
//! ```text
//! y'' = 2(a x^(N+1)/(1 − b x^(N+2)) − (m+1)/x) y' − w x^N/(1 − b x^(N+2)) y
//! ```
//!
//! and the terminating hypergeometric series they are built from.

use std::sync::Arc;

use crate::aim::{find_eigenvalue, AimProblem, Energy};
use crate::error::{AimError, ClosedFormError};
use crate::real::{BigReal, Precision};
use crate::series::{GammaSeries, LaurentPoly, Ring, TaylorJet, Var};

/// Rising factorial `σ(σ+1)…(σ+n−1)`; `(σ)₀ = 1`.
///
/// Fails if a factor is zero, since `(σ)_n` then sits in a denominator.
pub fn pochhammer(sigma: &BigReal, n: usize) -> Result<BigReal, ClosedFormError> {
    let prec = sigma.precision();
    let mut acc = BigReal::one(prec);
    for j in 0..n {
        let factor = sigma + &BigReal::from_int(prec, j as i64);
        if factor.is_zero() {
            return Err(ClosedFormError::PochhammerPole {
                sigma: sigma.to_sci_string(12),
                n,
                index: j,
            });
        }
        acc = &acc * &factor;
    }
    Ok(acc)
}

/// Argument of a hypergeometric series as a monomial: `z = scale · x^power`.
#[derive(Clone, Debug, PartialEq)]
pub struct ArgumentMap {
    pub scale: BigReal,
    pub power: u32,
}

/// Terminating `₁F₁(−n; σ; z)` or `₂F₁(−n, upper; σ; z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HypergeometricSpec {
    /// Termination index: the series has `n + 1` terms.
    pub n: usize,
    /// Second numerator parameter; `None` for `₁F₁`.
    pub upper: Option<BigReal>,
    /// Denominator parameter `σ`.
    pub lower: BigReal,
    pub argument: ArgumentMap,
}

impl HypergeometricSpec {
    /// `₁F₁(−n; σ; z)` in the plain argument `z`.
    pub fn f11(n: usize, sigma: BigReal) -> Self {
        let prec = sigma.precision();
        HypergeometricSpec {
            n,
            upper: None,
            lower: sigma,
            argument: ArgumentMap {
                scale: BigReal::one(prec),
                power: 1,
            },
        }
    }

    /// `₂F₁(−n, upper; σ; z)` in the plain argument `z`.
    pub fn f21(n: usize, upper: BigReal, sigma: BigReal) -> Self {
        let mut spec = Self::f11(n, sigma);
        spec.upper = Some(upper);
        spec
    }

    pub fn with_argument(mut self, scale: BigReal, power: u32) -> Self {
        self.argument = ArgumentMap { scale, power };
        self
    }

    /// Coefficients `c_j` of `Σ c_j z^j`, `j = 0..=n`.
    pub fn coefficients(&self) -> Result<Vec<BigReal>, ClosedFormError> {
        let prec = self.lower.precision();
        let mut out = Vec::with_capacity(self.n + 1);
        let mut c = BigReal::one(prec);
        out.push(c.clone());
        for j in 0..self.n {
            let jj = BigReal::from_int(prec, j as i64);
            let denom = &self.lower + &jj;
            if denom.is_zero() {
                return Err(ClosedFormError::Domain(format!(
                    "lower parameter {} hits a pole at term {}",
                    self.lower.to_sci_string(12),
                    j
                )));
            }
            // (−n + j)(upper + j) / ((σ + j)(j + 1))
            let mut num = BigReal::from_int(prec, j as i64 - self.n as i64);
            if let Some(u) = &self.upper {
                num = &num * &(u + &jj);
            }
            c = &(&c * &num) / &denom.mul_int(j as i64 + 1);
            out.push(c.clone());
        }
        Ok(out)
    }

    /// The series as a polynomial in `x`, through the argument map.
    pub fn polynomial(&self, var: Var) -> Result<LaurentPoly, ClosedFormError> {
        let prec = self.lower.precision();
        let coeffs = self.coefficients()?;
        let mut zpow = BigReal::one(prec);
        let mut terms = Vec::with_capacity(coeffs.len());
        for (j, c) in coeffs.into_iter().enumerate() {
            terms.push(((j as u32 * self.argument.power) as i32, &c * &zpow));
            zpow = &zpow * &self.argument.scale;
        }
        Ok(LaurentPoly::from_terms(var, prec, terms))
    }
}

/// Value of the terminating series at `z` (the argument map is not applied).
pub fn hyp_terminating(spec: &HypergeometricSpec, z: &BigReal) -> Result<BigReal, ClosedFormError> {
    let coeffs = spec.coefficients()?;
    let mut acc = BigReal::zero(z.precision().max_with(spec.lower.precision()));
    for c in coeffs.iter().rev() {
        acc = &(&acc * z) + c;
    }
    Ok(acc)
}

trait MaxWith {
    fn max_with(self, other: Precision) -> Precision;
}

impl MaxWith for Precision {
    fn max_with(self, other: Precision) -> Precision {
        if self.decimal_digits() >= other.decimal_digits() {
            self
        } else {
            other
        }
    }
}

/// Parameters `(a, b, m, N)` of the solvable family.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralFamilyParams {
    pub a: BigReal,
    pub b: BigReal,
    pub m: BigReal,
    pub big_n: i32,
}

impl GeneralFamilyParams {
    pub fn new(a: BigReal, b: BigReal, m: BigReal, big_n: i32) -> Result<Self, ClosedFormError> {
        if b.signum() <= 0 {
            return Err(ClosedFormError::InvalidParams(format!(
                "b must be positive, got {}",
                b.to_sci_string(12)
            )));
        }
        if big_n < -1 {
            return Err(ClosedFormError::InvalidParams(format!("N must be >= -1, got {big_n}")));
        }
        Ok(GeneralFamilyParams { a, b, m, big_n })
    }

    fn precision(&self) -> Precision {
        self.a
            .precision()
            .max_with(self.b.precision())
            .max_with(self.m.precision())
    }

    /// `N + 2`, the power of `x` in the argument `b x^(N+2)`.
    pub fn step(&self) -> u32 {
        (self.big_n + 2) as u32
    }

    /// `σ = (2m + N + 3)/(N + 2)`.
    pub fn sigma(&self) -> BigReal {
        let prec = self.precision();
        (&self.m.mul_int(2) + &BigReal::from_int(prec, self.big_n as i64 + 3)).div_int(self.step() as i64)
    }

    /// `ρ = ((2m + 1) b + 2a)/((N + 2) b)`.
    pub fn rho(&self) -> BigReal {
        let prec = self.precision();
        let num = &(&(&self.m.mul_int(2) + &BigReal::one(prec)) * &self.b) + &self.a.mul_int(2);
        &num / &self.b.mul_int(self.step() as i64)
    }

    /// Right end of the domain `(0, b^(−1/(N+2)))`.
    pub fn domain_end(&self) -> BigReal {
        let prec = self.precision();
        let e = BigReal::from_ratio(prec, -1, self.step() as i64);
        self.b.pow(&e)
    }
}

/// `w_n = b (N+2)² n (n + ((2m+1)b + 2a)/((N+2)b))`.
pub fn general_eigenvalue(params: &GeneralFamilyParams, n: usize) -> BigReal {
    let prec = params.precision();
    let step = params.step() as i64;
    let nn = BigReal::from_int(prec, n as i64);
    let inner = &nn + &params.rho();
    &(&params.b.mul_int(step * step) * &nn) * &inner
}

/// The per-`N` tabulated forms `(N+2) n (2a + 2bm + ((N+2)n + 1) b)`,
/// written out for `N = −1..=3`; `None` outside that range.
pub fn tabulated_eigenvalue(params: &GeneralFamilyParams, n: usize) -> Option<BigReal> {
    let prec = params.precision();
    let (a, b, m) = (&params.a, &params.b, &params.m);
    let n = n as i64;
    let base = &a.mul_int(2) + &(b * m).mul_int(2);
    let tail = |s: i64| &base + &b.mul_int(s * n + 1);
    let w = match params.big_n {
        -1 => tail(1).mul_int(n),
        0 => tail(2).mul_int(2 * n),
        1 => tail(3).mul_int(3 * n),
        2 => tail(4).mul_int(4 * n),
        3 => tail(5).mul_int(5 * n),
        _ => return None,
    };
    Some(w.with_precision(prec))
}

/// Hypergeometric description of `y_n`: `₂F₁(−n, ρ+n; σ; b x^(N+2))`.
pub fn general_hypergeometric(params: &GeneralFamilyParams, n: usize) -> HypergeometricSpec {
    let prec = params.precision();
    let upper = &params.rho() + &BigReal::from_int(prec, n as i64);
    HypergeometricSpec::f21(n, upper, params.sigma()).with_argument(params.b.clone(), params.step())
}

/// `(−1)^n (N+2)^n (σ)_n` with `C₂ = 1`.
fn general_prefactor(params: &GeneralFamilyParams, n: usize) -> Result<BigReal, ClosedFormError> {
    let prec = params.precision();
    let sign = if n.is_multiple_of(2) { 1 } else { -1 };
    let pow = BigReal::from_int(prec, params.step() as i64).powi(n as i32);
    Ok((&pow * &pochhammer(&params.sigma(), n)?).mul_int(sign))
}

/// `y_n` as a polynomial in `x` (powers `j(N+2)`), `C₂ = 1`.
pub fn general_eigenfunction_poly(params: &GeneralFamilyParams, n: usize) -> Result<LaurentPoly, ClosedFormError> {
    let pre = general_prefactor(params, n)?;
    Ok(general_hypergeometric(params, n).polynomial(Var::X)?.scale(&pre))
}

/// `y_n(x) = (−1)^n (N+2)^n (σ)_n ₂F₁(−n, ρ+n; σ; b x^(N+2))`, `C₂ = 1`.
pub fn general_eigenfunction(params: &GeneralFamilyParams, n: usize, x: &BigReal) -> Result<BigReal, ClosedFormError> {
    if x.signum() < 0 || *x >= params.domain_end() {
        return Err(ClosedFormError::Domain(format!(
            "x = {} outside (0, {})",
            x.to_sci_string(12),
            params.domain_end().to_sci_string(12)
        )));
    }
    let z = &params.b * &x.powi(params.step() as i32);
    let pre = general_prefactor(params, n)?;
    Ok(&pre * &hyp_terminating(&general_hypergeometric(params, n), &z)?)
}

/// `x(1 − b x^(N+2)) (y'' − λ₀ y' − s₀ y)`: the ODE cleared of denominators.
/// Vanishes identically when `y` is an eigenfunction with eigenvalue `w`.
pub fn general_residual(params: &GeneralFamilyParams, w: &BigReal, y: &LaurentPoly) -> LaurentPoly {
    let prec = params.precision();
    let step = params.step() as i32;
    let one_minus = LaurentPoly::from_terms(Var::X, prec, [(0, BigReal::one(prec)), (step, -&params.b)]);
    let d1 = y.derivative();
    let d2 = d1.derivative();
    let lhs = Ring::mul(&one_minus, &d2).shift(1);
    let mid_coeff = LaurentPoly::from_terms(Var::X, prec, [(step, params.a.mul_int(2)), (0, BigReal::zero(prec))]);
    let centrifugal = one_minus.scale(&(&params.m + &BigReal::one(prec)).mul_int(2));
    let drift = Ring::mul(&Ring::sub(&mid_coeff, &centrifugal), &d1);
    let source = y.scale(w).shift(params.big_n + 1);
    Ring::add(&Ring::sub(&lhs, &drift), &source)
}

/// Default evaluation point: the middle of the domain.
pub fn general_default_x0(params: &GeneralFamilyParams) -> BigReal {
    params.domain_end().div_int(2)
}

/// Smallest depth at which `δ` vanishes identically at `w_n`: `y_n` has
/// degree `n(N+2)` in `x`, and the condition holds from one below that.
pub fn general_exact_depth(params: &GeneralFamilyParams, n: usize) -> usize {
    (n * params.step() as usize).saturating_sub(1)
}

/// Level `n` from the iteration at [`general_exact_depth`], bracketed
/// between the midpoints to the neighbouring closed-form levels.
pub fn general_aim_eigenvalue(params: &GeneralFamilyParams, n: usize, x0: &BigReal) -> Result<BigReal, AimError> {
    let depth = general_exact_depth(params, n);
    let problem = general_problem(params, x0, depth)?;
    let w = general_eigenvalue(params, n);
    let above = general_eigenvalue(params, n + 1);
    let gap = (&above - &w).abs().max(BigReal::one(params.precision()));
    let lo = if n == 0 {
        &w - &gap.div_int(2)
    } else {
        (&w + &general_eigenvalue(params, n - 1)).div_int(2)
    };
    let hi = (&w + &above).div_int(2);
    let (lo, hi) = if lo < hi { (lo, hi) } else { (hi, lo) };
    find_eigenvalue(&problem, depth, &lo, &hi)
}

/// AIM form of the family, expanded as Taylor jets at `x0`. The jets are
/// long enough for iteration depths up to `n_max`.
pub fn general_problem(
    params: &GeneralFamilyParams,
    x0: &BigReal,
    n_max: usize,
) -> Result<AimProblem<TaylorJet>, AimError> {
    let prec = params.precision();
    if x0.signum() <= 0 || *x0 >= params.domain_end() {
        return Err(AimError::InvalidProblem(format!(
            "x0 = {} outside the domain",
            x0.to_sci_string(12)
        )));
    }
    let len = n_max + 3;
    let x = TaylorJet::variable(x0, len);
    let one = TaylorJet::constant(x0, BigReal::one(prec), len);
    let inv_denom = Ring::sub(
        &one,
        &x.powi(params.step() as i32).expect("positive power").scale(&params.b),
    )
    .recip()
    .ok_or_else(|| AimError::InvalidProblem("1 - b x0^(N+2) = 0".into()))?;
    let inv_x = x.recip().expect("x0 > 0");
    let x_n1 = x.powi(params.big_n + 1).expect("x0 > 0");
    let x_n = x.powi(params.big_n).expect("x0 > 0");
    let lambda0 = Ring::sub(
        &Ring::mul(&x_n1, &inv_denom).scale(&params.a),
        &inv_x.scale(&(&params.m + &BigReal::one(prec))),
    )
    .scale(&BigReal::from_int(prec, 2));
    let s0_unit = Ring::mul(&x_n, &inv_denom).scale(&BigReal::from_int(prec, -1));
    let label = format!(
        "general N={} a={} b={} m={}",
        params.big_n,
        params.a.to_sci_string(8),
        params.b.to_sci_string(8),
        params.m.to_sci_string(8)
    );
    AimProblem::new(
        label,
        prec,
        0,
        x0.clone(),
        Arc::new(move |_: &Energy| GammaSeries::new(vec![lambda0.clone()])),
        Arc::new(move |w: &Energy| GammaSeries::new(vec![s0_unit.scale(w.coeff(0))])),
    )
}
