use std::sync::Arc;

use crate::aim::{AimProblem, Energy};
use crate::error::ModelError;
use crate::real::{BigReal, Precision};
use crate::series::{GammaSeries, LaurentPoly, Ring, Var};

/// Quartic vector potential `r⁴` with `ħ = c = m = 1`, after factoring out
/// `exp(−βr²/2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AnharmonicParams {
    /// Gaussian factor parameter.
    pub beta: BigReal,
    /// Only `J = 0` is supported.
    pub j: u32,
    /// Order `P` of the γ-expansion in perturbative mode.
    pub gamma_order: usize,
    /// Part of `s₀` multiplied by γ; defaults to `−β² r² − r⁸`.
    pub perturbation: Option<LaurentPoly>,
}

impl AnharmonicParams {
    /// `β = 5`, `J = 0`, `P = 5`.
    pub fn standard(prec: Precision) -> Self {
        AnharmonicParams {
            beta: BigReal::from_int(prec, 5),
            j: 0,
            gamma_order: 5,
            perturbation: None,
        }
    }

    pub fn precision(&self) -> Precision {
        self.beta.precision()
    }

    /// The γ-multiplied part of `s₀`.
    pub fn perturbation(&self) -> LaurentPoly {
        self.perturbation.clone().unwrap_or_else(|| {
            LaurentPoly::from_terms(
                Var::R,
                self.precision(),
                [(2, -self.beta.square()), (8, BigReal::from_int(self.precision(), -1))],
            )
        })
    }
}

/// How `s₀` is presented to the iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnharmonicMode {
    /// Full `s₀` at γ-order 0.
    Direct,
    /// `s₀ = (−E² + 2Er⁴ + β + 1) + γ(−β²r² − r⁸)` with `E` a γ-series.
    Perturbative,
}

/// Default evaluation point. `λ₀ = 2βr` vanishes at `r = 0` but `δ` stays
/// finite there, and only the constant terms of `λ_k`, `s_k` contribute.
pub fn default_anharmonic_x0(prec: Precision) -> BigReal {
    BigReal::zero(prec)
}

/// `λ₀ = 2βr`, `s₀ = −E² + 2Er⁴ + β + 1 − β²r² − r⁸`, optionally split in γ.
pub fn anharmonic_problem(
    params: &AnharmonicParams,
    mode: AnharmonicMode,
    x0: &BigReal,
) -> Result<AimProblem, ModelError> {
    if params.j != 0 {
        return Err(ModelError::Unsupported(format!(
            "anharmonic states with J = {} (only J = 0)",
            params.j
        )));
    }
    if params.beta.signum() <= 0 {
        return Err(ModelError::InvalidParams("beta must be positive".into()));
    }
    let prec = params.precision();
    let order = match mode {
        AnharmonicMode::Direct => 0,
        AnharmonicMode::Perturbative => params.gamma_order,
    };
    let lambda0 = LaurentPoly::monomial(Var::R, params.beta.mul_int(2), 1);
    let constant = &params.beta + &BigReal::one(prec);
    let pert = params.perturbation();
    let r4 = LaurentPoly::monomial(Var::R, BigReal::from_int(prec, 2), 4);
    let l0_series = {
        let mut coeffs = vec![LaurentPoly::zero(Var::R, prec); order + 1];
        coeffs[0] = lambda0;
        GammaSeries::new(coeffs)
    };
    let s0 = move |e: &Energy| -> GammaSeries<LaurentPoly> {
        let e_poly = e.map(|c| LaurentPoly::constant(Var::R, c.clone()));
        let e_sq = Ring::mul(&e_poly, &e_poly);
        let mut coeffs: Vec<LaurentPoly> = e_sq
            .coeffs()
            .iter()
            .zip(e_poly.coeffs())
            .map(|(sq, lin)| Ring::sub(&Ring::mul(&r4, lin), sq))
            .collect();
        coeffs[0] = Ring::add(&coeffs[0], &LaurentPoly::constant(Var::R, constant.clone()));
        match mode {
            AnharmonicMode::Direct => coeffs[0] = Ring::add(&coeffs[0], &pert),
            AnharmonicMode::Perturbative => {
                if let Some(c1) = coeffs.get_mut(1) {
                    *c1 = Ring::add(c1, &pert);
                }
            }
        }
        GammaSeries::new(coeffs)
    };
    let label = format!(
        "anharmonic beta={} {}",
        params.beta.to_sci_string(8),
        match mode {
            AnharmonicMode::Direct => "direct",
            AnharmonicMode::Perturbative => "perturbative",
        }
    );
    Ok(AimProblem::new(
        label,
        prec,
        order,
        x0.clone(),
        Arc::new(move |_: &Energy| l0_series.clone()),
        Arc::new(s0),
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Ring;

    fn p() -> Precision {
        Precision::default()
    }

    #[test]
    fn split_coefficients() {
        let params = AnharmonicParams::standard(p());
        let prob = anharmonic_problem(&params, AnharmonicMode::Perturbative, &default_anharmonic_x0(p())).unwrap();
        let e = BigReal::from_ratio(p(), 5, 2);
        let (l0, s0) = prob.coefficients(&prob.scalar_energy(&e));
        assert_eq!(*l0.coeff(0), LaurentPoly::from_ints(Var::R, p(), &[(1, 10)]));
        let expected0 = LaurentPoly::from_terms(
            Var::R,
            p(),
            [(0, &BigReal::from_int(p(), 6) - &e.square()), (4, e.mul_int(2))],
        );
        assert_eq!(*s0.coeff(0), expected0);
        assert_eq!(*s0.coeff(1), LaurentPoly::from_ints(Var::R, p(), &[(2, -25), (8, -1)]));
        assert!(s0.coeff(2).is_zero());
    }

    #[test]
    fn direct_mode_has_full_s0() {
        let params = AnharmonicParams::standard(p());
        let prob = anharmonic_problem(&params, AnharmonicMode::Direct, &default_anharmonic_x0(p())).unwrap();
        assert_eq!(prob.gamma_order(), 0);
        let (_, s0) = prob.coefficients(&prob.scalar_energy(&BigReal::zero(p())));
        assert_eq!(
            *s0.coeff(0),
            LaurentPoly::from_ints(Var::R, p(), &[(0, 6), (2, -25), (8, -1)])
        );
    }

    #[test]
    fn higher_j_is_unsupported() {
        let mut params = AnharmonicParams::standard(p());
        params.j = 1;
        assert!(matches!(
            anharmonic_problem(&params, AnharmonicMode::Direct, &BigReal::zero(p())),
            Err(ModelError::Unsupported(_))
        ));
    }
}
