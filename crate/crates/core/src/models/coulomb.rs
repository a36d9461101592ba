use std::sync::Arc;

use super::{alpha_j, zeta_j, Method, RadialComponents, RadialFunction, SpectrumEntry};
use crate::aim::{select_root, AimProblem, Energy, RootSelector};
use crate::closed_form::{pochhammer, HypergeometricSpec};
use crate::error::ModelError;
use crate::real::{BigReal, Precision};
use crate::series::{GammaSeries, LaurentPoly, Var};

/// DKP Coulomb problem: pion of mass `m` bound to charge `Z`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoulombParams {
    pub mass: BigReal,
    pub hbar: BigReal,
    pub c: BigReal,
    pub z: BigReal,
    pub alpha: BigReal,
    pub j: u32,
}

impl CoulombParams {
    /// Fails with [`ModelError::Supercritical`] when `αZ >= J + 1/2`.
    pub fn new(
        mass: BigReal,
        hbar: BigReal,
        c: BigReal,
        z: BigReal,
        alpha: BigReal,
        j: u32,
    ) -> Result<Self, ModelError> {
        for (name, v) in [("mass", &mass), ("hbar", &hbar), ("c", &c)] {
            if v.signum() <= 0 {
                return Err(ModelError::InvalidParams(format!("{name} must be positive")));
            }
        }
        let params = CoulombParams {
            mass,
            hbar,
            c,
            z,
            alpha,
            j,
        };
        let gamma = params.gamma();
        let limit = params.j_half();
        if gamma.signum() < 0 {
            return Err(ModelError::InvalidParams("alpha*Z must be non-negative".into()));
        }
        if gamma >= limit {
            return Err(ModelError::Supercritical {
                gamma: gamma.to_sci_string(12),
                limit: limit.to_sci_string(12),
            });
        }
        Ok(params)
    }

    /// `m = ħ = c = Z = 1`, `α = γ`.
    pub fn natural(gamma: BigReal, j: u32) -> Result<Self, ModelError> {
        let one = BigReal::one(gamma.precision());
        Self::new(one.clone(), one.clone(), one.clone(), one, gamma, j)
    }

    pub fn precision(&self) -> Precision {
        self.mass.precision()
    }

    fn j_half(&self) -> BigReal {
        BigReal::from_ratio(self.precision(), 2 * i64::from(self.j) + 1, 2)
    }

    /// `γ = αZ`.
    pub fn gamma(&self) -> BigReal {
        &self.alpha * &self.z
    }

    /// `Λ = −1/2 + √((J + 1/2)² − γ²)`.
    pub fn lambda(&self) -> BigReal {
        let root = (&self.j_half().square() - &self.gamma().square()).sqrt();
        &root - &BigReal::from_ratio(self.precision(), 1, 2)
    }

    pub fn rest_energy(&self) -> BigReal {
        &self.mass * &self.c.square()
    }

    /// `κ = (2/ħc) √(m²c⁴ − E²)`.
    pub fn kappa(&self, energy: &BigReal) -> BigReal {
        let rad = &self.rest_energy().square() - &energy.square();
        &rad.max(BigReal::zero(self.precision())).sqrt().mul_int(2) / &(&self.hbar * &self.c)
    }
}

/// `ξ = 2γE/(κħc) = γE/√(m²c⁴ − E²)`.
pub fn xi_from_energy(params: &CoulombParams, energy: &BigReal) -> BigReal {
    let rad = (&params.rest_energy().square() - &energy.square()).sqrt();
    &(&params.gamma() * energy) / &rad
}

/// Inverse of [`xi_from_energy`]: `E = mc² ξ/√(ξ² + γ²)`.
pub fn energy_from_xi(params: &CoulombParams, xi: &BigReal) -> BigReal {
    let denom = (&xi.square() + &params.gamma().square()).sqrt();
    &(&params.rest_energy() * xi) / &denom
}

/// Default evaluation point in `ρ`.
pub fn default_coulomb_x0(prec: Precision) -> BigReal {
    BigReal::one(prec)
}

/// `λ₀ = −1 + (2Λ+2)/ρ`, `s₀ = (ξ − Λ − 1)/ρ`; the energy unknown is `ξ`.
pub fn coulomb_problem(params: &CoulombParams, x0: &BigReal) -> Result<AimProblem, ModelError> {
    let prec = params.precision();
    let lam = params.lambda();
    let lambda0 = LaurentPoly::from_terms(
        Var::Rho,
        prec,
        [
            (0, BigReal::from_int(prec, -1)),
            (-1, &lam.mul_int(2) + &BigReal::from_int(prec, 2)),
        ],
    );
    let shift = &lam + &BigReal::one(prec);
    let label = format!("coulomb gamma={} J={}", params.gamma().to_sci_string(8), params.j);
    Ok(AimProblem::new(
        label,
        prec,
        0,
        x0.clone(),
        Arc::new(move |_: &Energy| GammaSeries::new(vec![lambda0.clone()])),
        Arc::new(move |xi: &Energy| GammaSeries::new(vec![LaurentPoly::monomial(Var::Rho, xi.coeff(0) - &shift, -1)])),
    )?)
}

fn check_principal(params: &CoulombParams, n: usize) -> Result<usize, ModelError> {
    let j = params.j as usize;
    if n < j + 1 {
        return Err(ModelError::InvalidParams(format!(
            "principal n = {n} must be at least J + 1 = {}",
            j + 1
        )));
    }
    Ok(n - j)
}

/// `E = mc² [1 + γ²/(n − J − 1/2 + √((J+1/2)² − γ²))²]^(−1/2)`, `B = mc² − E`.
pub fn coulomb_spectrum(params: &CoulombParams, n: usize) -> Result<SpectrumEntry, ModelError> {
    let prec = params.precision();
    let n_radial = check_principal(params, n)?;
    // n − J − 1/2 + √(…) = n' + Λ
    let denom = &BigReal::from_int(prec, n_radial as i64) + &params.lambda();
    let inner = &BigReal::one(prec) + &(&params.gamma().square() / &denom.square());
    let energy = &params.rest_energy() / &inner.sqrt();
    Ok(SpectrumEntry {
        n: n_radial,
        j: params.j,
        principal: n,
        e_eff: None,
        binding: Some(&params.rest_energy() - &energy),
        energy,
        method: Method::ClosedForm,
    })
}

/// Level with principal number `n` from the iteration: the root
/// `ξ = Λ + n'` of `δ` at depth `n'`, searched on `(0, Λ + n' + 1/2]`.
pub fn coulomb_aim_spectrum(
    params: &CoulombParams,
    n: usize,
    x0: &BigReal,
) -> Result<(BigReal, SpectrumEntry), ModelError> {
    let prec = params.precision();
    let n_radial = check_principal(params, n)?;
    let problem = coulomb_problem(params, x0)?;
    let hi = &(&params.lambda() + &BigReal::from_int(prec, n_radial as i64)) + &BigReal::from_ratio(prec, 1, 2);
    let sel = RootSelector::new(BigReal::zero(prec), hi, n_radial - 1).with_grid(40 * (n_radial + 1));
    let xi = select_root(&problem, n_radial, &sel)?;
    let energy = energy_from_xi(params, &xi);
    let entry = SpectrumEntry {
        n: n_radial,
        j: params.j,
        principal: n,
        e_eff: None,
        binding: Some(&params.rest_energy() - &energy),
        energy,
        method: Method::Aim,
    };
    Ok((xi, entry))
}

/// `F(ρ) = ρ^(Λ+1) e^(−ρ/2) (−1)^ν (σ)_ν ₁F₁(−ν, σ; ρ)` with `ν = n' − 1`,
/// `σ = 2Λ + 2`, for principal number `n`.
pub fn coulomb_wavefunction(params: &CoulombParams, n: usize) -> Result<RadialFunction, ModelError> {
    let prec = params.precision();
    let nu = check_principal(params, n)? - 1;
    let lam = params.lambda();
    let sigma = &lam.mul_int(2) + &BigReal::from_int(prec, 2);
    let pre = pochhammer(&sigma, nu)?.mul_int(if nu % 2 == 0 { 1 } else { -1 });
    let poly = HypergeometricSpec::f11(nu, sigma).polynomial(Var::Rho)?.scale(&pre);
    Ok(RadialFunction {
        mu: &lam + &BigReal::one(prec),
        gauss: BigReal::zero(prec),
        linear: BigReal::from_ratio(prec, 1, 2),
        poly,
    })
}

/// `G = EF/mc²`, `H₊₁ = −κλ_π α_J (F' − (J+1)F/ρ)`, `H₋₁ = κλ_π ζ_J (F' + JF/ρ)`,
/// derivatives in `ρ`, `λ_π = ħ/mc`.
pub fn coulomb_components(params: &CoulombParams, f: &RadialFunction, energy: &BigReal) -> RadialComponents {
    let prec = params.precision();
    let j = i64::from(params.j);
    let k_lambda = &params.kappa(energy) * &(&params.hbar / &(&params.mass * &params.c));
    let df = f.derivative();
    let over_rho = |c: i64| LaurentPoly::monomial(Var::Rho, BigReal::from_int(prec, c), -1);
    RadialComponents {
        f: f.clone(),
        g: f.scale(&(energy / &params.rest_energy())),
        h_plus: df
            .add(&f.mul_poly(&over_rho(-(j + 1))))
            .scale(&-(&k_lambda * &alpha_j(prec, params.j))),
        h_minus: df
            .add(&f.mul_poly(&over_rho(j)))
            .scale(&(&k_lambda * &zeta_j(prec, params.j))),
    }
}

/// `F'' + (ξ/ρ − 1/4 − (J(J+1) − γ²)/ρ²) F`.
pub fn coulomb_radial_residual(params: &CoulombParams, f: &RadialFunction, xi: &BigReal) -> RadialFunction {
    let prec = params.precision();
    let j = i64::from(params.j);
    let centrifugal = &BigReal::from_int(prec, j * (j + 1)) - &params.gamma().square();
    let potential = LaurentPoly::from_terms(
        Var::Rho,
        prec,
        [
            (-1, xi.clone()),
            (0, BigReal::from_ratio(prec, -1, 4)),
            (-2, -centrifugal),
        ],
    );
    f.derivative().derivative().add(&f.mul_poly(&potential))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Precision {
        Precision::default()
    }

    #[test]
    fn lambda0_shape() {
        let params = CoulombParams::natural(BigReal::from_ratio(p(), 1, 5), 1).unwrap();
        let prob = coulomb_problem(&params, &default_coulomb_x0(p())).unwrap();
        let (l0, _) = prob.coefficients(&prob.scalar_energy(&BigReal::one(p())));
        let l0 = l0.coeff(0);
        assert_eq!(*l0.coeff(0).unwrap(), BigReal::from_int(p(), -1));
        assert_eq!(
            *l0.coeff(-1).unwrap(),
            &params.lambda().mul_int(2) + &BigReal::from_int(p(), 2)
        );
        assert_eq!(l0.len(), 2);
    }

    #[test]
    fn free_limit() {
        let params = CoulombParams::natural(BigReal::zero(p()), 0).unwrap();
        assert!(params.lambda().is_zero());
        let entry = coulomb_spectrum(&params, 3).unwrap();
        assert_eq!(entry.energy, BigReal::one(p()));
        assert!(entry.binding.unwrap().is_zero());
        for n in 1..=3 {
            let (xi, _) = coulomb_aim_spectrum(&params, n, &default_coulomb_x0(p())).unwrap();
            assert!((&xi - &BigReal::from_int(p(), n as i64)).abs() < p().ten_pow_neg(40));
        }
    }

    #[test]
    fn ground_energy_at_04() {
        let params = CoulombParams::natural(BigReal::from_ratio(p(), 2, 5), 0).unwrap();
        let e = coulomb_spectrum(&params, 1).unwrap().energy;
        let expected = BigReal::from_ratio(p(), 5, 4).sqrt().recip();
        assert!((&e - &expected).abs() < p().ten_pow_neg(100));
        let xi = xi_from_energy(&params, &e);
        assert!((&energy_from_xi(&params, &xi) - &e).abs() < p().ten_pow_neg(100));
    }

    #[test]
    fn supercritical_is_rejected() {
        let err = CoulombParams::natural(BigReal::from_ratio(p(), 1, 2), 0).unwrap_err();
        assert!(matches!(err, ModelError::Supercritical { .. }));
    }

    #[test]
    fn second_state_node() {
        let params = CoulombParams::natural(BigReal::zero(p()), 0).unwrap();
        let f = coulomb_wavefunction(&params, 2).unwrap();
        assert!(f.eval(&BigReal::from_int(p(), 2)).abs() < p().ten_pow_neg(100));
        let far = f.eval(&BigReal::from_int(p(), 400)).abs();
        assert!(far < p().ten_pow_neg(80));
    }
}
