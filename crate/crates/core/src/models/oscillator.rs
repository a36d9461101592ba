use std::sync::Arc;

use super::{alpha_j, zeta_j, EnergyBranch, Method, RadialComponents, RadialFunction, SpectrumEntry};
use crate::aim::{select_root, AimProblem, Energy, RootSelector};
use crate::closed_form::{pochhammer, HypergeometricSpec};
use crate::error::ModelError;
use crate::real::{BigReal, Precision};
use crate::series::{GammaSeries, LaurentPoly, Var};

/// DKP oscillator: mass, frequency, `ħ`, `c` and total angular momentum.
#[derive(Clone, Debug, PartialEq)]
pub struct OscillatorParams {
    pub mass: BigReal,
    pub omega: BigReal,
    pub hbar: BigReal,
    pub c: BigReal,
    pub j: u32,
}

impl OscillatorParams {
    pub fn new(mass: BigReal, omega: BigReal, hbar: BigReal, c: BigReal, j: u32) -> Result<Self, ModelError> {
        for (name, v) in [("mass", &mass), ("omega", &omega), ("hbar", &hbar), ("c", &c)] {
            if v.signum() <= 0 {
                return Err(ModelError::InvalidParams(format!("{name} must be positive")));
            }
        }
        Ok(OscillatorParams {
            mass,
            omega,
            hbar,
            c,
            j,
        })
    }

    /// `m = ħ = c = 1`, `ω = k`.
    pub fn natural(k: BigReal, j: u32) -> Result<Self, ModelError> {
        let one = BigReal::one(k.precision());
        Self::new(one.clone(), k, one.clone(), one, j)
    }

    pub fn precision(&self) -> Precision {
        self.mass.precision()
    }

    /// `k = mω/ħ`.
    pub fn k(&self) -> BigReal {
        &(&self.mass * &self.omega) / &self.hbar
    }

    fn rest_energy(&self) -> BigReal {
        &self.mass * &self.c.square()
    }

    fn hbar_c(&self) -> BigReal {
        &self.hbar * &self.c
    }

    /// `E_eff = (E² − m²c⁴)/(ħc)² + 3mω/ħ`.
    pub fn e_eff_of_energy(&self, e: &BigReal) -> BigReal {
        let num = &e.square() - &self.rest_energy().square();
        &(&num / &self.hbar_c().square()) + &self.k().mul_int(3)
    }

    /// Inverse of [`OscillatorParams::e_eff_of_energy`] on the chosen branch.
    pub fn energy_of_e_eff(&self, e_eff: &BigReal, branch: EnergyBranch) -> Result<BigReal, ModelError> {
        let e2 = &self.rest_energy().square() + &(&self.hbar_c().square() * &(e_eff - &self.k().mul_int(3)));
        if e2.signum() < 0 {
            return Err(ModelError::InvalidParams(format!(
                "E_eff = {} gives E^2 < 0",
                e_eff.to_sci_string(12)
            )));
        }
        let e = e2.sqrt();
        Ok(match branch {
            EnergyBranch::Particle => e,
            EnergyBranch::Antiparticle => -e,
        })
    }
}

/// Default evaluation point of the quantization condition: the zero of `λ₀`,
/// `r = √((J+1)/k)`. A fixed point drifts into the tail as `k` grows, where
/// spurious roots of `δ` crowd the low ranks.
pub fn default_oscillator_x0(params: &OscillatorParams) -> BigReal {
    (&BigReal::from_int(params.precision(), i64::from(params.j) + 1) / &params.k()).sqrt()
}

/// `λ₀ = 2(kr − (J+1)/r)`, `s₀ = 3k + 2kJ − E_eff`; the energy unknown is `E_eff`.
pub fn oscillator_problem(params: &OscillatorParams, x0: &BigReal) -> Result<AimProblem, ModelError> {
    let prec = params.precision();
    let k = params.k();
    let j = i64::from(params.j);
    let lambda0 = LaurentPoly::from_terms(
        Var::R,
        prec,
        [(1, k.mul_int(2)), (-1, BigReal::from_int(prec, -2 * (j + 1)))],
    );
    let base = k.mul_int(3 + 2 * j);
    let label = format!("oscillator k={} J={}", k.to_sci_string(8), params.j);
    Ok(AimProblem::new(
        label,
        prec,
        0,
        x0.clone(),
        Arc::new(move |_: &Energy| GammaSeries::new(vec![lambda0.clone()])),
        Arc::new(move |e: &Energy| GammaSeries::new(vec![LaurentPoly::constant(Var::R, &base - e.coeff(0))])),
    )?)
}

/// `E_eff = k(4n + 3 + 2J)` and `E = √(m²c⁴ + 2mc² N ħω)`, `N = 2n + J`.
pub fn oscillator_spectrum(params: &OscillatorParams, n: usize, branch: EnergyBranch) -> SpectrumEntry {
    let principal = 2 * n + params.j as usize;
    let e_eff = params.k().mul_int(4 * n as i64 + 3 + 2 * i64::from(params.j));
    let e2 = &params.rest_energy().square()
        + &(&(&params.rest_energy() * &params.hbar) * &params.omega).mul_int(2 * principal as i64);
    let e = e2.sqrt();
    SpectrumEntry {
        n,
        j: params.j,
        principal,
        e_eff: Some(e_eff),
        energy: match branch {
            EnergyBranch::Particle => e,
            EnergyBranch::Antiparticle => -e,
        },
        binding: None,
        method: Method::ClosedForm,
    }
}

/// Smallest depth at which level `n` is an exact root of `δ` at every `x0`.
///
/// `f_n` has degree `2n` in `r`, and the condition vanishes identically
/// from depth `2n − 1` on; low states need at least depth `n + 1`.
pub fn oscillator_exact_depth(n: usize) -> usize {
    (n + 1).max((2 * n).saturating_sub(1))
}

/// Level `n` from the iteration: rank-`n` root of `δ` at
/// [`oscillator_exact_depth`], searched on `(0, k(4n + 5 + 2J)]`.
pub fn oscillator_aim_spectrum(
    params: &OscillatorParams,
    n: usize,
    x0: &BigReal,
    branch: EnergyBranch,
) -> Result<SpectrumEntry, ModelError> {
    let prec = params.precision();
    let problem = oscillator_problem(params, x0)?;
    let hi = params.k().mul_int(4 * n as i64 + 5 + 2 * i64::from(params.j));
    let sel = RootSelector::new(BigReal::zero(prec), hi, n).with_grid(40 * (n + 2));
    let e_eff = select_root(&problem, oscillator_exact_depth(n), &sel)?;
    let energy = params.energy_of_e_eff(&e_eff, branch)?;
    Ok(SpectrumEntry {
        n,
        j: params.j,
        principal: 2 * n + params.j as usize,
        e_eff: Some(e_eff),
        energy,
        binding: None,
        method: Method::Aim,
    })
}

/// `F(r) = r^(J+1) e^(−kr²/2) (−1)^n 2^n (σ)_n ₁F₁(−n, σ; kr²)`, `σ = (2J+3)/2`.
pub fn oscillator_wavefunction(params: &OscillatorParams, n: usize) -> Result<RadialFunction, ModelError> {
    let prec = params.precision();
    let k = params.k();
    let sigma = BigReal::from_ratio(prec, 2 * i64::from(params.j) + 3, 2);
    let pre = (&BigReal::from_int(prec, 2).powi(n as i32) * &pochhammer(&sigma, n)?).mul_int(if n.is_multiple_of(2) {
        1
    } else {
        -1
    });
    let poly = HypergeometricSpec::f11(n, sigma)
        .with_argument(k.clone(), 2)
        .polynomial(Var::R)?
        .scale(&pre);
    Ok(RadialFunction {
        mu: BigReal::from_int(prec, i64::from(params.j) + 1),
        gauss: k.div_int(2),
        linear: BigReal::zero(prec),
        poly,
    })
}

fn laurent(prec: Precision, terms: &[(i32, BigReal)]) -> LaurentPoly {
    LaurentPoly::from_terms(Var::R, prec, terms.iter().cloned())
}

/// `G`, `H₊₁`, `H₋₁` from `F` at energy `E`:
///
/// ```text
/// G   = E F / mc²
/// H₊₁ = −α_J (ħ/mc) (F' − (J+1) F/r + k r F)
/// H₋₁ = +ζ_J (ħ/mc) (F' + J F/r + k r F)
/// ```
///
/// `H₋₁` carries `+J/r` and an overall `+` sign: this is the form for which
/// the fourth first-order equation closes (see
/// [`oscillator_closure_residual`]). `ζ₀ = 0` makes `H₋₁` vanish at `J = 0`.
pub fn oscillator_components(params: &OscillatorParams, f: &RadialFunction, energy: &BigReal) -> RadialComponents {
    let prec = params.precision();
    let j = i64::from(params.j);
    let k = params.k();
    let compton = &params.hbar / &(&params.mass * &params.c);
    let df = f.derivative();
    let g = f.scale(&(energy / &params.rest_energy()));
    let plus_op = laurent(prec, &[(-1, BigReal::from_int(prec, -(j + 1))), (1, k.clone())]);
    let h_plus = df
        .add(&f.mul_poly(&plus_op))
        .scale(&-(&alpha_j(prec, params.j) * &compton));
    let minus_op = laurent(prec, &[(-1, BigReal::from_int(prec, j)), (1, k)]);
    let h_minus = df
        .add(&f.mul_poly(&minus_op))
        .scale(&(&zeta_j(prec, params.j) * &compton));
    RadialComponents {
        f: f.clone(),
        g,
        h_plus,
        h_minus,
    }
}

/// Left minus right side of
/// `−α_J (d/dr + (J+1)/r − kr) H₊₁ + ζ_J (d/dr − J/r − kr) H₋₁ = (mc² F − E G)/ħc`.
pub fn oscillator_closure_residual(
    params: &OscillatorParams,
    comps: &RadialComponents,
    energy: &BigReal,
) -> RadialFunction {
    let prec = params.precision();
    let j = i64::from(params.j);
    let k = params.k();
    let op_plus = laurent(prec, &[(-1, BigReal::from_int(prec, j + 1)), (1, -&k)]);
    let op_minus = laurent(prec, &[(-1, BigReal::from_int(prec, -j)), (1, -&k)]);
    let left_plus = comps
        .h_plus
        .derivative()
        .add(&comps.h_plus.mul_poly(&op_plus))
        .scale(&-alpha_j(prec, params.j));
    let left_minus = comps
        .h_minus
        .derivative()
        .add(&comps.h_minus.mul_poly(&op_minus))
        .scale(&zeta_j(prec, params.j));
    let right = comps
        .f
        .scale(&params.rest_energy())
        .sub(&comps.g.scale(energy))
        .scale(&params.hbar_c().recip());
    left_plus.add(&left_minus).sub(&right)
}

/// `F'' + (E_eff − k²r² − J(J+1)/r²) F`.
pub fn oscillator_radial_residual(params: &OscillatorParams, f: &RadialFunction, e_eff: &BigReal) -> RadialFunction {
    let prec = params.precision();
    let j = i64::from(params.j);
    let k = params.k();
    let potential = laurent(
        prec,
        &[
            (0, e_eff.clone()),
            (2, -k.square()),
            (-2, BigReal::from_int(prec, -j * (j + 1))),
        ],
    );
    f.derivative().derivative().add(&f.mul_poly(&potential))
}
