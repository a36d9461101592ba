//! The three DKP radial problems: oscillator, Coulomb and anharmonic.

mod anharmonic;
mod coulomb;
mod oscillator;
mod radial;

use std::fmt;

pub use anharmonic::{anharmonic_problem, default_anharmonic_x0, AnharmonicMode, AnharmonicParams};
pub use coulomb::{
    coulomb_aim_spectrum, coulomb_components, coulomb_problem, coulomb_radial_residual, coulomb_spectrum,
    coulomb_wavefunction, default_coulomb_x0, energy_from_xi, xi_from_energy, CoulombParams,
};
pub use oscillator::{
    default_oscillator_x0, oscillator_aim_spectrum, oscillator_closure_residual, oscillator_components,
    oscillator_exact_depth, oscillator_problem, oscillator_radial_residual, oscillator_spectrum,
    oscillator_wavefunction, OscillatorParams,
};
pub use radial::RadialFunction;

use crate::error::ModelError;
use crate::real::{BigReal, Precision};

/// How a spectrum value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    ClosedForm,
    Aim,
    Oracle,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ClosedForm => "closed-form",
            Method::Aim => "aim",
            Method::Oracle => "oracle",
        })
    }
}

/// Which root of the energy quadratic to report.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EnergyBranch {
    #[default]
    Particle,
    Antiparticle,
}

/// One level of a spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumEntry {
    /// Radial index: `n` for the oscillator, `n'` for Coulomb.
    pub n: usize,
    pub j: u32,
    /// `2n + J` (oscillator) or `n' + J` (Coulomb).
    pub principal: usize,
    /// Oscillator only.
    pub e_eff: Option<BigReal>,
    pub energy: BigReal,
    /// Coulomb only: `mc² − E`.
    pub binding: Option<BigReal>,
    pub method: Method,
}

/// Radial components tabulated on a grid. Only `f` is mandatory.
#[derive(Clone, Debug, PartialEq)]
pub struct WavefunctionTable {
    pub radii: Vec<BigReal>,
    pub f: Vec<BigReal>,
    pub g: Option<Vec<BigReal>>,
    pub h_plus: Option<Vec<BigReal>>,
    pub h_minus: Option<Vec<BigReal>>,
}

impl WavefunctionTable {
    pub fn from_function(func: &RadialFunction, radii: &[BigReal]) -> Self {
        WavefunctionTable {
            radii: radii.to_vec(),
            f: radii.iter().map(|r| func.eval(r)).collect(),
            g: None,
            h_plus: None,
            h_minus: None,
        }
    }

    /// Number of sign changes of `f`, ignoring exact zeros.
    pub fn sign_changes(&self) -> usize {
        let signs: Vec<i32> = self.f.iter().map(BigReal::signum).filter(|s| *s != 0).collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }
}

/// `F`, `G`, `H₊₁`, `H₋₁` as exact radial functions.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialComponents {
    pub f: RadialFunction,
    pub g: RadialFunction,
    pub h_plus: RadialFunction,
    pub h_minus: RadialFunction,
}

impl RadialComponents {
    /// Tabulates all four components; grid points must be positive.
    pub fn table(&self, radii: &[BigReal]) -> Result<WavefunctionTable, ModelError> {
        if let Some(r) = radii.iter().find(|r| r.signum() <= 0) {
            return Err(ModelError::InvalidParams(format!(
                "component grids exclude r <= 0 (got {})",
                r.to_sci_string(6)
            )));
        }
        let col = |func: &RadialFunction| radii.iter().map(|r| func.eval(r)).collect::<Vec<_>>();
        Ok(WavefunctionTable {
            radii: radii.to_vec(),
            f: col(&self.f),
            g: Some(col(&self.g)),
            h_plus: Some(col(&self.h_plus)),
            h_minus: Some(col(&self.h_minus)),
        })
    }
}

/// `α_J = √((J+1)/(2J+1))`.
pub fn alpha_j(prec: Precision, j: u32) -> BigReal {
    BigReal::from_ratio(prec, i64::from(j) + 1, 2 * i64::from(j) + 1).sqrt()
}

/// `ζ_J = √(J/(2J+1))`.
pub fn zeta_j(prec: Precision, j: u32) -> BigReal {
    BigReal::from_ratio(prec, i64::from(j), 2 * i64::from(j) + 1).sqrt()
}
