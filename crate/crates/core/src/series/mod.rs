//! Exact arithmetic substrate for the iteration.
//!
//! The iteration only ever needs a differential ring: add, subtract,
//! multiply, differentiate, and finally evaluate at one point. [`Ring`] and
//! [`Differential`] capture that, and three carriers implement them:
//!
//! - [`LaurentPoly`]: finite sums of integer powers, closed under the
//!   recurrence for every oscillator, Coulomb and anharmonic problem;
//! - [`TaylorJet`]: truncated Taylor expansion about the evaluation point,
//!   used for the rational coefficients of the general solvable family
//!   and to keep deep anharmonic iterations cheap;
//! - [`GammaSeries`]: truncated polynomial in the perturbation parameter
//!   with coefficients in either of the above (or plain [`BigReal`]s).

mod gamma;
mod jet;
mod laurent;

pub use gamma::{gamma_mul, GammaSeries};
pub use jet::TaylorJet;
pub use laurent::{poly_diff, poly_eval, poly_mul, LaurentPoly, Var};

use crate::error::SeriesError;
use crate::real::BigReal;

/// Commutative ring with a value-level zero.
///
/// `zero_like` exists because a zero polynomial still needs its variable
/// tag and precision.
pub trait Ring: Clone + Send + Sync {
    fn zero_like(&self) -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
}

/// A [`Ring`] with a derivation and point evaluation.
pub trait Differential: Ring {
    fn derivative(&self) -> Self;
    fn eval_at(&self, x0: &BigReal) -> Result<BigReal, SeriesError>;
    /// Largest coefficient magnitude; zero for the zero element.
    fn max_abs(&self) -> BigReal;
}

impl Ring for BigReal {
    fn zero_like(&self) -> Self {
        BigReal::zero(self.precision())
    }

    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }

    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }

    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn neg(&self) -> Self {
        -self
    }

    fn is_zero(&self) -> bool {
        BigReal::is_zero(self)
    }
}
