use crate::real::BigReal;
use crate::series::{LaurentPoly, Ring};

/// `x^μ · exp(−c x² − d x) · P(x)` with `P` a Laurent polynomial.
///
/// Closed under differentiation: the derivative keeps `(μ, c, d)` and
/// replaces `P` by `P' + (μ/x − 2cx − d) P`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialFunction {
    pub mu: BigReal,
    pub gauss: BigReal,
    pub linear: BigReal,
    pub poly: LaurentPoly,
}

impl RadialFunction {
    fn log_derivative(&self) -> LaurentPoly {
        let var = self.poly.var();
        let prec = self.poly.precision();
        LaurentPoly::from_terms(
            var,
            prec,
            [(-1, self.mu.clone()), (1, -self.gauss.mul_int(2)), (0, -&self.linear)],
        )
    }

    pub fn derivative(&self) -> Self {
        let poly = Ring::add(&self.poly.derivative(), &Ring::mul(&self.log_derivative(), &self.poly));
        RadialFunction { poly, ..self.clone() }
    }

    /// Same envelope, polynomial multiplied by `q`.
    pub fn mul_poly(&self, q: &LaurentPoly) -> Self {
        RadialFunction {
            poly: Ring::mul(&self.poly, q),
            ..self.clone()
        }
    }

    pub fn scale(&self, k: &BigReal) -> Self {
        RadialFunction {
            poly: self.poly.scale(k),
            ..self.clone()
        }
    }

    /// Sum of two functions with the same envelope.
    ///
    /// # Panics
    /// If the envelopes differ.
    pub fn add(&self, other: &Self) -> Self {
        assert!(
            self.mu == other.mu && self.gauss == other.gauss && self.linear == other.linear,
            "envelope mismatch"
        );
        RadialFunction {
            poly: Ring::add(&self.poly, &other.poly),
            ..self.clone()
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&BigReal::from_int(other.poly.precision(), -1)))
    }

    /// The envelope `x^μ exp(−c x² − d x)` at `x > 0`.
    pub fn envelope(&self, x: &BigReal) -> BigReal {
        let expo = -&(&(&self.gauss * &x.square()) + &(&self.linear * x));
        let power = if self.mu.is_zero() {
            BigReal::one(x.precision())
        } else {
            x.pow(&self.mu)
        };
        &power * &expo.exp()
    }

    /// Value at `x > 0` (or at `x = 0` when `μ >= 0` and `P` has no pole).
    pub fn eval(&self, x: &BigReal) -> BigReal {
        if x.is_zero() {
            return match self.poly.eval(x) {
                Ok(p) if self.mu.is_zero() => p,
                _ => BigReal::zero(x.precision()),
            };
        }
        let p = self.poly.eval(x).expect("x != 0");
        &self.envelope(x) * &p
    }

    /// Largest absolute term of `P` at `x`, times the envelope: the scale
    /// against which residuals at `x` are judged.
    pub fn term_scale(&self, x: &BigReal) -> BigReal {
        let env = self.envelope(x).abs();
        let max = self
            .poly
            .terms()
            .map(|(e, c)| (c * &x.powi(e)).abs())
            .reduce(BigReal::max)
            .unwrap_or_else(|| BigReal::zero(x.precision()));
        &env * &max
    }
}
