use std::collections::BTreeMap;
use std::fmt;

use super::{Differential, Ring};
use crate::error::SeriesError;
use crate::real::{BigReal, Precision};

/// Independent variable of a polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    R,
    Rho,
    X,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Var::R => "r",
            Var::Rho => "rho",
            Var::X => "x",
        })
    }
}

/// Finite sum `Σ c_e x^e` over integer exponents, negative ones included.
///
/// Canonical form: no stored zero coefficients. Coefficients smaller than
/// `10^(10-p)` times the largest one (p = decimal precision) are treated as
/// roundoff and dropped, so two polynomials are equal iff their term maps
/// are equal.
#[derive(Clone, Debug)]
pub struct LaurentPoly {
    var: Var,
    prec: Precision,
    terms: BTreeMap<i32, BigReal>,
}

impl PartialEq for LaurentPoly {
    fn eq(&self, other: &Self) -> bool {
        self.var == other.var && self.terms == other.terms
    }
}

impl LaurentPoly {
    pub fn zero(var: Var, prec: Precision) -> Self {
        LaurentPoly {
            var,
            prec,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(var: Var, c: BigReal) -> Self {
        Self::monomial(var, c, 0)
    }

    pub fn monomial(var: Var, c: BigReal, exponent: i32) -> Self {
        let prec = c.precision();
        Self::from_terms(var, prec, [(exponent, c)])
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs; repeated
    /// exponents are summed.
    pub fn from_terms<I>(var: Var, prec: Precision, terms: I) -> Self
    where
        I: IntoIterator<Item = (i32, BigReal)>,
    {
        let mut map: BTreeMap<i32, BigReal> = BTreeMap::new();
        for (e, c) in terms {
            match map.get_mut(&e) {
                Some(acc) => *acc += &c,
                None => {
                    map.insert(e, c);
                }
            }
        }
        let mut p = LaurentPoly { var, prec, terms: map };
        p.canonicalize();
        p
    }

    /// Convenience for small integer-coefficient polynomials in tests and docs.
    pub fn from_ints(var: Var, prec: Precision, terms: &[(i32, i64)]) -> Self {
        Self::from_terms(var, prec, terms.iter().map(|&(e, c)| (e, BigReal::from_int(prec, c))))
    }

    pub fn var(&self) -> Var {
        self.var
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i32, &BigReal)> + '_ {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn coeff(&self, exponent: i32) -> Option<&BigReal> {
        self.terms.get(&exponent)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_exponent(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    fn canonicalize(&mut self) {
        self.terms.retain(|_, c| !c.is_zero());
        let Some(max_exp) = self.terms.values().filter_map(BigReal::exponent).max() else {
            return;
        };
        // 10 decimal digits of headroom below the working precision, in binary
        let cutoff = max_exp - (self.prec.bits() as i32 - 34);
        self.terms.retain(|_, c| c.exponent().is_some_and(|e| e >= cutoff));
    }

    fn check_var(&self, other: &Self) -> Result<(), SeriesError> {
        if self.var == other.var {
            Ok(())
        } else {
            Err(SeriesError::VarMismatch(self.var, other.var))
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_var(other)?;
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            match terms.get_mut(e) {
                Some(acc) => *acc += c,
                None => {
                    terms.insert(*e, c.clone());
                }
            }
        }
        Ok(self.rebuild(terms))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_var(other)?;
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            match terms.get_mut(e) {
                Some(acc) => *acc -= c,
                None => {
                    terms.insert(*e, -c);
                }
            }
        }
        Ok(self.rebuild(terms))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_var(other)?;
        let mut terms: BTreeMap<i32, BigReal> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let prod = ca * cb;
                match terms.get_mut(&(ea + eb)) {
                    Some(acc) => *acc += &prod,
                    None => {
                        terms.insert(ea + eb, prod);
                    }
                }
            }
        }
        Ok(self.rebuild(terms))
    }

    pub fn scale(&self, k: &BigReal) -> Self {
        self.rebuild(self.terms.iter().map(|(e, c)| (*e, c * k)).collect())
    }

    /// Multiplies by `x^shift`.
    pub fn shift(&self, shift: i32) -> Self {
        self.rebuild(self.terms.iter().map(|(e, c)| (e + shift, c.clone())).collect())
    }

    pub fn derivative(&self) -> Self {
        self.rebuild(
            self.terms
                .iter()
                .filter(|(e, _)| **e != 0)
                .map(|(e, c)| (e - 1, c.mul_int(i64::from(*e))))
                .collect(),
        )
    }

    /// Antiderivative with the given constant term. Fails on an `x^-1` term,
    /// whose antiderivative is not a Laurent polynomial.
    pub fn integrate(&self, constant: &BigReal) -> Option<Self> {
        if self.terms.contains_key(&-1) {
            return None;
        }
        let mut terms: BTreeMap<i32, BigReal> = self
            .terms
            .iter()
            .map(|(e, c)| (e + 1, c.div_int(i64::from(e + 1))))
            .collect();
        terms.insert(0, constant.clone());
        Some(self.rebuild(terms))
    }

    /// Horner evaluation, run separately over the non-negative exponents in
    /// `x` and the negative exponents in `1/x`.
    pub fn eval(&self, x0: &BigReal) -> Result<BigReal, SeriesError> {
        if x0.is_zero() {
            if let Some(e) = self.min_exponent().filter(|e| *e < 0) {
                return Err(SeriesError::PoleAtZero(e));
            }
            return Ok(self.coeff(0).cloned().unwrap_or_else(|| BigReal::zero(self.prec)));
        }
        let positive = horner(self.terms.range(0..).rev().map(|(e, c)| (*e, c)), x0, self.prec);
        let inv = x0.recip();
        let negative = horner(self.terms.range(..0).map(|(e, c)| (-*e, c)), &inv, self.prec);
        Ok(positive + negative)
    }

    fn rebuild(&self, terms: BTreeMap<i32, BigReal>) -> Self {
        let mut p = LaurentPoly {
            var: self.var,
            prec: self.prec,
            terms,
        };
        p.canonicalize();
        p
    }
}

/// Horner over `(exponent, coeff)` pairs given in descending exponent order.
fn horner<'a, I>(terms: I, x: &BigReal, prec: Precision) -> BigReal
where
    I: Iterator<Item = (i32, &'a BigReal)>,
{
    let mut acc = BigReal::zero(prec);
    let mut last: Option<i32> = None;
    for (e, c) in terms {
        if let Some(prev) = last {
            acc = &acc * &x.powi(prev - e);
        }
        acc += c;
        last = Some(e);
    }
    match last {
        Some(e) if e > 0 => &acc * &x.powi(e),
        _ => acc,
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            match *e {
                0 => write!(f, "{}", c.to_sci_string(12))?,
                1 => write!(f, "{}*{}", c.to_sci_string(12), self.var)?,
                _ => write!(f, "{}*{}^{}", c.to_sci_string(12), self.var, e)?,
            }
        }
        Ok(())
    }
}

impl Ring for LaurentPoly {
    fn zero_like(&self) -> Self {
        LaurentPoly::zero(self.var, self.prec)
    }

    /// # Panics
    /// On a variable mismatch; use [`LaurentPoly::try_add`] to handle it.
    fn add(&self, rhs: &Self) -> Self {
        self.try_add(rhs).expect("Laurent variable mismatch")
    }

    fn sub(&self, rhs: &Self) -> Self {
        self.try_sub(rhs).expect("Laurent variable mismatch")
    }

    fn mul(&self, rhs: &Self) -> Self {
        self.try_mul(rhs).expect("Laurent variable mismatch")
    }

    fn neg(&self) -> Self {
        self.rebuild(self.terms.iter().map(|(e, c)| (*e, -c)).collect())
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl Differential for LaurentPoly {
    fn derivative(&self) -> Self {
        LaurentPoly::derivative(self)
    }

    fn eval_at(&self, x0: &BigReal) -> Result<BigReal, SeriesError> {
        self.eval(x0)
    }

    fn max_abs(&self) -> BigReal {
        self.terms
            .values()
            .map(BigReal::abs)
            .reduce(BigReal::max)
            .unwrap_or_else(|| BigReal::zero(self.prec))
    }
}

/// Exact product of two polynomials in the same variable.
pub fn poly_mul(a: &LaurentPoly, b: &LaurentPoly) -> Result<LaurentPoly, SeriesError> {
    a.try_mul(b)
}

/// Term-wise derivative.
pub fn poly_diff(a: &LaurentPoly) -> LaurentPoly {
    a.derivative()
}

/// Value at `x0`; errors at `x0 = 0` when negative exponents are present.
pub fn poly_eval(a: &LaurentPoly, x0: &BigReal) -> Result<BigReal, SeriesError> {
    a.eval(x0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Precision {
        Precision::default()
    }

    fn poly(terms: &[(i32, i64)]) -> LaurentPoly {
        LaurentPoly::from_ints(Var::X, p(), terms)
    }

    #[test]
    fn exponent_cancellation() {
        let prod = poly_mul(&poly(&[(1, 1)]), &poly(&[(-1, 1)])).unwrap();
        assert_eq!(prod, poly(&[(0, 1)]));
    }

    #[test]
    fn square_of_binomial() {
        let a = poly(&[(1, 2), (-1, -2)]);
        let sq = poly_mul(&a, &a).unwrap();
        assert_eq!(sq, poly(&[(2, 4), (0, -8), (-2, 4)]));
    }

    #[test]
    fn oscillator_lambda0_squared_matches_ladder_term() {
        // lambda_0 = 2(kr - (J+1)/r) with k = 1, J = 0
        let l0 = LaurentPoly::from_ints(Var::R, p(), &[(1, 2), (-1, -2)]);
        let sq = poly_mul(&l0, &l0).unwrap();
        let four = BigReal::from_int(p(), 4);
        let inner = LaurentPoly::from_ints(Var::R, p(), &[(1, 1), (-1, -1)]);
        let expected = poly_mul(&inner, &inner).unwrap().scale(&four);
        assert_eq!(sq, expected);
        assert_eq!(sq, LaurentPoly::from_ints(Var::R, p(), &[(2, 4), (0, -8), (-2, 4)]));
    }

    #[test]
    fn derivatives() {
        assert!(poly_diff(&poly(&[(0, 7)])).is_zero());
        assert_eq!(poly_diff(&poly(&[(1, 2), (-1, -2)])), poly(&[(0, 2), (-2, 2)]));
    }

    #[test]
    fn constant_s0_has_zero_derivative() {
        // oscillator s_0 = 3k + 2kJ - E_eff, a constant
        let e_eff = BigReal::parse(p(), "4.25").unwrap();
        let s0 = LaurentPoly::constant(Var::R, &BigReal::from_int(p(), 3) - &e_eff);
        assert!(poly_diff(&s0).is_zero());
    }

    #[test]
    fn evaluation() {
        let one = BigReal::one(p());
        assert_eq!(poly_eval(&poly(&[(0, 1)]), &BigReal::from_int(p(), 17)).unwrap(), one);
        assert!(poly_eval(&poly(&[(1, 2), (-1, -2)]), &one).unwrap().is_zero());
        let v = poly_eval(&poly(&[(2, 4), (0, -8), (-2, 4)]), &BigReal::from_int(p(), 2)).unwrap();
        assert_eq!(v, BigReal::from_int(p(), 9));
    }

    #[test]
    fn evaluation_at_zero() {
        let zero = BigReal::zero(p());
        assert_eq!(
            poly_eval(&poly(&[(-1, 1), (0, 2)]), &zero),
            Err(SeriesError::PoleAtZero(-1))
        );
        assert_eq!(
            poly_eval(&poly(&[(3, 1), (0, 2)]), &zero).unwrap(),
            BigReal::from_int(p(), 2)
        );
    }

    #[test]
    fn variable_mismatch_is_an_error() {
        let a = LaurentPoly::from_ints(Var::R, p(), &[(1, 1)]);
        let b = LaurentPoly::from_ints(Var::Rho, p(), &[(1, 1)]);
        assert_eq!(poly_mul(&a, &b), Err(SeriesError::VarMismatch(Var::R, Var::Rho)));
    }

    #[test]
    fn roundoff_terms_are_stripped() {
        let tiny = BigReal::from_int(p(), 10).powi(-115);
        let a = LaurentPoly::from_terms(Var::X, p(), [(2, BigReal::one(p())), (0, tiny.clone())]);
        assert_eq!(a.len(), 1);
        let b = LaurentPoly::from_terms(Var::X, p(), [(0, tiny)]);
        assert_eq!(b.len(), 1);
    }

    #[test]
    fn integrate_round_trip() {
        let a = poly(&[(3, 5), (1, -2), (0, 7), (-2, 4)]);
        let back = a.derivative().integrate(a.coeff(0).unwrap()).unwrap();
        assert_eq!(back, a);
        assert!(poly(&[(-1, 1)]).integrate(&BigReal::zero(p())).is_none());
    }
}
