use super::{Differential, LaurentPoly, Ring};
use crate::error::SeriesError;
use crate::real::BigReal;

/// Truncated Taylor expansion `Σ c_i (x - x0)^i`, `i < len`.
///
/// Differentiation shortens the jet by one, so a jet of length `L` gives
/// exact point values after up to `L - 1` derivatives. That is enough to
/// run the iteration to depth `L - 3` and evaluate the quantization
/// condition at `x0` without any truncation error.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorJet {
    x0: BigReal,
    coeffs: Vec<BigReal>,
}

impl TaylorJet {
    pub fn constant(x0: &BigReal, c: BigReal, len: usize) -> Self {
        let mut coeffs = vec![BigReal::zero(c.precision()); len];
        if len > 0 {
            coeffs[0] = c;
        }
        TaylorJet { x0: x0.clone(), coeffs }
    }

    /// The identity function `x`, expanded at `x0`.
    pub fn variable(x0: &BigReal, len: usize) -> Self {
        let prec = x0.precision();
        let mut coeffs = vec![BigReal::zero(prec); len];
        if len > 0 {
            coeffs[0] = x0.clone();
        }
        if len > 1 {
            coeffs[1] = BigReal::one(prec);
        }
        TaylorJet { x0: x0.clone(), coeffs }
    }

    pub fn from_coeffs(x0: &BigReal, coeffs: Vec<BigReal>) -> Self {
        TaylorJet { x0: x0.clone(), coeffs }
    }

    pub fn x0(&self) -> &BigReal {
        &self.x0
    }

    pub fn coeffs(&self) -> &[BigReal] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scale(&self, k: &BigReal) -> Self {
        TaylorJet {
            x0: self.x0.clone(),
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    /// Multiplicative inverse; `None` when the value at `x0` is zero.
    pub fn recip(&self) -> Option<Self> {
        let a0 = self.coeffs.first()?;
        if a0.is_zero() {
            return None;
        }
        let inv0 = a0.recip();
        let mut out: Vec<BigReal> = Vec::with_capacity(self.len());
        out.push(inv0.clone());
        for i in 1..self.len() {
            let mut acc = BigReal::zero(a0.precision());
            for j in 1..=i {
                acc += &(&self.coeffs[j] * &out[i - j]);
            }
            out.push(-(&acc * &inv0));
        }
        Some(TaylorJet {
            x0: self.x0.clone(),
            coeffs: out,
        })
    }

    /// Expansion of a Laurent polynomial at `x0`; fails on a pole.
    pub fn from_laurent(p: &LaurentPoly, x0: &BigReal, len: usize) -> Result<Self, SeriesError> {
        let prec = p.precision();
        let mut acc = TaylorJet::constant(x0, BigReal::zero(prec), len);
        if x0.is_zero() {
            for (e, c) in p.terms() {
                if e < 0 {
                    return Err(SeriesError::PoleAtZero(e));
                }
                if let Some(slot) = acc.coeffs.get_mut(e as usize) {
                    *slot += c;
                }
            }
            return Ok(acc);
        }
        let x = TaylorJet::variable(x0, len);
        for (e, c) in p.terms() {
            let term = x.powi(e).expect("x0 != 0");
            acc = Ring::add(&acc, &term.scale(c));
        }
        Ok(acc)
    }

    /// Integer power; negative powers go through [`TaylorJet::recip`].
    pub fn powi(&self, e: i32) -> Option<Self> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let mut acc = TaylorJet::constant(&self.x0, BigReal::one(self.x0.precision()), self.len());
        for _ in 0..e.unsigned_abs() {
            acc = Ring::mul(&acc, &base);
        }
        Some(acc)
    }
}

impl Ring for TaylorJet {
    fn zero_like(&self) -> Self {
        TaylorJet::constant(&self.x0, BigReal::zero(self.x0.precision()), self.len())
    }

    fn add(&self, rhs: &Self) -> Self {
        let n = self.len().min(rhs.len());
        TaylorJet {
            x0: self.x0.clone(),
            coeffs: (0..n).map(|i| &self.coeffs[i] + &rhs.coeffs[i]).collect(),
        }
    }

    fn sub(&self, rhs: &Self) -> Self {
        let n = self.len().min(rhs.len());
        TaylorJet {
            x0: self.x0.clone(),
            coeffs: (0..n).map(|i| &self.coeffs[i] - &rhs.coeffs[i]).collect(),
        }
    }

    fn mul(&self, rhs: &Self) -> Self {
        let n = self.len().min(rhs.len());
        let prec = self.x0.precision();
        let coeffs = (0..n)
            .map(|i| {
                let mut acc = BigReal::zero(prec);
                for j in 0..=i {
                    if !self.coeffs[j].is_zero() && !rhs.coeffs[i - j].is_zero() {
                        acc += &(&self.coeffs[j] * &rhs.coeffs[i - j]);
                    }
                }
                acc
            })
            .collect();
        TaylorJet {
            x0: self.x0.clone(),
            coeffs,
        }
    }

    fn neg(&self) -> Self {
        TaylorJet {
            x0: self.x0.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(BigReal::is_zero)
    }
}

impl Differential for TaylorJet {
    fn derivative(&self) -> Self {
        TaylorJet {
            x0: self.x0.clone(),
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.mul_int(i as i64))
                .collect(),
        }
    }

    fn eval_at(&self, x0: &BigReal) -> Result<BigReal, SeriesError> {
        if *x0 != self.x0 {
            return Err(SeriesError::JetPoint {
                expected: self.x0.to_sci_string(20),
                got: x0.to_sci_string(20),
            });
        }
        self.coeffs.first().cloned().ok_or(SeriesError::JetExhausted)
    }

    fn max_abs(&self) -> BigReal {
        self.coeffs
            .iter()
            .map(BigReal::abs)
            .reduce(BigReal::max)
            .unwrap_or_else(|| BigReal::zero(self.x0.precision()))
    }
}
