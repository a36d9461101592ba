use super::{Differential, Ring};
use crate::error::SeriesError;
use crate::real::BigReal;

/// Truncated polynomial `Σ_{j<=P} c_j γ^j` in the perturbation parameter.
///
/// Products are Cauchy products truncated at the common order `P`, so the
/// order-`j` coefficient of any expression depends only on the inputs'
/// coefficients of order `<= j`.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaSeries<C> {
    coeffs: Vec<C>,
}

impl<C: Ring> GammaSeries<C> {
    /// # Panics
    /// If `coeffs` is empty.
    pub fn new(coeffs: Vec<C>) -> Self {
        assert!(!coeffs.is_empty(), "a gamma series has at least one coefficient");
        GammaSeries { coeffs }
    }

    /// `c + 0·γ + … + 0·γ^order`.
    pub fn constant(c: C, order: usize) -> Self {
        let zero = c.zero_like();
        let mut coeffs = vec![zero; order + 1];
        coeffs[0] = c;
        GammaSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> &C {
        &self.coeffs[j]
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    /// Drops (or zero-pads) to order `order`.
    pub fn with_order(&self, order: usize) -> Self {
        let zero = self.coeffs[0].zero_like();
        let coeffs = (0..=order)
            .map(|j| self.coeffs.get(j).cloned().unwrap_or_else(|| zero.clone()))
            .collect();
        GammaSeries { coeffs }
    }

    pub fn map<D: Ring>(&self, f: impl Fn(&C) -> D) -> GammaSeries<D> {
        GammaSeries {
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    pub fn try_map<D: Ring, E>(&self, f: impl Fn(&C) -> Result<D, E>) -> Result<GammaSeries<D>, E> {
        Ok(GammaSeries {
            coeffs: self.coeffs.iter().map(f).collect::<Result<_, _>>()?,
        })
    }

    fn check_order(&self, other: &Self) -> Result<(), SeriesError> {
        if self.order() == other.order() {
            Ok(())
        } else {
            Err(SeriesError::OrderMismatch(self.order(), other.order()))
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_order(other)?;
        Ok(self.zip(other, C::add))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_order(other)?;
        Ok(self.zip(other, C::sub))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_order(other)?;
        Ok(self.cauchy(other))
    }

    fn zip(&self, other: &Self, f: impl Fn(&C, &C) -> C) -> Self {
        GammaSeries {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| f(a, b)).collect(),
        }
    }

    fn cauchy(&self, other: &Self) -> Self {
        let order = self.order();
        let coeffs = (0..=order)
            .map(|j| {
                let mut acc: Option<C> = None;
                for i in 0..=j {
                    let (a, b) = (&self.coeffs[i], &other.coeffs[j - i]);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    let term = a.mul(b);
                    acc = Some(match acc {
                        Some(sum) => sum.add(&term),
                        None => term,
                    });
                }
                acc.unwrap_or_else(|| self.coeffs[0].zero_like())
            })
            .collect();
        GammaSeries { coeffs }
    }
}

impl<C: Ring> Ring for GammaSeries<C> {
    fn zero_like(&self) -> Self {
        self.map(C::zero_like)
    }

    /// # Panics
    /// On an order mismatch; see [`GammaSeries::try_add`].
    fn add(&self, rhs: &Self) -> Self {
        self.try_add(rhs).expect("gamma order mismatch")
    }

    fn sub(&self, rhs: &Self) -> Self {
        self.try_sub(rhs).expect("gamma order mismatch")
    }

    fn mul(&self, rhs: &Self) -> Self {
        self.try_mul(rhs).expect("gamma order mismatch")
    }

    fn neg(&self) -> Self {
        self.map(C::neg)
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(C::is_zero)
    }
}

impl<C: Differential> GammaSeries<C> {
    pub fn derivative(&self) -> Self {
        self.map(C::derivative)
    }

    /// Coefficient-wise evaluation at `x0`.
    pub fn eval_at(&self, x0: &BigReal) -> Result<GammaSeries<BigReal>, SeriesError> {
        self.try_map(|c| c.eval_at(x0))
    }
}

impl GammaSeries<BigReal> {
    /// Value at a given γ (Horner).
    pub fn sum_at(&self, gamma: &BigReal) -> BigReal {
        let mut acc = self.coeffs[self.order()].clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = &(&acc * gamma) + c;
        }
        acc
    }
}

/// Cauchy product truncated at the shared order.
pub fn gamma_mul<C: Ring>(a: &GammaSeries<C>, b: &GammaSeries<C>) -> Result<GammaSeries<C>, SeriesError> {
    a.try_mul(b)
}
