use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::rational::{factorial, Rational};
use super::AlgebraError;

/// Power series in one variable with exact coefficients, truncated after
/// `x^order`. Coefficients beyond the truncation are unknown and never read.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UnivariateSeries {
    coeffs: Vec<Rational>,
}

impl UnivariateSeries {
    /// Builds a series of the given order from leading coefficients; missing
    /// coefficients are zero, surplus ones are dropped.
    pub fn new(mut coeffs: Vec<Rational>, order: usize) -> Self {
        coeffs.resize(order + 1, Rational::zero());
        Self { coeffs }
    }

    /// Treats a coefficient list as a polynomial and keeps its length as order.
    pub fn from_coeffs(coeffs: Vec<Rational>) -> Self {
        let order = coeffs.len().saturating_sub(1);
        Self::new(coeffs, order)
    }

    pub fn from_integers(coeffs: &[i64], order: usize) -> Self {
        Self::new(coeffs.iter().map(|&c| Rational::from_integer(c.into())).collect(), order)
    }

    pub fn zero(order: usize) -> Self {
        Self::new(Vec::new(), order)
    }

    pub fn one(order: usize) -> Self {
        Self::new(vec![Rational::one()], order)
    }

    /// `c * x^k`.
    pub fn monomial(c: Rational, k: usize, order: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); order + 1];
        if k <= order {
            coeffs[k] = c;
        }
        Self { coeffs }
    }

    /// `exp(x)`.
    pub fn exp_x(order: usize) -> Self {
        let coeffs = (0..=order as u32)
            .map(|k| Rational::new(BigInt::one(), factorial(k)))
            .collect();
        Self { coeffs }
    }

    /// `x / (1 - exp(-x))`, the Todd generating series.
    pub fn todd(order: usize) -> Self {
        // numerator x and denominator 1 - e^{-x}, both one order deeper so
        // that cancelling the common factor x leaves `order` coefficients.
        let num = Self::monomial(Rational::one(), 1, order + 1);
        let den = Self::one(order + 1).sub_unchecked(&Self::exp_x(order + 1).rescale(&-Rational::one()));
        num.div(&den).expect("1 - e^{-x} has a simple zero at the origin")
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `x^k`; zero past the truncation.
    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Re-truncates at `order`, padding with zeros when growing (the series is
    /// then read as a polynomial).
    pub fn with_order(&self, order: usize) -> Self {
        Self::new(self.coeffs.clone(), order)
    }

    fn check_order(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.order() != other.order() {
            return Err(AlgebraError::OrderMismatch(self.order(), other.order()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_order(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_order(other)?;
        Ok(self.sub_unchecked(other))
    }

    fn add_unchecked(&self, other: &Self) -> Self {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Self { coeffs }
    }

    fn sub_unchecked(&self, other: &Self) -> Self {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Self { coeffs }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    /// Substitutes `x -> c x`.
    pub fn rescale(&self, c: &Rational) -> Self {
        let mut power = Rational::one();
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            coeffs.push(a * &power);
            power *= c;
        }
        Self { coeffs }
    }

    /// Cauchy product truncated at the common order.
    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_order(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let mut coeffs = vec![Rational::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(n + 1 - i) {
                if !b.is_zero() {
                    coeffs[i + j] += a * b;
                }
            }
        }
        Self { coeffs }
    }

    /// Quotient `self / divisor`.
    ///
    /// A common factor `x^m` of numerator and divisor is cancelled first; the
    /// quotient is then only known to order `N - m`, which is the order of the
    /// returned series.
    pub fn div(&self, divisor: &Self) -> Result<Self, AlgebraError> {
        self.check_order(divisor)?;
        let n = self.order();
        let m = divisor.coeffs.iter().position(|c| !c.is_zero()).ok_or(AlgebraError::NotInvertible)?;
        if self.coeffs[..m].iter().any(|c| !c.is_zero()) {
            return Err(AlgebraError::NotInvertible);
        }
        let num = &self.coeffs[m..];
        let den = &divisor.coeffs[m..];
        let order = n - m;
        let lead = den[0].clone();
        let mut q: Vec<Rational> = Vec::with_capacity(order + 1);
        for k in 0..=order {
            let mut acc = num[k].clone();
            for j in 1..=k {
                if !den[j].is_zero() {
                    acc -= &den[j] * &q[k - j];
                }
            }
            q.push(acc / &lead);
        }
        Ok(Self { coeffs: q })
    }

    /// `outer(inner(x))`, truncated at the common order.
    pub fn compose(&self, inner: &Self) -> Result<Self, AlgebraError> {
        self.check_order(inner)?;
        if !inner.coeffs[0].is_zero() {
            return Err(AlgebraError::NonZeroConstant);
        }
        // Horner from the top coefficient down.
        let n = self.order();
        let mut acc = Self::zero(n);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul_unchecked(inner);
            acc.coeffs[0] += c;
        }
        Ok(acc)
    }

    pub fn derivative(&self) -> Self {
        let n = self.order();
        let coeffs = (1..=n)
            .map(|k| &self.coeffs[k] * Rational::from_integer(BigInt::from(k)))
            .collect();
        Self::new(coeffs, n)
    }

    /// Antiderivative with zero constant term (the top coefficient is lost to
    /// the truncation).
    pub fn integral(&self) -> Self {
        let n = self.order();
        let mut coeffs = vec![Rational::zero()];
        for k in 0..n {
            coeffs.push(&self.coeffs[k] / Rational::from_integer(BigInt::from(k + 1)));
        }
        Self::new(coeffs, n)
    }

    /// Series logarithm of a series with constant term 1.
    pub fn log(&self) -> Result<Self, AlgebraError> {
        if !self.coeffs[0].is_one() {
            return Err(AlgebraError::NonUnitConstant);
        }
        let n = self.order();
        if n == 0 {
            return Ok(Self::zero(0));
        }
        // log f = int f'/f; f'/f is needed to order n-1 only.
        let f = self.with_order(n - 1);
        let df = self.derivative().with_order(n - 1);
        let ratio = df.div(&f)?;
        Ok(ratio.with_order(n).integral())
    }

    /// Series exponential of a series with zero constant term.
    pub fn exp(&self) -> Result<Self, AlgebraError> {
        if !self.coeffs[0].is_zero() {
            return Err(AlgebraError::NonZeroConstant);
        }
        Self::exp_x(self.order()).compose(self)
    }
}

impl fmt::Display for UnivariateSeries {
    /// Renders as `c0 + c1*x + c2*x^2`, skipping zero terms.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c < &Rational::zero();
            let abs = if neg { -c.clone() } else { c.clone() };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            match k {
                0 => write!(f, "{abs}")?,
                1 => write!(f, "{abs}*x")?,
                _ => write!(f, "{abs}*x^{k}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(x^{})", self.order() + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;

    fn s(c: &[(i64, i64)], order: usize) -> UnivariateSeries {
        UnivariateSeries::new(c.iter().map(|&(p, q)| rat(p, q)).collect(), order)
    }

    #[test]
    fn products() {
        let a = s(&[(1, 1), (1, 1)], 2);
        let b = s(&[(1, 1), (-1, 1)], 2);
        assert_eq!(a.mul(&b).unwrap(), s(&[(1, 1), (0, 1), (-1, 1)], 2));
        let x = s(&[(0, 1), (1, 1)], 1);
        assert!(x.mul(&x).unwrap().is_zero());
        let h = s(&[(1, 1), (1, 2)], 2);
        assert_eq!(h.mul(&h).unwrap(), s(&[(1, 1), (1, 1), (1, 4)], 2));
        assert!(matches!(a.mul(&x), Err(AlgebraError::OrderMismatch(2, 1))));
    }

    /// Long division of x by 1 - e^{-x} = x - x^2/2 + x^3/6 - x^4/24 + x^5/120,
    /// carried out by hand: q0 = 1, q1 = 1/2, q2 = 1/12, q3 = 0, q4 = -1/720.
    #[test]
    fn todd_series_by_long_division() {
        let num = s(&[(0, 1), (1, 1)], 5);
        let den = s(&[(0, 1), (1, 1), (-1, 2), (1, 6), (-1, 24), (1, 120)], 5);
        let q = num.div(&den).unwrap();
        let expected = s(&[(1, 1), (1, 2), (1, 12), (0, 1), (-1, 720)], 4);
        assert_eq!(q, expected);
        assert_eq!(UnivariateSeries::todd(4), expected);
    }

    #[test]
    fn division_cases() {
        let one = UnivariateSeries::one(3);
        let geo = one.div(&s(&[(1, 1), (-1, 1)], 3)).unwrap();
        assert_eq!(geo, s(&[(1, 1), (1, 1), (1, 1), (1, 1)], 3));
        let x2 = s(&[(0, 1), (0, 1), (1, 1)], 3);
        let x = s(&[(0, 1), (1, 1)], 3);
        assert_eq!(x2.div(&x).unwrap(), s(&[(0, 1), (1, 1)], 2));
        assert_eq!(x.div(&x2), Err(AlgebraError::NotInvertible));
        assert_eq!(one.div(&UnivariateSeries::zero(3)), Err(AlgebraError::NotInvertible));
    }

    #[test]
    fn composition() {
        let e = UnivariateSeries::exp_x(2);
        let two_x = s(&[(0, 1), (2, 1)], 2);
        assert_eq!(e.compose(&two_x).unwrap(), s(&[(1, 1), (2, 1), (2, 1)], 2));
        let x = s(&[(0, 1), (1, 1)], 2);
        assert_eq!(e.compose(&x).unwrap(), e);
        let cube = UnivariateSeries::monomial(rat(1, 1), 3, 5);
        let sq = UnivariateSeries::monomial(rat(1, 1), 2, 5);
        assert!(cube.compose(&sq).unwrap().is_zero());
        assert_eq!(e.compose(&e), Err(AlgebraError::NonZeroConstant));
    }

    #[test]
    fn exp_log_inverse() {
        let f = UnivariateSeries::todd(7);
        let back = f.log().unwrap().exp().unwrap();
        assert_eq!(back, f);
        assert_eq!(UnivariateSeries::exp_x(5).log().unwrap(), UnivariateSeries::monomial(rat(1, 1), 1, 5));
    }

    #[test]
    fn rendering() {
        assert_eq!(s(&[(1, 1), (-1, 2), (0, 1), (3, 1)], 3).to_string(), "1 - 1/2*x + 3*x^3 + O(x^4)");
        assert_eq!(UnivariateSeries::zero(1).to_string(), "0 + O(x^2)");
    }
}
