//! Characteristic classes of formal bundles.
//!
//! A [`FormalBundle`] is a (possibly virtual) rank together with a total
//! Chern class. Classes defined by a symmetric power series are evaluated
//! through power sums of the Chern roots, obtained from the Chern classes by
//! Newton's identities under the convention `c(E) = prod (1 + x_i)`:
//!
//! ```text
//! s_k = c_1 s_{k-1} - c_2 s_{k-2} + ... + (-1)^{k-2} c_{k-1} s_1 + (-1)^{k-1} k c_k
//! ```
//!
//! Multiplicative classes go through `exp(sum_k (log f)_k s_k)`, so no roots
//! ever need to be extracted.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::{factorial, AlgebraError, GradedElement, GradedRing, Rational, UnivariateSeries};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("total Chern class must have constant term 1")]
    ChernNotUnit,
    #[error("weight {requested} exceeds the ring truncation {truncation}")]
    BeyondTruncation { requested: u32, truncation: u32 },
    #[error("additive series must have zero constant term")]
    AdditiveConstant,
    #[error("multiplicative series must have constant term 1")]
    MultiplicativeConstant,
    #[error("line-bundle twist needs a class of pure weight 1")]
    NotALineClass,
}

/// A rank (negative for virtual bundles) and a total Chern class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalBundle {
    rank: i64,
    chern: GradedElement,
}

impl FormalBundle {
    pub fn new(rank: i64, chern: GradedElement) -> Result<Self, ClassError> {
        if !chern.grade_part(0).sub(&chern.ring().one())?.is_zero() {
            return Err(ClassError::ChernNotUnit);
        }
        Ok(Self { rank, chern })
    }

    /// Rank and Chern classes `c_1, c_2, ...`.
    pub fn from_classes(rank: i64, classes: &[GradedElement], ring: &GradedRing) -> Result<Self, ClassError> {
        let mut c = ring.one();
        for ci in classes {
            c = c.add(ci)?;
        }
        Self::new(rank, c)
    }

    /// The trivial bundle of the given rank.
    pub fn trivial(ring: &GradedRing, rank: i64) -> Self {
        Self { rank, chern: ring.one() }
    }

    /// Line bundle with first Chern class `c1`.
    pub fn line(c1: GradedElement) -> Self {
        let chern = &c1.ring().one() + &c1;
        Self { rank: 1, chern }
    }

    pub fn rank(&self) -> i64 {
        self.rank
    }

    pub fn total_chern(&self) -> &GradedElement {
        &self.chern
    }

    pub fn ring(&self) -> &GradedRing {
        self.chern.ring()
    }

    /// `c_k`, the weight-k part of the total Chern class.
    pub fn chern_class(&self, k: u32) -> GradedElement {
        self.chern.grade_part(k)
    }

    /// Same rank, Chern class transported by `f`.
    pub fn map_chern(&self, f: impl FnOnce(&GradedElement) -> Result<GradedElement, ClassError>) -> Result<Self, ClassError> {
        Self::new(self.rank, f(&self.chern)?)
    }

    /// Whitney sum: ranks add, total Chern classes multiply.
    pub fn sum(&self, other: &Self) -> Result<Self, ClassError> {
        Ok(Self { rank: self.rank + other.rank, chern: self.chern.mul(&other.chern)? })
    }

    /// The virtual negative `-E`.
    pub fn negate(&self) -> Result<Self, ClassError> {
        Ok(Self { rank: -self.rank, chern: self.chern.inverse()? })
    }

    /// Virtual difference `self - other`.
    pub fn difference(&self, other: &Self) -> Result<Self, ClassError> {
        self.sum(&other.negate()?)
    }

    /// `c_i -> (-1)^i c_i`.
    pub fn dual(&self) -> Self {
        let chern = self.chern.filter_terms(|_| true);
        let odd = chern.filter_terms(|m| m.weight() % 2 == 1);
        let chern = &chern - &odd.scale(&Rational::from_integer(2.into()));
        Self { rank: self.rank, chern }
    }

    /// `E (x) L` where `ell = c_1(L)`: every Chern root shifts by `ell`.
    ///
    /// For rank 2 this is `c1 + 2 ell`, `c2 + ell c1 + ell^2`; for rank 1 it is
    /// `c1 + ell`. Virtual ranks are handled through power sums.
    pub fn twist_by_line(&self, ell: &GradedElement) -> Result<Self, ClassError> {
        if ell.terms().any(|(m, _)| m.weight() != 1) {
            return Err(ClassError::NotALineClass);
        }
        let d = self.ring().truncation();
        let sums = power_sums_unchecked(self, d)?;
        // s_k(E (x) L) = sum_j binom(k, j) s_j(E) ell^{k-j}, with s_0 = rank
        let ring = self.ring();
        let mut ell_pows = vec![ring.one()];
        for k in 1..=d {
            ell_pows.push(ell_pows[k as usize - 1].mul(ell)?);
        }
        let s_at = |j: u32| -> GradedElement {
            if j == 0 {
                ring.integer(self.rank)
            } else {
                sums[j as usize - 1].clone()
            }
        };
        let mut twisted = Vec::with_capacity(d as usize);
        for k in 1..=d {
            let mut acc = ring.zero();
            for j in 0..=k {
                let b = Rational::from_integer(binomial(k, j));
                acc = &acc + &s_at(j).mul(&ell_pows[(k - j) as usize])?.scale(&b);
            }
            twisted.push(acc);
        }
        Ok(Self { rank: self.rank, chern: chern_from_power_sums(ring, &twisted)? })
    }

    /// `L1 (x) L2` for line bundles: first Chern classes add.
    pub fn tensor_lines(&self, other: &Self) -> Result<Self, ClassError> {
        let c1 = self.chern_class(1).add(&other.chern_class(1))?;
        Ok(Self::line(c1))
    }
}

pub(crate) fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Power sums `s_1..s_max` of the Chern roots.
pub fn power_sums(bundle: &FormalBundle, max: u32) -> Result<Vec<GradedElement>, ClassError> {
    let truncation = bundle.ring().truncation();
    if max > truncation {
        return Err(ClassError::BeyondTruncation { requested: max, truncation });
    }
    power_sums_unchecked(bundle, max)
}

fn power_sums_unchecked(bundle: &FormalBundle, max: u32) -> Result<Vec<GradedElement>, ClassError> {
    let c: Vec<GradedElement> = (0..=max).map(|k| bundle.chern_class(k)).collect();
    let mut s: Vec<GradedElement> = Vec::with_capacity(max as usize);
    for k in 1..=max as usize {
        let mut acc = c[k].scale(&Rational::from_integer(BigInt::from(k)));
        if k % 2 == 0 {
            acc = acc.neg();
        }
        for i in 1..k {
            let term = c[i].mul(&s[k - i - 1])?;
            acc = if i % 2 == 1 { &acc + &term } else { &acc - &term };
        }
        s.push(acc);
    }
    Ok(s)
}

/// Inverse of Newton's identities: `k c_k = sum_{i=1}^k (-1)^{i-1} c_{k-i} s_i`.
pub fn chern_from_power_sums(ring: &GradedRing, sums: &[GradedElement]) -> Result<GradedElement, ClassError> {
    let mut c = vec![ring.one()];
    for k in 1..=sums.len() {
        let mut acc = ring.zero();
        for i in 1..=k {
            let term = c[k - i].mul(&sums[i - 1])?;
            acc = if i % 2 == 1 { &acc + &term } else { &acc - &term };
        }
        c.push(acc.scale(&Rational::new(BigInt::one(), BigInt::from(k))));
    }
    let mut total = ring.zero();
    for ck in c {
        total = &total + &ck;
    }
    Ok(total)
}

/// A characteristic class given by a symmetric power series in the roots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CharSeries {
    /// `sum_i P(x_i)` with `P(0) = 0`.
    Additive(UnivariateSeries),
    /// `prod_i f(x_i)` with `f(0) = 1`.
    Multiplicative(UnivariateSeries),
    ChernCharacter,
    Todd,
}

impl CharSeries {
    pub fn additive(p: UnivariateSeries) -> Result<Self, ClassError> {
        if !p.coeff(0).is_zero() {
            return Err(ClassError::AdditiveConstant);
        }
        Ok(Self::Additive(p))
    }

    pub fn multiplicative(f: UnivariateSeries) -> Result<Self, ClassError> {
        if !f.coeff(0).is_one() {
            return Err(ClassError::MultiplicativeConstant);
        }
        Ok(Self::Multiplicative(f))
    }

    /// Evaluates the class on a bundle. Finite coefficient lists are read as
    /// polynomials (zero beyond their order).
    pub fn apply(&self, bundle: &FormalBundle) -> Result<GradedElement, ClassError> {
        apply_class(self, bundle)
    }
}

pub fn apply_class(phi: &CharSeries, bundle: &FormalBundle) -> Result<GradedElement, ClassError> {
    let ring = bundle.ring();
    let d = ring.truncation();
    let sums = power_sums_unchecked(bundle, d)?;
    let additive = |coeff: &dyn Fn(usize) -> Rational| -> GradedElement {
        let mut acc = ring.zero();
        for (k, s) in sums.iter().enumerate() {
            let a = coeff(k + 1);
            if !a.is_zero() {
                acc = &acc + &s.scale(&a);
            }
        }
        acc
    };
    match phi {
        CharSeries::ChernCharacter => {
            let body = additive(&|k| Rational::new(BigInt::one(), factorial(k as u32)));
            Ok(&ring.integer(bundle.rank) + &body)
        }
        CharSeries::Additive(p) => {
            if !p.coeff(0).is_zero() {
                return Err(ClassError::AdditiveConstant);
            }
            Ok(additive(&|k| p.coeff(k)))
        }
        CharSeries::Multiplicative(f) => {
            if !f.coeff(0).is_one() {
                return Err(ClassError::MultiplicativeConstant);
            }
            let log_f = f.with_order(d as usize).log()?;
            Ok(additive(&|k| log_f.coeff(k)).exp()?)
        }
        CharSeries::Todd => {
            let log_td = UnivariateSeries::todd(d as usize).log()?;
            Ok(additive(&|k| log_td.coeff(k)).exp()?)
        }
    }
}
