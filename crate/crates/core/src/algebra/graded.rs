use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use smallvec::SmallVec;

use super::rational::Rational;
use super::series::UnivariateSeries;
use super::AlgebraError;

/// Ordered generator names with positive weights. A Chern class `c_k` has
/// weight `k`; a divisor class has weight 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GeneratorSet {
    names: Vec<String>,
    weights: Vec<u32>,
}

impl GeneratorSet {
    pub fn new<S: Into<String>>(gens: impl IntoIterator<Item = (S, u32)>) -> Result<Self, AlgebraError> {
        let mut names = Vec::new();
        let mut weights = Vec::new();
        for (name, weight) in gens {
            let name = name.into();
            if weight == 0 {
                return Err(AlgebraError::InvalidGenerators(format!("generator `{name}` has weight 0")));
            }
            if names.contains(&name) {
                return Err(AlgebraError::InvalidGenerators(format!("duplicate generator `{name}`")));
            }
            names.push(name);
            weights.push(weight);
        }
        Ok(Self { names, weights })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

#[derive(Debug, PartialEq, Eq, Hash)]
struct RingData {
    gens: GeneratorSet,
    truncation: u32,
}

/// A polynomial ring over the rationals on weighted commuting generators,
/// truncated above a fixed total weight. Cheap to clone.
#[derive(Clone, Debug)]
pub struct GradedRing(Arc<RingData>);

impl PartialEq for GradedRing {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for GradedRing {}

impl GradedRing {
    pub fn new(gens: GeneratorSet, truncation: u32) -> Self {
        Self(Arc::new(RingData { gens, truncation }))
    }

    /// Convenience constructor from `(name, weight)` pairs.
    pub fn with_generators<S: Into<String>>(
        gens: impl IntoIterator<Item = (S, u32)>,
        truncation: u32,
    ) -> Result<Self, AlgebraError> {
        Ok(Self::new(GeneratorSet::new(gens)?, truncation))
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.0.gens
    }

    pub fn truncation(&self) -> u32 {
        self.0.truncation
    }

    pub fn ngens(&self) -> usize {
        self.0.gens.len()
    }

    pub fn zero(&self) -> GradedElement {
        GradedElement { ring: self.clone(), terms: BTreeMap::new() }
    }

    pub fn one(&self) -> GradedElement {
        self.constant(Rational::one())
    }

    pub fn constant(&self, c: Rational) -> GradedElement {
        let mut e = self.zero();
        if !c.is_zero() {
            e.terms.insert(Monomial::one(self.ngens()), c);
        }
        e
    }

    pub fn integer(&self, c: i64) -> GradedElement {
        self.constant(Rational::from_integer(c.into()))
    }

    /// The i-th generator (zero if its weight exceeds the truncation).
    pub fn generator(&self, i: usize) -> GradedElement {
        let mut exps = SmallVec::from_elem(0u16, self.ngens());
        exps[i] = 1;
        self.monomial(exps, Rational::one())
    }

    pub fn generator_by_name(&self, name: &str) -> Result<GradedElement, AlgebraError> {
        let i = self.0.gens.index_of(name).ok_or_else(|| AlgebraError::UnknownGenerator(name.to_string()))?;
        Ok(self.generator(i))
    }

    /// `c * prod gens^exps`, or zero above the truncation.
    pub fn monomial(&self, exps: SmallVec<[u16; 8]>, c: Rational) -> GradedElement {
        assert_eq!(exps.len(), self.ngens(), "exponent vector length");
        let mono = Monomial::new(exps, self.generators().weights());
        let mut e = self.zero();
        if mono.weight <= self.truncation() && !c.is_zero() {
            e.terms.insert(mono, c);
        }
        e
    }

    /// The same generators (plus `extra` appended) at a new truncation.
    pub fn extend<S: Into<String>>(
        &self,
        extra: impl IntoIterator<Item = (S, u32)>,
        truncation: u32,
    ) -> Result<Self, AlgebraError> {
        let gens = self
            .generators()
            .names()
            .iter()
            .cloned()
            .zip(self.generators().weights().iter().copied())
            .chain(extra.into_iter().map(|(n, w)| (n.into(), w)));
        Self::with_generators(gens, truncation)
    }
}

/// Exponent vector together with its total weight.
///
/// Ordered graded-lexicographically: lower total weight first, and inside one
/// weight the larger exponent of an earlier generator first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    weight: u32,
    exps: SmallVec<[u16; 8]>,
}

impl Monomial {
    fn new(exps: SmallVec<[u16; 8]>, weights: &[u32]) -> Self {
        let weight = exps.iter().zip(weights).map(|(&e, &w)| e as u32 * w).sum();
        Self { weight, exps }
    }

    fn one(n: usize) -> Self {
        Self { weight: 0, exps: SmallVec::from_elem(0, n) }
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn exponents(&self) -> &[u16] {
        &self.exps
    }

    fn mul(&self, other: &Self) -> Self {
        let exps = self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect();
        Self { weight: self.weight + other.weight, exps }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight.cmp(&other.weight).then_with(|| other.exps.cmp(&self.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse element of a [`GradedRing`]. No zero coefficients are stored and no
/// monomial exceeds the ring truncation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedElement {
    ring: GradedRing,
    terms: BTreeMap<Monomial, Rational>,
}

impl GradedElement {
    pub fn ring(&self) -> &GradedRing {
        &self.ring
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_term(&self) -> Rational {
        self.terms.iter().next().filter(|(m, _)| m.weight == 0).map(|(_, c)| c.clone()).unwrap_or_else(Rational::zero)
    }

    /// Coefficient of the monomial with the given exponents.
    pub fn coeff(&self, exps: &[u16]) -> Rational {
        let mono = Monomial::new(exps.iter().copied().collect(), self.ring.generators().weights());
        self.terms.get(&mono).cloned().unwrap_or_else(Rational::zero)
    }

    /// Largest weight of a stored term (0 for the zero element).
    pub fn max_weight(&self) -> u32 {
        self.terms.keys().next_back().map_or(0, |m| m.weight)
    }

    fn check_ring(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.ring != other.ring {
            return Err(AlgebraError::IncompatibleRing(format!(
                "generators {:?} truncated at {} vs {:?} truncated at {}",
                self.ring.generators().names(),
                self.ring.truncation(),
                other.ring.generators().names(),
                other.ring.truncation()
            )));
        }
        Ok(())
    }

    fn insert_add(terms: &mut BTreeMap<Monomial, Rational>, mono: Monomial, c: Rational) {
        use std::collections::btree_map::Entry;
        match terms.entry(mono) {
            Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_ring(other)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            Self::insert_add(&mut terms, m.clone(), c.clone());
        }
        Ok(Self { ring: self.ring.clone(), terms })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect();
        Self { ring: self.ring.clone(), terms }
    }

    pub fn scale(&self, k: &Rational) -> Self {
        if k.is_zero() {
            return self.ring.zero();
        }
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect();
        Self { ring: self.ring.clone(), terms }
    }

    /// Product with every monomial above the truncation discarded.
    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_ring(other)?;
        let cap = self.ring.truncation();
        let mut terms = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if ma.weight + mb.weight > cap {
                    // terms are sorted by weight
                    break;
                }
                Self::insert_add(&mut terms, ma.mul(mb), ca * cb);
            }
        }
        Ok(Self { ring: self.ring.clone(), terms })
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut result = self.ring.one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = &result * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Sum of the terms of total weight exactly `k`.
    pub fn grade_part(&self, k: u32) -> Self {
        let terms = self.terms.iter().filter(|(m, _)| m.weight == k).map(|(m, c)| (m.clone(), c.clone())).collect();
        Self { ring: self.ring.clone(), terms }
    }

    /// Terms of weight at most `k`.
    pub fn truncate_to(&self, k: u32) -> Self {
        let terms = self.terms.iter().filter(|(m, _)| m.weight <= k).map(|(m, c)| (m.clone(), c.clone())).collect();
        Self { ring: self.ring.clone(), terms }
    }

    /// Keeps only the terms satisfying `keep`.
    pub fn filter_terms(&self, mut keep: impl FnMut(&Monomial) -> bool) -> Self {
        let terms = self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (m.clone(), c.clone())).collect();
        Self { ring: self.ring.clone(), terms }
    }

    /// `sum_j series_j * self^j`. Needs a zero constant term unless the
    /// series is a polynomial that the truncation fully covers.
    pub fn eval_series(&self, series: &UnivariateSeries) -> Result<Self, AlgebraError> {
        if !self.constant_term().is_zero() && series.order() < self.ring.truncation() as usize {
            return Err(AlgebraError::NonZeroConstant);
        }
        let mut acc = self.ring.zero();
        let mut power = self.ring.one();
        for (j, c) in series.coeffs().iter().enumerate() {
            if j > 0 {
                power = &power * self;
                if power.is_zero() {
                    break;
                }
            }
            if !c.is_zero() {
                acc = &acc + &power.scale(c);
            }
        }
        Ok(acc)
    }

    /// Multiplicative inverse of an element with nonzero constant term.
    pub fn inverse(&self) -> Result<Self, AlgebraError> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(AlgebraError::NotAUnit);
        }
        // 1/(c0 (1 + n)) = (1/c0) sum (-n)^k
        let inv0 = c0.recip();
        let nil = self.scale(&inv0).sub(&self.ring.one())?;
        let mut acc = self.ring.one();
        let mut power = self.ring.one();
        let minus = nil.neg();
        for _ in 0..self.ring.truncation() {
            power = &power * &minus;
            if power.is_zero() {
                break;
            }
            acc = &acc + &power;
        }
        Ok(acc.scale(&inv0))
    }

    /// `exp(self)` for an element with zero constant term.
    pub fn exp(&self) -> Result<Self, AlgebraError> {
        if !self.constant_term().is_zero() {
            return Err(AlgebraError::NonZeroConstant);
        }
        self.eval_series(&UnivariateSeries::exp_x(self.ring.truncation() as usize))
    }

    /// Ring morphism sending generator `i` to `images[i]`; all images must
    /// live in one target ring.
    pub fn substitute(&self, images: &[GradedElement], target: &GradedRing) -> Result<Self, AlgebraError> {
        assert_eq!(images.len(), self.ring.ngens(), "one image per generator");
        for img in images {
            if img.ring() != target {
                return Err(AlgebraError::IncompatibleRing("substitution images live in different rings".into()));
            }
        }
        let mut powers: Vec<Vec<GradedElement>> = images.iter().map(|img| vec![target.one(), img.clone()]).collect();
        let mut acc = target.zero();
        for (mono, c) in &self.terms {
            let mut term = target.constant(c.clone());
            for (i, &e) in mono.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap() * &images[i];
                    powers[i].push(next);
                }
                term = &term * &powers[i][e as usize];
                if term.is_zero() {
                    break;
                }
            }
            acc = &acc + &term;
        }
        Ok(acc)
    }

    /// Reinterprets the element in a ring whose generator list starts with
    /// this ring's generators (extra generators appended).
    pub fn embed(&self, target: &GradedRing) -> Result<Self, AlgebraError> {
        let n = self.ring.ngens();
        let tg = target.generators();
        if tg.len() < n
            || tg.names()[..n] != self.ring.generators().names()[..]
            || tg.weights()[..n] != self.ring.generators().weights()[..]
        {
            return Err(AlgebraError::IncompatibleRing("target ring does not extend the source ring".into()));
        }
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            if m.weight > target.truncation() {
                continue;
            }
            let mut exps = m.exps.clone();
            exps.resize(tg.len(), 0);
            terms.insert(Monomial { weight: m.weight, exps }, c.clone());
        }
        Ok(Self { ring: target.clone(), terms })
    }

    /// Inverse of [`embed`](Self::embed): drops into a ring that is a prefix of
    /// this one. Fails if any term involves the extra generators.
    pub fn restrict(&self, target: &GradedRing) -> Result<Self, AlgebraError> {
        let n = target.ngens();
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            if m.exps[n..].iter().any(|&e| e > 0) {
                return Err(AlgebraError::IncompatibleRing("element involves generators outside the target ring".into()));
            }
            if m.weight > target.truncation() {
                continue;
            }
            terms.insert(Monomial { weight: m.weight, exps: m.exps[..n].iter().copied().collect() }, c.clone());
        }
        Ok(Self { ring: target.clone(), terms })
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $inner:ident) => {
        impl std::ops::$trait for &GradedElement {
            type Output = GradedElement;
            /// Panics when the operands live in different rings.
            fn $method(self, rhs: &GradedElement) -> GradedElement {
                GradedElement::$inner(self, rhs).expect("operands live in the same ring")
            }
        }
    };
}

forward_binop!(Add, add, add);
forward_binop!(Sub, sub, sub);
forward_binop!(Mul, mul, mul);

impl std::ops::Neg for &GradedElement {
    type Output = GradedElement;
    fn neg(self) -> GradedElement {
        GradedElement::neg(self)
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, names: &[String], exps: &[u16]) -> fmt::Result {
    let mut first = true;
    for (name, &e) in names.iter().zip(exps) {
        if e == 0 {
            continue;
        }
        if !first {
            write!(f, "*")?;
        }
        if e == 1 {
            write!(f, "{name}")?;
        } else {
            write!(f, "{name}^{e}")?;
        }
        first = false;
    }
    Ok(())
}

impl fmt::Display for GradedElement {
    /// Canonical form, e.g. `1 + 2*h + 1*h^2`: graded-lex order, explicit
    /// coefficients on every non-constant term.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let names = self.ring.generators().names();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c < &Rational::zero();
            let abs = if neg { -c.clone() } else { c.clone() };
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            write!(f, "{abs}")?;
            if m.weight > 0 {
                write!(f, "*")?;
                write_monomial(f, names, &m.exps)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;

    fn ring_h(d: u32) -> GradedRing {
        GradedRing::with_generators([("h", 1)], d).unwrap()
    }

    fn ring_c(d: u32) -> GradedRing {
        GradedRing::with_generators([("c1", 1), ("c2", 2)], d).unwrap()
    }

    #[test]
    fn addition_examples() {
        let r = ring_h(2);
        let h = r.generator(0);
        let a = &r.one() + &h;
        let b = &r.one() - &h;
        assert_eq!(a.add(&b).unwrap(), r.integer(2));
        assert_eq!(h.add(&r.zero()).unwrap(), h);
        let rc = ring_c(3);
        let (c1, c2) = (rc.generator(0), rc.generator(1));
        assert_eq!(c1.add(&(&c1 + &c2)).unwrap().to_string(), "2*c1 + 1*c2");
    }

    #[test]
    fn multiplication_examples() {
        let r2 = ring_h(2);
        let a = &r2.one() + &r2.generator(0);
        assert_eq!((&a * &a).to_string(), "1 + 2*h + 1*h^2");
        let r1 = ring_h(1);
        let a = &r1.one() + &r1.generator(0);
        assert_eq!((&a * &a).to_string(), "1 + 2*h");
        let rc = ring_c(3);
        let (c1, c2) = (rc.generator(0), rc.generator(1));
        assert_eq!((&(&c1 + &c2) * &c1).to_string(), "1*c1^2 + 1*c1*c2");
    }

    #[test]
    fn mismatched_rings_are_rejected() {
        let a = ring_h(2).one();
        let b = ring_h(3).one();
        assert!(matches!(a.add(&b), Err(AlgebraError::IncompatibleRing(_))));
        assert!(matches!(a.mul(&ring_c(2).one()), Err(AlgebraError::IncompatibleRing(_))));
    }

    #[test]
    fn grade_parts() {
        let r = ring_h(2);
        let h = r.generator(0);
        let e = &(&r.one() + &h.scale(&rat(2, 1))) + &h.pow(2);
        assert_eq!(e.grade_part(1), h.scale(&rat(2, 1)));
        let td = &r.one() + &h.scale(&rat(1, 2));
        assert_eq!(td.grade_part(0), r.one());
        assert!((&r.one() + &h).grade_part(3).is_zero());
    }

    #[test]
    fn canonical_order_within_a_weight() {
        // c1^2 c2 has weight 4 and is dropped
        let rc = ring_c(3);
        let (c1, c2) = (rc.generator(0), rc.generator(1));
        let e = &(&c2 + &c1.pow(2).scale(&rat(1, 4))) - &c1.pow(2).mul(&c2).unwrap();
        assert_eq!(e.to_string(), "1/4*c1^2 + 1*c2");
        let u = &c1.pow(2).scale(&rat(-1, 4)) + &c2;
        assert_eq!(u.to_string(), "-1/4*c1^2 + 1*c2");
    }

    #[test]
    fn inverse_and_exp() {
        let rc = ring_c(5);
        let c = &(&rc.one() + &rc.generator(0)) + &rc.generator(1);
        let inv = c.inverse().unwrap();
        assert_eq!(&c * &inv, rc.one());
        assert_eq!(rc.generator(0).inverse(), Err(AlgebraError::NotAUnit));
        let x = rc.generator(0);
        let lhs = x.scale(&rat(2, 1)).exp().unwrap();
        let rhs = x.exp().unwrap().pow(2);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn substitution_and_embedding() {
        let r = ring_h(3);
        let big = r.extend([("xi", 1)], 4).unwrap();
        let h = r.generator(0);
        let e = &r.one() + &h.pow(2);
        let up = e.embed(&big).unwrap();
        assert_eq!(up.to_string(), "1 + 1*h^2");
        assert_eq!(up.restrict(&r).unwrap(), e);
        // h -> h + xi
        let img = &big.generator(0) + &big.generator(1);
        let s = e.substitute(std::slice::from_ref(&img), &big).unwrap();
        assert_eq!(s, &big.one() + &img.pow(2));
    }
}
