//! Riemann–Roch computations on the exact models: Euler characteristics of
//! line bundles on projective space, the tower identity for `ch * td * P`,
//! the error-transfer operators on rank-2 projective bundles and the
//! order-by-order solver for the correcting series `R`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::{rat, AlgebraError, GradedElement, Rational, UnivariateSeries};
use crate::classes::{CharSeries, ClassError, FormalBundle};
use crate::spaces::{normalized_hyperplane, projective_bundle, projective_space, universal_rank2_base, MapModel, SpaceError, SpaceModel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RrError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Class(#[from] ClassError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("the series must have zero constant term")]
    ConstantTerm,
    #[error("push-forward is not a series in u = c1^2/4 - c2 (weight {weight})")]
    NotASeriesInU { weight: u32 },
    #[error("no series R reaches the targets: inconsistent at u-order {order}")]
    NoSolution { order: usize },
    #[error("vanishing leading factor at x^{degree}")]
    Degenerate { degree: usize },
    #[error("target series has u-order {got}, need at least {need}")]
    TargetTooShort { got: usize, need: usize },
}

/// `chi(P^n, O(k)) = int ch(O(k)) td(T)`.
pub fn euler_characteristic(n: u32, k: i64) -> Rational {
    let space = projective_space(n);
    if n == 0 {
        return Rational::one();
    }
    let h = space.ring().generator(0);
    let ch = h.scale(&Rational::from_integer(k.into())).exp().expect("nilpotent argument");
    let td = CharSeries::Todd.apply(space.tangent()).expect("todd of a unit class");
    space.integrate(&(&ch * &td)).expect("projective space is compact")
}

/// `f_*(ch(E) td(T_f))`: the Chern character of the direct image, taken as
/// its definition.
pub fn grr_direct_image(f: &MapModel, e: &FormalBundle) -> Result<GradedElement, RrError> {
    let ch = CharSeries::ChernCharacter.apply(e)?;
    let td = CharSeries::Todd.apply(f.relative_tangent())?;
    Ok(f.pushforward(&(&ch * &td))?)
}

/// Base of a tower.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TowerBase {
    Projective(u32),
    Universal(u32),
}

impl TowerBase {
    pub fn build(&self) -> Arc<SpaceModel> {
        match *self {
            TowerBase::Projective(n) => projective_space(n),
            TowerBase::Universal(d) => universal_rank2_base(d),
        }
    }
}

/// Outcome of [`tower_identity_check`].
#[derive(Clone, Debug)]
pub struct TowerReport {
    pub lhs: GradedElement,
    pub rhs: GradedElement,
    pub residual: GradedElement,
}

impl TowerReport {
    pub fn holds(&self) -> bool {
        self.residual.is_zero()
    }
}

/// The tower `X = P(F') -f-> Z = P(F) -g-> Y`.
pub struct Tower {
    pub y: Arc<SpaceModel>,
    pub z: Arc<SpaceModel>,
    pub x: Arc<SpaceModel>,
    pub g: Arc<MapModel>,
    pub f: Arc<MapModel>,
}

/// Builds the tower over `y`; `f_prime` lives on `y` and is pulled back to `Z`.
pub fn build_tower(y: &Arc<SpaceModel>, f: &FormalBundle, f_prime: &FormalBundle) -> Result<Tower, RrError> {
    let (z, g) = projective_bundle(y, f)?;
    let fp = g.pullback_bundle(f_prime)?;
    let (x, fmap) = projective_bundle(&z, &fp)?;
    Ok(Tower { y: y.clone(), z, x, g, f: fmap })
}

/// Checks `(g f)_*(ch E td(T_gf) P(T_gf)) = g_*(ch(f_*E) td(T_g) P(T_g)) +
/// g_*(f_*(ch E td(T_f) P(T_f)) td(T_g))` exactly.
pub fn tower_identity_check(tower: &Tower, p: &UnivariateSeries, e: &FormalBundle) -> Result<TowerReport, RrError> {
    let p_class = CharSeries::additive(p.clone())?;
    let (f, g) = (&tower.f, &tower.g);
    let gf = f.then(g)?;
    let ch_e = CharSeries::ChernCharacter.apply(e)?;

    let t_gf = gf.relative_tangent();
    let lhs_integrand = &(&ch_e * &CharSeries::Todd.apply(t_gf)?) * &p_class.apply(t_gf)?;
    let lhs = gf.pushforward(&lhs_integrand)?;

    let t_f = f.relative_tangent();
    let t_g = g.relative_tangent();
    let td_f = CharSeries::Todd.apply(t_f)?;
    let td_g = CharSeries::Todd.apply(t_g)?;
    let ch_fe = f.pushforward(&(&ch_e * &td_f))?;
    let first = g.pushforward(&(&(&ch_fe * &td_g) * &p_class.apply(t_g)?))?;
    let inner = f.pushforward(&(&(&ch_e * &td_f) * &p_class.apply(t_f)?))?;
    let second = g.pushforward(&(&inner * &td_g))?;
    let rhs = &first + &second;
    let residual = tower.y.reduce(&(&lhs - &rhs))?;
    Ok(TowerReport { lhs, rhs, residual })
}

/// Which line bundle the error-transfer operator uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrLine {
    Trivial,
    MinusOne,
}

/// A push-forward expressed as a series in `u = c1^2/4 - c2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrOperatorResult {
    pub series_in_u: UnivariateSeries,
}

/// `q(t) = td(2t) P'(2t)`, times `e^{-t}` for `O(-1)`, to order `n`.
pub fn err_integrand_series(p_prime: &UnivariateSeries, which: ErrLine, n: usize) -> Result<UnivariateSeries, RrError> {
    let two = rat(2, 1);
    let td = UnivariateSeries::todd(n).rescale(&two);
    let p = p_prime.with_order(n).rescale(&two);
    let mut q = td.mul(&p)?;
    if which == ErrLine::MinusOne {
        q = q.mul(&UnivariateSeries::exp_x(n).rescale(&rat(-1, 1)))?;
    }
    Ok(q)
}

/// Push-forward of `q(A)` along `P(S) -> universal base`, read as a series
/// in `u` up to `u^order`. `P'` is read as a polynomial.
pub fn err_transfer(p_prime: &UnivariateSeries, which: ErrLine, order: usize) -> Result<ErrOperatorResult, RrError> {
    if !p_prime.coeff(0).is_zero() {
        return Err(RrError::ConstantTerm);
    }
    let d = (2 * order).max(1) as u32;
    let y = universal_rank2_base(d);
    let s = y.tautological().expect("universal base carries S").clone();
    let (_, p) = projective_bundle(&y, &s)?;
    let a = normalized_hyperplane(&p, &s)?;
    let q = err_integrand_series(p_prime, which, 2 * order + 1)?;
    let pushed = p.pushforward(&a.eval_series(&q)?)?;

    let c1 = y.ring().generator(0);
    let c2 = y.ring().generator(1);
    let u = &(&c1 * &c1).scale(&rat(1, 4)) - &c2;
    let mut coeffs = Vec::with_capacity(order + 1);
    let mut rebuilt = y.ring().zero();
    for m in 0..=order {
        let mut exps = [0u16; 2];
        exps[1] = m as u16;
        let mut am = pushed.coeff(&exps);
        if m % 2 == 1 {
            am = -am;
        }
        rebuilt = &rebuilt + &u.pow(m as u32).scale(&am);
        coeffs.push(am);
    }
    for w in 0..=d {
        if w as usize > 2 * order {
            break;
        }
        if pushed.grade_part(w) != rebuilt.grade_part(w) {
            return Err(RrError::NotASeriesInU { weight: w });
        }
    }
    Ok(ErrOperatorResult { series_in_u: UnivariateSeries::new(coeffs, order) })
}

pub fn err_transfer_o(p_prime: &UnivariateSeries, order: usize) -> Result<ErrOperatorResult, RrError> {
    err_transfer(p_prime, ErrLine::Trivial, order)
}

pub fn err_transfer_ominus1(p_prime: &UnivariateSeries, order: usize) -> Result<ErrOperatorResult, RrError> {
    err_transfer(p_prime, ErrLine::MinusOne, order)
}

/// The even and odd parts of the solution of [`solve_r`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RSolution {
    pub r_even: UnivariateSeries,
    pub r_odd: UnivariateSeries,
    pub order: usize,
}

impl RSolution {
    pub fn series(&self) -> UnivariateSeries {
        self.r_even.add(&self.r_odd).expect("same order")
    }
}

/// Finds the unique `R` with zero constant term, up to `x^order`, such that
/// the `O` and `O(-1)` transfers of `R` equal the targets.
///
/// `x^{2m+1}` is fixed by the `u^m` coefficient of the `O(-1)` target and
/// `x^{2m}` by the `u^m` coefficient of the `O` target; the `u^0`
/// coefficient of the `O` target only depends on the already fixed odd part
/// and must agree.
pub fn solve_r(target_o: &ErrOperatorResult, target_om1: &ErrOperatorResult, order: usize) -> Result<RSolution, RrError> {
    let m_max = order / 2;
    for t in [target_o, target_om1] {
        if t.series_in_u.order() < m_max {
            return Err(RrError::TargetTooShort { got: t.series_in_u.order(), need: m_max });
        }
    }
    let cols_o: Vec<UnivariateSeries> = (0..=order)
        .map(|j| column(j, ErrLine::Trivial, m_max))
        .collect::<Result<_, _>>()?;
    let cols_om1: Vec<UnivariateSeries> = (0..=order)
        .map(|j| column(j, ErrLine::MinusOne, m_max))
        .collect::<Result<_, _>>()?;

    let mut r = vec![Rational::zero(); order + 1];
    // odd part from the O(-1) rows
    for m in 0..=m_max {
        let j = 2 * m + 1;
        if j > order {
            break;
        }
        let lead = cols_om1[j].coeff(m);
        if lead.is_zero() {
            return Err(RrError::Degenerate { degree: j });
        }
        let known: Rational = (1..j).map(|i| &r[i] * cols_om1[i].coeff(m)).sum();
        r[j] = (target_om1.series_in_u.coeff(m) - known) / lead;
    }
    // even part from the O rows, row 0 is a consistency check
    for m in 0..=m_max {
        let j = 2 * m;
        let known: Rational = (1..=order).filter(|&i| i != j).map(|i| &r[i] * cols_o[i].coeff(m)).sum();
        let rest = target_o.series_in_u.coeff(m) - known;
        if m == 0 {
            if !rest.is_zero() {
                return Err(RrError::NoSolution { order: 0 });
            }
            continue;
        }
        let lead = cols_o[j].coeff(m);
        if lead.is_zero() {
            return Err(RrError::Degenerate { degree: j });
        }
        r[j] = rest / lead;
    }
    let parity = |odd: bool| {
        let c = r.iter().enumerate().map(|(i, c)| if (i % 2 == 1) == odd { c.clone() } else { Rational::zero() }).collect();
        UnivariateSeries::new(c, order)
    };
    Ok(RSolution { r_even: parity(false), r_odd: parity(true), order })
}

fn column(j: usize, which: ErrLine, m_max: usize) -> Result<UnivariateSeries, RrError> {
    if j == 0 {
        return Ok(UnivariateSeries::zero(m_max));
    }
    let xj = UnivariateSeries::monomial(Rational::one(), j, j);
    Ok(err_transfer(&xj, which, m_max)?.series_in_u)
}

/// Binomial coefficient as a rational, zero when `k < 0` or `k > n`.
pub fn binomial_rational(n: i64, k: i64) -> Rational {
    if k < 0 || n < 0 || k > n {
        return Rational::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Rational::from_integer(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euler_characteristics_of_small_cases() {
        assert_eq!(euler_characteristic(1, 0), rat(1, 1));
        assert_eq!(euler_characteristic(2, 1), rat(3, 1));
        assert_eq!(euler_characteristic(3, 2), rat(10, 1));
        assert_eq!(euler_characteristic(2, -1), rat(0, 1));
        // Serre duality value, not asserted by the engine
        assert_eq!(euler_characteristic(1, -3), rat(-2, 1));
    }

    #[test]
    fn err_o_of_x() {
        let x = UnivariateSeries::from_integers(&[0, 1], 1);
        let r = err_transfer_o(&x, 3).unwrap();
        assert_eq!(r.series_in_u.coeff(0), rat(2, 1));
        assert_eq!(r.series_in_u.coeff(1), rat(2, 3));
    }

    #[test]
    fn err_om1_kills_even_series() {
        let x2 = UnivariateSeries::from_integers(&[0, 0, 1, 0, 5], 4);
        assert!(err_transfer_ominus1(&x2, 3).unwrap().series_in_u.is_zero());
    }

    #[test]
    fn constant_term_rejected() {
        let c = UnivariateSeries::from_integers(&[1, 1], 1);
        assert_eq!(err_transfer_o(&c, 2), Err(RrError::ConstantTerm));
    }

    #[test]
    fn solve_recovers_x_plus_x_cubed() {
        let r0 = UnivariateSeries::from_integers(&[0, 1, 0, 1], 6);
        let to = err_transfer_o(&r0, 3).unwrap();
        let t1 = err_transfer_ominus1(&r0, 3).unwrap();
        let sol = solve_r(&to, &t1, 6).unwrap();
        assert_eq!(sol.series(), r0);
        assert!(sol.r_even.is_zero());
    }

    #[test]
    fn inconsistent_targets() {
        let zero = ErrOperatorResult { series_in_u: UnivariateSeries::zero(2) };
        let bad = ErrOperatorResult { series_in_u: UnivariateSeries::from_integers(&[1], 2) };
        assert_eq!(solve_r(&bad, &zero, 4), Err(RrError::NoSolution { order: 0 }));
        let sol = solve_r(&zero, &zero, 4).unwrap();
        assert!(sol.series().is_zero());
    }

    #[test]
    fn tower_identity_on_p2() {
        let y = projective_space(2);
        let h = y.ring().generator(0);
        let f = FormalBundle::line(h.clone()).sum(&FormalBundle::trivial(y.ring(), 1)).unwrap();
        let fp = FormalBundle::trivial(y.ring(), 1).sum(&FormalBundle::line(h.scale(&rat(-1, 1)))).unwrap();
        let tower = build_tower(&y, &f, &fp).unwrap();
        let xi = tower.x.ring().generator(tower.x.ring().ngens() - 1);
        let e = FormalBundle::line(xi);
        let p = UnivariateSeries::from_integers(&[0, 1], 1);
        let report = tower_identity_check(&tower, &p, &e).unwrap();
        assert!(report.holds(), "residual {}", report.residual);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial_rational(5, 2), rat(10, 1));
        assert_eq!(binomial_rational(2, 3), rat(0, 1));
    }
}
