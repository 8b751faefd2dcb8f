//! Reference identities for rank-2 projective bundles, the universal base,
//! twisting and chart consistency.

use charclass::algebra::{rat, UnivariateSeries};
use charclass::numeric::forms::{c1_densities, overlap_mismatch};
use charclass::numeric::HermitianMetric;
use charclass::rr::err_transfer_ominus1;
use charclass::spaces::{grassmannian_quotient_classes, normalized_hyperplane, projective_bundle, universal_rank2_base};
use charclass::FormalBundle;

#[test]
fn rank_two_twist() {
    let y = universal_rank2_base(6);
    let ring = y.ring();
    let (c1, c2) = (ring.generator(0), ring.generator(1));
    let ell = c1.scale(&rat(-3, 2));
    let s = y.tautological().unwrap();
    let t = s.twist_by_line(&ell).unwrap();
    assert_eq!(t.chern_class(1), &c1 + &ell.scale(&rat(2, 1)));
    assert_eq!(t.chern_class(2), &(&c2 + &(&ell * &c1)) + &ell.pow(2));
    let u = |b: &FormalBundle| &b.chern_class(1).pow(2).scale(&rat(1, 4)) - &b.chern_class(2);
    assert_eq!(u(&t), u(s));
}

#[test]
fn projective_bundle_of_rank_two() {
    let y = universal_rank2_base(8);
    let s = y.tautological().unwrap().clone();
    let (x, p) = projective_bundle(&y, &s).unwrap();
    let a = normalized_hyperplane(&p, &s).unwrap();
    let ring = y.ring();
    let u = &ring.generator(0).pow(2).scale(&rat(1, 4)) - &ring.generator(1);

    assert!(y.equal(&p.pushforward(&a).unwrap(), &ring.one()).unwrap());
    assert!(y.equal(&p.pushforward(&x.ring().one()).unwrap(), &ring.zero()).unwrap());
    assert!(y.equal(&p.pushforward(&a.pow(3)).unwrap(), &u).unwrap());
    assert!(x.equal(&a.pow(2), &p.pullback(&u).unwrap()).unwrap());
    assert!(x.equal(&p.relative_tangent().chern_class(1), &a.scale(&rat(2, 1))).unwrap());
}

#[test]
fn quotient_classes() {
    let y = universal_rank2_base(8);
    let q = grassmannian_quotient_classes(&y, 8).unwrap();
    assert_eq!(q[1], -&y.ring().generator(0));
    let total = q.iter().fold(y.ring().zero(), |acc, c| &acc + c);
    assert_eq!(y.tautological().unwrap().total_chern() * &total, y.ring().one());
}

#[test]
fn even_series_are_invisible_to_o_minus_one() {
    let x2 = UnivariateSeries::from_integers(&[0, 0, 1], 2);
    assert!(err_transfer_ominus1(&x2, 3).unwrap().series_in_u.is_zero());
}

#[test]
fn curvature_agrees_across_charts() {
    for k in 1..=3 {
        let (fz, fw) = c1_densities(&HermitianMetric::fubini_study(k), 128).unwrap();
        let (d, at) = overlap_mismatch(&fz, &fw).unwrap();
        assert!(d < 1e-6, "degree {k}: {d} at {at}");
    }
}
