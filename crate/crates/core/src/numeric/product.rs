//! Pointwise checks on a chart of `P^1 x P^1` with coordinates `(z1, z2)`:
//! closedness of the first Chern form and the Bianchi identity, both by
//! nested central differences of a metric given as a closure.

use std::f64::consts::PI;

use super::linalg::{CMat, C64};

pub type Metric2 = dyn Fn([C64; 2]) -> CMat + Sync;

/// Fourth-order central difference of `f` along real coordinate `var`
/// (`0, 1` = re/im of `z1`, `2, 3` = re/im of `z2`).
fn d_real(f: &dyn Fn([C64; 2]) -> CMat, p: [C64; 2], var: usize, h: f64) -> CMat {
    let shift = |t: f64| {
        let mut q = p;
        let step = if var.is_multiple_of(2) { C64::new(t, 0.0) } else { C64::new(0.0, t) };
        q[var / 2] += step;
        q
    };
    let mut acc = f(shift(-2.0 * h)).scale(1.0 / 12.0);
    acc.axpy(-8.0 / 12.0, &f(shift(-h)));
    acc.axpy(8.0 / 12.0, &f(shift(h)));
    acc.axpy(-1.0 / 12.0, &f(shift(2.0 * h)));
    acc.scale(1.0 / h)
}

/// `d/dz_a`, or `d/dzbar_a` when `bar`.
fn d_complex(f: &dyn Fn([C64; 2]) -> CMat, p: [C64; 2], a: usize, bar: bool, h: f64) -> CMat {
    let dx = d_real(f, p, 2 * a, h);
    let dy = d_real(f, p, 2 * a + 1, h);
    let s = if bar { 0.5 } else { -0.5 };
    &dx.scale(0.5) + &dy.scale_c(C64::new(0.0, s))
}

/// `omega_a = H^{-1} dH/dz_a`.
pub fn connection(metric: &Metric2, p: [C64; 2], a: usize, h: f64) -> CMat {
    let hinv = metric(p).inverse().expect("metric is invertible");
    &hinv * &d_complex(&|q| metric(q), p, a, false, h)
}

/// `kappa_{a bbar} = -(1/pi) dbar_b omega_a`, so that `(i/2pi) Omega =
/// sum kappa_{a bbar} (i/2) dz_a ^ dzbar_b` up to the normalization of the
/// area forms.
pub fn curvature(metric: &Metric2, p: [C64; 2], a: usize, b: usize, h: f64) -> CMat {
    d_complex(&|q| connection(metric, q, a, h), p, b, true, h).scale(-1.0 / PI)
}

/// Components of `d tr(kappa)`: the (2,1) part `d_2 k_{1b} - d_1 k_{2b}` for
/// `b = 1, 2` and the (1,2) part `dbar_2 k_{a1} - dbar_1 k_{a2}` for
/// `a = 1, 2`. The largest absolute value is returned.
pub fn closedness_defect(metric: &Metric2, p: [C64; 2], h: f64) -> f64 {
    let tr = |a: usize, b: usize| move |q: [C64; 2]| CMat::from_rows(&[&[curvature(metric, q, a, b, h).trace()]]);
    let mut worst: f64 = 0.0;
    for b in 0..2 {
        let lhs = d_complex(&tr(0, b), p, 1, false, h);
        let rhs = d_complex(&tr(1, b), p, 0, false, h);
        worst = worst.max((&lhs - &rhs).max_abs());
    }
    for a in 0..2 {
        let lhs = d_complex(&tr(a, 0), p, 1, true, h);
        let rhs = d_complex(&tr(a, 1), p, 0, true, h);
        worst = worst.max((&lhs - &rhs).max_abs());
    }
    worst
}

/// Residual of `d Omega = Omega ^ omega - omega ^ Omega` in its
/// `dz_1 ^ dz_2 ^ dzbar_b` components, with `Omega = dbar omega`:
///
/// ```text
/// d_2 dbar_b w_1 - d_1 dbar_b w_2
///   = (dbar_b w_1) w_2 - (dbar_b w_2) w_1 + w_1 dbar_b w_2 - w_2 dbar_b w_1.
/// ```
pub fn bianchi_defect(metric: &Metric2, p: [C64; 2], h: f64) -> f64 {
    let w = |a: usize| move |q: [C64; 2]| connection(metric, q, a, h);
    let (w1, w2) = (w(0)(p), w(1)(p));
    let mut worst: f64 = 0.0;
    for b in 0..2 {
        let dbw = |a: usize| move |q: [C64; 2]| d_complex(&w(a), q, b, true, h);
        let lhs = &d_complex(&dbw(0), p, 1, false, h) - &d_complex(&dbw(1), p, 0, false, h);
        let (o1, o2) = (dbw(0)(p), dbw(1)(p));
        let rhs = &(&(&(&o1 * &w2) - &(&o2 * &w1)) + &(&w1 * &o2)) - &(&w2 * &o1);
        worst = worst.max((&lhs - &rhs).max_abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn twisted(p: [C64; 2]) -> CMat {
        // H = A^* A + I with A holomorphic
        let [y, z] = p;
        let one = C64::new(1.0, 0.0);
        let a = CMat::from_rows(&[&[y, z], &[y * z, one]]);
        &(&a.adjoint() * &a) + &CMat::identity(2)
    }

    fn product_fs(p: [C64; 2]) -> CMat {
        CMat::scalar(1.0 / ((1.0 + p[0].norm_sqr()) * (1.0 + p[1].norm_sqr())))
    }

    const POINTS: [[C64; 2]; 3] = [
        [C64::new(0.3, -0.2), C64::new(-0.4, 0.5)],
        [C64::new(0.0, 0.0), C64::new(0.7, 0.1)],
        [C64::new(-0.6, 0.3), C64::new(0.2, -0.8)],
    ];

    #[test]
    fn product_line_curvature_is_fubini_study() {
        let p = POINTS[0];
        let k = curvature(&product_fs, p, 0, 0, 1e-3)[(0, 0)].re;
        let exact = 1.0 / (PI * (1.0 + p[0].norm_sqr()).powi(2));
        assert!((k - exact).abs() < 1e-8, "{k} vs {exact}");
        assert!(curvature(&product_fs, p, 0, 1, 1e-3).max_abs() < 1e-8);
    }

    #[test]
    fn first_chern_form_is_closed() {
        for p in POINTS {
            let coarse = closedness_defect(&twisted, p, 0.02);
            let fine = closedness_defect(&twisted, p, 0.01);
            assert!(fine < 1e-4, "defect {fine} at {p:?}");
            assert!(fine <= coarse, "{coarse} -> {fine}");
        }
    }

    #[test]
    fn bianchi_holds() {
        for p in POINTS {
            let fine = bianchi_defect(&twisted, p, 0.01);
            assert!(fine < 1e-5, "defect {fine} at {p:?}");
        }
        // a wrong sign on the right side is detected
        let p = POINTS[0];
        let w = |a: usize| move |q: [C64; 2]| connection(&twisted, q, a, 0.01);
        let o1 = d_complex(&w(0), p, 0, true, 0.01);
        let w2 = w(1)(p);
        assert!((&(&o1 * &w2) - &(&w2 * &o1)).max_abs() > 1e-3);
    }
}
