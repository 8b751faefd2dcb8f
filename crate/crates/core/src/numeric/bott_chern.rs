//! Classical Bott–Chern forms on the projective line by deformation.
//!
//! For a metrized exact sequence `0 -> E1 -> E2 -> E3 -> 0` over a base
//! chart, the deformed bundle `DE2 = (E2 + E1(1)) / E1` lives over
//! `base x P^1_z`; it restricts to `E2` at `z = 0` and to `E1 + E3` at
//! `z = infinity`. The Bott–Chern form is
//!
//! ```text
//! phi_BC = int_{P^1_z} log|z|^2 phi(DE2, Drho2).
//! ```
//!
//! In the holomorphic frame of `DE2` coming from `E2` (the Z frame) the
//! metric is
//!
//! ```text
//! H_Z = chi(|z|^2) T^* h2 T + (1 - chi(|z|^2)) diag(h1 / (1 + |z|^2), h3)
//! ```
//!
//! with `T = [iota | pi^* (pi pi^*)^{-1}]` adapted to the sequence and `chi`
//! a cutoff supported in `|z| < 1`. Beyond `|z| = 1` the W frame (the
//! `E1(1)` block rescaled by `-z`) gives `diag(h1 / (1 + |w|^2), h3)`.
//! The metric depends on `z` only through `rho = log|z|`, so with
//! `D = z d/dz` every `z`-derivative is `d/drho / 2` and the fibre integral
//! reduces to `2 pi int 2 rho (...) d rho`. Derivatives in `rho` are exact
//! (jets); derivatives along the base use finite differences.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use super::forms::{
    connection_curvature, curvature_density, curve_coefficients, ddc, metric_derivatives, surface_coefficients,
    MetricFn, MetricSample, NumericForm,
};
use super::grid::{composite_gauss, ChartGrid};
use super::jet::Jet;
use super::linalg::{CMat, C64};
use super::NumericError;
use crate::classes::CharSeries;

/// Cutoff profile `chi(t)`, `t = |z|^2`, equal to 1 at `t = 0` and vanishing
/// for `t >= 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cutoff {
    /// `exp(1 - 1/(1-t)^2)` on `[0, 1)`.
    Mollifier,
    /// Identically 1 on `[0, inner]`, then a smooth step down to 0 at `t = 1`.
    SmoothStep { inner: f64 },
}

fn tail(x: Jet) -> Jet {
    // exp(-1/x), flat at 0
    if x.v <= 1e-3 {
        return Jet::ZERO;
    }
    (-x.recip()).exp()
}

impl Cutoff {
    pub fn eval(&self, t: Jet) -> Jet {
        match *self {
            Cutoff::Mollifier => {
                let u = Jet::ONE - t;
                if u.v <= 0.02 {
                    return Jet::ZERO;
                }
                (Jet::ONE - u.powi(2).recip()).exp()
            }
            Cutoff::SmoothStep { inner } => {
                if t.v <= inner {
                    return Jet::ONE;
                }
                if t.v >= 1.0 {
                    return Jet::ZERO;
                }
                let scale = 1.0 / (1.0 - inner);
                let a = tail((Jet::ONE - t) * scale);
                let b = tail((t - Jet::constant(inner)) * scale);
                a / (a + b)
            }
        }
    }
}

/// A metrized exact sequence `0 -> E1 -> E2 -> E3 -> 0` over a base chart,
/// with constant inclusion and projection matrices. `E3` may be zero.
#[derive(Clone)]
pub struct DeformationDatum {
    pub h1: MetricFn,
    pub h2: MetricFn,
    pub h3: Option<MetricFn>,
    pub iota: CMat,
    pub pi: CMat,
}

impl std::fmt::Debug for DeformationDatum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DeformationDatum")
            .field("rank1", &self.rank1())
            .field("rank3", &self.rank3())
            .finish_non_exhaustive()
    }
}

impl DeformationDatum {
    /// Checks shapes and exactness `pi iota = 0`.
    pub fn new(h1: MetricFn, h2: MetricFn, h3: Option<MetricFn>, iota: CMat, pi: CMat) -> Result<Self, NumericError> {
        let (r2, r1) = (iota.rows(), iota.cols());
        let r3 = pi.rows();
        if r1 == 0 || r1 + r3 != r2 || pi.cols() != r2 || (r3 > 0) != h3.is_some() {
            return Err(NumericError::InvalidDatum(format!(
                "ranks do not form a short exact sequence: iota {}x{}, pi {}x{}",
                r2,
                r1,
                pi.rows(),
                pi.cols()
            )));
        }
        if r3 > 0 && (&pi * &iota).max_abs() > 1e-12 {
            return Err(NumericError::InvalidDatum("the composite E1 -> E2 -> E3 is not zero".into()));
        }
        let datum = Self { h1, h2, h3, iota, pi };
        if datum.adapted_frame().inverse().is_none() {
            return Err(NumericError::InvalidDatum("inclusion is not injective or projection not surjective".into()));
        }
        Ok(datum)
    }

    /// `E1 = E2 = L` with metrics `rho1` on `E1` and `rho2` on `E2`.
    pub fn metric_change(rho1: MetricFn, rho2: MetricFn) -> Self {
        Self::new(rho1, rho2, None, CMat::identity(1), CMat::zeros(0, 1)).expect("identity is exact")
    }

    /// `E2 = E1 + E3` with the orthogonal sum metric.
    pub fn split(h1: MetricFn, h3: MetricFn, r1: usize, r3: usize) -> Self {
        let (a, b) = (h1.clone(), h3.clone());
        let h2: MetricFn = Arc::new(move |y| a(y).direct_sum(&b(y)));
        let mut iota = CMat::zeros(r1 + r3, r1);
        let mut pi = CMat::zeros(r3, r1 + r3);
        for i in 0..r1 {
            iota[(i, i)] = C64::new(1.0, 0.0);
        }
        for i in 0..r3 {
            pi[(i, r1 + i)] = C64::new(1.0, 0.0);
        }
        Self::new(h1, h2, Some(h3), iota, pi).expect("split sequence is exact")
    }

    pub fn rank1(&self) -> usize {
        self.iota.cols()
    }

    pub fn rank3(&self) -> usize {
        self.pi.rows()
    }

    pub fn rank2(&self) -> usize {
        self.iota.rows()
    }

    /// `T = [iota | pi^* (pi pi^*)^{-1}]`.
    pub fn adapted_frame(&self) -> CMat {
        if self.rank3() == 0 {
            return self.iota.clone();
        }
        let pa = self.pi.adjoint();
        let lift = &pa * &(&self.pi * &pa).inverse().unwrap_or_else(|| CMat::zeros(self.rank3(), self.rank3()));
        self.iota.hstack(&lift)
    }

    /// The pieces `(T^* h2 T, diag(h1, 0), diag(0, h3))` at a base point.
    fn blocks(&self, y: C64, frame: &CMat) -> [CMat; 3] {
        let r1 = self.rank1();
        let r3 = self.rank3();
        let m1 = &(&frame.adjoint() * &(self.h2)(y)) * frame;
        let m2 = (self.h1)(y).direct_sum(&CMat::zeros(r3, r3));
        let m3 = match &self.h3 {
            Some(h3) => CMat::zeros(r1, r1).direct_sum(&h3(y)),
            None => CMat::zeros(r1, r1),
        };
        [m1, m2, m3]
    }
}

/// Quadrature and construction options.
#[derive(Clone, Debug, PartialEq)]
pub struct BottChernOptions {
    pub cutoff: Cutoff,
    /// The fibre integral runs over `|log|z|| <= half_length`.
    pub half_length: f64,
    /// Panel width away from the cutoff region.
    pub panel_width: f64,
    /// Panels on `-1 <= rho <= 0`, where the cutoff varies.
    pub transition_panels: usize,
    /// Gauss points per panel.
    pub points: usize,
    /// Also compute the (1,1) part, which needs base derivatives.
    pub grade1: bool,
    /// For split data, deform by pull-back so the integrand is constant in z.
    pub split_pullback: bool,
}

impl Default for BottChernOptions {
    fn default() -> Self {
        Self { cutoff: Cutoff::Mollifier, half_length: 18.0, panel_width: 0.5, transition_panels: 32, points: 12, grade1: false, split_pullback: true }
    }
}

#[derive(Clone, Debug)]
pub struct BottChernOutput {
    /// Function part on the base grid.
    pub grade0: NumericForm,
    /// (1,1) part, when requested.
    pub grade1: Option<NumericForm>,
    /// Whether the split pull-back deformation was used.
    pub pullback: bool,
}

/// Gauss nodes and weights in `rho`, refined where the cutoff varies.
pub fn fibre_quadrature(opts: &BottChernOptions) -> (Vec<f64>, Vec<f64>) {
    let l = opts.half_length.max(1.0);
    let outer = |a: f64, b: f64| ((b - a) / opts.panel_width).ceil().max(1.0) as usize;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for (a, b, p) in [(-l, -1.0, outer(-l, -1.0)), (-1.0, 0.0, opts.transition_panels.max(1)), (0.0, l, outer(0.0, l))] {
        if b > a {
            let (x, w) = composite_gauss(a, b, p, opts.points);
            nodes.extend(x);
            weights.extend(w);
        }
    }
    (nodes, weights)
}

/// Profiles `s_k(rho)` with `H = sum_k s_k M_k`, in the frame used at `rho`.
fn profiles(cutoff: &Cutoff, rho: f64) -> [Jet; 3] {
    if rho <= 0.0 {
        let t = (Jet::variable(rho) * 2.0).exp();
        let chi = cutoff.eval(t);
        let rest = Jet::ONE - chi;
        [chi, rest / (Jet::ONE + t), rest]
    } else {
        let e = (Jet::variable(rho) * -2.0).exp();
        [Jet::ZERO, (Jet::ONE + e).recip(), Jet::ONE]
    }
}

fn combine(m: &[CMat; 3], s: &[Jet; 3], pick: impl Fn(&Jet) -> f64) -> CMat {
    let mut acc = CMat::zeros(m[0].rows(), m[0].cols());
    for (mk, sk) in m.iter().zip(s) {
        let c = pick(sk);
        if c != 0.0 {
            acc.axpy(c, mk);
        }
    }
    acc
}

fn is_split_sample(blocks: &[[CMat; 3]]) -> bool {
    blocks.iter().all(|[m1, m2, m3]| (m1 - &(m2 + m3)).max_abs() <= 1e-13 * m1.max_abs().max(1.0))
}

/// Base derivatives of the blocks: `(d/dy, d/dybar, d^2/dy dybar)` per block.
type BlockDerivs = [(CMat, CMat, CMat); 3];

/// `phi_BC` of the datum for the class `phi` on the base grid.
pub fn bott_chern_numeric(
    datum: &DeformationDatum,
    phi: &CharSeries,
    base: &ChartGrid,
    opts: &BottChernOptions,
) -> Result<BottChernOutput, NumericError> {
    let frame = datum.adapted_frame();
    let blocks: Vec<[CMat; 3]> = (0..base.len()).into_par_iter().map(|k| datum.blocks(base.point_at(k), &frame)).collect();
    for (k, b) in blocks.iter().enumerate() {
        for m in [&b[0], &(&b[1] + &b[2])] {
            if !m.is_hermitian_positive_definite(1e-10) {
                return Err(NumericError::InvalidMetric { chart: base.chart, node: k, point: base.point_at(k) });
            }
        }
    }
    let rank = datum.rank2();
    let (_, a1) = curve_coefficients(phi, rank);
    let (alpha, beta) = surface_coefficients(phi, rank);

    if opts.split_pullback && is_split_sample(&blocks) {
        let zeros = vec![0.0; base.len()];
        return Ok(BottChernOutput {
            grade0: NumericForm::function(base, zeros.clone()),
            grade1: opts.grade1.then(|| NumericForm::density(base, zeros)),
            pullback: true,
        });
    }

    let (rhos, weights) = fibre_quadrature(opts);
    let jets: Vec<[Jet; 3]> = rhos.iter().map(|&r| profiles(&opts.cutoff, r)).collect();
    // d theta integral and the log|z|^2 = 2 rho weight
    let qw: Vec<f64> = rhos.iter().zip(&weights).map(|(r, w)| 2.0 * PI * 2.0 * r * w).collect();

    let grade0: Vec<f64> = blocks
        .par_iter()
        .map(|m| {
            let mut acc = 0.0;
            for (s, w) in jets.iter().zip(&qw) {
                let h = combine(m, s, |j| j.v);
                let h1 = combine(m, s, |j| j.d1);
                let h2 = combine(m, s, |j| j.d2);
                let Some(hinv) = h.inverse() else { return f64::NAN };
                let a = &hinv * &h1;
                let kappa = (&(&hinv * &h2) - &(&a * &a)).scale(-0.25 / PI);
                acc += w * kappa.trace().re;
            }
            a1 * acc
        })
        .collect();

    let grade1 = if opts.grade1 {
        let derivs: Vec<Option<BlockDerivs>> = {
            let fields: Vec<Vec<CMat>> = (0..3).map(|i| blocks.iter().map(|b| b[i].clone()).collect()).collect();
            (0..base.len())
                .into_par_iter()
                .map(|k| {
                    let mut out = Vec::with_capacity(3);
                    for f in &fields {
                        let (dy, dyb, lap) = metric_derivatives(base, f, k)?;
                        out.push((dy, dyb, lap.scale(0.25)));
                    }
                    let mut it = out.into_iter();
                    Some([it.next()?, it.next()?, it.next()?])
                })
                .collect()
        };
        let values: Vec<f64> = (0..base.len())
            .into_par_iter()
            .map(|k| {
                let Some(d) = &derivs[k] else { return f64::NAN };
                let m = &blocks[k];
                let dy = [d[0].0.clone(), d[1].0.clone(), d[2].0.clone()];
                let dyb = [d[0].1.clone(), d[1].1.clone(), d[2].1.clone()];
                let dyy = [d[0].2.clone(), d[1].2.clone(), d[2].2.clone()];
                let mut acc = 0.0;
                for (s, w) in jets.iter().zip(&qw) {
                    let h = combine(m, s, |j| j.v);
                    let Some(hinv) = h.inverse() else { return f64::NAN };
                    let hr = combine(m, s, |j| j.d1).scale(0.5);
                    let hrr = combine(m, s, |j| j.d2).scale(0.25);
                    let hy = combine(&dy, s, |j| j.v);
                    let hyb = combine(&dyb, s, |j| j.v);
                    let hyyb = combine(&dyy, s, |j| j.v);
                    let hyr = combine(&dy, s, |j| j.d1).scale(0.5);
                    let hybr = combine(&dyb, s, |j| j.d1).scale(0.5);
                    let c = -1.0 / PI;
                    let k_zz = (&(&hinv * &hrr) - &(&(&hinv * &hr) * &(&hinv * &hr))).scale(c);
                    let k_yy = (&(&hinv * &hyyb) - &(&(&hinv * &hyb) * &(&hinv * &hy))).scale(c);
                    let k_yz = (&(&hinv * &hyr) - &(&(&hinv * &hr) * &(&hinv * &hy))).scale(c);
                    let k_zy = (&(&hinv * &hybr) - &(&(&hinv * &hyb) * &(&hinv * &hr))).scale(c);
                    let tr_kk = (&(&(&k_yy * &k_zz) + &(&k_zz * &k_yy)) - &(&(&k_yz * &k_zy) + &(&k_zy * &k_yz))).trace();
                    let c1c1 = (k_yy.trace() * k_zz.trace() - k_yz.trace() * k_zy.trace()) * 2.0;
                    let c2 = (c1c1 - tr_kk) * 0.5;
                    acc += w * (c1c1 * alpha + c2 * beta).re;
                }
                acc
            })
            .collect();
        Some(NumericForm::density(base, values))
    } else {
        None
    };

    Ok(BottChernOutput { grade0: NumericForm::function(base, grade0), grade1, pullback: false })
}

/// Residual of `dd^c phi_BC = phi(E2, rho2) - phi(E1 + E3, rho1 + rho3)` on
/// the base grid (the grade 1 part; on a curve grade 0 of both sides is 0).
#[derive(Clone, Debug)]
pub struct DownstairsReport {
    pub n: usize,
    pub lhs: NumericForm,
    pub rhs: NumericForm,
    pub residual: NumericForm,
    /// Max norm of the residual over nodes where every stencil fits.
    pub max_residual: f64,
    pub bott_chern: BottChernOutput,
}

pub fn verify_downstairs(
    datum: &DeformationDatum,
    phi: &CharSeries,
    base: &ChartGrid,
    opts: &BottChernOptions,
) -> Result<DownstairsReport, NumericError> {
    let bc = bott_chern_numeric(datum, phi, base, opts)?;
    let lhs = ddc(&bc.grade0)?;
    let (_, a1) = curve_coefficients(phi, datum.rank2());
    let trace_density = |metric: &MetricFn, rank: usize| -> Result<Vec<f64>, NumericError> {
        let sample = MetricSample::new(base, rank, metric.as_ref())?;
        let conn = connection_curvature(&sample)?;
        Ok(conn.curvature.iter().map(|k| k.trace().re).collect())
    };
    let t2 = trace_density(&datum.h2, datum.rank2())?;
    let t1 = trace_density(&datum.h1, datum.rank1())?;
    let t3 = match &datum.h3 {
        Some(h3) => trace_density(h3, datum.rank3())?,
        None => vec![0.0; base.len()],
    };
    let rhs = NumericForm::density(base, (0..base.len()).map(|k| a1 * (t2[k] - t1[k] - t3[k])).collect());
    let residual = lhs.sub(&rhs);
    let max_residual = residual.max_abs_inside(base.order.half_width());
    Ok(DownstairsReport { n: base.n, lhs, rhs, residual, max_residual, bott_chern: bc })
}

/// `int_{P^1} log|z|^2 F` for a density `F` given on the `z` chart and the
/// `w` chart (`f_z dA_z = f_w dA_w`), in polar coordinates `z = e^{rho + i theta}`
/// with Gauss panels in `rho` and the trapezoid rule in `theta`.
pub fn integrate_log_weight(
    fz: &(dyn Fn(C64) -> f64 + Sync),
    fw: &(dyn Fn(C64) -> f64 + Sync),
    opts: &BottChernOptions,
    angular: usize,
) -> f64 {
    let (rhos, weights) = fibre_quadrature(opts);
    let dtheta = 2.0 * PI / angular as f64;
    rhos.par_iter()
        .zip(&weights)
        .map(|(&rho, &w)| {
            let mut ring = 0.0;
            for a in 0..angular {
                let theta = a as f64 * dtheta;
                let v = if rho <= 0.0 {
                    fz(C64::from_polar(rho.exp(), theta)) * (2.0 * rho).exp()
                } else {
                    fw(C64::from_polar((-rho).exp(), -theta)) * (-2.0 * rho).exp()
                };
                ring += v;
            }
            2.0 * rho * w * ring * dtheta
        })
        .sum()
}

/// Fibre integrand check: `tr kappa_{z zbar}` of the deformed metric at one
/// base point, as a function of `rho` (density against `d rho d theta`).
pub fn fibre_trace_density(datum: &DeformationDatum, y: C64, cutoff: &Cutoff, rho: f64) -> f64 {
    let frame = datum.adapted_frame();
    let m = datum.blocks(y, &frame);
    let s = profiles(cutoff, rho);
    let h = combine(&m, &s, |j| j.v);
    let hr = combine(&m, &s, |j| j.d1).scale(0.5);
    let hrr = combine(&m, &s, |j| j.d2).scale(0.25);
    curvature_density(&h, &hr, &hr, &hrr).map_or(f64::NAN, |(_, k)| k.trace().re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::grid::Chart;

    fn fs(k: i32) -> MetricFn {
        Arc::new(move |y: C64| CMat::scalar((1.0 + y.norm_sqr()).powi(-k)))
    }

    fn weighted(f: impl Fn(C64) -> f64 + Send + Sync + 'static) -> MetricFn {
        Arc::new(move |y: C64| CMat::scalar((-f(y)).exp() / (1.0 + y.norm_sqr())))
    }

    #[test]
    fn cutoffs_restrict_correctly() {
        for c in [Cutoff::Mollifier, Cutoff::SmoothStep { inner: 0.25 }] {
            assert_eq!(c.eval(Jet::variable(0.0)).v, 1.0);
            assert_eq!(c.eval(Jet::variable(1.0)).v, 0.0);
            let mid = c.eval(Jet::variable(0.5)).v;
            assert!(mid > 0.0 && mid < 1.0);
        }
        assert_eq!(Cutoff::SmoothStep { inner: 0.25 }.eval(Jet::variable(0.1)), Jet::ONE);
        // jets against a difference quotient
        let c = Cutoff::Mollifier;
        let f = |t: f64| c.eval(Jet::constant(t)).v;
        let t = 0.4;
        let d1 = (f(t + 1e-5) - f(t - 1e-5)) / 2e-5;
        assert!((c.eval(Jet::variable(t)).d1 - d1).abs() < 1e-6);
    }

    #[test]
    fn line_datum_matches_the_closed_form() {
        // phi_BC^0 = log(h1 / h2) for ch on a metric change
        let f = |y: C64| 0.5 / (1.0 + y.norm_sqr());
        let datum = DeformationDatum::metric_change(fs(1), weighted(f));
        let grid = ChartGrid::new(Chart::Z, 16);
        for cutoff in [Cutoff::Mollifier, Cutoff::SmoothStep { inner: 0.25 }] {
            let opts = BottChernOptions { cutoff, ..Default::default() };
            let out = bott_chern_numeric(&datum, &CharSeries::ChernCharacter, &grid, &opts).unwrap();
            for k in 0..grid.len() {
                let exact = f(grid.point_at(k));
                assert!((out.grade0.values[k] - exact).abs() < 1e-9, "{} vs {exact}", out.grade0.values[k]);
            }
        }
    }

    #[test]
    fn split_data_vanish() {
        let datum = DeformationDatum::split(fs(1), weighted(|y| y.re * 0.1), 1, 1);
        let grid = ChartGrid::new(Chart::Z, 32);
        let opts = BottChernOptions { grade1: true, ..Default::default() };
        let out = bott_chern_numeric(&datum, &CharSeries::ChernCharacter, &grid, &opts).unwrap();
        assert!(out.pullback);
        assert_eq!(out.grade0.max_abs(), 0.0);
        // the twisted deformation of split data is also trivial in grade 0
        let opts = BottChernOptions { split_pullback: false, ..Default::default() };
        let out = bott_chern_numeric(&datum, &CharSeries::ChernCharacter, &grid, &opts).unwrap();
        assert!(!out.pullback);
        assert!(out.grade0.max_abs() < 1e-9, "{}", out.grade0.max_abs());
    }

    #[test]
    fn inexact_sequences_rejected() {
        let iota = CMat::from_real_rows(&[&[1.0], &[0.0]]);
        let pi = CMat::from_real_rows(&[&[1.0, 0.0]]);
        let h2: MetricFn = Arc::new(|_| CMat::identity(2));
        let err = DeformationDatum::new(fs(0), h2, Some(fs(0)), iota, pi).unwrap_err();
        assert!(matches!(err, NumericError::InvalidDatum(_)));
    }

    #[test]
    fn log_weight_integrals() {
        let opts = BottChernOptions::default();
        let fs_z = |z: C64| 1.0 / (PI * (1.0 + z.norm_sqr()).powi(2));
        assert!(integrate_log_weight(&fs_z, &fs_z, &opts, 32).abs() < 1e-12);
        // int_0^inf ln t / (1 + t)^3 dt = -1/2
        let cube_z = |z: C64| 1.0 / (PI * (1.0 + z.norm_sqr()).powi(3));
        let cube_w = |w: C64| w.norm_sqr() / (PI * (1.0 + w.norm_sqr()).powi(3));
        assert!((integrate_log_weight(&cube_z, &cube_w, &opts, 32) + 0.5).abs() < 1e-12);
        assert_eq!(integrate_log_weight(&|_| 0.0, &|_| 0.0, &opts, 8), 0.0);
    }

    fn rank2_datum() -> DeformationDatum {
        let g2: MetricFn = Arc::new(|y: C64| {
            let b = C64::new(0.3, 0.1) * y;
            CMat::from_rows(&[&[C64::new(1.0 + y.norm_sqr(), 0.0), b], &[b.conj(), C64::new(2.0, 0.0)]])
        });
        let e1: MetricFn = Arc::new(|y: C64| CMat::scalar(1.0 + 0.2 * y.norm_sqr()));
        let e3: MetricFn = Arc::new(|y: C64| CMat::scalar(0.5 / (1.0 + y.norm_sqr())));
        let iota = CMat::from_real_rows(&[&[1.0], &[0.0]]);
        let pi = CMat::from_real_rows(&[&[0.0, 1.0]]);
        DeformationDatum::new(e1, g2, Some(e3), iota, pi).unwrap()
    }

    #[test]
    fn downstairs_rule_converges() {
        let datum = rank2_datum();
        let opts = BottChernOptions::default();
        let coarse = verify_downstairs(&datum, &CharSeries::Todd, &ChartGrid::new(Chart::Z, 24), &opts).unwrap();
        let fine = verify_downstairs(&datum, &CharSeries::Todd, &ChartGrid::new(Chart::Z, 48), &opts).unwrap();
        assert!(fine.max_residual < 1e-4, "{}", fine.max_residual);
        assert!(coarse.max_residual / fine.max_residual > 20.0, "{} -> {}", coarse.max_residual, fine.max_residual);
        // the identity is not vacuous
        assert!(fine.lhs.max_abs_inside(3) > 0.1);
    }

    #[test]
    fn grade_one_part_for_a_constant_rescaling() {
        // h2 = lambda h1 separates the variables, so phi_BC = log(1/lambda) (1 + c1(h1))
        let lambda: f64 = 0.6;
        let h1: MetricFn = Arc::new(|y: C64| CMat::scalar(1.0 / (1.0 + y.norm_sqr()).powi(2)));
        let h2: MetricFn = Arc::new(move |y: C64| CMat::scalar(lambda / (1.0 + y.norm_sqr()).powi(2)));
        let datum = DeformationDatum::metric_change(h1, h2);
        let grid = ChartGrid::new(Chart::Z, 32);
        let opts = BottChernOptions { grade1: true, ..Default::default() };
        let out = bott_chern_numeric(&datum, &CharSeries::ChernCharacter, &grid, &opts).unwrap();
        let g1 = out.grade1.unwrap();
        for k in (0..grid.len()).filter(|&k| grid.is_interior(k)) {
            let c1 = 2.0 / (PI * (1.0 + grid.point_at(k).norm_sqr()).powi(2));
            assert!((g1.values[k] + lambda.ln() * c1).abs() < 1e-3 * c1, "{} vs {}", g1.values[k], -lambda.ln() * c1);
            assert!((out.grade0.values[k] + lambda.ln()).abs() < 1e-10);
        }
        // classes without a degree-two part have no grade one contribution
        let linear = CharSeries::additive(crate::algebra::UnivariateSeries::from_integers(&[0, 1], 4)).unwrap();
        let out = bott_chern_numeric(&datum, &linear, &grid, &opts).unwrap();
        assert!(out.grade1.unwrap().max_abs() < 1e-12);
    }
}
