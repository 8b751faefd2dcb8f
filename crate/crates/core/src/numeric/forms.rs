//! Hermitian metrics sampled on chart grids, Chern connection and
//! curvature by finite differences, characteristic forms, `dd^c` and
//! integration over the projective line.
//!
//! Conventions: a (1,1)-form is stored as its density `f` against
//! `dA = (i/2) dz ^ dz-bar`. For a metric with Gram matrix `H` in a
//! holomorphic frame, `omega = H^{-1} dH` (the (1,0) part), the curvature
//! `Omega = dbar(omega)` and the normalized curvature `K = (i/2pi) Omega` has
//! density `kappa = -(1/pi) [H^{-1} H_{z zbar} - H^{-1} H_zbar H^{-1} H_z]`,
//! which is positive for the Fubini–Study metric. `dd^c = (i/2pi) d dbar`
//! turns a function `f` into the density `lap(f) / (4 pi)`.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use super::grid::{chart_weight, Chart, ChartGrid, OVERLAP_INNER, OVERLAP_OUTER};
use super::linalg::{CMat, C64};
use super::NumericError;
use crate::classes::CharSeries;

/// A metric in one chart: node coordinate to Gram matrix of a holomorphic
/// frame.
pub type MetricFn = Arc<dyn Fn(C64) -> CMat + Send + Sync>;

/// A hermitian metric on a bundle over `P^1`, given in both charts.
#[derive(Clone)]
pub struct HermitianMetric {
    pub rank: usize,
    pub z: MetricFn,
    pub w: MetricFn,
}

impl std::fmt::Debug for HermitianMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HermitianMetric").field("rank", &self.rank).finish_non_exhaustive()
    }
}

impl HermitianMetric {
    /// `e^{-f} FS^k` on `O(k)`: `h_z = e^{-f(z)} (1+|z|^2)^{-k}`. The
    /// weight `f` is a function on `P^1` given in the `z` coordinate; the
    /// `w` frame is `z^k` times the `z` frame.
    pub fn line(degree: i32, weight: Arc<dyn Fn(C64) -> f64 + Send + Sync>) -> Self {
        let wz = weight.clone();
        let z: MetricFn = Arc::new(move |z: C64| CMat::scalar((-wz(z)).exp() * (1.0 + z.norm_sqr()).powi(-degree)));
        let w: MetricFn = Arc::new(move |w: C64| {
            // the weight is smooth at infinity; read its value there off a tiny w
            let w0 = if w.norm() == 0.0 { C64::new(1e-150, 0.0) } else { w };
            let f = weight(w0.inv());
            CMat::scalar((-f).exp() * (1.0 + w.norm_sqr()).powi(-degree))
        });
        Self { rank: 1, z, w }
    }

    /// The Fubini–Study metric on `O(k)`.
    pub fn fubini_study(degree: i32) -> Self {
        Self::line(degree, Arc::new(|_| 0.0))
    }

    /// The constant metric on a trivial bundle of rank `r`.
    pub fn trivial(rank: usize) -> Self {
        let f: MetricFn = Arc::new(move |_| CMat::identity(rank));
        Self { rank, z: f.clone(), w: f }
    }

    pub fn in_chart(&self, chart: Chart) -> &MetricFn {
        match chart {
            Chart::Z => &self.z,
            Chart::W => &self.w,
        }
    }
}

/// A metric evaluated at the nodes of one chart grid.
#[derive(Clone, Debug)]
pub struct MetricSample {
    pub grid: ChartGrid,
    pub rank: usize,
    pub values: Vec<CMat>,
}

impl MetricSample {
    /// Samples `metric` and checks it is hermitian positive definite.
    pub fn new(grid: &ChartGrid, rank: usize, metric: &(dyn Fn(C64) -> CMat + Send + Sync)) -> Result<Self, NumericError> {
        let values: Vec<CMat> = (0..grid.len()).into_par_iter().map(|k| metric(grid.point_at(k))).collect();
        for (k, h) in values.iter().enumerate() {
            if h.rows() != rank || !h.is_hermitian_positive_definite(1e-10) {
                return Err(NumericError::InvalidMetric { chart: grid.chart, node: k, point: grid.point_at(k) });
            }
        }
        Ok(Self { grid: grid.clone(), rank, values })
    }

    pub fn from_metric(grid: &ChartGrid, metric: &HermitianMetric) -> Result<Self, NumericError> {
        Self::new(grid, metric.rank, metric.in_chart(grid.chart).as_ref())
    }
}

/// Per-node matrix fields of a Chern connection on one chart; entries
/// outside the stencil interior are NaN.
#[derive(Clone, Debug)]
pub struct Connection {
    pub grid: ChartGrid,
    /// `H^{-1} dH/dz`, the coefficient of `dz` in `omega`.
    pub omega: Vec<CMat>,
    /// Density of `(i/2pi) Omega` against `dA`.
    pub curvature: Vec<CMat>,
}

fn nan_mat(r: usize) -> CMat {
    let mut m = CMat::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            m[(i, j)] = C64::new(f64::NAN, f64::NAN);
        }
    }
    m
}

/// `(dH/dz, dH/dzbar, lap H)` at node `k` by finite differences.
pub(crate) fn metric_derivatives(grid: &ChartGrid, values: &[CMat], k: usize) -> Option<(CMat, CMat, CMat)> {
    let taps = grid.taps(k)?;
    let r = values[k].rows();
    let (mut hx, mut hy, mut lap) = (CMat::zeros(r, r), CMat::zeros(r, r), CMat::zeros(r, r));
    for &(i, c) in &taps.dx {
        hx.axpy(c, &values[i]);
    }
    for &(i, c) in &taps.dy {
        hy.axpy(c, &values[i]);
    }
    for &(i, c) in &taps.lap {
        lap.axpy(c, &values[i]);
    }
    let half = C64::new(0.5, 0.0);
    let ihalf = C64::new(0.0, 0.5);
    let hz = &hx.scale_c(half) - &hy.scale_c(ihalf);
    let hzb = &hx.scale_c(half) + &hy.scale_c(ihalf);
    Some((hz, hzb, lap))
}

/// `kappa = -(1/pi) [H^{-1} H_{z zbar} - H^{-1} H_zbar H^{-1} H_z]` from the
/// pieces; `h_zzb` is `lap(H) / 4`.
pub fn curvature_density(h: &CMat, hz: &CMat, hzb: &CMat, h_zzb: &CMat) -> Option<(CMat, CMat)> {
    let hinv = h.inverse()?;
    let omega = &hinv * hz;
    let a = &hinv * h_zzb;
    let b = &(&hinv * hzb) * &omega;
    Some((omega, (&a - &b).scale(-1.0 / PI)))
}

/// Chern connection and curvature of a sampled metric.
pub fn connection_curvature(sample: &MetricSample) -> Result<Connection, NumericError> {
    let grid = &sample.grid;
    let r = sample.rank;
    let pairs: Vec<(CMat, CMat)> = (0..grid.len())
        .into_par_iter()
        .map(|k| match metric_derivatives(grid, &sample.values, k) {
            None => (nan_mat(r), nan_mat(r)),
            Some((hz, hzb, lap)) => curvature_density(&sample.values[k], &hz, &hzb, &lap.scale(0.25))
                .unwrap_or_else(|| (nan_mat(r), nan_mat(r))),
        })
        .collect();
    let (omega, curvature) = pairs.into_iter().unzip();
    Ok(Connection { grid: grid.clone(), omega, curvature })
}

/// A real scalar form on one chart: a function for bidegree (0,0), the
/// density against `dA` for bidegree (1,1).
#[derive(Clone, Debug, PartialEq)]
pub struct NumericForm {
    pub grid: ChartGrid,
    pub bidegree: (u8, u8),
    pub values: Vec<f64>,
}

impl NumericForm {
    pub fn function(grid: &ChartGrid, values: Vec<f64>) -> Self {
        Self { grid: grid.clone(), bidegree: (0, 0), values }
    }

    pub fn density(grid: &ChartGrid, values: Vec<f64>) -> Self {
        Self { grid: grid.clone(), bidegree: (1, 1), values }
    }

    pub fn sample(grid: &ChartGrid, bidegree: (u8, u8), f: impl Fn(C64) -> f64 + Sync) -> Self {
        let values = (0..grid.len()).into_par_iter().map(|k| f(grid.point_at(k))).collect();
        Self { grid: grid.clone(), bidegree, values }
    }

    /// Largest `|value|` over finite nodes.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().filter(|v| v.is_finite()).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self - other`, NaN where either side is missing.
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid, "forms on different grids");
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Self { grid: self.grid.clone(), bidegree: self.bidegree, values }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { grid: self.grid.clone(), bidegree: self.bidegree, values: self.values.iter().map(|v| v * c).collect() }
    }

    /// Largest `|value|` over nodes where a stencil of half width `margin`
    /// fits.
    pub fn max_abs_inside(&self, margin: usize) -> f64 {
        (0..self.grid.len())
            .filter(|&k| self.grid.fits(k, margin))
            .map(|k| self.values[k].abs())
            .fold(0.0, |m, v| if v.is_nan() { f64::NAN } else { m.max(v) })
    }
}

/// Grade 0 and grade 1 coefficients of a characteristic class on a curve:
/// `phi = a0 + a1 * c1` for a bundle of the given rank.
pub fn curve_coefficients(phi: &CharSeries, rank: usize) -> (f64, f64) {
    use crate::algebra::GradedRing;
    use crate::classes::FormalBundle;
    use num_traits::ToPrimitive;
    let ring = GradedRing::with_generators([("c1", 1)], 1).expect("one generator");
    let bundle = FormalBundle::from_classes(rank as i64, &[ring.generator(0)], &ring).expect("unit class");
    let value = phi.apply(&bundle).expect("class of a generic bundle");
    let a0 = value.constant_term().to_f64().unwrap_or(f64::NAN);
    let a1 = value.coeff(&[1]).to_f64().unwrap_or(f64::NAN);
    (a0, a1)
}

/// Grade 2 coefficients `(alpha, beta)` with `phi_2 = alpha c1^2 + beta c2`.
pub fn surface_coefficients(phi: &CharSeries, rank: usize) -> (f64, f64) {
    use crate::algebra::GradedRing;
    use crate::classes::FormalBundle;
    use num_traits::ToPrimitive;
    let ring = GradedRing::with_generators([("c1", 1), ("c2", 2)], 2).expect("two generators");
    let bundle =
        FormalBundle::from_classes(rank as i64, &[ring.generator(0), ring.generator(1)], &ring).expect("unit class");
    let value = phi.apply(&bundle).expect("class of a generic bundle");
    (value.coeff(&[2, 0]).to_f64().unwrap_or(f64::NAN), value.coeff(&[0, 1]).to_f64().unwrap_or(f64::NAN))
}

/// The characteristic form of a connection on a curve: grade 0 is the
/// constant `phi_0(rank)`, grade 1 is `phi_1 * tr(kappa)`.
#[derive(Clone, Debug)]
pub struct CharForm {
    pub grade0: NumericForm,
    pub grade1: NumericForm,
}

pub fn char_form(conn: &Connection, rank: usize, phi: &CharSeries) -> CharForm {
    let (a0, a1) = curve_coefficients(phi, rank);
    let grid = &conn.grid;
    let grade0 = NumericForm::function(grid, vec![a0; grid.len()]);
    let grade1 = NumericForm::density(grid, conn.curvature.iter().map(|k| a1 * k.trace().re).collect());
    CharForm { grade0, grade1 }
}

/// `dd^c f = lap(f) / (4 pi) dA` on interior nodes.
pub fn ddc(f: &NumericForm) -> Result<NumericForm, NumericError> {
    if f.bidegree != (0, 0) {
        return Err(NumericError::Bidegree { expected: (0, 0), got: f.bidegree });
    }
    let grid = &f.grid;
    let need = 2 * grid.order.half_width() + 1;
    if grid.n < need {
        return Err(NumericError::GridTooSmall { n: grid.n, need });
    }
    let values = (0..grid.len()).into_par_iter().map(|k| grid.laplacian(&f.values, k) / (4.0 * PI)).collect();
    Ok(NumericForm::density(grid, values))
}

/// `c1 = dd^c(-log(h |s|^2))` for a line bundle with a section.
pub fn first_chern_line(sample: &MetricSample, section: &[C64]) -> Result<NumericForm, NumericError> {
    if sample.rank != 1 {
        return Err(NumericError::InvalidDatum(format!("first_chern_line needs rank 1, got {}", sample.rank)));
    }
    let grid = &sample.grid;
    let mut logs = Vec::with_capacity(grid.len());
    for (k, (h, s)) in sample.values.iter().zip(section).enumerate() {
        let norm = h[(0, 0)].re * s.norm_sqr();
        if norm <= 0.0 && grid.is_interior(k) {
            return Err(NumericError::SingularNode { node: k, point: grid.point_at(k) });
        }
        logs.push(-norm.ln());
    }
    ddc(&NumericForm::function(grid, logs))
}

/// Default relative tolerance for the chart overlap check.
pub const OVERLAP_TOLERANCE: f64 = 1e-4;

/// Largest discrepancy between two chart densities of one (1,1)-form over
/// the overlap annulus, `f_z(z)` against `f_w(1/z) / |z|^4`.
pub fn overlap_mismatch(fz: &NumericForm, fw: &NumericForm) -> Result<(f64, C64), NumericError> {
    if fz.grid.chart != Chart::Z || fw.grid.chart != Chart::W {
        return Err(NumericError::InvalidDatum("expected a z-chart and a w-chart form".into()));
    }
    let mut worst = (0.0, C64::new(0.0, 0.0));
    for k in 0..fz.grid.len() {
        let z = fz.grid.point_at(k);
        let r = z.norm();
        if !(OVERLAP_INNER..=OVERLAP_OUTER).contains(&r) || !fz.grid.is_interior(k) {
            continue;
        }
        let Some(vw) = fw.grid.interpolate(&fw.values, z.inv()) else { continue };
        let diff = (fz.values[k] - vw / r.powi(4)).abs();
        if diff.is_nan() || diff > worst.0 {
            worst = (diff, z);
        }
        if diff.is_nan() {
            break;
        }
    }
    Ok(worst)
}

/// `int_{P^1}` of a (1,1)-form given by its densities on both charts, using
/// the partition of unity `psi(|z|) + psi(|w|) = 1` and the trapezoid rule.
pub fn integrate_p1(fz: &NumericForm, fw: &NumericForm) -> Result<f64, NumericError> {
    integrate_p1_with_tolerance(fz, fw, OVERLAP_TOLERANCE)
}

pub fn integrate_p1_with_tolerance(fz: &NumericForm, fw: &NumericForm, tol: f64) -> Result<f64, NumericError> {
    if fz.bidegree != (1, 1) || fw.bidegree != (1, 1) {
        return Err(NumericError::Bidegree { expected: (1, 1), got: fz.bidegree });
    }
    let (diff, at) = overlap_mismatch(fz, fw)?;
    let scale = fz.max_abs().max(1.0);
    if diff.is_nan() || diff > tol * scale {
        return Err(NumericError::ChartMismatch { max_diff: diff, at });
    }
    let mut total = 0.0;
    for f in [fz, fw] {
        let h = f.grid.spacing();
        let mut acc = 0.0;
        for (k, v) in f.values.iter().enumerate() {
            let psi = chart_weight(f.grid.point_at(k).norm());
            if psi == 0.0 {
                continue;
            }
            if !v.is_finite() {
                return Err(NumericError::GridTooSmall { n: f.grid.n, need: f.grid.n + 1 });
            }
            acc += psi * v;
        }
        total += acc * h * h;
    }
    Ok(total)
}

/// First Chern form densities of a line-bundle metric on both charts, by
/// the curvature route.
pub fn c1_densities(metric: &HermitianMetric, n: usize) -> Result<(NumericForm, NumericForm), NumericError> {
    let mut out = Vec::with_capacity(2);
    for chart in [Chart::Z, Chart::W] {
        let grid = ChartGrid::new(chart, n);
        let sample = MetricSample::from_metric(&grid, metric)?;
        let conn = connection_curvature(&sample)?;
        out.push(char_form(&conn, metric.rank, &CharSeries::ChernCharacter).grade1);
    }
    let fw = out.pop().expect("two charts");
    let fz = out.pop().expect("two charts");
    Ok((fz, fw))
}

/// `int_{P^1} c1(E, rho)` by the curvature route on an `n x n` grid per chart.
pub fn degree(metric: &HermitianMetric, n: usize) -> Result<f64, NumericError> {
    let (fz, fw) = c1_densities(metric, n)?;
    integrate_p1(&fz, &fw)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fs_density(z: C64) -> f64 {
        1.0 / (PI * (1.0 + z.norm_sqr()).powi(2))
    }

    #[test]
    fn flat_metric_has_no_curvature() {
        let g = ChartGrid::new(Chart::Z, 32);
        let s = MetricSample::from_metric(&g, &HermitianMetric::trivial(2)).unwrap();
        let c = connection_curvature(&s).unwrap();
        let form = char_form(&c, 2, &CharSeries::ChernCharacter);
        assert_eq!(form.grade0.values[0], 2.0);
        assert!(form.grade1.max_abs() < 1e-12);
    }

    #[test]
    fn fubini_study_curvature() {
        let g = ChartGrid::new(Chart::Z, 64);
        let s = MetricSample::from_metric(&g, &HermitianMetric::fubini_study(1)).unwrap();
        let c = connection_curvature(&s).unwrap();
        let f = char_form(&c, 1, &CharSeries::ChernCharacter).grade1;
        let err = (0..g.len())
            .filter(|&k| g.is_interior(k))
            .map(|k| (f.values[k] - fs_density(g.point_at(k))).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
        let td = char_form(&c, 1, &CharSeries::Todd);
        assert_eq!(td.grade0.values[0], 1.0);
        let k = g.index(32, 32);
        assert!((td.grade1.values[k] - 0.5 * f.values[k]).abs() < 1e-15);
    }

    #[test]
    fn ddc_examples() {
        let g = ChartGrid::new(Chart::Z, 64);
        let c = NumericForm::sample(&g, (0, 0), |_| 3.5);
        assert!(ddc(&c).unwrap().max_abs() < 1e-9);
        let f = NumericForm::sample(&g, (0, 0), |z| -(1.0 + z.norm_sqr()).ln());
        let d = ddc(&f).unwrap();
        let k = g.index(20, 40);
        assert!((d.values[k] + fs_density(g.point_at(k))).abs() < 1e-6);
        let a = C64::new(5.0, 0.0);
        let harmonic = NumericForm::sample(&g, (0, 0), |z| (z - a).norm_sqr().ln());
        assert!(ddc(&harmonic).unwrap().max_abs() < 1e-6);
        assert!(ddc(&d).is_err());
    }

    #[test]
    fn first_chern_of_fs_section() {
        let g = ChartGrid::new(Chart::Z, 64);
        let s = MetricSample::from_metric(&g, &HermitianMetric::fubini_study(1)).unwrap();
        let ones = vec![C64::new(1.0, 0.0); g.len()];
        let c1 = first_chern_line(&s, &ones).unwrap();
        let k = g.index(10, 33);
        assert!((c1.values[k] - fs_density(g.point_at(k))).abs() < 1e-6);
        let flat = MetricSample::from_metric(&g, &HermitianMetric::trivial(1)).unwrap();
        assert!(first_chern_line(&flat, &ones).unwrap().max_abs() < 1e-12);
        let root = g.point(20, 30);
        let zero: Vec<C64> = g.points().map(|z| z - root).collect();
        assert!(matches!(first_chern_line(&s, &zero), Err(NumericError::SingularNode { .. })));
    }

    #[test]
    fn degrees_of_line_bundles() {
        for k in 1..=3 {
            let d = degree(&HermitianMetric::fubini_study(k), 64).unwrap();
            assert!((d - k as f64).abs() < 1e-4, "k={k}: {d}");
        }
        let zero_fz = NumericForm::density(&ChartGrid::new(Chart::Z, 32), vec![0.0; 32 * 32]);
        let zero_fw = NumericForm::density(&ChartGrid::new(Chart::W, 32), vec![0.0; 32 * 32]);
        assert_eq!(integrate_p1(&zero_fz, &zero_fw).unwrap(), 0.0);
    }

    #[test]
    fn degree_does_not_depend_on_the_metric() {
        let bump = HermitianMetric::line(1, Arc::new(|z: C64| 0.7 / (1.0 + z.norm_sqr()) + 0.2 * (z.re / (1.0 + z.norm_sqr()))));
        let d = degree(&bump, 96).unwrap();
        assert!((d - 1.0).abs() < 1e-5, "{d}");
    }

    #[test]
    fn chart_mismatch_is_detected() {
        let (fz, fw) = c1_densities(&HermitianMetric::fubini_study(1), 48).unwrap();
        let bad = fw.scale(2.0);
        assert!(matches!(integrate_p1(&fz, &bad), Err(NumericError::ChartMismatch { .. })));
        let (d, _) = overlap_mismatch(&fz, &fw).unwrap();
        assert!(d < 1e-5, "{d}");
    }

    #[test]
    fn invalid_metric_rejected() {
        let g = ChartGrid::new(Chart::Z, 32);
        let bad: MetricFn = Arc::new(|z: C64| CMat::scalar(z.re));
        assert!(matches!(MetricSample::new(&g, 1, bad.as_ref()), Err(NumericError::InvalidMetric { .. })));
    }

    #[test]
    fn coefficients_of_standard_classes() {
        assert_eq!(curve_coefficients(&CharSeries::ChernCharacter, 3), (3.0, 1.0));
        assert_eq!(curve_coefficients(&CharSeries::Todd, 2), (1.0, 0.5));
        // ch_2 = c1^2/2 - c2
        assert_eq!(surface_coefficients(&CharSeries::ChernCharacter, 2), (0.5, -1.0));
    }
}
