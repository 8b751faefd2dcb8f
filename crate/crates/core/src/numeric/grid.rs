//! Sample grids on the two standard charts of the projective line, finite
//! difference stencils and quadrature rules.

use num_complex::Complex64;

/// Which affine chart of `P^1`: `z` around 0 or `w = 1/z` around infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Chart {
    Z,
    W,
}

/// Order of the centered difference stencils.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StencilOrder {
    Two,
    Four,
    Six,
}

impl StencilOrder {
    /// Half width of the stencil in nodes.
    pub fn half_width(self) -> usize {
        match self {
            StencilOrder::Two => 1,
            StencilOrder::Four => 2,
            StencilOrder::Six => 3,
        }
    }

    /// Weights of `f'` at offsets `-k..=k`, before dividing by `h`.
    pub fn first(self) -> &'static [f64] {
        match self {
            StencilOrder::Two => &[-0.5, 0.0, 0.5],
            StencilOrder::Four => &[1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0],
            StencilOrder::Six => &[-1.0 / 60.0, 3.0 / 20.0, -3.0 / 4.0, 0.0, 3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0],
        }
    }

    /// Weights of `f''` at offsets `-k..=k`, before dividing by `h^2`.
    pub fn second(self) -> &'static [f64] {
        match self {
            StencilOrder::Two => &[1.0, -2.0, 1.0],
            StencilOrder::Four => &[-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0],
            StencilOrder::Six => &[1.0 / 90.0, -3.0 / 20.0, 3.0 / 2.0, -49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0],
        }
    }
}

/// `n x n` nodes on the square `[-radius, radius]^2` of one chart.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartGrid {
    pub chart: Chart,
    pub n: usize,
    pub radius: f64,
    pub order: StencilOrder,
}

/// Half side of the default chart square: the unit disk plus a margin of 1.
pub const DEFAULT_RADIUS: f64 = 2.0;

impl ChartGrid {
    pub fn new(chart: Chart, n: usize) -> Self {
        Self { chart, n, radius: DEFAULT_RADIUS, order: StencilOrder::Six }
    }

    pub fn with_order(mut self, order: StencilOrder) -> Self {
        self.order = order;
        self
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.radius / (self.n - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Row-major index of node `(i, j)`; `i` runs along the real axis.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        let h = self.spacing();
        Complex64::new(-self.radius + i as f64 * h, -self.radius + j as f64 * h)
    }

    pub fn point_at(&self, k: usize) -> Complex64 {
        self.point(k % self.n, k / self.n)
    }

    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.len()).map(move |k| self.point_at(k))
    }

    /// Whether a stencil of half width `width` centred at node `k` fits.
    pub fn fits(&self, k: usize, width: usize) -> bool {
        let (i, j) = (k % self.n, k / self.n);
        i >= width && j >= width && i + width < self.n && j + width < self.n
    }

    /// Nodes where first and second difference stencils are available.
    pub fn is_interior(&self, k: usize) -> bool {
        self.fits(k, self.order.half_width())
    }

    /// `(d/dx, d/dy)` of a sampled field at node `k`; NaN off the interior.
    pub fn gradient<T>(&self, values: &[T], k: usize) -> (T, T)
    where
        T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Nan,
    {
        if !self.is_interior(k) {
            return (T::nan(), T::nan());
        }
        let w = self.order.first();
        let half = self.order.half_width() as isize;
        let h = self.spacing();
        let (i, j) = ((k % self.n) as isize, (k / self.n) as isize);
        let (mut dx, mut dy) = (T::default(), T::default());
        for (o, &c) in (-half..=half).zip(w) {
            if c == 0.0 {
                continue;
            }
            dx = dx + values[self.index((i + o) as usize, j as usize)] * (c / h);
            dy = dy + values[self.index(i as usize, (j + o) as usize)] * (c / h);
        }
        (dx, dy)
    }

    /// Flat Laplacian of a sampled field at node `k`; NaN off the interior.
    pub fn laplacian<T>(&self, values: &[T], k: usize) -> T
    where
        T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Nan,
    {
        if !self.is_interior(k) {
            return T::nan();
        }
        let w = self.order.second();
        let half = self.order.half_width() as isize;
        let h2 = self.spacing() * self.spacing();
        let (i, j) = ((k % self.n) as isize, (k / self.n) as isize);
        let mut acc = T::default();
        for (o, &c) in (-half..=half).zip(w) {
            acc = acc + values[self.index((i + o) as usize, j as usize)] * (c / h2);
            acc = acc + values[self.index(i as usize, (j + o) as usize)] * (c / h2);
        }
        acc
    }

    /// Difference stencils at node `k` as `(node, weight)` taps: `d/dx`,
    /// `d/dy` and the flat Laplacian. `None` off the interior.
    pub fn taps(&self, k: usize) -> Option<Taps> {
        if !self.is_interior(k) {
            return None;
        }
        let half = self.order.half_width() as isize;
        let h = self.spacing();
        let (i, j) = ((k % self.n) as isize, (k / self.n) as isize);
        let mut t = Taps::default();
        for (o, (&c1, &c2)) in (-half..=half).zip(self.order.first().iter().zip(self.order.second())) {
            let kx = self.index((i + o) as usize, j as usize);
            let ky = self.index(i as usize, (j + o) as usize);
            if c1 != 0.0 {
                t.dx.push((kx, c1 / h));
                t.dy.push((ky, c1 / h));
            }
            t.lap.push((kx, c2 / (h * h)));
            t.lap.push((ky, c2 / (h * h)));
        }
        Some(t)
    }

    /// Tensor Lagrange interpolation of a sampled field at `p` using the
    /// `(2k) x (2k)` block of nodes around it, `k` the stencil half width.
    pub fn interpolate(&self, values: &[f64], p: Complex64) -> Option<f64> {
        let h = self.spacing();
        let m = 2 * self.order.half_width().max(2);
        let locate = |x: f64| -> Option<(usize, Vec<f64>)> {
            let s = (x + self.radius) / h;
            let base = s.floor() as isize - (m as isize / 2 - 1);
            if base < 0 || base as usize + m > self.n {
                return None;
            }
            let nodes: Vec<f64> = (0..m).map(|a| (base + a as isize) as f64).collect();
            let weights = (0..m)
                .map(|a| {
                    (0..m)
                        .filter(|&b| b != a)
                        .map(|b| (s - nodes[b]) / (nodes[a] - nodes[b]))
                        .product()
                })
                .collect();
            Some((base as usize, weights))
        };
        let (bx, wx) = locate(p.re)?;
        let (by, wy) = locate(p.im)?;
        let mut acc = 0.0;
        for (b, wyb) in wy.iter().enumerate() {
            for (a, wxa) in wx.iter().enumerate() {
                let v = values[self.index(bx + a, by + b)];
                acc += wxa * wyb * v;
            }
        }
        acc.is_finite().then_some(acc)
    }
}

/// Stencil taps produced by [`ChartGrid::taps`].
#[derive(Clone, Debug, Default)]
pub struct Taps {
    pub dx: Vec<(usize, f64)>,
    pub dy: Vec<(usize, f64)>,
    pub lap: Vec<(usize, f64)>,
}

/// Values that can be poisoned to mark missing stencil data.
pub trait Nan {
    fn nan() -> Self;
}

impl Nan for f64 {
    fn nan() -> Self {
        f64::NAN
    }
}

impl Nan for Complex64 {
    fn nan() -> Self {
        Complex64::new(f64::NAN, f64::NAN)
    }
}

/// Inner radius of the chart overlap used by the partition of unity.
pub const OVERLAP_INNER: f64 = 2.0 / 3.0;
/// Outer radius of the chart overlap used by the partition of unity.
pub const OVERLAP_OUTER: f64 = 1.5;

fn bump_tail(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth step from 0 at `s = -1` to 1 at `s = 1` with `S(s) + S(-s) = 1`.
pub fn smooth_step(s: f64) -> f64 {
    let a = bump_tail(1.0 + s);
    let b = bump_tail(1.0 - s);
    a / (a + b)
}

/// Partition-of-unity weight of a chart at coordinate modulus `r`: 1 for
/// `r <= 2/3`, 0 for `r >= 3/2`, and `psi(r) + psi(1/r) = 1`.
pub fn chart_weight(r: f64) -> f64 {
    if r <= 0.0 {
        return 1.0;
    }
    let s = r.ln() / OVERLAP_OUTER.ln();
    if s <= -1.0 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        smooth_step(-s)
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 1.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j - 1) as f64 * z * p2 - (j - 1) as f64 * p3) / j as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let step = p1 / pp;
            z -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * pp * pp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` panels.
pub fn composite_gauss(a: f64, b: f64, panels: usize, points: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(points);
    let width = (b - a) / panels as f64;
    let mut x = Vec::with_capacity(panels * points);
    let mut w = Vec::with_capacity(panels * points);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        for (xi, wi) in gx.iter().zip(&gw) {
            x.push(mid + 0.5 * width * xi);
            w.push(0.5 * width * wi);
        }
    }
    (x, w)
}
