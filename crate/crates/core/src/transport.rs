//! Curves, gauge parallel transport `U_{t,s}` and Levi-Civita transport of
//! frames and bivectors along them.

use std::fmt::Debug;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::connection::Connection;
use crate::error::{Error, Result};
use crate::geometry::{bivectors_from_frame, MetricChart, SelfDualBasis};
use crate::linalg::{metric_polar, orthogonality_defect, polar_orthogonal, vec4};
use crate::quadrature::TimeGrid;
use crate::{Mat4, Vec4};

/// A curve `[0, 1] → ℝ⁴` in chart coordinates.
pub trait Curve: Send + Sync + Debug {
    fn point(&self, t: f64) -> Vec4;
    /// One-sided velocity; `from_left` selects the limit from below where
    /// the curve has a corner.
    fn velocity(&self, t: f64, from_left: bool) -> Vec4;
    /// Sorted times from 0 to 1 where the curve may fail to be smooth.
    fn breakpoints(&self) -> Vec<f64> {
        vec![0.0, 1.0]
    }
}

pub type SharedCurve = Arc<dyn Curve>;

/// Velocity at a grid node, averaging the one-sided limits at corners.
pub fn node_velocity(curve: &dyn Curve, t: f64) -> Vec4 {
    (curve.velocity(t, true) + curve.velocity(t, false)) * 0.5
}

pub fn is_loop(curve: &dyn Curve) -> bool {
    (curve.point(1.0) - curve.point(0.0)).norm() <= 1e-10
}

/// C¹ cubic Hermite interpolant of nodes `(t_k, x_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteCurve {
    times: Vec<f64>,
    points: Vec<Vec4>,
    tangents: Vec<Vec4>,
}

impl HermiteCurve {
    /// Tangents by centered differences (periodic for closed node lists,
    /// one-sided at the ends otherwise).
    pub fn new(nodes: &[(f64, [f64; 4])]) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Contract("a curve needs at least two nodes".into()));
        }
        let times: Vec<f64> = nodes.iter().map(|n| n.0).collect();
        let points: Vec<Vec4> = nodes.iter().map(|n| Vec4::from(n.1)).collect();
        if times[0] != 0.0 || *times.last().unwrap() != 1.0 {
            return Err(Error::Contract(
                "node times must start at 0 and end at 1".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Contract("node times must increase".into()));
        }
        if points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::Domain("non-finite curve node".into()));
        }
        let k = points.len() - 1;
        let closed = (points[k] - points[0]).norm() <= 1e-10;
        let slope = |a: usize, b: usize| (points[b] - points[a]) / (times[b] - times[a]);
        let tangents = (0..=k)
            .map(|i| {
                if k == 1 {
                    slope(0, 1)
                } else if i == 0 || i == k {
                    if closed {
                        let before = (points[k] - points[k - 1]) / (times[k] - times[k - 1]);
                        (before + slope(0, 1)) * 0.5
                    } else if i == 0 {
                        slope(0, 1)
                    } else {
                        slope(k - 1, k)
                    }
                } else {
                    (slope(i - 1, i) + slope(i, i + 1)) * 0.5
                }
            })
            .collect();
        Ok(Self {
            times,
            points,
            tangents,
        })
    }

    fn segment(&self, t: f64) -> usize {
        let k = self.times.len() - 1;
        self.times[1..k].partition_point(|&s| s <= t)
    }

    fn eval(&self, t: f64, i: usize) -> (Vec4, Vec4) {
        let (a, b) = (self.times[i], self.times[i + 1]);
        let h = b - a;
        let s = (t - a) / h;
        let (p0, p1) = (self.points[i], self.points[i + 1]);
        let (m0, m1) = (self.tangents[i] * h, self.tangents[i + 1] * h);
        let (s2, s3) = (s * s, s * s * s);
        let x = p0 * (2.0 * s3 - 3.0 * s2 + 1.0)
            + m0 * (s3 - 2.0 * s2 + s)
            + p1 * (-2.0 * s3 + 3.0 * s2)
            + m1 * (s3 - s2);
        let v = (p0 * (6.0 * s2 - 6.0 * s)
            + m0 * (3.0 * s2 - 4.0 * s + 1.0)
            + p1 * (-6.0 * s2 + 6.0 * s)
            + m1 * (3.0 * s2 - 2.0 * s))
            / h;
        (x, v)
    }
}

impl Curve for HermiteCurve {
    fn point(&self, t: f64) -> Vec4 {
        self.eval(t, self.segment(t)).0
    }

    fn velocity(&self, t: f64, from_left: bool) -> Vec4 {
        let mut i = self.segment(t);
        if from_left && i > 0 && t == self.times[i] {
            i -= 1;
        }
        self.eval(t, i).1
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.times.clone()
    }
}

/// `x(t) = base + Σ_k a_k (cos 2πkt − 1) + b_k sin 2πkt`, a smooth loop at `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierLoop {
    pub base: [f64; 4],
    pub cos_coeffs: Vec<[f64; 4]>,
    pub sin_coeffs: Vec<[f64; 4]>,
}

impl Curve for FourierLoop {
    fn point(&self, t: f64) -> Vec4 {
        let mut x = Vec4::from(self.base);
        for (k, (a, b)) in self.cos_coeffs.iter().zip(&self.sin_coeffs).enumerate() {
            let w = 2.0 * std::f64::consts::PI * (k + 1) as f64 * t;
            let (s, c) = w.sin_cos();
            x += Vec4::from(*a) * (c - 1.0) + Vec4::from(*b) * s;
        }
        x
    }

    fn velocity(&self, t: f64, _from_left: bool) -> Vec4 {
        let mut v = Vec4::zeros();
        for (k, (a, b)) in self.cos_coeffs.iter().zip(&self.sin_coeffs).enumerate() {
            let f = 2.0 * std::f64::consts::PI * (k + 1) as f64;
            let (s, c) = (f * t).sin_cos();
            v += (Vec4::from(*b) * c - Vec4::from(*a) * s) * f;
        }
        v
    }
}

/// Open smooth curve `x(t) = start + t·(end − start) + Σ_k c_k sin πkt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SineCurve {
    pub start: [f64; 4],
    pub end: [f64; 4],
    pub sin_coeffs: Vec<[f64; 4]>,
}

impl Curve for SineCurve {
    fn point(&self, t: f64) -> Vec4 {
        let (a, b) = (Vec4::from(self.start), Vec4::from(self.end));
        let mut x = a + (b - a) * t;
        for (k, c) in self.sin_coeffs.iter().enumerate() {
            x += Vec4::from(*c) * (std::f64::consts::PI * (k + 1) as f64 * t).sin();
        }
        x
    }

    fn velocity(&self, t: f64, _from_left: bool) -> Vec4 {
        let mut v = Vec4::from(self.end) - Vec4::from(self.start);
        for (k, c) in self.sin_coeffs.iter().enumerate() {
            let f = std::f64::consts::PI * (k + 1) as f64;
            v += Vec4::from(*c) * (f * (f * t).cos());
        }
        v
    }
}

/// `γ_r(t) = γ(t/r)` for `t ≤ r`, then constant `γ(1)`.
#[derive(Debug, Clone)]
pub struct Reparameterized {
    base: SharedCurve,
    r: f64,
}

impl Curve for Reparameterized {
    fn point(&self, t: f64) -> Vec4 {
        self.base.point((t / self.r).min(1.0))
    }

    fn velocity(&self, t: f64, from_left: bool) -> Vec4 {
        if t < self.r || (t == self.r && from_left) {
            self.base.velocity(t / self.r, from_left) / self.r
        } else {
            Vec4::zeros()
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.base.breakpoints().iter().map(|s| s * self.r).collect();
        if self.r < 1.0 {
            b.push(1.0);
        }
        b
    }
}

pub fn reparameterize_r(curve: SharedCurve, r: f64) -> Result<SharedCurve> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Domain(format!(
            "reparameterization r = {r} outside (0, 1]"
        )));
    }
    if r == 1.0 {
        return Ok(curve);
    }
    Ok(Arc::new(Reparameterized { base: curve, r }))
}

/// `t ↦ γ(1 − t)`.
#[derive(Debug, Clone)]
pub struct Reversed(pub SharedCurve);

impl Curve for Reversed {
    fn point(&self, t: f64) -> Vec4 {
        self.0.point(1.0 - t)
    }

    fn velocity(&self, t: f64, from_left: bool) -> Vec4 {
        -self.0.velocity(1.0 - t, !from_left)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.0.breakpoints().iter().rev().map(|s| 1.0 - s).collect()
    }
}

/// `γ(t) + ε h(t)` for a chart-coordinate displacement field `h`.
#[derive(Debug, Clone)]
pub struct Displaced {
    pub base: SharedCurve,
    pub direction: SharedCurve,
    pub eps: f64,
}

impl Curve for Displaced {
    fn point(&self, t: f64) -> Vec4 {
        self.base.point(t) + self.direction.point(t) * self.eps
    }

    fn velocity(&self, t: f64, from_left: bool) -> Vec4 {
        self.base.velocity(t, from_left) + self.direction.velocity(t, from_left) * self.eps
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.base.breakpoints();
        b.extend(self.direction.breakpoints());
        b.sort_by(f64::total_cmp);
        b.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        b
    }
}

/// Displacement `c · sin²(π(t − start)/width)` on `[start, start + width]`,
/// zero elsewhere.
#[derive(Debug, Clone)]
pub struct WindowDirection {
    pub start: f64,
    pub width: f64,
    pub amplitude: [f64; 4],
}

impl WindowDirection {
    pub fn new(start: f64, width: f64, amplitude: [f64; 4]) -> Result<Self> {
        if !(width > 0.0 && start >= 0.0 && start + width <= 1.0) {
            return Err(Error::Domain(format!(
                "window [{start}, {}] not inside [0, 1]",
                start + width
            )));
        }
        Ok(Self {
            start,
            width,
            amplitude,
        })
    }

    fn phase(&self, t: f64) -> Option<f64> {
        let s = (t - self.start) / self.width;
        (0.0..=1.0).contains(&s).then_some(std::f64::consts::PI * s)
    }
}

impl Curve for WindowDirection {
    fn point(&self, t: f64) -> Vec4 {
        let p = self.phase(t).map_or(0.0, |p| p.sin().powi(2));
        vec4(self.amplitude) * p
    }

    fn velocity(&self, t: f64, _from_left: bool) -> Vec4 {
        let d = self
            .phase(t)
            .map_or(0.0, |p| (2.0 * p).sin() * std::f64::consts::PI / self.width);
        vec4(self.amplitude) * d
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b = vec![0.0, self.start, self.start + self.width, 1.0];
        b.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        b
    }
}

/// Seeded random Fourier loops at `base` with `modes` modes, the `k`-th
/// coefficients drawn uniformly from `[−amplitude/k, amplitude/k]⁴`.
pub fn random_fourier_loops(
    seed: u64,
    count: usize,
    base: [f64; 4],
    amplitude: f64,
    modes: usize,
) -> Vec<FourierLoop> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut draw = |k: usize| -> [f64; 4] {
                let s = amplitude / k as f64;
                std::array::from_fn(|_| rng.random_range(-s..s))
            };
            let mut cos_coeffs = Vec::new();
            let mut sin_coeffs = Vec::new();
            for k in 1..=modes {
                cos_coeffs.push(draw(k));
                sin_coeffs.push(draw(k));
            }
            FourierLoop {
                base,
                cos_coeffs,
                sin_coeffs,
            }
        })
        .collect()
}

/// Seeded random open curves from `start`, ending at a random point.
pub fn random_open_curves(
    seed: u64,
    count: usize,
    start: [f64; 4],
    amplitude: f64,
    modes: usize,
) -> Vec<SineCurve> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let end = std::array::from_fn(|i| start[i] + rng.random_range(-amplitude..amplitude));
            let sin_coeffs = (1..=modes)
                .map(|k| {
                    let s = amplitude / (2.0 * k as f64);
                    std::array::from_fn(|_| rng.random_range(-s..s))
                })
                .collect();
            SineCurve {
                start,
                end,
                sin_coeffs,
            }
        })
        .collect()
}

/// ODE resolution: approximate number of RK4 steps on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub steps: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Self { steps: 2000 }
    }
}

impl Resolution {
    pub fn new(steps: usize) -> Self {
        Self { steps }
    }

    pub fn grid(&self, curve: &dyn Curve) -> TimeGrid {
        self.grid_with(curve, &[])
    }

    /// Grid with the curve's breakpoints and `extra` times as piece boundaries.
    pub fn grid_with(&self, curve: &dyn Curve, extra: &[f64]) -> TimeGrid {
        let mut b = curve.breakpoints();
        b.extend(extra.iter().copied().filter(|t| *t > 0.0 && *t < 1.0));
        b.sort_by(f64::total_cmp);
        b.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        TimeGrid::with_breaks(&b, self.steps)
    }
}

/// Gauge transport `U_{t_k,0}` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugePath {
    pub grid: TimeGrid,
    pub u: Vec<Mat4>,
}

impl GaugePath {
    /// `U_{t_k, t_j} = U_{t_k,0} U_{t_j,0}⁻¹`.
    pub fn between(&self, k: usize, j: usize) -> Mat4 {
        self.u[k] * self.u[j].transpose()
    }

    pub fn last(&self) -> Mat4 {
        *self.u.last().expect("grid is never empty")
    }
}

/// Levi-Civita transported frames `e_μ(γ, t_k)` (columns) on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePath {
    pub grid: TimeGrid,
    pub frames: Vec<Mat4>,
}

impl FramePath {
    /// `Q_{t_k,0} = E(t_k) E(0)⁻¹` acting on chart vectors.
    pub fn q(&self, k: usize) -> Mat4 {
        self.frames[k] * self.frames[0].try_inverse().expect("frames are invertible")
    }

    pub fn bivectors(&self, k: usize) -> SelfDualBasis {
        bivectors_from_frame(&self.frames[k])
    }

    pub fn last(&self) -> Mat4 {
        *self.frames.last().expect("grid is never empty")
    }
}

/// Both transports along one curve on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportResult {
    pub points: Vec<Vec4>,
    pub velocities: Vec<Vec4>,
    pub gauge: GaugePath,
    pub frame: FramePath,
    pub steps: usize,
}

impl TransportResult {
    pub fn grid(&self) -> &TimeGrid {
        &self.gauge.grid
    }
}

fn rk4_orthogonal<F>(grid: &TimeGrid, start: Mat4, mut generator: F) -> Result<Vec<Mat4>>
where
    F: FnMut(f64, bool) -> Result<Mat4>,
{
    let t = grid.times();
    let mut out = Vec::with_capacity(t.len());
    out.push(start);
    let mut u = start;
    for k in 0..t.len() - 1 {
        let (a, b) = (t[k], t[k + 1]);
        let h = b - a;
        let m0 = generator(a, false)?;
        let mh = generator(0.5 * (a + b), false)?;
        let m1 = generator(b, true)?;
        let k1 = m0 * u;
        let k2 = mh * (u + k1 * (0.5 * h));
        let k3 = mh * (u + k2 * (0.5 * h));
        let k4 = m1 * (u + k3 * h);
        u = polar_orthogonal(&(u + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)));
        if !u.iter().all(|v| v.is_finite()) {
            return Err(Error::Numeric(format!("transport diverged at t = {b}")));
        }
        out.push(u);
    }
    Ok(out)
}

/// `−A_μ(γ(t)) γ̇^μ(t)`.
fn gauge_generator(conn: &Connection, curve: &dyn Curve, t: f64, left: bool) -> Result<Mat4> {
    let x = curve.point(t);
    let v = curve.velocity(t, left);
    let a = conn.potential(&x).map_err(|e| match e {
        Error::Numeric(m) => Error::Numeric(format!("{m} (t = {t})")),
        other => other,
    })?;
    Ok(-(a[0] * v[0] + a[1] * v[1] + a[2] * v[2] + a[3] * v[3]))
}

/// Solves `dU/dt = −A_μ(γ(t)) γ̇^μ(t) U`, `U(0) = I` by RK4 with polar projection.
pub fn gauge_transport(conn: &Connection, curve: &dyn Curve, res: Resolution) -> Result<GaugePath> {
    gauge_transport_on(conn, curve, res.grid(curve))
}

pub fn gauge_transport_on(
    conn: &Connection,
    curve: &dyn Curve,
    grid: TimeGrid,
) -> Result<GaugePath> {
    conn.validate()?;
    let u = rk4_orthogonal(&grid, Mat4::identity(), |t, left| {
        gauge_generator(conn, curve, t, left)
    })?;
    Ok(GaugePath { grid, u })
}

/// `U_{t,s}` integrated directly from `s` to `t` (either order) with about
/// `res.steps` steps per unit time.
pub fn gauge_transport_between(
    conn: &Connection,
    curve: &dyn Curve,
    s: f64,
    t: f64,
    res: Resolution,
) -> Result<Mat4> {
    if s == t {
        return Ok(Mat4::identity());
    }
    let (lo, hi) = (s.min(t), s.max(t));
    let mut breaks = vec![0.0];
    breaks.extend(
        curve
            .breakpoints()
            .iter()
            .filter(|&&b| b > lo && b < hi)
            .map(|b| (b - lo) / (hi - lo)),
    );
    breaks.push(1.0);
    let steps = ((res.steps as f64) * (hi - lo)).ceil().max(2.0) as usize;
    let grid = TimeGrid::with_breaks(&breaks, steps);
    let len = hi - lo;
    let u = rk4_orthogonal(&grid, Mat4::identity(), |tau, left| {
        Ok(gauge_generator(conn, curve, lo + tau * len, left)? * len)
    })?;
    let forward = *u.last().unwrap();
    Ok(if t > s { forward } else { forward.transpose() })
}

/// Transports the orthonormal frame at `γ(0)` by `∇_{γ̇} e = 0`, i.e.
/// `de^κ/dt = −Γ^κ_{λν} γ̇^λ e^ν`, re-orthonormalizing in `g` each step.
pub fn levi_civita_transport(
    chart: &MetricChart,
    curve: &dyn Curve,
    res: Resolution,
) -> Result<FramePath> {
    levi_civita_transport_on(chart, curve, res.grid(curve))
}

pub fn levi_civita_transport_on(
    chart: &MetricChart,
    curve: &dyn Curve,
    grid: TimeGrid,
) -> Result<FramePath> {
    let t = grid.times().to_vec();
    let x0 = curve.point(0.0);
    let mut e = chart.orthonormal_frame(&x0)?;
    let mut frames = Vec::with_capacity(t.len());
    frames.push(e);
    if chart.is_flat() {
        frames.resize(t.len(), e);
        return Ok(FramePath { grid, frames });
    }
    let rhs = |tt: f64, left: bool, e: &Mat4| -> Result<Mat4> {
        let x = curve.point(tt);
        let v = curve.velocity(tt, left);
        let gamma = chart.christoffel(&x)?;
        let mut out = Mat4::zeros();
        for col in 0..4 {
            let w = gamma.contract(&v, &e.column(col).into_owned());
            out.set_column(col, &(-w));
        }
        Ok(out)
    };
    for k in 0..t.len() - 1 {
        let (a, b) = (t[k], t[k + 1]);
        let h = b - a;
        let k1 = rhs(a, false, &e)?;
        let k2 = rhs(0.5 * (a + b), false, &(e + k1 * (0.5 * h)))?;
        let k3 = rhs(0.5 * (a + b), false, &(e + k2 * (0.5 * h)))?;
        let k4 = rhs(b, true, &(e + k3 * h))?;
        e += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        e = metric_polar(&e, &chart.metric(&curve.point(b))?);
        if !e.iter().all(|v| v.is_finite()) {
            return Err(Error::Numeric(format!(
                "frame transport diverged at t = {b}"
            )));
        }
        frames.push(e);
    }
    Ok(FramePath { grid, frames })
}

/// Parallel-transported bivectors `v_i^±(γ, t_k)`.
pub fn transport_bivectors(
    chart: &MetricChart,
    curve: &dyn Curve,
    res: Resolution,
) -> Result<Vec<SelfDualBasis>> {
    let path = levi_civita_transport(chart, curve, res)?;
    Ok((0..path.frames.len()).map(|k| path.bivectors(k)).collect())
}

pub fn transport(
    conn: &Connection,
    chart: &MetricChart,
    curve: &dyn Curve,
    res: Resolution,
) -> Result<TransportResult> {
    transport_on(conn, chart, curve, res.grid(curve), res.steps)
}

pub fn transport_on(
    conn: &Connection,
    chart: &MetricChart,
    curve: &dyn Curve,
    grid: TimeGrid,
    steps: usize,
) -> Result<TransportResult> {
    let gauge = gauge_transport_on(conn, curve, grid.clone())?;
    let frame = levi_civita_transport_on(chart, curve, grid)?;
    let t = gauge.grid.times();
    Ok(TransportResult {
        points: t.iter().map(|&s| curve.point(s)).collect(),
        velocities: t.iter().map(|&s| node_velocity(curve, s)).collect(),
        gauge,
        frame,
        steps,
    })
}

/// Covariant derivative of `U_{1,0}` along the frame-transported direction
/// `ĥ(t) = h^μ(t) e_μ(γ, t)`:
/// `−∫₀¹ U_{1,t} F(γ(t))⟨ĥ(t), γ̇(t)⟩ U_{t,0} dt`.
///
/// In a trivialization, the derivative of the matrix `U_{1,0}` differs from
/// this by `−A(γ(1))⟨ĥ(1)⟩ U_{1,0} + U_{1,0} A(γ(0))⟨ĥ(0)⟩`.
pub fn first_variation(
    conn: &Connection,
    chart: &MetricChart,
    curve: &dyn Curve,
    h: &dyn Curve,
    res: Resolution,
) -> Result<Mat4> {
    let tr = transport(conn, chart, curve, res)?;
    let t = tr.grid().times();
    let last = tr.gauge.last();
    let mut vals = Vec::with_capacity(t.len());
    for k in 0..t.len() {
        let hat = tr.frame.frames[k] * h.point(t[k]);
        let f = conn.field_strength(&tr.points[k])?;
        let fh = f.eval(&hat, &tr.velocities[k]);
        vals.push(-(last * tr.gauge.u[k].transpose() * fh * tr.gauge.u[k]));
    }
    Ok(tr.grid().integrate(&vals))
}

/// `∫₀¹ g(γ̇, γ̇) dt`.
pub fn energy(chart: &MetricChart, curve: &dyn Curve, res: Resolution) -> Result<f64> {
    let grid = res.grid(curve);
    let vals = grid
        .times()
        .iter()
        .map(|&t| {
            let v = node_velocity(curve, t);
            Ok(v.dot(&(chart.metric(&curve.point(t))? * v)))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(grid.integrate(&vals))
}

/// Largest `‖U_{t_k,0}ᵀU_{t_k,0} − I‖` along a path.
pub fn max_orthogonality_defect(path: &GaugePath) -> f64 {
    path.u.iter().map(orthogonality_defect).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::exp_so4;
    use crate::algebra::Omega;
    use crate::algebra::So4Element;
    use crate::connection::{gauge_transform, Bump, GaugeFactor, GaugeField};
    use crate::field::ScalarField;

    fn instanton() -> Connection {
        Connection::instanton(1.0, [0.1, 0.0, -0.2, 0.05])
    }

    fn curves() -> Vec<SharedCurve> {
        let mut out: Vec<SharedCurve> = random_fourier_loops(3, 2, [0.2, -0.1, 0.3, 0.1], 0.6, 3)
            .into_iter()
            .map(|c| Arc::new(c) as SharedCurve)
            .collect();
        out.push(Arc::new(
            HermiteCurve::new(&[
                (0.0, [0.0, 0.0, 0.0, 0.0]),
                (0.3, [0.5, 0.2, -0.1, 0.3]),
                (0.7, [0.1, 0.8, 0.4, -0.2]),
                (1.0, [-0.3, 0.4, 0.6, 0.1]),
            ])
            .unwrap(),
        ));
        out
    }

    #[test]
    fn zero_connection_transport_is_identity() {
        for c in curves() {
            let p = gauge_transport(&Connection::Zero, c.as_ref(), Resolution::new(100)).unwrap();
            assert!(p.u.iter().all(|u| *u == Mat4::identity()));
        }
    }

    #[test]
    fn constant_potential_on_segment_matches_exponential() {
        // A = ψ⁻¹dψ with ψ = exp(x₀ X) gives the constant potential A₀ = X.
        let gen = Omega::left([0.3, -0.5, 0.8]);
        let conn = gauge_transform(
            &Connection::Zero,
            &GaugeField {
                factors: vec![GaugeFactor {
                    generator: gen,
                    angle: ScalarField::Bilinear {
                        scale: 1.0,
                        i: 0,
                        j: 0,
                    },
                }],
            },
        )
        .unwrap();
        // ψ = exp(x₀² X): A₀ = 2x₀X, still commuting along the segment.
        let d = [0.7, 0.3, -0.2, 0.5];
        let seg = SineCurve {
            start: [0.0; 4],
            end: d,
            sin_coeffs: vec![],
        };
        let u = gauge_transport(&conn, &seg, Resolution::new(400))
            .unwrap()
            .last();
        let x = So4Element::from_omega(&gen);
        let exact = exp_so4(&x.scale(-d[0] * d[0]));
        assert!((u - exact).abs().max() < 1e-12);
    }

    #[test]
    fn semigroup_and_orthogonality() {
        let conn = Connection::perturbed(
            instanton(),
            Bump {
                center: [0.0; 4],
                radius: 2.0,
                direction: [0.3, -0.8, 0.5, 0.6],
                generator: [0.2, 0.9, -0.4],
            },
            0.1,
        );
        let res = Resolution::default();
        for c in curves() {
            let full = gauge_transport(&conn, c.as_ref(), res).unwrap();
            assert!(max_orthogonality_defect(&full) < 1e-9);
            for s in [0.3, 0.7] {
                let a = gauge_transport_between(&conn, c.as_ref(), s, 1.0, res).unwrap();
                let b = gauge_transport_between(&conn, c.as_ref(), 0.0, s, res).unwrap();
                assert!((a * b - full.last()).abs().max() < 1e-9);
            }
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let c = &curves()[0];
        let conn = instanton();
        let reference = gauge_transport(&conn, c.as_ref(), Resolution::new(4000))
            .unwrap()
            .last();
        let e1 = (gauge_transport(&conn, c.as_ref(), Resolution::new(20))
            .unwrap()
            .last()
            - reference)
            .norm();
        let e2 = (gauge_transport(&conn, c.as_ref(), Resolution::new(40))
            .unwrap()
            .last()
            - reference)
            .norm();
        assert!(e1 / e2 >= 8.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn reversal_inverts_transport() {
        let conn = instanton();
        for c in curves() {
            let fwd = gauge_transport(&conn, c.as_ref(), Resolution::default())
                .unwrap()
                .last();
            let back = gauge_transport(&conn, &Reversed(c.clone()), Resolution::default())
                .unwrap()
                .last();
            assert!((back * fwd - Mat4::identity()).abs().max() < 1e-9);
        }
    }

    #[test]
    fn reparameterization_invariance() {
        let conn = instanton();
        for c in curves() {
            let u = gauge_transport(&conn, c.as_ref(), Resolution::default())
                .unwrap()
                .last();
            for r in [1.0, 0.5, 0.125] {
                let cr = reparameterize_r(c.clone(), r).unwrap();
                let ur = gauge_transport(&conn, cr.as_ref(), Resolution::default())
                    .unwrap()
                    .last();
                assert!((u - ur).abs().max() < 1e-8, "r = {r}");
                let z =
                    gauge_transport(&Connection::Zero, cr.as_ref(), Resolution::new(50)).unwrap();
                assert_eq!(z.last(), Mat4::identity());
            }
        }
        assert!(matches!(
            reparameterize_r(curves()[0].clone(), 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn gauge_covariance_of_transport() {
        let g = GaugeField {
            factors: vec![GaugeFactor {
                generator: Omega::left([0.6, 0.0, 0.8]),
                angle: ScalarField::PlaneWave {
                    amplitude: 1.2,
                    wavevector: [0.5, -0.4, 0.3, 0.9],
                    phase: 0.1,
                },
            }],
        };
        let conn = instanton();
        let t = gauge_transform(&conn, &g).unwrap();
        for c in curves() {
            let u = gauge_transport(&conn, c.as_ref(), Resolution::default())
                .unwrap()
                .last();
            let ut = gauge_transport(&t, c.as_ref(), Resolution::default())
                .unwrap()
                .last();
            let expect = g.eval(&c.point(1.0)).transpose() * u * g.eval(&c.point(0.0));
            assert!((ut - expect).abs().max() < 1e-8);
        }
    }

    #[test]
    fn flat_frames_are_constant() {
        for c in curves() {
            let p = levi_civita_transport(&MetricChart::flat(), c.as_ref(), Resolution::new(100))
                .unwrap();
            assert!(p.frames.iter().all(|f| *f == Mat4::identity()));
            assert_eq!(p.q(p.frames.len() - 1), Mat4::identity());
        }
    }

    #[test]
    fn curved_frames_stay_orthonormal_and_self_dual() {
        for chart in [MetricChart::round_s4(), MetricChart::s1xs3(1.0)] {
            for c in curves() {
                let p = levi_civita_transport(&chart, c.as_ref(), Resolution::new(400)).unwrap();
                for k in (0..p.frames.len()).step_by(37) {
                    let x = c.point(p.grid.times()[k]);
                    let basis = chart.selfdual_basis(&x, &p.frames[k]).unwrap();
                    for i in 0..3 {
                        let star = chart.hodge_star_bivector(&x, &basis.plus[i]).unwrap();
                        assert!((star.0 - basis.plus[i].0).norm() < 1e-8);
                        for j in 0..3 {
                            let ip = chart
                                .bivector_inner(&x, &basis.plus[i], &basis.plus[j])
                                .unwrap();
                            let expect = if i == j { 1.0 } else { 0.0 };
                            assert!((ip - expect).abs() < 1e-8);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn round_sphere_loop_has_nontrivial_holonomy() {
        let c = &curves()[0];
        let p = levi_civita_transport(&MetricChart::round_s4(), c.as_ref(), Resolution::default())
            .unwrap();
        let q = p.q(p.frames.len() - 1);
        assert!(orthogonality_defect(&q) < 1e-8);
        assert!((q.determinant() - 1.0).abs() < 1e-8);
        assert!((q - Mat4::identity()).norm() > 1e-3);
    }

    #[test]
    fn first_variation_matches_differences() {
        let conn = instanton();
        let chart = MetricChart::flat();
        let res = Resolution::new(1000);
        let c = curves()[2].clone();
        let dirs: Vec<SharedCurve> = vec![
            Arc::new(SineCurve {
                start: [0.0; 4],
                end: [0.0; 4],
                sin_coeffs: vec![[0.3, -0.5, 0.2, 0.8], [0.1, 0.4, -0.6, 0.2]],
            }),
            Arc::new(SineCurve {
                start: [0.0; 4],
                end: [0.4, -0.2, 0.7, 0.1],
                sin_coeffs: vec![[0.2, 0.1, 0.0, -0.3]],
            }),
        ];
        for h in dirs {
            let analytic = first_variation(&conn, &chart, c.as_ref(), h.as_ref(), res).unwrap();
            let eps = 1e-4;
            let plus = Displaced {
                base: c.clone(),
                direction: h.clone(),
                eps,
            };
            let minus = Displaced {
                base: c.clone(),
                direction: h.clone(),
                eps: -eps,
            };
            let up = gauge_transport(&conn, &plus, res).unwrap().last();
            let um = gauge_transport(&conn, &minus, res).unwrap().last();
            let fd = (up - um) / (2.0 * eps);
            let u = gauge_transport(&conn, c.as_ref(), res).unwrap().last();
            let a1 = conn.potential(&c.point(1.0)).unwrap();
            let h1 = h.point(1.0);
            let end: Mat4 = (0..4).map(|m| a1[m] * h1[m]).sum();
            let predicted = analytic - end * u;
            let rel = (fd - predicted).norm() / predicted.norm();
            assert!(rel < 1e-4, "relative error {rel}");
        }
        let zero = first_variation(&Connection::Zero, &chart, c.as_ref(), c.as_ref(), res).unwrap();
        assert_eq!(zero, Mat4::zeros());
    }

    #[test]
    fn tangential_variation_vanishes() {
        // h = φ(t) γ̇(t) with φ(0) = φ(1) = 0 only reparameterizes the curve
        #[derive(Debug)]
        struct Tangential(SharedCurve);
        impl Curve for Tangential {
            fn point(&self, t: f64) -> Vec4 {
                self.0.velocity(t, false) * (t * (1.0 - t))
            }
            fn velocity(&self, _t: f64, _l: bool) -> Vec4 {
                unreachable!()
            }
        }
        let c = curves()[0].clone();
        let dv = first_variation(
            &instanton(),
            &MetricChart::flat(),
            c.as_ref(),
            &Tangential(c.clone()),
            Resolution::default(),
        )
        .unwrap();
        assert!(dv.norm() < 1e-12);
    }

    #[test]
    fn hermite_curve_validation_and_interpolation() {
        assert!(HermiteCurve::new(&[(0.0, [0.0; 4])]).is_err());
        assert!(HermiteCurve::new(&[(0.0, [0.0; 4]), (0.5, [1.0; 4])]).is_err());
        let c = HermiteCurve::new(&[
            (0.0, [0.0; 4]),
            (0.4, [1.0, 0.0, 0.0, 0.0]),
            (1.0, [0.0; 4]),
        ])
        .unwrap();
        assert_eq!(c.point(0.0), Vec4::zeros());
        assert!((c.point(0.4) - Vec4::new(1.0, 0.0, 0.0, 0.0)).norm() < 1e-15);
        assert!(is_loop(&c));
        let h = 1e-6;
        for t in [0.1, 0.55, 0.75] {
            let fd = (c.point(t + h) - c.point(t - h)) / (2.0 * h);
            assert!((fd - node_velocity(&c, t)).norm() < 1e-8);
        }
        assert!((c.velocity(0.4, true) - c.velocity(0.4, false)).norm() < 1e-14);
    }
}
