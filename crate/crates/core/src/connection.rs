//! Gauge connections with structure group `S³_L ⊂ SO(4)`, their curvature,
//! covariant derivatives, Yang–Mills action and topological charge.
//!
//! The trace product on 𝔤 = Lie(S³_L) is `⟨X, Y⟩ = −½ tr(XY)` on the real
//! 4×4 representation, which equals `−tr` on the complex two-dimensional
//! representation of su(2).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{project_right, quat_left, Omega, So4Element};
use crate::coeff::Array4;
use crate::error::{Error, Result};
use crate::field::{ScalarField, ScalarJet};
use crate::geometry::{MetricChart, TwoForm};
use crate::jet::{compose_scalar, MatJet};
use crate::linalg::commutator;
use crate::quadrature::{pairwise_sum, simpson_weights};
use crate::{Mat4, Vec4};

/// `⟨X, Y⟩ = −½ tr(XY)`.
pub fn gauge_inner(a: &Mat4, b: &Mat4) -> f64 {
    -0.5 * (a * b).trace()
}

/// Whether `m` lies in Lie(S³_L) up to `tol` (relative to its size).
pub fn in_algebra(m: &Mat4, tol: f64) -> bool {
    let scale = m.norm().max(1.0);
    let asym = (m + m.transpose()).norm();
    if asym > tol * scale {
        return false;
    }
    let x = So4Element::new((m - m.transpose()) * 0.5).expect("antisymmetrized");
    project_right(&x).norm() <= tol * scale
}

fn left_matrix(u: &[f64; 3]) -> Mat4 {
    quat_left(0.0, u[0], u[1], u[2])
}

fn qmul(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

fn unit_quaternion(k: usize) -> [f64; 4] {
    let mut e = [0.0; 4];
    e[k] = 1.0;
    e
}

fn conj(a: [f64; 4]) -> [f64; 4] {
    [a[0], -a[1], -a[2], -a[3]]
}

/// Which half of the curvature the instanton preset kills.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualitySign {
    /// `F₊ = 0`, charge −1.
    #[default]
    AntiSelfDual,
    /// `F₋ = 0`, charge +1.
    SelfDual,
}

/// A compactly supported bump `δA_μ = b(x) c_μ X` with
/// `b = exp(1 − 1/(1 − |x − center|²/radius²))` inside the ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: [f64; 4],
    pub radius: f64,
    /// Covector `c_μ`.
    pub direction: [f64; 4],
    /// Lie(S³_L) direction `X` as left coefficients.
    pub generator: [f64; 3],
}

impl Bump {
    fn profile(&self, x: &Vec4) -> ScalarJet {
        let mut out = ScalarJet {
            value: 0.0,
            grad: [0.0; 4],
            hess: [[0.0; 4]; 4],
            third: [[[0.0; 4]; 4]; 4],
        };
        let r2 = self.radius * self.radius;
        let y: [f64; 4] = std::array::from_fn(|i| x[i] - self.center[i]);
        let s = y.iter().map(|v| v * v).sum::<f64>() / r2;
        if s >= 1.0 {
            return out;
        }
        let u = 1.0 - s;
        let b = (1.0 - 1.0 / u).exp();
        let bs = -b / (u * u);
        let bss = b * (1.0 - 2.0 * u) / u.powi(4);
        out.value = b;
        for i in 0..4 {
            let si = 2.0 * y[i] / r2;
            out.grad[i] = bs * si;
            for j in 0..4 {
                let sj = 2.0 * y[j] / r2;
                let sij = if i == j { 2.0 / r2 } else { 0.0 };
                out.hess[i][j] = bss * si * sj + bs * sij;
            }
        }
        out
    }
}

/// One factor `exp(f(x) X)` of a gauge transformation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeFactor {
    pub generator: Omega,
    pub angle: ScalarField,
}

/// `ψ(x) = Π_k exp(f_k(x) X_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeField {
    pub factors: Vec<GaugeFactor>,
}

impl GaugeField {
    pub fn identity() -> Self {
        Self {
            factors: Vec::new(),
        }
    }

    /// Jet of `ψ` through derivative order `order`.
    pub fn jet(&self, x: &Vec4, order: usize) -> MatJet {
        let mut psi = MatJet::constant(Mat4::identity());
        for f in &self.factors {
            let x_mat = *So4Element::from_omega(&f.generator).matrix();
            let n = (x_mat.transpose() * x_mat).trace().sqrt() / 2.0;
            if n == 0.0 {
                continue;
            }
            let mut th = f.angle.jet(x);
            th.value *= n;
            for i in 0..4 {
                th.grad[i] *= n;
                for j in 0..4 {
                    th.hess[i][j] *= n;
                    for k in 0..4 {
                        th.third[i][j][k] *= n;
                    }
                }
            }
            let (s, c) = th.value.sin_cos();
            let cos_j = compose_scalar([c, -s, -c, s], &th);
            let sin_j = compose_scalar([s, c, -s, -c], &th);
            let factor = MatJet::from_scalar(&cos_j, &Mat4::identity())
                .add(&MatJet::from_scalar(&sin_j, &(x_mat / n)));
            psi = psi.mul(&factor, order);
        }
        psi
    }

    pub fn eval(&self, x: &Vec4) -> Mat4 {
        self.jet(x, 0).v
    }

    fn check_group(&self) -> Result<()> {
        for f in &self.factors {
            if f.generator.minus_norm() > 0.0 {
                return Err(Error::Contract(format!(
                    "gauge generator {:?} leaves Lie(S³_L); ψ would leave the structure group",
                    f.generator
                )));
            }
        }
        let psi = self.eval(&Vec4::zeros());
        let defect = crate::linalg::orthogonality_defect(&psi);
        if defect > 1e-8 {
            return Err(Error::Contract(format!(
                "gauge field is not orthogonal (defect {defect:.3e})"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum Connection {
    Zero,
    /// `A = Im(q̄ dq)/(1 + |q|²)` with `q = (x − center)/ρ`, read through
    /// left multiplication (or `Im(q dq̄)` for the self-dual sign).
    QuaternionicInstanton {
        rho: f64,
        center: [f64; 4],
        #[serde(default)]
        duality_sign: DualitySign,
    },
    Perturbed {
        base: Box<Connection>,
        bump: Bump,
        amplitude: f64,
    },
    GaugeTransformed {
        base: Box<Connection>,
        gauge: GaugeField,
    },
}

/// `A_μ`, `∂_λA_μ` (as `da[λ][μ]`) and `∂_κ∂_λA_μ` (as `dda[κ][λ][μ]`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectionJet {
    pub a: [Mat4; 4],
    pub da: [[Mat4; 4]; 4],
    pub dda: [[[Mat4; 4]; 4]; 4],
}

impl ConnectionJet {
    fn zero() -> Self {
        let z = Mat4::zeros();
        Self {
            a: [z; 4],
            da: [[z; 4]; 4],
            dda: [[[z; 4]; 4]; 4],
        }
    }

    fn component(&self, mu: usize) -> MatJet {
        let mut j = MatJet::constant(self.a[mu]);
        for l in 0..4 {
            j.d[l] = self.da[l][mu];
            for k in 0..4 {
                j.dd[k][l] = self.dda[k][l][mu];
            }
        }
        j
    }

    fn is_finite(&self) -> bool {
        let ok = |m: &Mat4| m.iter().all(|v| v.is_finite());
        self.a.iter().all(ok)
            && self.da.iter().flatten().all(ok)
            && self.dda.iter().flatten().flatten().all(ok)
    }
}

impl Connection {
    pub fn instanton(rho: f64, center: [f64; 4]) -> Self {
        Connection::QuaternionicInstanton {
            rho,
            center,
            duality_sign: DualitySign::AntiSelfDual,
        }
    }

    pub fn perturbed(base: Connection, bump: Bump, amplitude: f64) -> Self {
        Connection::Perturbed {
            base: Box::new(base),
            bump,
            amplitude,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Connection::Zero => "zero".into(),
            Connection::QuaternionicInstanton { duality_sign, .. } => match duality_sign {
                DualitySign::AntiSelfDual => "instanton".into(),
                DualitySign::SelfDual => "anti_instanton".into(),
            },
            Connection::Perturbed { base, .. } => format!("perturbed_{}", base.name()),
            Connection::GaugeTransformed { base, .. } => format!("gauge_{}", base.name()),
        }
    }

    /// Parameter checks shared by every evaluation.
    pub fn validate(&self) -> Result<()> {
        match self {
            Connection::Zero => Ok(()),
            Connection::QuaternionicInstanton { rho, center, .. } => {
                if !(rho.is_finite() && *rho > 0.0) || !center.iter().all(|c| c.is_finite()) {
                    return Err(Error::Domain(format!("bad instanton parameters ρ = {rho}")));
                }
                Ok(())
            }
            Connection::Perturbed {
                base,
                bump,
                amplitude,
            } => {
                if !(bump.radius.is_finite() && bump.radius > 0.0) || !amplitude.is_finite() {
                    return Err(Error::Domain("bad bump parameters".into()));
                }
                base.validate()
            }
            Connection::GaugeTransformed { base, gauge } => {
                gauge.check_group()?;
                base.validate()
            }
        }
    }

    /// `A_μ(x)`.
    pub fn potential(&self, x: &Vec4) -> Result<[Mat4; 4]> {
        let j = self.jet_to(x, 0)?;
        Ok(j.a)
    }

    /// Analytic `A`, `∂A`, `∂²A` at `x`.
    pub fn jet(&self, x: &Vec4) -> Result<ConnectionJet> {
        self.jet_to(x, 2)
    }

    fn jet_to(&self, x: &Vec4, order: usize) -> Result<ConnectionJet> {
        if !x.iter().all(|c| c.is_finite()) {
            return Err(Error::Domain(format!("non-finite point {:?}", x.as_slice())));
        }
        let j = self.raw_jet(x, order);
        if !j.is_finite() {
            return Err(Error::Numeric(format!(
                "connection {} not finite at {:?}",
                self.name(),
                x.as_slice()
            )));
        }
        Ok(j)
    }

    fn raw_jet(&self, x: &Vec4, order: usize) -> ConnectionJet {
        match self {
            Connection::Zero => ConnectionJet::zero(),
            Connection::QuaternionicInstanton {
                rho,
                center,
                duality_sign,
            } => instanton_jet(*rho, center, *duality_sign, x),
            Connection::Perturbed {
                base,
                bump,
                amplitude,
            } => {
                let mut j = base.raw_jet(x, order);
                let b = bump.profile(x);
                let gen = left_matrix(&bump.generator) * *amplitude;
                for mu in 0..4 {
                    let c = bump.direction[mu];
                    if c == 0.0 {
                        continue;
                    }
                    j.a[mu] += gen * (c * b.value);
                    for l in 0..4 {
                        j.da[l][mu] += gen * (c * b.grad[l]);
                        for k in 0..4 {
                            j.dda[k][l][mu] += gen * (c * b.hess[k][l]);
                        }
                    }
                }
                j
            }
            Connection::GaugeTransformed { base, gauge } => {
                let base = base.raw_jet(x, order);
                let psi = gauge.jet(x, order + 1);
                let psi_t = psi.transpose();
                let mut out = ConnectionJet::zero();
                for mu in 0..4 {
                    let a = base.component(mu);
                    let j = psi_t
                        .mul(&a, order)
                        .mul(&psi, order)
                        .add(&psi_t.mul(&psi.partial(mu), order));
                    out.a[mu] = j.v;
                    for l in 0..4 {
                        out.da[l][mu] = j.d[l];
                        for k in 0..4 {
                            out.dda[k][l][mu] = j.dd[k][l];
                        }
                    }
                }
                out
            }
        }
    }

    /// `F_{μν} = ∂_μA_ν − ∂_νA_μ + [A_μ, A_ν]`.
    pub fn field_strength(&self, x: &Vec4) -> Result<TwoForm<Mat4>> {
        Ok(field_strength_of(&self.jet(x)?))
    }
}

fn instanton_jet(rho: f64, center: &[f64; 4], sign: DualitySign, x: &Vec4) -> ConnectionJet {
    // A_μ = N_μ(q) s(q) / ρ with N_μ = Σ_ν q_ν M_{νμ} linear in q.
    let m: [[Mat4; 4]; 4] = std::array::from_fn(|nu| {
        std::array::from_fn(|mu| {
            let (en, em) = (unit_quaternion(nu), unit_quaternion(mu));
            let p = match sign {
                DualitySign::AntiSelfDual => qmul(conj(en), em),
                DualitySign::SelfDual => qmul(en, conj(em)),
            };
            quat_left(0.0, p[1], p[2], p[3])
        })
    });
    let q: [f64; 4] = std::array::from_fn(|i| (x[i] - center[i]) / rho);
    let d = 1.0 + q.iter().map(|v| v * v).sum::<f64>();
    let s = 1.0 / d;
    let ds: [f64; 4] = std::array::from_fn(|l| -2.0 * q[l] / (rho * d * d));
    let dds: [[f64; 4]; 4] = std::array::from_fn(|k| {
        std::array::from_fn(|l| {
            let diag = if k == l { -2.0 / (rho * rho * d * d) } else { 0.0 };
            diag + 8.0 * q[k] * q[l] / (rho * rho * d * d * d)
        })
    });
    let n: [Mat4; 4] = std::array::from_fn(|mu| (0..4).map(|nu| m[nu][mu] * q[nu]).sum());
    let mut j = ConnectionJet::zero();
    for mu in 0..4 {
        j.a[mu] = n[mu] * (s / rho);
        for l in 0..4 {
            j.da[l][mu] = (m[l][mu] * (s / rho) + n[mu] * ds[l]) / rho;
            for k in 0..4 {
                j.dda[k][l][mu] = (m[l][mu] * ds[k] / rho
                    + m[k][mu] * ds[l] / rho
                    + n[mu] * dds[k][l])
                    / rho;
            }
        }
    }
    j
}

pub fn field_strength_of(j: &ConnectionJet) -> TwoForm<Mat4> {
    TwoForm(std::array::from_fn(|mu| {
        std::array::from_fn(|nu| j.da[mu][nu] - j.da[nu][mu] + commutator(&j.a[mu], &j.a[nu]))
    }))
}

/// `∂_λF_{αβ}` as `[λ][α][β]`.
fn field_strength_derivative(j: &ConnectionJet) -> [Array4<Mat4>; 4] {
    std::array::from_fn(|l| {
        std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                j.dda[l][a][b] - j.dda[l][b][a]
                    + commutator(&j.da[l][a], &j.a[b])
                    + commutator(&j.a[a], &j.da[l][b])
            })
        })
    })
}

/// Curvature at a point with its self-dual / anti-self-dual split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureSample {
    pub x: Vec4,
    pub f: TwoForm<Mat4>,
    pub plus: TwoForm<Mat4>,
    pub minus: TwoForm<Mat4>,
}

impl CurvatureSample {
    /// Pointwise norms `(‖F‖², ‖F₊‖², ‖F₋‖²)` with `‖ω‖² = ½ g^{μα}g^{νβ}⟨ω_{μν}, ω_{αβ}⟩`.
    pub fn norms_sq(&self, chart: &MetricChart) -> Result<(f64, f64, f64)> {
        let ginv = chart.inverse_metric(&self.x)?;
        let n = |w: &TwoForm<Mat4>| form_norm_sq(&ginv, w);
        Ok((n(&self.f), n(&self.plus), n(&self.minus)))
    }
}

fn form_norm_sq(ginv: &Mat4, w: &TwoForm<Mat4>) -> f64 {
    let mut raised: Array4<Mat4> = crate::coeff::zero_array();
    for a in 0..4 {
        for b in 0..4 {
            let mut acc = Mat4::zeros();
            for m in 0..4 {
                for n in 0..4 {
                    let c = ginv[(a, m)] * ginv[(b, n)];
                    if c != 0.0 {
                        acc += w.0[m][n] * c;
                    }
                }
            }
            raised[a][b] = acc;
        }
    }
    let mut s = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            s += gauge_inner(&w.0[a][b], &raised[a][b]);
        }
    }
    0.5 * s
}

pub fn curvature(conn: &Connection, chart: &MetricChart, x: &Vec4) -> Result<CurvatureSample> {
    chart.check_domain(x)?;
    let f = conn.field_strength(x)?;
    let (plus, minus) = chart.split(x, &f)?;
    Ok(CurvatureSample {
        x: *x,
        f,
        plus,
        minus,
    })
}

/// `F` and `∇_λF_{αβ} = ∂_λF_{αβ} + [A_λ, F_{αβ}] − F_{ακ}Γ^κ_{λβ} − F_{κβ}Γ^κ_{λα}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovariantCurvature {
    pub a: [Mat4; 4],
    pub f: TwoForm<Mat4>,
    /// `[λ][α][β]`
    pub nabla_f: [Array4<Mat4>; 4],
}

impl CovariantCurvature {
    /// `(∇_u F)(v, w)`.
    pub fn nabla_eval(&self, u: &Vec4, v: &Vec4, w: &Vec4) -> Mat4 {
        let mut acc = Mat4::zeros();
        for l in 0..4 {
            if u[l] == 0.0 {
                continue;
            }
            acc += TwoForm(self.nabla_f[l]).eval(v, w) * u[l];
        }
        acc
    }
}

pub fn covariant_curvature(
    conn: &Connection,
    chart: &MetricChart,
    x: &Vec4,
) -> Result<CovariantCurvature> {
    chart.check_domain(x)?;
    let j = conn.jet(x)?;
    let f = field_strength_of(&j);
    let df = field_strength_derivative(&j);
    let gamma = chart.christoffel(x)?;
    let nabla_f = std::array::from_fn(|l| {
        std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                let mut v = df[l][a][b] + commutator(&j.a[l], &f.0[a][b]);
                for k in 0..4 {
                    let (g1, g2) = (gamma.0[k][l][b], gamma.0[k][l][a]);
                    if g1 != 0.0 {
                        v -= f.0[a][k] * g1;
                    }
                    if g2 != 0.0 {
                        v -= f.0[k][b] * g2;
                    }
                }
                v
            })
        })
    });
    Ok(CovariantCurvature { a: j.a, f, nabla_f })
}

/// `(D_A*F)_ν = −g^{μλ} ∇_λF_{μν}`.
pub fn codifferential(conn: &Connection, chart: &MetricChart, x: &Vec4) -> Result<[Mat4; 4]> {
    let c = covariant_curvature(conn, chart, x)?;
    let ginv = chart.inverse_metric(x)?;
    Ok(codifferential_of(&c, &ginv))
}

pub fn codifferential_of(c: &CovariantCurvature, ginv: &Mat4) -> [Mat4; 4] {
    std::array::from_fn(|nu| {
        let mut acc = Mat4::zeros();
        for mu in 0..4 {
            for l in 0..4 {
                let w = ginv[(mu, l)];
                if w != 0.0 {
                    acc -= c.nabla_f[l][mu][nu] * w;
                }
            }
        }
        acc
    })
}

/// Largest cyclic sum `∇_λF_{μν} + ∇_μF_{νλ} + ∇_νF_{λμ}`.
pub fn bianchi_defect(c: &CovariantCurvature) -> f64 {
    let mut worst: f64 = 0.0;
    for l in 0..4 {
        for m in 0..4 {
            for n in 0..4 {
                let s = c.nabla_f[l][m][n] + c.nabla_f[m][n][l] + c.nabla_f[n][l][m];
                worst = worst.max(s.norm());
            }
        }
    }
    worst
}

/// Integration domains in chart coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// Ball `|x − center| ≤ scale · radius_ratio` in hyperspherical
    /// coordinates with radial map `r = scale · tan u`.
    Ball {
        center: [f64; 4],
        scale: f64,
        radius_ratio: f64,
        radial_nodes: usize,
        angular_nodes: usize,
    },
    /// Product box with Simpson's rule in each axis.
    Box {
        lo: [f64; 4],
        hi: [f64; 4],
        nodes: usize,
    },
}

impl Region {
    pub fn ball(center: [f64; 4], scale: f64, radius_ratio: f64) -> Self {
        Region::Ball {
            center,
            scale,
            radius_ratio,
            radial_nodes: 96,
            angular_nodes: 16,
        }
    }

    fn validate(&self) -> Result<()> {
        let even = |n: usize| n >= 2 && n % 2 == 0;
        match self {
            Region::Ball {
                scale,
                radius_ratio,
                radial_nodes,
                angular_nodes,
                ..
            } => {
                if !(*scale > 0.0 && *radius_ratio > 0.0) || !even(*radial_nodes) || !even(*angular_nodes) {
                    return Err(Error::Domain(
                        "ball region needs positive scale/ratio and even node counts".into(),
                    ));
                }
            }
            Region::Box { lo, hi, nodes } => {
                if !even(*nodes) || (0..4).any(|i| hi[i] <= lo[i]) {
                    return Err(Error::Domain(
                        "box region needs hi > lo and an even node count".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// A quadrature value with an estimate of the truncated tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralReport {
    pub value: f64,
    /// Bound on the omitted exterior under `|density| = O(r⁻⁸)` decay, or
    /// 0 for a box (no tail is claimed).
    pub tail_bound: f64,
    pub evaluations: usize,
}

/// `(action density, charge density)` per unit coordinate volume.
fn densities(conn: &Connection, chart: &MetricChart, x: &Vec4) -> Result<(f64, f64)> {
    let s = curvature(conn, chart, x)?;
    let (f2, p2, m2) = s.norms_sq(chart)?;
    let vol = chart.volume_density(x)?;
    let eight_pi2 = 8.0 * std::f64::consts::PI.powi(2);
    let out = (0.5 * f2 * vol, (p2 - m2) * vol / eight_pi2);
    if !(out.0.is_finite() && out.1.is_finite()) {
        return Err(Error::Numeric(format!(
            "non-finite density at {:?}",
            x.as_slice()
        )));
    }
    Ok(out)
}

fn integrate(
    conn: &Connection,
    chart: &MetricChart,
    region: &Region,
) -> Result<(IntegralReport, IntegralReport)> {
    conn.validate()?;
    region.validate()?;
    match region {
        Region::Ball {
            center,
            scale,
            radius_ratio,
            radial_nodes,
            angular_nodes,
        } => {
            use std::f64::consts::PI;
            let umax = radius_ratio.atan();
            let wu = simpson_weights(*radial_nodes, umax / *radial_nodes as f64);
            let na = *angular_nodes;
            let wchi = simpson_weights(na, PI / na as f64);
            let wphi = 2.0 * PI / na as f64;
            let shells: Vec<Result<(f64, f64)>> = (0..=*radial_nodes)
                .into_par_iter()
                .map(|iu| {
                    let u = umax * iu as f64 / *radial_nodes as f64;
                    let r = scale * u.tan();
                    let jac = r.powi(3) * scale / u.cos().powi(2);
                    if jac == 0.0 {
                        return Ok((0.0, 0.0));
                    }
                    let mut acts = Vec::with_capacity((na + 1) * (na + 1) * na);
                    let mut chgs = Vec::with_capacity(acts.capacity());
                    for ic in 0..=na {
                        let chi = PI * ic as f64 / na as f64;
                        for it in 0..=na {
                            let th = PI * it as f64 / na as f64;
                            let w = wchi[ic] * wchi[it] * wphi * chi.sin().powi(2) * th.sin();
                            if w == 0.0 {
                                continue;
                            }
                            for ip in 0..na {
                                let ph = 2.0 * PI * ip as f64 / na as f64;
                                let dir = [
                                    chi.cos(),
                                    chi.sin() * th.cos(),
                                    chi.sin() * th.sin() * ph.cos(),
                                    chi.sin() * th.sin() * ph.sin(),
                                ];
                                let x = Vec4::from_fn(|i, _| center[i] + r * dir[i]);
                                let (a, c) = densities(conn, chart, &x)?;
                                acts.push(a * w);
                                chgs.push(c * w);
                            }
                        }
                    }
                    let w = wu[iu] * jac;
                    Ok((pairwise_sum(&acts) * w, pairwise_sum(&chgs) * w))
                })
                .collect();
            let shells: Vec<(f64, f64)> = shells.into_iter().collect::<Result<_>>()?;
            let act: Vec<f64> = shells.iter().map(|s| s.0).collect();
            let chg: Vec<f64> = shells.iter().map(|s| s.1).collect();
            // Outer shell mean density, extrapolated with r⁻⁸ decay.
            let rmax = scale * radius_ratio;
            let mut outer = 0.0;
            for ic in 0..=na {
                let chi = PI * ic as f64 / na as f64;
                for it in 0..=na {
                    let th = PI * it as f64 / na as f64;
                    let w = wchi[ic] * wchi[it] * wphi * chi.sin().powi(2) * th.sin();
                    for ip in 0..na {
                        let ph = 2.0 * PI * ip as f64 / na as f64;
                        let dir = [
                            chi.cos(),
                            chi.sin() * th.cos(),
                            chi.sin() * th.sin() * ph.cos(),
                            chi.sin() * th.sin() * ph.sin(),
                        ];
                        let x = Vec4::from_fn(|i, _| center[i] + rmax * dir[i]);
                        outer += w * densities(conn, chart, &x)?.0;
                    }
                }
            }
            // ∫_R^∞ ε(R)(R/r)⁸ r³ dr dΩ = ε̄(R) R⁴ / 4 with ε̄ integrated over S³
            let tail = outer * rmax.powi(4) / 4.0;
            let tail_charge = tail / (4.0 * PI * PI);
            let evals = (*radial_nodes + 1) * (na + 1) * (na + 1) * na;
            Ok((
                IntegralReport {
                    value: pairwise_sum(&act),
                    tail_bound: tail,
                    evaluations: evals,
                },
                IntegralReport {
                    value: pairwise_sum(&chg),
                    tail_bound: tail_charge,
                    evaluations: evals,
                },
            ))
        }
        Region::Box { lo, hi, nodes } => {
            let n = *nodes;
            let w: Vec<Vec<f64>> = (0..4)
                .map(|i| simpson_weights(n, (hi[i] - lo[i]) / n as f64))
                .collect();
            let at = |i: usize, k: usize| lo[i] + (hi[i] - lo[i]) * k as f64 / n as f64;
            let slabs: Vec<Result<(f64, f64)>> = (0..=n)
                .into_par_iter()
                .map(|i0| {
                    let mut acts = Vec::new();
                    let mut chgs = Vec::new();
                    for i1 in 0..=n {
                        for i2 in 0..=n {
                            for i3 in 0..=n {
                                let x = Vec4::new(at(0, i0), at(1, i1), at(2, i2), at(3, i3));
                                let wt = w[1][i1] * w[2][i2] * w[3][i3];
                                let (a, c) = densities(conn, chart, &x)?;
                                acts.push(a * wt);
                                chgs.push(c * wt);
                            }
                        }
                    }
                    Ok((pairwise_sum(&acts) * w[0][i0], pairwise_sum(&chgs) * w[0][i0]))
                })
                .collect();
            let slabs: Vec<(f64, f64)> = slabs.into_iter().collect::<Result<_>>()?;
            let evals = (n + 1).pow(4);
            Ok((
                IntegralReport {
                    value: pairwise_sum(&slabs.iter().map(|s| s.0).collect::<Vec<_>>()),
                    tail_bound: 0.0,
                    evaluations: evals,
                },
                IntegralReport {
                    value: pairwise_sum(&slabs.iter().map(|s| s.1).collect::<Vec<_>>()),
                    tail_bound: 0.0,
                    evaluations: evals,
                },
            ))
        }
    }
}

/// `S_YM = ½ ∫ ‖F‖² Vol`.
pub fn ym_action(conn: &Connection, chart: &MetricChart, region: &Region) -> Result<IntegralReport> {
    Ok(integrate(conn, chart, region)?.0)
}

/// `k = (1/8π²) ∫ (‖F₊‖² − ‖F₋‖²) Vol`.
pub fn topological_charge(
    conn: &Connection,
    chart: &MetricChart,
    region: &Region,
) -> Result<IntegralReport> {
    Ok(integrate(conn, chart, region)?.1)
}

/// Both integrals from one pass over the region.
pub fn action_and_charge(
    conn: &Connection,
    chart: &MetricChart,
    region: &Region,
) -> Result<(IntegralReport, IntegralReport)> {
    integrate(conn, chart, region)
}

/// `A' = ψ⁻¹Aψ + ψ⁻¹dψ`.
pub fn gauge_transform(conn: &Connection, gauge: &GaugeField) -> Result<Connection> {
    gauge.check_group()?;
    Ok(Connection::GaugeTransformed {
        base: Box::new(conn.clone()),
        gauge: gauge.clone(),
    })
}

/// Fourth-order central-difference jet of `A`, used to cross-check the
/// analytic derivatives.
pub fn numeric_jet(conn: &Connection, x: &Vec4, h: f64) -> Result<ConnectionJet> {
    let pot = |y: &Vec4| conn.potential(y);
    let shift = |i: usize, s: f64| {
        let mut y = *x;
        y[i] += s * h;
        y
    };
    let stencil = [(-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)];
    let mut j = ConnectionJet::zero();
    j.a = pot(x)?;
    for l in 0..4 {
        for (s, w) in stencil {
            let p = pot(&shift(l, s))?;
            for mu in 0..4 {
                j.da[l][mu] += p[mu] * (w / h);
            }
        }
    }
    let second = [(-2.0, -1.0 / 12.0), (-1.0, 16.0 / 12.0), (0.0, -30.0 / 12.0), (1.0, 16.0 / 12.0), (2.0, -1.0 / 12.0)];
    for k in 0..4 {
        for l in 0..4 {
            if k == l {
                for (s, w) in second {
                    let p = pot(&shift(k, s))?;
                    for mu in 0..4 {
                        j.dda[k][k][mu] += p[mu] * (w / (h * h));
                    }
                }
            } else {
                for (s1, w1) in stencil {
                    for (s2, w2) in stencil {
                        let mut y = shift(k, s1);
                        y[l] += s2 * h;
                        let p = pot(&y)?;
                        for mu in 0..4 {
                            j.dda[k][l][mu] += p[mu] * (w1 * w2 / (h * h));
                        }
                    }
                }
            }
        }
    }
    Ok(j)
}
