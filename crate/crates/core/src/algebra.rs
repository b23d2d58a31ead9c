//! so(4) = Lie(S³_L) ⊕ Lie(S³_R) and rotation curves in SO(4).
//!
//! `S³_L` acts on ℝ⁴ ≅ ℍ by left multiplication with unit quaternions and
//! `S³_R` by right multiplication. The basis matrices `𝐞_i` of Lie(S³_L)
//! and `𝐟_i` of Lie(S³_R) are the unit `(b, c, d)` coefficients of the
//! matrices
//!
//! ```text
//!  Lie(S³_L):  0 -b -c -d        Lie(S³_R):  0 -b -c -d
//!              b  0 -d  c                    b  0  d -c
//!              c  d  0 -b                    c -d  0  b
//!              d -c  b  0                    d  c -b  0
//! ```
//!
//! so the coefficients `ω^±_i` of an element read off this layout directly.

use serde::{Deserialize, Serialize};

use crate::coeff::{Array4, Coeff};
use crate::error::{Error, Result};
use crate::geometry::Bivector;
use crate::Mat4;

/// Matrix of left multiplication by the quaternion `a + b i + c j + d k`.
pub(crate) fn quat_left(a: f64, b: f64, c: f64, d: f64) -> Mat4 {
    Mat4::new(a, -b, -c, -d, b, a, -d, c, c, d, a, -b, d, -c, b, a)
}

/// Matrix of right multiplication by the quaternion `a + b i + c j + d k`.
pub(crate) fn quat_right(a: f64, b: f64, c: f64, d: f64) -> Mat4 {
    Mat4::new(a, -b, -c, -d, b, a, d, -c, c, -d, a, b, d, c, -b, a)
}

pub fn left_basis() -> [Mat4; 3] {
    [
        quat_left(0.0, 1.0, 0.0, 0.0),
        quat_left(0.0, 0.0, 1.0, 0.0),
        quat_left(0.0, 0.0, 0.0, 1.0),
    ]
}

pub fn right_basis() -> [Mat4; 3] {
    [
        quat_right(0.0, 1.0, 0.0, 0.0),
        quat_right(0.0, 0.0, 1.0, 0.0),
        quat_right(0.0, 0.0, 0.0, 1.0),
    ]
}

/// Coefficients `(ω^+_1, ω^+_2, ω^+_3)` and `(ω^-_1, ω^-_2, ω^-_3)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Omega {
    pub plus: [f64; 3],
    pub minus: [f64; 3],
}

impl Omega {
    pub fn left(plus: [f64; 3]) -> Self {
        Self {
            plus,
            minus: [0.0; 3],
        }
    }

    pub fn right(minus: [f64; 3]) -> Self {
        Self {
            plus: [0.0; 3],
            minus,
        }
    }

    pub fn plus_norm(&self) -> f64 {
        self.plus.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn minus_norm(&self) -> f64 {
        self.minus.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn axpy(&self, s: f64, other: &Omega) -> Omega {
        Omega {
            plus: std::array::from_fn(|i| self.plus[i] + s * other.plus[i]),
            minus: std::array::from_fn(|i| self.minus[i] + s * other.minus[i]),
        }
    }
}

/// Left/right coefficients of an antisymmetric array over any coefficient ring.
pub fn split_coefficients<C: Coeff>(x: &Array4<C>) -> ([C; 3], [C; 3]) {
    let h = 0.5;
    let plus = [
        (x[1][0] + x[3][2]) * h,
        (x[2][0] + x[1][3]) * h,
        (x[3][0] + x[2][1]) * h,
    ];
    let minus = [
        (x[1][0] + x[2][3]) * h,
        (x[2][0] + x[3][1]) * h,
        (x[3][0] + x[1][2]) * h,
    ];
    (plus, minus)
}

/// Rebuilds the antisymmetric array `Σ plus_i 𝐞_i + Σ minus_i 𝐟_i`.
pub fn assemble<C: Coeff>(plus: &[C; 3], minus: &[C; 3]) -> Array4<C> {
    let mut out = crate::coeff::zero_array::<C>();
    let (lb, rb) = (left_basis(), right_basis());
    for i in 0..3 {
        for r in 0..4 {
            for c in 0..4 {
                if lb[i][(r, c)] != 0.0 {
                    out[r][c] = out[r][c] + plus[i] * lb[i][(r, c)];
                }
                if rb[i][(r, c)] != 0.0 {
                    out[r][c] = out[r][c] + minus[i] * rb[i][(r, c)];
                }
            }
        }
    }
    out
}

/// Orthogonal projections of an antisymmetric array onto the two ideals.
pub fn project_generic<C: Coeff>(x: &Array4<C>) -> (Array4<C>, Array4<C>) {
    let (p, m) = split_coefficients(x);
    let z = [C::zero(); 3];
    (assemble(&p, &z), assemble(&z, &m))
}

/// An element of so(4).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct So4Element(Mat4);

const ANTISYMMETRY_TOL: f64 = 1e-12;

impl So4Element {
    pub fn new(m: Mat4) -> Result<Self> {
        let defect = (m + m.transpose()).norm();
        if defect > ANTISYMMETRY_TOL * m.norm().max(1.0) {
            return Err(Error::Contract(format!(
                "matrix is not antisymmetric (defect {defect:.3e})"
            )));
        }
        Ok(Self(m))
    }

    pub fn zero() -> Self {
        Self(Mat4::zeros())
    }

    pub fn from_omega(w: &Omega) -> Self {
        let a = assemble(&w.plus, &w.minus);
        Self(Mat4::from_fn(|i, j| a[i][j]))
    }

    pub fn left(b: f64, c: f64, d: f64) -> Self {
        Self(quat_left(0.0, b, c, d))
    }

    pub fn right(b: f64, c: f64, d: f64) -> Self {
        Self(quat_right(0.0, b, c, d))
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn omega(&self) -> Omega {
        omega_coefficients(self)
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0 * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0 + other.0)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self(self.0 * other.0 - other.0 * self.0)
    }

    /// Trace product `⟨X, Y⟩ = −tr(XY)`.
    pub fn inner(&self, other: &Self) -> f64 {
        -(self.0 * other.0).trace()
    }

    pub fn is_left(&self, tol: f64) -> bool {
        project_right(self).norm() <= tol
    }

    pub fn is_right(&self, tol: f64) -> bool {
        project_left(self).norm() <= tol
    }
}

fn to_array(m: &Mat4) -> Array4<f64> {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

pub fn project_left(x: &So4Element) -> So4Element {
    let (l, _) = project_generic(&to_array(&x.0));
    So4Element(Mat4::from_fn(|i, j| l[i][j]))
}

pub fn project_right(x: &So4Element) -> So4Element {
    let (_, r) = project_generic(&to_array(&x.0));
    So4Element(Mat4::from_fn(|i, j| r[i][j]))
}

/// Checked projection of a raw matrix, for callers holding unvalidated data.
pub fn project_matrix(m: &Mat4) -> Result<(So4Element, So4Element)> {
    let x = So4Element::new(*m)?;
    Ok((project_left(&x), project_right(&x)))
}

pub fn omega_coefficients(x: &So4Element) -> Omega {
    let (plus, minus) = split_coefficients(&to_array(&x.0));
    Omega { plus, minus }
}

/// so(4) → Λ²(ℝ⁴) in the frame basis: Lie(S³_L) ↦ Λ²₊ with
/// `b𝐞₁ + c𝐞₂ + d𝐞₃ ↦ b v₁⁺ + c v₂⁺ + d v₃⁺`, and Lie(S³_R) ↦ Λ²₋ likewise.
/// As matrices this is `X ↦ −X/√2`, so `−tr(XY) = 4 ⟨X̂, Ŷ⟩`.
pub fn bivector_of(x: &So4Element) -> Bivector {
    Bivector(x.0 * (-std::f64::consts::FRAC_1_SQRT_2))
}

pub fn so4_of(v: &Bivector) -> Result<So4Element> {
    So4Element::new(v.0 * (-std::f64::consts::SQRT_2))
}

fn unit_quaternion_exp(v: [f64; 3]) -> (f64, [f64; 3]) {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if n < 1e-300 {
        return (1.0, [0.0; 3]);
    }
    let s = n.sin() / n;
    (n.cos(), [v[0] * s, v[1] * s, v[2] * s])
}

/// Exponential map so(4) → SO(4), exact through the quaternion splitting
/// `exp(L_p + R_q) = L_{exp p} R_{exp q}`.
pub fn exp_so4(x: &So4Element) -> Mat4 {
    let w = x.omega();
    let (a, p) = unit_quaternion_exp(w.plus);
    let (b, q) = unit_quaternion_exp(w.minus);
    quat_left(a, p[0], p[1], p[2]) * quat_right(b, q[0], q[1], q[2])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
    General,
}

/// Body generator `L(t) = W⁻¹Ẇ` of a rotation curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorPath {
    Constant {
        generator: Omega,
    },
    /// `base + cos(2π f t)·cos_part + sin(2π f t)·sin_part`
    Trig {
        base: Omega,
        cos_part: Omega,
        sin_part: Omega,
        frequency: f64,
    },
    /// Piecewise-linear interpolation of nodes on a uniform grid of `[0, 1]`.
    Nodes { nodes: Vec<Omega> },
}

impl GeneratorPath {
    fn omega_at(&self, t: f64) -> Omega {
        match self {
            GeneratorPath::Constant { generator } => *generator,
            GeneratorPath::Trig {
                base,
                cos_part,
                sin_part,
                frequency,
            } => {
                let th = 2.0 * std::f64::consts::PI * frequency * t;
                base.axpy(th.cos(), cos_part).axpy(th.sin(), sin_part)
            }
            GeneratorPath::Nodes { nodes } => {
                let k = nodes.len() - 1;
                let s = (t * k as f64).clamp(0.0, k as f64);
                let i = (s.floor() as usize).min(k - 1);
                let f = s - i as f64;
                nodes[i].axpy(-f, &nodes[i]).axpy(f, &nodes[i + 1])
            }
        }
    }

    fn all_data(&self) -> Vec<Omega> {
        match self {
            GeneratorPath::Constant { generator } => vec![*generator],
            GeneratorPath::Trig {
                base,
                cos_part,
                sin_part,
                ..
            } => vec![*base, *cos_part, *sin_part],
            GeneratorPath::Nodes { nodes } => nodes.clone(),
        }
    }

    fn breaks(&self) -> Vec<f64> {
        let k = match self {
            GeneratorPath::Constant { .. } => 1,
            GeneratorPath::Trig { .. } => 64,
            GeneratorPath::Nodes { nodes } => nodes.len() - 1,
        };
        (0..=k).map(|i| i as f64 / k as f64).collect()
    }
}

/// Steps per unit time of the Magnus integrator building `W(t)`.
const MAGNUS_STEPS_PER_UNIT: f64 = 1024.0;

/// A curve `W : [0, 1] → SO(4)` with `W(0) = I`, given by its body generator.
///
/// `W` is stored at the generator breakpoints and evaluated elsewhere with a
/// fourth-order Magnus step that stays exactly in the group (and in `S³_L`
/// or `S³_R` for one-sided curves).
#[derive(Debug, Clone, PartialEq)]
pub struct RotationCurve {
    side: Side,
    path: GeneratorPath,
    breaks: Vec<f64>,
    nodes: Vec<Mat4>,
}

impl RotationCurve {
    pub fn new(side: Side, path: GeneratorPath) -> Result<Self> {
        if let GeneratorPath::Nodes { nodes } = &path {
            if nodes.len() < 2 {
                return Err(Error::Contract(
                    "node generator path needs at least two nodes".into(),
                ));
            }
        }
        for w in path.all_data() {
            let ok = match side {
                Side::Left => w.minus_norm() <= 1e-12,
                Side::Right => w.plus_norm() <= 1e-12,
                Side::General => true,
            };
            if !ok {
                return Err(Error::Contract(format!(
                    "generator {w:?} does not lie in the {side:?} subalgebra"
                )));
            }
        }
        let breaks = path.breaks();
        let mut curve = Self {
            side,
            path,
            breaks,
            nodes: vec![Mat4::identity()],
        };
        for k in 1..curve.breaks.len() {
            let (a, b) = (curve.breaks[k - 1], curve.breaks[k]);
            let next = curve.advance(curve.nodes[k - 1], a, b);
            curve.nodes.push(next);
        }
        Ok(curve)
    }

    pub fn constant(side: Side, generator: Omega) -> Result<Self> {
        Self::new(side, GeneratorPath::Constant { generator })
    }

    pub fn identity() -> Self {
        Self::constant(Side::General, Omega::default()).expect("zero generator is valid")
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn path(&self) -> &GeneratorPath {
        &self.path
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    /// Interior times where the generator is continuous but not smooth.
    pub fn kinks(&self) -> Vec<f64> {
        match &self.path {
            GeneratorPath::Nodes { nodes } => {
                let k = nodes.len() - 1;
                (1..k).map(|i| i as f64 / k as f64).collect()
            }
            _ => Vec::new(),
        }
    }

    /// `W(t_k)` for sorted times, integrating forward between them.
    pub fn sample(&self, times: &[f64]) -> Result<Vec<Mat4>> {
        let mut out = Vec::with_capacity(times.len());
        let mut prev: Option<(usize, f64, Mat4)> = None;
        for &t in times {
            Self::check_time(t)?;
            let k = self.segment_of(t);
            let w = match prev {
                Some((pk, pt, pw)) if pk == k && pt <= t => self.advance(pw, pt, t),
                _ => self.advance(self.nodes[k], self.breaks[k], t),
            };
            out.push(w);
            prev = Some((k, t, w));
        }
        Ok(out)
    }

    fn segment_of(&self, t: f64) -> usize {
        match self.breaks.iter().rposition(|&b| b <= t) {
            Some(k) if k + 1 < self.breaks.len() => k,
            _ => self.breaks.len() - 2,
        }
    }

    /// Spatial generators `Ẇ W⁻¹` at sorted times.
    pub fn spatial_generators(&self, times: &[f64]) -> Result<Vec<So4Element>> {
        let ws = self.sample(times)?;
        times
            .iter()
            .zip(ws)
            .map(|(&t, w)| So4Element::new(w * self.generator(t).matrix() * w.transpose()))
            .collect()
    }

    fn generator(&self, t: f64) -> So4Element {
        So4Element::from_omega(&self.path.omega_at(t))
    }

    fn advance(&self, w0: Mat4, a: f64, b: f64) -> Mat4 {
        if let GeneratorPath::Constant { generator } = &self.path {
            return w0 * exp_so4(&So4Element::from_omega(generator).scale(b - a));
        }
        let n = (((b - a) * MAGNUS_STEPS_PER_UNIT).ceil() as usize).max(1);
        let h = (b - a) / n as f64;
        let c = 3f64.sqrt() / 6.0;
        let mut w = w0;
        for i in 0..n {
            let t = a + i as f64 * h;
            let l1 = self.generator(t + (0.5 - c) * h);
            let l2 = self.generator(t + (0.5 + c) * h);
            let step = l1
                .add(&l2)
                .scale(0.5 * h)
                .add(&l1.commutator(&l2).scale(3f64.sqrt() / 12.0 * h * h));
            w *= exp_so4(&step);
        }
        w
    }

    fn check_time(t: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&t) || !t.is_finite() {
            return Err(Error::Domain(format!("time {t} outside [0, 1]")));
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> Result<Mat4> {
        Self::check_time(t)?;
        let k = self.segment_of(t);
        Ok(self.advance(self.nodes[k], self.breaks[k], t))
    }

    /// Body logarithmic derivative `L_W(t) = W⁻¹(t) Ẇ(t)`.
    pub fn log_derivative(&self, t: f64) -> Result<So4Element> {
        Self::check_time(t)?;
        Ok(self.generator(t))
    }

    /// Spatial logarithmic derivative `Ẇ(t) W⁻¹(t) = W L_W W⁻¹`. This is the
    /// generator entering the modified Lévy trace; it equals the body one
    /// whenever the generator commutes with `W` (e.g. constant generators).
    pub fn spatial_log_derivative(&self, t: f64) -> Result<So4Element> {
        let w = self.eval(t)?;
        let l = self.generator(t);
        So4Element::new(w * l.matrix() * w.transpose())
    }

    /// `α^±_i = ∫₀¹ ω^±_i(t) dt` of the spatial generator.
    pub fn alpha_coefficients(&self) -> Omega {
        if let GeneratorPath::Constant { generator } = &self.path {
            return *generator;
        }
        let grid = crate::quadrature::TimeGrid::with_breaks(&self.breaks, 1024);
        let mut acc = Omega::default();
        for (t, w) in grid.times().iter().zip(grid.weights()) {
            let om = self
                .spatial_log_derivative(*t)
                .expect("grid times lie in [0, 1]")
                .omega();
            acc = acc.axpy(*w, &om);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_so4(rng: &mut ChaCha8Rng) -> So4Element {
        let mut m = Mat4::zeros();
        for i in 0..4 {
            for j in (i + 1)..4 {
                let v: f64 = rng.random_range(-1.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = -v;
            }
        }
        So4Element::new(m).unwrap()
    }

    #[test]
    fn left_matrix_is_its_own_projection() {
        let x = So4Element::left(0.3, -1.2, 0.7);
        assert!((project_left(&x).matrix() - x.matrix()).norm() < 1e-15);
        assert!(project_right(&x).norm() < 1e-15);
        assert_eq!(project_left(&So4Element::zero()), So4Element::zero());
    }

    #[test]
    fn projections_commute_across_ideals() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let x = random_so4(&mut rng);
            let y = random_so4(&mut rng);
            let (pl, pr) = (project_left(&x), project_right(&y));
            assert!(pl.commutator(&pr).norm() < 1e-14);
            let sum = project_left(&x).add(&project_right(&x));
            assert!((sum.matrix() - x.matrix()).norm() < 1e-15);
            assert!(project_left(&x).inner(&project_right(&x)).abs() < 1e-14);
            assert!((project_left(&pl).matrix() - pl.matrix()).norm() < 1e-15);
            assert!(project_right(&pl).norm() < 1e-15);
        }
    }

    #[test]
    fn non_antisymmetric_input_is_rejected() {
        let err = project_matrix(&Mat4::identity()).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn omega_layout_and_round_trip() {
        let e1 = So4Element::left(1.0, 0.0, 0.0);
        assert_eq!(e1.omega(), Omega::left([1.0, 0.0, 0.0]));
        assert_eq!(So4Element::zero().omega(), Omega::default());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let x = random_so4(&mut rng);
            let back = So4Element::from_omega(&x.omega());
            assert!((back.matrix() - x.matrix()).abs().max() < 1e-14);
        }
    }

    #[test]
    fn right_generator_layout() {
        let w = Omega::right([0.4, -0.6, 1.1]);
        let m = *So4Element::from_omega(&w).matrix();
        let (a, b, c) = (0.4, -0.6, 1.1);
        let expect = Mat4::new(
            0.0, -a, -b, -c, a, 0.0, c, -b, b, -c, 0.0, a, c, b, -a, 0.0,
        );
        assert!((m - expect).norm() < 1e-15);
    }

    #[test]
    fn bivector_identification() {
        use crate::geometry::bivectors_from_frame;
        let basis = bivectors_from_frame(&Mat4::identity());
        for i in 0..3 {
            let mut p = [0.0; 3];
            p[i] = 1.0;
            let v = bivector_of(&So4Element::from_omega(&Omega::left(p)));
            assert!((v.0 - basis.plus[i].0).norm() < 1e-15);
            let v = bivector_of(&So4Element::from_omega(&Omega::right(p)));
            assert!((v.0 - basis.minus[i].0).norm() < 1e-15);
        }
        assert_eq!(bivector_of(&So4Element::zero()), Bivector::zero());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let x = random_so4(&mut rng);
            let back = so4_of(&bivector_of(&x)).unwrap();
            assert!((back.matrix() - x.matrix()).norm() < 1e-14);
        }
    }

    #[test]
    fn exponential_examples() {
        assert_eq!(exp_so4(&So4Element::zero()), Mat4::identity());
        let mut g = Mat4::zeros();
        g[(0, 1)] = -std::f64::consts::PI;
        g[(1, 0)] = std::f64::consts::PI;
        let r = exp_so4(&So4Element::new(g).unwrap());
        let expect = Mat4::from_diagonal(&crate::Vec4::new(-1.0, -1.0, 1.0, 1.0));
        assert!((r - expect).norm() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let x = random_so4(&mut rng).scale(3.0);
            let e = exp_so4(&x);
            assert!((e * exp_so4(&x.scale(-1.0)) - Mat4::identity()).norm() < 1e-12);
            assert!((e.determinant() - 1.0).abs() < 1e-12);
            // agrees with the power series
            let mut term = Mat4::identity();
            let mut series = Mat4::identity();
            for k in 1..60 {
                term = term * x.matrix() / k as f64;
                series += term;
            }
            assert!((series - e).norm() < 1e-10);
        }
    }

    #[test]
    fn constant_curve_log_derivative_and_alpha() {
        let w = RotationCurve::constant(Side::Left, Omega::left([1.0, 0.0, 0.0])).unwrap();
        for t in [0.0, 0.3, 1.0] {
            assert_eq!(
                w.log_derivative(t).unwrap(),
                So4Element::left(1.0, 0.0, 0.0)
            );
        }
        assert_eq!(w.alpha_coefficients(), Omega::left([1.0, 0.0, 0.0]));
        let id = RotationCurve::identity();
        assert_eq!(id.eval(0.7).unwrap(), Mat4::identity());
        assert_eq!(id.alpha_coefficients(), Omega::default());
        assert!(matches!(w.log_derivative(1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn cosine_generator_integrates_to_zero() {
        let w = RotationCurve::new(
            Side::Left,
            GeneratorPath::Trig {
                base: Omega::default(),
                cos_part: Omega::left([1.0, 0.0, 0.0]),
                sin_part: Omega::default(),
                frequency: 1.0,
            },
        )
        .unwrap();
        let a = w.alpha_coefficients();
        assert!(a.plus_norm() < 1e-12 && a.minus_norm() == 0.0);
        // closed form W(t) = exp(sin(2πt)/(2π) 𝐞₁)
        let t = 0.37;
        let s = (2.0 * std::f64::consts::PI * t).sin() / (2.0 * std::f64::consts::PI);
        let exact = exp_so4(&So4Element::left(s, 0.0, 0.0));
        assert!((w.eval(t).unwrap() - exact).norm() < 1e-12);
    }

    #[test]
    fn integrated_curve_reproduces_its_generator() {
        let w = RotationCurve::new(
            Side::General,
            GeneratorPath::Trig {
                base: Omega {
                    plus: [0.5, -0.2, 0.1],
                    minus: [0.3, 0.0, -0.4],
                },
                cos_part: Omega::left([0.0, 1.0, 0.0]),
                sin_part: Omega::right([0.7, 0.0, 0.2]),
                frequency: 1.0,
            },
        )
        .unwrap();
        let h = 1e-5;
        for t in [0.1, 0.45, 0.8] {
            let wt = w.eval(t).unwrap();
            assert!(crate::linalg::orthogonality_defect(&wt) < 1e-12);
            assert!((wt.determinant() - 1.0).abs() < 1e-12);
            let d = (w.eval(t + h).unwrap() - w.eval(t - h).unwrap()) / (2.0 * h);
            let body = wt.transpose() * d;
            let l = w.log_derivative(t).unwrap();
            assert!((body - l.matrix()).abs().max() < 1e-6, "t = {t}");
            let spatial = d * wt.transpose();
            let s = w.spatial_log_derivative(t).unwrap();
            assert!((spatial - s.matrix()).abs().max() < 1e-6);
        }
    }

    #[test]
    fn left_curves_stay_in_left_subgroup() {
        let w = RotationCurve::new(
            Side::Left,
            GeneratorPath::Nodes {
                nodes: vec![
                    Omega::left([1.0, 0.0, 0.0]),
                    Omega::left([0.0, 2.0, -1.0]),
                    Omega::left([0.5, 0.5, 0.5]),
                ],
            },
        )
        .unwrap();
        for k in 0..=20 {
            let t = k as f64 / 20.0;
            assert!(w.spatial_log_derivative(t).unwrap().minus_norm_check() < 1e-10);
            let m = w.eval(t).unwrap();
            // left multiplication matrices commute with every right one
            let r = quat_right(0.3, 0.1, -0.7, 0.2);
            assert!((m * r - r * m).norm() < 1e-12);
        }
    }

    #[test]
    fn side_is_enforced() {
        let err = RotationCurve::constant(Side::Left, Omega::right([1.0, 0.0, 0.0]));
        assert!(matches!(err, Err(Error::Contract(_))));
    }

    impl So4Element {
        fn minus_norm_check(&self) -> f64 {
            project_right(self).norm()
        }
    }
}
