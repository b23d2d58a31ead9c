//! Chart-based Riemannian 4-geometry.
//!
//! A [`MetricChart`] is a single coordinate chart carrying a metric preset and
//! an orientation flag. Compact manifolds are represented by one chart each:
//! the round unit S⁴ by stereographic projection and S¹ × S³ by an angle
//! times a stereographic S³ chart.

use serde::{Deserialize, Serialize};

use crate::coeff::{zero_array, Array4, Coeff};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::linalg::{levi_civita, sym_inv_sqrt};
use crate::{Mat4, Vec4};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    #[default]
    RightHanded,
    LeftHanded,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::RightHanded => 1.0,
            Orientation::LeftHanded => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::RightHanded => Orientation::LeftHanded,
            Orientation::LeftHanded => Orientation::RightHanded,
        }
    }
}

/// Metric presets. Sphere radii are fixed to 1 for S⁴; S¹ × S³ takes the
/// radius of its S³ factor (the circle has unit radius, angle in `[−π, π]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum ChartPreset {
    Flat,
    /// `g = e^{2φ} δ` for a built-in scalar field φ.
    ConformallyFlat { factor: ScalarField },
    /// Unit S⁴ in stereographic coordinates, `g = (2 / (1 + |x|²))² δ`.
    RoundS4,
    /// `dθ² + r² (2 / (1 + |y|²))² dy²` with `x = (θ, y)`.
    #[serde(rename = "s1xs3")]
    S1xS3 { radius: f64 },
}

/// Christoffel symbols, indexed `[κ][λ][ν]` for Γ^κ_{λν}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Christoffel(pub [[[f64; 4]; 4]; 4]);

impl Christoffel {
    pub fn zero() -> Self {
        Self([[[0.0; 4]; 4]; 4])
    }

    /// Γ^κ_{λν} a^λ b^ν
    pub fn contract(&self, a: &Vec4, b: &Vec4) -> Vec4 {
        Vec4::from_fn(|k, _| {
            let mut s = 0.0;
            for l in 0..4 {
                for n in 0..4 {
                    s += self.0[k][l][n] * a[l] * b[n];
                }
            }
            s
        })
    }

    /// Largest |Γ^κ_{λν} − Γ^κ_{νλ}|.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..4 {
            for l in 0..4 {
                for n in 0..4 {
                    worst = worst.max((self.0[k][l][n] - self.0[k][n][l]).abs());
                }
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Christoffel) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..4 {
            for l in 0..4 {
                for n in 0..4 {
                    worst = worst.max((self.0[k][l][n] - other.0[k][l][n]).abs());
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_diff(&Christoffel::zero())
    }
}

/// A 2-form `ω_{μν}` (covariant, antisymmetric) with coefficients in `C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoForm<C: Coeff = f64>(pub Array4<C>);

impl<C: Coeff> TwoForm<C> {
    pub fn zero() -> Self {
        Self(zero_array())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i][j] + other.0[i][j])
        }))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i][j] - other.0[i][j])
        }))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i][j] * s)
        }))
    }

    /// Largest norm of `ω_{μν} + ω_{νμ}`.
    pub fn antisymmetry_defect(&self) -> f64 {
        crate::coeff::transpose_defect(&self.0, -1.0)
    }

    pub fn max_norm(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// `ω(v) = Σ_{μ<ν} ω_{μν} v^{μν}` for a bivector `v`.
    pub fn pair(&self, v: &Bivector) -> C {
        let mut acc = C::zero();
        for mu in 0..4 {
            for nu in (mu + 1)..4 {
                acc = acc + self.0[mu][nu] * v.0[(mu, nu)];
            }
        }
        acc
    }

    /// `ω(a, b) = ω_{μν} a^μ b^ν`.
    pub fn eval(&self, a: &Vec4, b: &Vec4) -> C {
        let mut acc = C::zero();
        for mu in 0..4 {
            for nu in 0..4 {
                let w = a[mu] * b[nu];
                if w != 0.0 {
                    acc = acc + self.0[mu][nu] * w;
                }
            }
        }
        acc
    }

    /// Components in a frame: `ω(e_μ, e_ν)` for the columns of `frame`.
    pub fn in_frame(&self, frame: &Mat4) -> Array4<C> {
        let cols: [Vec4; 4] = std::array::from_fn(|i| frame.column(i).into_owned());
        std::array::from_fn(|i| std::array::from_fn(|j| self.eval(&cols[i], &cols[j])))
    }
}

impl TwoForm<f64> {
    /// `dx^i ∧ dx^j` (0-based).
    pub fn basis(i: usize, j: usize) -> Self {
        let mut a = [[0.0; 4]; 4];
        a[i][j] = 1.0;
        a[j][i] = -1.0;
        Self(a)
    }

    pub fn as_matrix(&self) -> Mat4 {
        Mat4::from_fn(|i, j| self.0[i][j])
    }

    pub fn from_matrix(m: &Mat4) -> Self {
        Self(std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)])))
    }
}

/// A bivector `v^{μν}` (contravariant, antisymmetric), stored as a matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bivector(pub Mat4);

impl Bivector {
    pub fn wedge(a: &Vec4, b: &Vec4) -> Self {
        Self(a * b.transpose() - b * a.transpose())
    }

    pub fn zero() -> Self {
        Self(Mat4::zeros())
    }
}

/// Orthonormal bases `{v_i^+}` of Λ²₊ and `{v_i^-}` of Λ²₋ built from a frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfDualBasis {
    pub plus: [Bivector; 3],
    pub minus: [Bivector; 3],
}

/// The six bivectors
/// `v₁^± = (e₁∧e₂ ± e₃∧e₄)/√2`, `v₂^± = (e₁∧e₃ ∓ e₂∧e₄)/√2`,
/// `v₃^± = (e₁∧e₄ ± e₂∧e₃)/√2` of a frame given by the columns of `frame`.
/// No orthonormality check; see [`MetricChart::selfdual_basis`].
pub fn bivectors_from_frame(frame: &Mat4) -> SelfDualBasis {
    let e: [Vec4; 4] = std::array::from_fn(|i| frame.column(i).into_owned());
    let w = |i: usize, j: usize| Bivector::wedge(&e[i], &e[j]).0;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = [
        Bivector((w(0, 1) + w(2, 3)) * s),
        Bivector((w(0, 2) - w(1, 3)) * s),
        Bivector((w(0, 3) + w(1, 2)) * s),
    ];
    let minus = [
        Bivector((w(0, 1) - w(2, 3)) * s),
        Bivector((w(0, 2) + w(1, 3)) * s),
        Bivector((w(0, 3) - w(1, 2)) * s),
    ];
    SelfDualBasis { plus, minus }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricChart {
    #[serde(flatten)]
    pub preset: ChartPreset,
    #[serde(default)]
    pub orientation: Orientation,
}

/// Step for finite-difference derivatives of the metric.
pub const METRIC_FD_STEP: f64 = 1e-4;

impl MetricChart {
    pub fn new(preset: ChartPreset) -> Self {
        Self {
            preset,
            orientation: Orientation::RightHanded,
        }
    }

    pub fn flat() -> Self {
        Self::new(ChartPreset::Flat)
    }

    pub fn round_s4() -> Self {
        Self::new(ChartPreset::RoundS4)
    }

    pub fn s1xs3(radius: f64) -> Self {
        Self::new(ChartPreset::S1xS3 { radius })
    }

    pub fn conformally_flat(factor: ScalarField) -> Self {
        Self::new(ChartPreset::ConformallyFlat { factor })
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn name(&self) -> &'static str {
        match self.preset {
            ChartPreset::Flat => "flat",
            ChartPreset::ConformallyFlat { .. } => "conformally_flat",
            ChartPreset::RoundS4 => "round_s4",
            ChartPreset::S1xS3 { .. } => "s1xs3",
        }
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.preset, ChartPreset::Flat)
    }

    pub fn check_domain(&self, x: &Vec4) -> Result<()> {
        if !x.iter().all(|c| c.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite point {:?} in {} chart",
                x.as_slice(),
                self.name()
            )));
        }
        if let ChartPreset::S1xS3 { .. } = self.preset {
            if x[0].abs() > std::f64::consts::PI + 1e-12 {
                return Err(Error::Domain(format!(
                    "angle {} outside [-π, π] in s1xs3 chart (wrap it first)",
                    x[0]
                )));
            }
        }
        Ok(())
    }

    /// Log conformal factor of the block carrying it, with its gradient.
    /// For S¹ × S³ only the last three coordinates are scaled.
    fn conformal(&self, x: &Vec4) -> (f64, [f64; 4]) {
        match &self.preset {
            ChartPreset::Flat => (0.0, [0.0; 4]),
            ChartPreset::ConformallyFlat { factor } => {
                let j = factor.jet(x);
                (j.value, j.grad)
            }
            ChartPreset::RoundS4 => {
                let q = 1.0 + x.norm_squared();
                let g = std::array::from_fn(|i| -2.0 * x[i] / q);
                ((2.0 / q).ln(), g)
            }
            ChartPreset::S1xS3 { radius } => {
                let q = 1.0 + x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
                let mut g = [0.0; 4];
                for i in 1..4 {
                    g[i] = -2.0 * x[i] / q;
                }
                ((2.0 * radius / q).ln(), g)
            }
        }
    }

    pub fn metric(&self, x: &Vec4) -> Result<Mat4> {
        self.check_domain(x)?;
        let (phi, _) = self.conformal(x);
        let s = (2.0 * phi).exp();
        let g = match self.preset {
            ChartPreset::S1xS3 { .. } => Mat4::from_diagonal(&Vec4::new(1.0, s, s, s)),
            _ => Mat4::identity() * s,
        };
        if !s.is_finite() || s <= 0.0 {
            return Err(Error::Numeric(format!(
                "degenerate metric at {:?}",
                x.as_slice()
            )));
        }
        Ok(g)
    }

    pub fn inverse_metric(&self, x: &Vec4) -> Result<Mat4> {
        let g = self.metric(x)?;
        g.try_inverse()
            .ok_or_else(|| Error::Numeric(format!("singular metric at {:?}", x.as_slice())))
    }

    pub fn volume_density(&self, x: &Vec4) -> Result<f64> {
        let det = self.metric(x)?.determinant();
        if det <= 0.0 || !det.is_finite() {
            return Err(Error::Numeric(format!(
                "degenerate metric determinant {det} at {:?}",
                x.as_slice()
            )));
        }
        Ok(det.sqrt())
    }

    /// Analytic Christoffel symbols of the preset.
    pub fn christoffel(&self, x: &Vec4) -> Result<Christoffel> {
        self.check_domain(x)?;
        let (_, dphi) = self.conformal(x);
        let mut gamma = Christoffel::zero();
        let range = match self.preset {
            ChartPreset::Flat => return Ok(gamma),
            ChartPreset::S1xS3 { .. } => 1..4,
            _ => 0..4,
        };
        for k in range.clone() {
            for l in range.clone() {
                for n in range.clone() {
                    let mut v = 0.0;
                    if k == l {
                        v += dphi[n];
                    }
                    if k == n {
                        v += dphi[l];
                    }
                    if l == n {
                        v -= dphi[k];
                    }
                    gamma.0[k][l][n] = v;
                }
            }
        }
        Ok(gamma)
    }

    /// Christoffel symbols from 4th-order central differences of the metric.
    pub fn christoffel_numeric(&self, x: &Vec4, h: f64) -> Result<Christoffel> {
        let ginv = self.inverse_metric(x)?;
        let mut dg = [Mat4::zeros(); 4];
        for (l, slot) in dg.iter_mut().enumerate() {
            let shifted = |s: f64| {
                let mut y = *x;
                y[l] += s;
                self.metric(&y)
            };
            *slot = (shifted(-2.0 * h)? - shifted(2.0 * h)? + (shifted(h)? - shifted(-h)?) * 8.0)
                / (12.0 * h);
        }
        let mut gamma = Christoffel::zero();
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    let mut v = 0.0;
                    for l in 0..4 {
                        v += 0.5 * ginv[(k, l)] * (dg[i][(l, j)] + dg[j][(l, i)] - dg[l][(i, j)]);
                    }
                    gamma.0[k][i][j] = v;
                }
            }
        }
        Ok(gamma)
    }

    /// Hodge star on 2-forms with coefficients in any ring:
    /// `(∗ω)_{μν} = ½ s √g ε_{μναβ} ω^{αβ}` with `s` the orientation sign.
    pub fn hodge_star<C: Coeff>(&self, x: &Vec4, omega: &TwoForm<C>) -> Result<TwoForm<C>> {
        let ginv = self.inverse_metric(x)?;
        let factor = 0.5 * self.orientation.sign() * self.volume_density(x)?;
        let mut raised: Array4<C> = zero_array();
        for a in 0..4 {
            for b in 0..4 {
                let mut acc = C::zero();
                for c in 0..4 {
                    for d in 0..4 {
                        let w = ginv[(a, c)] * ginv[(b, d)];
                        if w != 0.0 {
                            acc = acc + omega.0[c][d] * w;
                        }
                    }
                }
                raised[a][b] = acc;
            }
        }
        let mut out: Array4<C> = zero_array();
        for m in 0..4 {
            for n in 0..4 {
                let mut acc = C::zero();
                for a in 0..4 {
                    for b in 0..4 {
                        let e = levi_civita(m, n, a, b);
                        if e != 0.0 {
                            acc = acc + raised[a][b] * (e * factor);
                        }
                    }
                }
                out[m][n] = acc;
            }
        }
        Ok(TwoForm(out))
    }

    /// Self-dual and anti-self-dual parts `(ω₊, ω₋) = ½(ω ± ∗ω)`.
    pub fn split<C: Coeff>(&self, x: &Vec4, omega: &TwoForm<C>) -> Result<(TwoForm<C>, TwoForm<C>)> {
        let star = self.hodge_star(x, omega)?;
        Ok((omega.add(&star).scale(0.5), omega.sub(&star).scale(0.5)))
    }

    pub fn lower(&self, x: &Vec4, v: &Bivector) -> Result<TwoForm> {
        let g = self.metric(x)?;
        Ok(TwoForm::from_matrix(&(g * v.0 * g)))
    }

    pub fn raise(&self, x: &Vec4, omega: &TwoForm) -> Result<Bivector> {
        let gi = self.inverse_metric(x)?;
        Ok(Bivector(gi * omega.as_matrix() * gi))
    }

    /// Hodge star transported to bivectors through the metric.
    pub fn hodge_star_bivector(&self, x: &Vec4, v: &Bivector) -> Result<Bivector> {
        let lowered = self.lower(x, v)?;
        let starred = self.hodge_star(x, &lowered)?;
        self.raise(x, &starred)
    }

    /// `⟨v, w⟩ = Σ_{μ<ν} v_{μν} w^{μν}` with `v` lowered by the metric.
    pub fn bivector_inner(&self, x: &Vec4, v: &Bivector, w: &Bivector) -> Result<f64> {
        Ok(self.lower(x, v)?.pair(w))
    }

    /// Laplace–Beltrami operator from the closed forms of the conformal
    /// structure: `e^{−2φ}(Δf + 2∇φ·∇f)` for conformally flat charts and
    /// `∂₀²f + e^{−2ψ}(Δ_y f + ∇_yψ·∇_y f)` for S¹ × S³.
    pub fn laplace_beltrami(&self, f: &ScalarField, x: &Vec4) -> Result<f64> {
        self.check_domain(x)?;
        let j = f.jet(x);
        let (phi, dphi) = self.conformal(x);
        Ok(match self.preset {
            ChartPreset::S1xS3 { .. } => {
                let mut y = 0.0;
                for i in 1..4 {
                    y += j.hess[i][i] + dphi[i] * j.grad[i];
                }
                j.hess[0][0] + (-2.0 * phi).exp() * y
            }
            _ => {
                let mut y = 0.0;
                for i in 0..4 {
                    y += j.hess[i][i] + 2.0 * dphi[i] * j.grad[i];
                }
                (-2.0 * phi).exp() * y
            }
        })
    }

    /// `g`-orthonormal frame at `x` (columns), right-handed for the chart's
    /// orientation.
    pub fn orthonormal_frame(&self, x: &Vec4) -> Result<Mat4> {
        let mut frame = sym_inv_sqrt(&self.metric(x)?);
        if self.orientation == Orientation::LeftHanded {
            let flipped = -frame.column(3);
            frame.set_column(3, &flipped);
        }
        Ok(frame)
    }

    /// Bases of Λ²₊ and Λ²₋ at `x` built from an orthonormal right-handed frame.
    pub fn selfdual_basis(&self, x: &Vec4, frame: &Mat4) -> Result<SelfDualBasis> {
        let g = self.metric(x)?;
        let defect = (frame.transpose() * g * frame - Mat4::identity()).norm();
        if defect > 1e-8 {
            return Err(Error::Contract(format!(
                "frame is not orthonormal (defect {defect:.3e})"
            )));
        }
        if frame.determinant() * self.orientation.sign() <= 0.0 {
            return Err(Error::Contract("frame is not right-handed".into()));
        }
        Ok(bivectors_from_frame(frame))
    }
}
