//! Matrix-valued Taylor jets up to third order in four variables.

use crate::field::ScalarJet;
use crate::Mat4;

/// Value and partial derivatives `∂_i`, `∂_i∂_j`, `∂_i∂_j∂_k` of a matrix field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatJet {
    pub v: Mat4,
    pub d: [Mat4; 4],
    pub dd: [[Mat4; 4]; 4],
    pub ddd: [[[Mat4; 4]; 4]; 4],
}

impl MatJet {
    pub fn constant(v: Mat4) -> Self {
        let z = Mat4::zeros();
        Self {
            v,
            d: [z; 4],
            dd: [[z; 4]; 4],
            ddd: [[[z; 4]; 4]; 4],
        }
    }

    /// `Σ_k s_k · M_k` with scalar jets `s_k` and constant matrices `M_k`.
    pub fn from_scalar(s: &ScalarJet, m: &Mat4) -> Self {
        Self {
            v: m * s.value,
            d: std::array::from_fn(|i| m * s.grad[i]),
            dd: std::array::from_fn(|i| std::array::from_fn(|j| m * s.hess[i][j])),
            ddd: std::array::from_fn(|i| {
                std::array::from_fn(|j| std::array::from_fn(|k| m * s.third[i][j][k]))
            }),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            v: self.v + o.v,
            d: std::array::from_fn(|i| self.d[i] + o.d[i]),
            dd: std::array::from_fn(|i| std::array::from_fn(|j| self.dd[i][j] + o.dd[i][j])),
            ddd: std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    std::array::from_fn(|k| self.ddd[i][j][k] + o.ddd[i][j][k])
                })
            }),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            v: self.v.transpose(),
            d: self.d.map(|m| m.transpose()),
            dd: self.dd.map(|r| r.map(|m| m.transpose())),
            ddd: self.ddd.map(|r| r.map(|s| s.map(|m| m.transpose()))),
        }
    }

    /// Leibniz product, computed through derivative order `order` (higher
    /// orders of the result are zero).
    pub fn mul(&self, o: &Self, order: usize) -> Self {
        let mut out = Self::constant(self.v * o.v);
        if order >= 1 {
            for i in 0..4 {
                out.d[i] = self.d[i] * o.v + self.v * o.d[i];
            }
        }
        if order >= 2 {
            for i in 0..4 {
                for j in 0..4 {
                    out.dd[i][j] = self.dd[i][j] * o.v
                        + self.d[i] * o.d[j]
                        + self.d[j] * o.d[i]
                        + self.v * o.dd[i][j];
                }
            }
        }
        if order >= 3 {
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        out.ddd[i][j][k] = self.ddd[i][j][k] * o.v
                            + self.dd[i][j] * o.d[k]
                            + self.dd[i][k] * o.d[j]
                            + self.dd[j][k] * o.d[i]
                            + self.d[i] * o.dd[j][k]
                            + self.d[j] * o.dd[i][k]
                            + self.d[k] * o.dd[i][j]
                            + self.v * o.ddd[i][j][k];
                    }
                }
            }
        }
        out
    }

    /// The jet of `∂_μ` of this field, one order lower.
    pub fn partial(&self, mu: usize) -> Self {
        let z = Mat4::zeros();
        Self {
            v: self.d[mu],
            d: std::array::from_fn(|i| self.dd[i][mu]),
            dd: std::array::from_fn(|i| std::array::from_fn(|j| self.ddd[i][j][mu])),
            ddd: [[[z; 4]; 4]; 4],
        }
    }

    pub fn is_finite(&self) -> bool {
        let ok = |m: &Mat4| m.iter().all(|v| v.is_finite());
        ok(&self.v)
            && self.d.iter().all(ok)
            && self.dd.iter().flatten().all(ok)
            && self.ddd.iter().flatten().flatten().all(ok)
    }
}

/// Jet of `g ∘ θ` from the derivatives `(g, g', g'', g''')` at `θ(x)`.
pub fn compose_scalar(g: [f64; 4], th: &ScalarJet) -> ScalarJet {
    let mut out = ScalarJet {
        value: g[0],
        grad: [0.0; 4],
        hess: [[0.0; 4]; 4],
        third: [[[0.0; 4]; 4]; 4],
    };
    let (t1, t2, t3) = (&th.grad, &th.hess, &th.third);
    for i in 0..4 {
        out.grad[i] = g[1] * t1[i];
        for j in 0..4 {
            out.hess[i][j] = g[2] * t1[i] * t1[j] + g[1] * t2[i][j];
            for k in 0..4 {
                out.third[i][j][k] = g[3] * t1[i] * t1[j] * t1[k]
                    + g[2] * (t2[i][j] * t1[k] + t2[i][k] * t1[j] + t2[j][k] * t1[i])
                    + g[1] * t3[i][j][k];
            }
        }
    }
    out
}
