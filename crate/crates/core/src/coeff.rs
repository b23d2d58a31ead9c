//! Coefficient rings for kernels and 𝔤-valued tensors.
//!
//! Second-derivative kernels of scalar functionals take values in `f64`,
//! those of the parallel transport in 4×4 matrices. Both only need the
//! vector-space operations below.

use std::ops::{Add, Mul, Neg, Sub};

use crate::Mat4;

pub trait Coeff:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
    + std::fmt::Debug
    + Send
    + Sync
{
    fn zero() -> Self;
    /// Frobenius (or absolute-value) norm.
    fn norm(&self) -> f64;
}

impl Coeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl Coeff for Mat4 {
    fn zero() -> Self {
        Mat4::zeros()
    }
    fn norm(&self) -> f64 {
        nalgebra::Matrix::norm(self)
    }
}

/// Antisymmetric or symmetric 4×4 array with entries in a coefficient ring.
pub type Array4<C> = [[C; 4]; 4];

pub fn zero_array<C: Coeff>() -> Array4<C> {
    [[C::zero(); 4]; 4]
}

/// Σ_{μν} m_{μν} a_{νμ}: the matrix trace of `m · a` with scalar `m`.
pub fn trace_product<C: Coeff>(m: &Mat4, a: &Array4<C>) -> C {
    let mut acc = C::zero();
    for mu in 0..4 {
        for nu in 0..4 {
            let w = m[(mu, nu)];
            if w != 0.0 {
                acc = acc + a[nu][mu] * w;
            }
        }
    }
    acc
}

pub fn diagonal_trace<C: Coeff>(a: &Array4<C>) -> C {
    a[0][0] + a[1][1] + a[2][2] + a[3][3]
}

/// Largest entry norm of `a − ±aᵀ`; `sign = 1` measures asymmetry, `−1` symmetry.
pub fn transpose_defect<C: Coeff>(a: &Array4<C>, sign: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for mu in 0..4 {
        for nu in 0..4 {
            worst = worst.max((a[mu][nu] - a[nu][mu] * sign).norm());
        }
    }
    worst
}

pub fn array_norm<C: Coeff>(a: &Array4<C>) -> f64 {
    a.iter()
        .flatten()
        .map(|c| c.norm().powi(2))
        .sum::<f64>()
        .sqrt()
}
