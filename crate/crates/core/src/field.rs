//! Built-in smooth scalar fields on chart coordinates.
//!
//! These serve as conformal factors, gauge-transformation angles and test
//! functionals. Every family carries exact derivatives up to third order.

use serde::{Deserialize, Serialize};

use crate::Vec4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ScalarField {
    Constant { value: f64 },
    /// `scale · |x − center|²`
    Quadratic { scale: f64, center: [f64; 4] },
    /// `scale · x_i x_j` (indices 0-based)
    Bilinear { scale: f64, i: usize, j: usize },
    /// `amplitude · exp(−|x − center|² / (2 width²))`
    Gaussian {
        amplitude: f64,
        center: [f64; 4],
        width: f64,
    },
    /// `amplitude · sin(k·x + phase)`
    PlaneWave {
        amplitude: f64,
        wavevector: [f64; 4],
        phase: f64,
    },
}

/// Value and derivatives of a scalar field at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarJet {
    pub value: f64,
    pub grad: [f64; 4],
    pub hess: [[f64; 4]; 4],
    pub third: [[[f64; 4]; 4]; 4],
}

impl ScalarJet {
    fn zero() -> Self {
        Self {
            value: 0.0,
            grad: [0.0; 4],
            hess: [[0.0; 4]; 4],
            third: [[[0.0; 4]; 4]; 4],
        }
    }
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

impl ScalarField {
    pub fn jet(&self, x: &Vec4) -> ScalarJet {
        let mut out = ScalarJet::zero();
        match self {
            ScalarField::Constant { value } => out.value = *value,
            ScalarField::Quadratic { scale, center } => {
                let y: [f64; 4] = std::array::from_fn(|i| x[i] - center[i]);
                out.value = scale * y.iter().map(|v| v * v).sum::<f64>();
                for i in 0..4 {
                    out.grad[i] = 2.0 * scale * y[i];
                    out.hess[i][i] = 2.0 * scale;
                }
            }
            ScalarField::Bilinear { scale, i, j } => {
                let (i, j) = (*i, *j);
                out.value = scale * x[i] * x[j];
                out.grad[i] += scale * x[j];
                out.grad[j] += scale * x[i];
                out.hess[i][j] += scale;
                out.hess[j][i] += scale;
            }
            ScalarField::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let y: [f64; 4] = std::array::from_fn(|i| x[i] - center[i]);
                let s2 = width * width;
                let g = amplitude * (-y.iter().map(|v| v * v).sum::<f64>() / (2.0 * s2)).exp();
                out.value = g;
                for i in 0..4 {
                    out.grad[i] = -y[i] / s2 * g;
                    for j in 0..4 {
                        out.hess[i][j] = (y[i] * y[j] / (s2 * s2) - delta(i, j) / s2) * g;
                        for k in 0..4 {
                            out.third[i][j][k] = (-y[i] * y[j] * y[k] / (s2 * s2 * s2)
                                + (delta(i, j) * y[k] + delta(i, k) * y[j] + delta(j, k) * y[i])
                                    / (s2 * s2))
                                * g;
                        }
                    }
                }
            }
            ScalarField::PlaneWave {
                amplitude,
                wavevector: k,
                phase,
            } => {
                let theta = (0..4).map(|i| k[i] * x[i]).sum::<f64>() + phase;
                let (s, c) = theta.sin_cos();
                out.value = amplitude * s;
                for i in 0..4 {
                    out.grad[i] = amplitude * k[i] * c;
                    for j in 0..4 {
                        out.hess[i][j] = -amplitude * k[i] * k[j] * s;
                        for l in 0..4 {
                            out.third[i][j][l] = -amplitude * k[i] * k[j] * k[l] * c;
                        }
                    }
                }
            }
        }
        out
    }

    pub fn value(&self, x: &Vec4) -> f64 {
        self.jet(x).value
    }

    /// Flat Euclidean Laplacian Σ ∂_i∂_i f.
    pub fn flat_laplacian(&self, x: &Vec4) -> f64 {
        let h = self.jet(x).hess;
        h[0][0] + h[1][1] + h[2][2] + h[3][3]
    }
}
