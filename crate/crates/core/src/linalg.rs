//! Small dense helpers on 4×4 matrices.

use nalgebra::SymmetricEigen;

use crate::{Mat4, Vec4};

/// Nearest orthogonal matrix (polar factor) via SVD.
pub fn polar_orthogonal(m: &Mat4) -> Mat4 {
    let svd = m.svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    u * v_t
}

/// ‖MᵀM − I‖ (Frobenius).
pub fn orthogonality_defect(m: &Mat4) -> f64 {
    (m.transpose() * m - Mat4::identity()).norm()
}

/// S^{-1/2} for a symmetric positive-definite matrix.
pub fn sym_inv_sqrt(s: &Mat4) -> Mat4 {
    let eig = SymmetricEigen::new(*s);
    let d = Mat4::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// Frame columns re-orthonormalized with respect to `g`: `E (Eᵀ g E)^{-1/2}`.
pub fn metric_polar(frame: &Mat4, g: &Mat4) -> Mat4 {
    let gram = frame.transpose() * g * frame;
    let gram = (gram + gram.transpose()) * 0.5;
    frame * sym_inv_sqrt(&gram)
}

pub fn commutator(a: &Mat4, b: &Mat4) -> Mat4 {
    a * b - b * a
}

/// Levi-Civita symbol ε_{μνab} with ε_{0123} = +1.
pub fn levi_civita(i: usize, j: usize, k: usize, l: usize) -> f64 {
    let p = [i, j, k, l];
    for a in 0..4 {
        for b in (a + 1)..4 {
            if p[a] == p[b] {
                return 0.0;
            }
        }
    }
    let mut sign = 1.0;
    let mut q = p;
    for a in 0..4 {
        for b in 0..3 - a {
            if q[b] > q[b + 1] {
                q.swap(b, b + 1);
                sign = -sign;
            }
        }
    }
    sign
}

pub fn vec4(a: [f64; 4]) -> Vec4 {
    Vec4::new(a[0], a[1], a[2], a[3])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levi_civita_signs() {
        assert_eq!(levi_civita(0, 1, 2, 3), 1.0);
        assert_eq!(levi_civita(1, 0, 2, 3), -1.0);
        assert_eq!(levi_civita(2, 3, 0, 1), 1.0);
        assert_eq!(levi_civita(0, 0, 2, 3), 0.0);
    }

    #[test]
    fn polar_recovers_rotation() {
        let r = Mat4::new(
            0.0, -1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0,
        );
        let p = polar_orthogonal(&(r * 1.3));
        assert!((p - r).norm() < 1e-12);
    }

    #[test]
    fn metric_polar_gives_g_orthonormal_frame() {
        let g = Mat4::from_diagonal(&Vec4::new(2.0, 3.0, 0.5, 1.0));
        let f = Mat4::identity() + Mat4::from_fn(|i, j| 0.05 * (i as f64 - j as f64));
        let e = metric_polar(&f, &g);
        assert!((e.transpose() * g * e - Mat4::identity()).norm() < 1e-12);
    }
}
