//! Restricted holonomy of the self-dual 2-forms, its classification, and the
//! conditions on rotation curves that depend on it.

use nalgebra::{DMatrix, Matrix3, Rotation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{RotationCurve, Side};
use crate::error::{Error, Result};
use crate::geometry::{bivectors_from_frame, Bivector, MetricChart};
use crate::transport::{is_loop, levi_civita_transport, Curve, Resolution, TransportResult};
use crate::Mat4;

/// Relative singular-value cutoff for the span of holonomy logarithms.
pub const RELATIVE_CUTOFF: f64 = 1e-6;
/// Below this the largest singular value counts as zero.
pub const ABSOLUTE_FLOOR: f64 = 1e-9;
/// Coefficient size below which a projection counts as zero.
pub const PROJECTION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HolonomyClass {
    Trivial,
    #[serde(rename = "SO2")]
    So2,
    #[serde(rename = "SO3")]
    So3,
}

/// Holonomy of Λ²₊ along one loop, in the basis `{v_i^+}` at the basepoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopHolonomy {
    pub plus: Matrix3<f64>,
    pub minus: Matrix3<f64>,
    /// Largest entry of the blocks mixing Λ²₊ and Λ²₋.
    pub cross_block: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoopDiagnostic {
    pub angle: f64,
    pub orthogonality_defect: f64,
    pub cross_block: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolonomyClassification {
    pub algebra_dimension: usize,
    pub class: HolonomyClass,
    /// Unit axis in the `{v_i^+}` basis, present for the SO(2) class.
    pub fixed_bivector: Option<[f64; 3]>,
    /// Orthonormal basis of the estimated holonomy algebra, as axes.
    pub algebra_basis: Vec<[f64; 3]>,
    pub singular_values: Vec<f64>,
    pub sample_count: usize,
    pub loops: Vec<LoopDiagnostic>,
}

fn frame_coordinate_basis() -> [Mat4; 6] {
    let b = bivectors_from_frame(&Mat4::identity());
    [
        b.plus[0].0,
        b.plus[1].0,
        b.plus[2].0,
        b.minus[0].0,
        b.minus[1].0,
        b.minus[2].0,
    ]
}

/// Action of an orthogonal frame change `r` on Λ², in the orthonormal basis
/// `{v⁺, v⁻}`, with `⟨B, C⟩ = ½ tr(BᵀC)`.
fn bivector_action(r: &Mat4) -> [[f64; 6]; 6] {
    let basis = frame_coordinate_basis();
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let moved = r * basis[j] * r.transpose();
            0.5 * (basis[i].transpose() * moved).trace()
        })
    })
}

/// Holonomy on Λ² of a loop at its basepoint. Flat charts give the identity.
pub fn loop_holonomy(
    chart: &MetricChart,
    curve: &dyn Curve,
    res: Resolution,
) -> Result<LoopHolonomy> {
    if !is_loop(curve) {
        return Err(Error::Contract("holonomy needs a closed loop".into()));
    }
    let frames = levi_civita_transport(chart, curve, res)?;
    let e0 = frames.frames[0];
    let r = e0
        .try_inverse()
        .ok_or_else(|| Error::Numeric("singular frame".into()))?
        * frames.last();
    let act = bivector_action(&r);
    let block = |o: usize| Matrix3::from_fn(|i, j| act[o + i][o + j]);
    let mut cross = 0.0f64;
    for i in 0..3 {
        for j in 3..6 {
            cross = cross.max(act[i][j].abs()).max(act[j][i].abs());
        }
    }
    Ok(LoopHolonomy {
        plus: block(0),
        minus: block(3),
        cross_block: cross,
    })
}

/// The self-dual block of [`loop_holonomy`].
pub fn loop_holonomy_2forms(
    chart: &MetricChart,
    curve: &dyn Curve,
    res: Resolution,
) -> Result<Matrix3<f64>> {
    Ok(loop_holonomy(chart, curve, res)?.plus)
}

/// Rotation vector (axis times angle) of an element of SO(3).
pub fn rotation_log(m: &Matrix3<f64>) -> Result<Vector3<f64>> {
    let defect = (m.transpose() * m - Matrix3::identity()).norm();
    if defect > 1e-6 || m.determinant() < 0.0 {
        return Err(Error::Numeric(format!(
            "holonomy block is not a rotation (defect {defect:.2e})"
        )));
    }
    Ok(Rotation3::from_matrix_unchecked(*m).scaled_axis())
}

pub fn classify_holonomy(
    chart: &MetricChart,
    loops: &[&dyn Curve],
    res: Resolution,
) -> Result<HolonomyClassification> {
    let hols: Vec<Result<LoopHolonomy>> = loops
        .par_iter()
        .map(|c| loop_holonomy(chart, *c, res))
        .collect();
    let hols = hols.into_iter().collect::<Result<Vec<_>>>()?;
    let diagnostics = hols
        .iter()
        .map(|h| LoopDiagnostic {
            angle: 0.0,
            orthogonality_defect: (h.plus.transpose() * h.plus - Matrix3::identity()).norm(),
            cross_block: h.cross_block,
        })
        .collect();
    let blocks: Vec<Matrix3<f64>> = hols.iter().map(|h| h.plus).collect();
    let mut out = classify_from_holonomies(&blocks)?;
    out.loops = diagnostics;
    for (d, b) in out.loops.iter_mut().zip(&blocks) {
        d.angle = rotation_log(b)?.norm();
    }
    Ok(out)
}

/// Classification from a set of holonomy elements of SO(3): rank of the span
/// of their logarithms.
pub fn classify_from_holonomies(blocks: &[Matrix3<f64>]) -> Result<HolonomyClassification> {
    if blocks.is_empty() {
        return Err(Error::Contract("no holonomy samples".into()));
    }
    let logs = blocks
        .iter()
        .map(rotation_log)
        .collect::<Result<Vec<_>>>()?;
    let stacked = DMatrix::from_fn(logs.len(), 3, |i, j| logs[i][j]);
    let svd = stacked.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let top = singular_values.first().copied().unwrap_or(0.0);
    let rank = if top < ABSOLUTE_FLOOR {
        0
    } else {
        singular_values
            .iter()
            .filter(|s| **s > RELATIVE_CUTOFF * top)
            .count()
    };
    let axis = |k: usize| -> [f64; 3] {
        let r = v_t.row(order[k]);
        // fix the sign so the largest component is positive
        let big = (0..3)
            .max_by(|&a, &b| r[a].abs().total_cmp(&r[b].abs()))
            .unwrap();
        let s = r[big].signum();
        [r[0] * s, r[1] * s, r[2] * s]
    };
    let (class, fixed_bivector, algebra_basis) = match rank {
        0 => (HolonomyClass::Trivial, None, Vec::new()),
        1 => (HolonomyClass::So2, Some(axis(0)), vec![axis(0)]),
        3 => (HolonomyClass::So3, None, (0..3).map(axis).collect()),
        _ => {
            return Err(Error::Classification(format!(
                "holonomy algebra estimated with dimension 2 (singular values {singular_values:?}); no connected subgroup of SO(3) has this dimension"
            )))
        }
    };
    Ok(HolonomyClassification {
        algebra_dimension: rank,
        class,
        fixed_bivector,
        algebra_basis,
        singular_values,
        sample_count: blocks.len(),
        loops: Vec::new(),
    })
}

/// Rotations about `v₁⁺` by seeded random angles, standing in for a metric
/// whose self-dual holonomy is SO(2).
pub fn synthetic_so2_holonomies(seed: u64, count: usize) -> Vec<Matrix3<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let angle = rng.random_range(-3.0..3.0);
            Rotation3::from_axis_angle(&Vector3::x_axis(), angle).into_inner()
        })
        .collect()
}

/// `w_W^+(γ, 1) = Σ α_i^+ v_i^+(γ, 1)` from the transported frame.
pub fn w_plus(w: &RotationCurve, transports: &TransportResult) -> Bivector {
    let alpha = w.alpha_coefficients();
    let basis = transports.frame.bivectors(transports.points.len() - 1);
    let mut out = Bivector::zero();
    for i in 0..3 {
        out.0 += basis.plus[i].0 * alpha.plus[i];
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub pass: bool,
    pub class: HolonomyClass,
    pub alpha_plus_norm: f64,
    /// Components along and across the fixed bivector (SO(2) only).
    pub parallel: Option<f64>,
    pub transverse: Option<f64>,
    pub note: String,
}

pub fn check_w_conditions(
    w: &RotationCurve,
    class: &HolonomyClassification,
) -> Result<ConditionReport> {
    if w.side() != Side::Left {
        return Err(Error::Contract(
            "conditions apply to rotation curves in S³_L only".into(),
        ));
    }
    let a = Vector3::from(w.alpha_coefficients().plus);
    let norm = a.norm();
    let mut report = ConditionReport {
        pass: false,
        class: class.class,
        alpha_plus_norm: norm,
        parallel: None,
        transverse: None,
        note: String::new(),
    };
    match class.class {
        HolonomyClass::So3 => {
            report.pass = norm > PROJECTION_TOL;
            report.note = if report.pass {
                "α⁺ is nonzero".into()
            } else {
                "α⁺ vanishes".into()
            };
        }
        HolonomyClass::So2 => {
            let axis = Vector3::from(class.fixed_bivector.ok_or_else(|| {
                Error::Contract("SO(2) classification without a fixed bivector".into())
            })?);
            let par = a.dot(&axis);
            let perp = (a - axis * par).norm();
            report.parallel = Some(par);
            report.transverse = Some(perp);
            report.pass = par.abs() > PROJECTION_TOL && perp > PROJECTION_TOL;
            report.note = match (par.abs() > PROJECTION_TOL, perp > PROJECTION_TOL) {
                (true, true) => "both projections are nonzero".into(),
                (false, _) => "projection onto the fixed line vanishes".into(),
                (_, false) => "projection onto the rotated plane vanishes".into(),
            };
        }
        HolonomyClass::Trivial => {
            report.note =
                "trivial self-dual holonomy: the criterion cannot separate instantons without a conformal change of metric".into();
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitReport {
    pub span_dimension: usize,
    pub samples: usize,
    pub gram_eigenvalues: Vec<f64>,
}

/// Dimension of the span of the orbit of `w` (coefficients in `{v_i^+}`)
/// under the classified group, from sampled group elements.
pub fn orbit_span_report(class: &HolonomyClassification, w: &[f64; 3], seed: u64) -> OrbitReport {
    let w = Vector3::from(*w);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = 32;
    let mut pts = vec![w];
    if !class.algebra_basis.is_empty() {
        for _ in 1..samples {
            let mut gen = Vector3::zeros();
            for b in &class.algebra_basis {
                gen += Vector3::from(*b) * rng.random_range(-3.0..3.0);
            }
            pts.push(Rotation3::new(gen) * w);
        }
    }
    let gram = Matrix3::from_fn(|i, j| pts.iter().map(|p| p[i] * p[j]).sum::<f64>());
    let mut eig: Vec<f64> = gram.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    let top = eig[0];
    let span_dimension = if top < PROJECTION_TOL * PROJECTION_TOL {
        0
    } else {
        eig.iter().filter(|e| **e > 1e-10 * top).count()
    };
    OrbitReport {
        span_dimension,
        samples: pts.len(),
        gram_eigenvalues: eig,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{GeneratorPath, Omega};
    use crate::transport::{random_fourier_loops, FourierLoop, Reversed, SharedCurve};
    use std::sync::Arc;

    fn circle(r: f64) -> FourierLoop {
        FourierLoop {
            base: [r, 0.0, 0.0, 0.0],
            cos_coeffs: vec![[r, 0.0, 0.0, 0.0]],
            sin_coeffs: vec![[0.0, r, 0.0, 0.0]],
        }
    }

    fn left(g: [f64; 3]) -> RotationCurve {
        RotationCurve::constant(Side::Left, Omega::left(g)).unwrap()
    }

    #[test]
    fn flat_loops_have_no_holonomy() {
        let m =
            loop_holonomy_2forms(&MetricChart::flat(), &circle(0.5), Resolution::new(200)).unwrap();
        assert!((m - Matrix3::identity()).norm() < 1e-14);
    }

    #[test]
    fn open_curves_are_rejected() {
        let c = crate::transport::SineCurve {
            start: [0.0; 4],
            end: [1.0, 0.0, 0.0, 0.0],
            sin_coeffs: vec![],
        };
        assert!(matches!(
            loop_holonomy_2forms(&MetricChart::round_s4(), &c, Resolution::new(50)),
            Err(Error::Contract(_))
        ));
    }

    // A coordinate circle |x| = r in the x₁x₂-plane of the stereographic
    // chart bounds a disc of area 4πr²/(1+r²) on a totally geodesic unit
    // 2-sphere, so transport rotates e₁, e₂ by that angle and fixes e₃, e₄.
    #[test]
    fn round_sphere_circle_matches_enclosed_area() {
        let r = 0.6;
        let c = circle(r);
        let h = loop_holonomy(&MetricChart::round_s4(), &c, Resolution::new(2000)).unwrap();
        let area = 4.0 * std::f64::consts::PI * r * r / (1.0 + r * r);
        let angle = area.rem_euclid(2.0 * std::f64::consts::PI);
        let log = rotation_log(&h.plus).unwrap();
        let wrapped = angle.min(2.0 * std::f64::consts::PI - angle);
        assert!(
            (log.norm() - wrapped).abs() < 1e-8,
            "{} vs {wrapped}",
            log.norm()
        );
        assert!(log[1].abs() < 1e-8 && log[2].abs() < 1e-8);
        let logm = rotation_log(&h.minus).unwrap();
        assert!((logm.norm() - wrapped).abs() < 1e-8);
        assert!(h.cross_block < 1e-8);
        assert!((h.plus.transpose() * h.plus - Matrix3::identity()).norm() < 1e-8);
        assert!((h.plus.determinant() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn there_and_back_is_identity() {
        let c: SharedCurve =
            Arc::new(random_fourier_loops(5, 1, [0.1, 0.2, 0.0, -0.1], 0.6, 3).remove(0));
        let m = loop_holonomy_2forms(&MetricChart::round_s4(), c.as_ref(), Resolution::new(1000)).unwrap();
        assert!((m - Matrix3::identity()).norm() > 1e-3);
        let back = loop_holonomy_2forms(
            &MetricChart::round_s4(),
            &Reversed(c),
            Resolution::new(1000),
        )
        .unwrap();
        assert!((back * m - Matrix3::identity()).norm() < 1e-8);
    }

    fn family() -> Vec<FourierLoop> {
        random_fourier_loops(21, 50, [0.1, -0.2, 0.1, 0.0], 0.5, 3)
    }

    #[test]
    fn classes_of_presets() {
        let loops = family();
        let refs: Vec<&dyn Curve> = loops.iter().map(|c| c as &dyn Curve).collect();
        let res = Resolution::new(400);
        let flat = classify_holonomy(&MetricChart::flat(), &refs, res).unwrap();
        assert_eq!(flat.class, HolonomyClass::Trivial);
        assert_eq!(flat.algebra_dimension, 0);
        for chart in [MetricChart::round_s4(), MetricChart::s1xs3(1.0)] {
            let c = classify_holonomy(&chart, &refs, res).unwrap();
            assert_eq!(c.class, HolonomyClass::So3);
            assert_eq!(c.sample_count, 50);
            assert!(c.loops.iter().all(|d| d.cross_block < 1e-8));
        }
    }

    #[test]
    fn synthetic_so2_is_recognized() {
        let c = classify_from_holonomies(&synthetic_so2_holonomies(3, 50)).unwrap();
        assert_eq!(c.class, HolonomyClass::So2);
        let axis = c.fixed_bivector.unwrap();
        assert!((axis[0] - 1.0).abs() < 1e-12 && axis[1].abs() < 1e-12);
    }

    #[test]
    fn rank_two_is_an_error() {
        let blocks = vec![
            Rotation3::from_axis_angle(&Vector3::x_axis(), 0.4).into_inner(),
            Rotation3::from_axis_angle(&Vector3::y_axis(), 0.7).into_inner(),
        ];
        assert!(matches!(
            classify_from_holonomies(&blocks),
            Err(Error::Classification(_))
        ));
    }

    #[test]
    fn w_conditions() {
        let so3 = classify_from_holonomies(&[
            Rotation3::new(Vector3::new(0.3, 0.0, 0.1)).into_inner(),
            Rotation3::new(Vector3::new(0.0, 0.5, 0.0)).into_inner(),
            Rotation3::new(Vector3::new(0.2, 0.1, 0.9)).into_inner(),
        ])
        .unwrap();
        assert_eq!(so3.class, HolonomyClass::So3);
        let so2 = classify_from_holonomies(&synthetic_so2_holonomies(1, 10)).unwrap();
        let trivial = classify_from_holonomies(&[Matrix3::identity()]).unwrap();
        let e1 = left([1.0, 0.0, 0.0]);
        assert!(check_w_conditions(&e1, &so3).unwrap().pass);
        assert!(!check_w_conditions(&e1, &so2).unwrap().pass);
        assert!(
            check_w_conditions(&left([1.0, 1.0, 0.0]), &so2)
                .unwrap()
                .pass
        );
        assert!(!check_w_conditions(&e1, &trivial).unwrap().pass);
        assert!(!check_w_conditions(&left([0.0; 3]), &so3).unwrap().pass);
        let right = RotationCurve::constant(Side::Right, Omega::right([1.0, 0.0, 0.0])).unwrap();
        assert!(matches!(
            check_w_conditions(&right, &so3),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn orbit_spans() {
        let so3 = classify_from_holonomies(&[
            Rotation3::new(Vector3::new(0.3, 0.0, 0.1)).into_inner(),
            Rotation3::new(Vector3::new(0.0, 0.5, 0.0)).into_inner(),
            Rotation3::new(Vector3::new(0.2, 0.1, 0.9)).into_inner(),
        ])
        .unwrap();
        let so2 = classify_from_holonomies(&synthetic_so2_holonomies(1, 10)).unwrap();
        let trivial = classify_from_holonomies(&[Matrix3::identity()]).unwrap();
        assert_eq!(
            orbit_span_report(&so3, &[1.0, 0.0, 0.0], 0).span_dimension,
            3
        );
        assert_eq!(
            orbit_span_report(&trivial, &[1.0, 0.0, 0.0], 0).span_dimension,
            1
        );
        assert_eq!(orbit_span_report(&trivial, &[0.0; 3], 0).span_dimension, 0);
        assert_eq!(
            orbit_span_report(&so2, &[0.0, 1.0, 0.0], 0).span_dimension,
            2
        );
        assert_eq!(
            orbit_span_report(&so2, &[1.0, 0.0, 0.0], 0).span_dimension,
            1
        );
        assert_eq!(
            orbit_span_report(&so2, &[1.0, 1.0, 0.0], 0).span_dimension,
            3
        );
    }

    #[test]
    fn w_plus_norm_is_alpha_norm() {
        let c = random_fourier_loops(8, 1, [0.0, 0.1, 0.2, 0.0], 0.5, 3).remove(0);
        let w = RotationCurve::new(
            Side::Left,
            GeneratorPath::Trig {
                base: Omega::left([0.3, -0.2, 0.5]),
                cos_part: Omega::left([0.0, 0.4, 0.0]),
                sin_part: Omega::left([0.2, 0.0, -0.1]),
                frequency: 1.0,
            },
        )
        .unwrap();
        for chart in [
            MetricChart::flat(),
            MetricChart::round_s4(),
            MetricChart::s1xs3(1.2),
        ] {
            let tr = crate::transport::transport(
                &crate::connection::Connection::Zero,
                &chart,
                &c,
                Resolution::new(400),
            )
            .unwrap();
            let wp = w_plus(&w, &tr);
            let x = tr.points[tr.points.len() - 1];
            let n = chart.bivector_inner(&x, &wp, &wp).unwrap().sqrt();
            let alpha = Vector3::from(w.alpha_coefficients().plus).norm();
            assert!((n - alpha).abs() < 1e-8);
        }
        let tr = crate::transport::transport(
            &crate::connection::Connection::Zero,
            &MetricChart::flat(),
            &c,
            Resolution::new(50),
        )
        .unwrap();
        assert_eq!(w_plus(&RotationCurve::identity(), &tr).0, Mat4::zeros());
        let e1 = w_plus(&left([1.0, 0.0, 0.0]), &tr);
        assert!((e1.0 - bivectors_from_frame(&Mat4::identity()).plus[0].0).norm() < 1e-14);
    }
}
