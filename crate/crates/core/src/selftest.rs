//! Structural invariants checked at run time: Hodge duality, the left/right
//! splitting of so(4), transport orthogonality, composition and
//! reparameterization, and gauge covariance.

use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{
    exp_so4, left_basis, project_left, project_right, right_basis, Omega, So4Element,
};
use crate::connection::{
    bianchi_defect, covariant_curvature, gauge_transform, Bump, Connection, GaugeFactor, GaugeField,
};
use crate::error::Result;
use crate::field::ScalarField;
use crate::geometry::{MetricChart, Orientation, TwoForm};
use crate::linalg::{commutator, vec4};
use crate::transport::{
    gauge_transport, gauge_transport_between, levi_civita_transport, random_fourier_loops,
    random_open_curves, reparameterize_r, Curve, Resolution, Reversed, SharedCurve,
};
use crate::Mat4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// Worst observed defect.
    pub defect: f64,
    pub tolerance: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub seconds: f64,
}

struct Worst {
    defect: f64,
    samples: usize,
}

impl Worst {
    fn new() -> Self {
        Self {
            defect: 0.0,
            samples: 0,
        }
    }

    fn add(&mut self, d: f64) {
        self.defect = if d.is_nan() {
            f64::INFINITY
        } else {
            self.defect.max(d)
        };
        self.samples += 1;
    }

    fn into_check(self, name: &str, tolerance: f64) -> Check {
        Check {
            name: name.into(),
            pass: self.defect <= tolerance && self.samples > 0,
            defect: self.defect,
            tolerance,
            samples: self.samples,
        }
    }
}

fn charts() -> Vec<MetricChart> {
    let base = [
        MetricChart::flat(),
        MetricChart::round_s4(),
        MetricChart::s1xs3(1.3),
        MetricChart::conformally_flat(ScalarField::Gaussian {
            amplitude: 0.4,
            center: [0.1, 0.0, -0.2, 0.3],
            width: 0.9,
        }),
    ];
    base.iter()
        .cloned()
        .chain(
            base.iter()
                .map(|c| c.clone().with_orientation(Orientation::LeftHanded)),
        )
        .collect()
}

fn random_point(rng: &mut ChaCha8Rng) -> crate::Vec4 {
    vec4(std::array::from_fn(|_| rng.random_range(-1.0..1.0)))
}

fn random_so4(rng: &mut ChaCha8Rng) -> So4Element {
    So4Element::from_omega(&Omega {
        plus: std::array::from_fn(|_| rng.random_range(-1.0..1.0)),
        minus: std::array::from_fn(|_| rng.random_range(-1.0..1.0)),
    })
}

fn test_gauge() -> GaugeField {
    GaugeField {
        factors: vec![
            GaugeFactor {
                generator: Omega::left([0.0, 1.0, 0.0]),
                angle: ScalarField::PlaneWave {
                    amplitude: 1.1,
                    wavevector: [0.3, 0.7, -0.4, 0.2],
                    phase: 0.5,
                },
            },
            GaugeFactor {
                generator: Omega::left([0.6, 0.0, 0.8]),
                angle: ScalarField::Gaussian {
                    amplitude: 0.9,
                    center: [0.0, 0.3, 0.1, -0.2],
                    width: 1.2,
                },
            },
        ],
    }
}

fn test_connections() -> Result<Vec<Connection>> {
    let inst = Connection::instanton(1.0, [0.1, -0.1, 0.0, 0.2]);
    let pert = Connection::perturbed(
        inst.clone(),
        Bump {
            center: [0.2, 0.1, -0.1, 0.0],
            radius: 1.5,
            direction: [0.5, -0.3, 0.2, 0.7],
            generator: [0.1, 0.8, -0.5],
        },
        0.2,
    );
    let gauged = gauge_transform(&inst, &test_gauge())?;
    Ok(vec![inst, pert, gauged])
}

fn hodge_checks(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let mut inv = Worst::new();
    let mut basis = Worst::new();
    for chart in charts() {
        for _ in 0..8 {
            let mut x = random_point(rng);
            x[0] = x[0].clamp(-3.0, 3.0);
            let mut w = TwoForm::<f64>::zero();
            for i in 0..4 {
                for j in (i + 1)..4 {
                    let v = rng.random_range(-1.0..1.0);
                    w.0[i][j] = v;
                    w.0[j][i] = -v;
                }
            }
            let back = chart.hodge_star(&x, &chart.hodge_star(&x, &w)?)?;
            inv.add(back.sub(&w).max_norm() / w.max_norm());
            let e = chart.orthonormal_frame(&x)?;
            let b = chart.selfdual_basis(&x, &e)?;
            for i in 0..3 {
                let p = chart.hodge_star_bivector(&x, &b.plus[i])?;
                let m = chart.hodge_star_bivector(&x, &b.minus[i])?;
                basis.add((p.0 - b.plus[i].0).norm() / b.plus[i].0.norm());
                basis.add((m.0 + b.minus[i].0).norm() / b.minus[i].0.norm());
            }
        }
    }
    Ok(vec![
        inv.into_check("hodge star is an involution", 1e-12),
        basis.into_check("self-dual basis is (anti-)self-dual", 1e-12),
    ])
}

fn algebra_checks(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut proj = Worst::new();
    let mut comm = Worst::new();
    let mut closed = Worst::new();
    let mut groups = Worst::new();
    for _ in 0..50 {
        let x = random_so4(rng);
        let (l, r) = (project_left(&x), project_right(&x));
        proj.add((project_left(&l).matrix() - l.matrix()).norm());
        proj.add((project_right(&r).matrix() - r.matrix()).norm());
        proj.add(project_right(&l).norm() + project_left(&r).norm());
        proj.add((l.matrix() + r.matrix() - x.matrix()).norm());
        let y = random_so4(rng);
        let (ly, ry) = (project_left(&y), project_right(&y));
        comm.add(commutator(l.matrix(), ry.matrix()).norm());
        comm.add(commutator(r.matrix(), ly.matrix()).norm());
        closed.add(project_right(&l.commutator(&ly)).norm());
        closed.add(project_left(&r.commutator(&ry)).norm());
        groups.add(commutator(&exp_so4(&l), &exp_so4(&ry)).norm());
    }
    for (a, b) in left_basis().iter().zip(right_basis().iter()) {
        comm.add(commutator(a, b).norm());
    }
    vec![
        proj.into_check("left/right projectors are complementary idempotents", 1e-13),
        comm.into_check("left and right subalgebras commute", 1e-13),
        closed.into_check("left and right subalgebras are closed", 1e-13),
        groups.into_check("left and right groups commute", 1e-12),
    ]
}

fn transport_checks(rng: &mut ChaCha8Rng, res: Resolution) -> Result<Vec<Check>> {
    let seed = rng.random();
    let mut curves: Vec<SharedCurve> = random_fourier_loops(seed, 3, [0.1, 0.2, -0.1, 0.0], 0.5, 3)
        .into_iter()
        .map(|c| Arc::new(c) as SharedCurve)
        .collect();
    curves.extend(
        random_open_curves(seed ^ 1, 2, [0.0, -0.1, 0.2, 0.1], 0.5, 3)
            .into_iter()
            .map(|c| Arc::new(c) as SharedCurve),
    );
    let conns = test_connections()?;
    let mut orth = Worst::new();
    let mut frame_orth = Worst::new();
    let mut compose = Worst::new();
    let mut reparam = Worst::new();
    let mut reverse = Worst::new();
    for conn in &conns {
        for c in &curves {
            let path = gauge_transport(conn, c.as_ref(), res)?;
            for u in &path.u {
                orth.add((u.transpose() * u - Mat4::identity()).norm());
            }
            let full = path.last();
            let s = rng.random_range(0.2..0.8);
            let a = gauge_transport_between(conn, c.as_ref(), 0.0, s, res)?;
            let b = gauge_transport_between(conn, c.as_ref(), s, 1.0, res)?;
            compose.add((b * a - full).norm());
            let r = rng.random_range(0.3..0.9);
            let cr = reparameterize_r(c.clone(), r)?;
            // same nodes on the active part, so only round-off separates the two
            let fine = Resolution::new((res.steps as f64 / r).ceil() as usize);
            let ur = gauge_transport(conn, cr.as_ref(), fine)?.last();
            reparam.add((ur - full).norm());
            let back = gauge_transport(conn, &Reversed(c.clone()), res)?.last();
            reverse.add((back * full - Mat4::identity()).norm());
        }
    }
    for chart in charts().into_iter().take(4) {
        for c in &curves {
            let p = levi_civita_transport(&chart, c.as_ref(), res)?;
            for (k, e) in p.frames.iter().enumerate().step_by(17) {
                let g = chart.metric(&c.point(p.grid.times()[k]))?;
                frame_orth.add((e.transpose() * g * e - Mat4::identity()).norm());
            }
        }
    }
    Ok(vec![
        orth.into_check("gauge transport stays orthogonal", 1e-10),
        frame_orth.into_check("frame transport stays orthonormal", 1e-10),
        compose.into_check("transport composes over subintervals", 1e-8),
        reparam.into_check("transport is invariant under reparameterization", 1e-8),
        reverse.into_check("reversed curve inverts transport", 1e-8),
    ])
}

fn gauge_checks(rng: &mut ChaCha8Rng, res: Resolution) -> Result<Vec<Check>> {
    let g = test_gauge();
    let mut curv = Worst::new();
    let mut trans = Worst::new();
    let mut bianchi = Worst::new();
    let chart = MetricChart::flat();
    let seed = rng.random();
    let curves = random_open_curves(seed, 3, [0.1, 0.0, 0.2, -0.1], 0.6, 3);
    for base in test_connections()?.into_iter().take(2) {
        let t = gauge_transform(&base, &g)?;
        for _ in 0..6 {
            let x = random_point(rng);
            let psi = g.eval(&x);
            let f = base.field_strength(&x)?;
            let ft = t.field_strength(&x)?;
            for mu in 0..4 {
                for nu in 0..4 {
                    curv.add((ft.0[mu][nu] - psi.transpose() * f.0[mu][nu] * psi).norm());
                }
            }
            bianchi.add(bianchi_defect(&covariant_curvature(&t, &chart, &x)?));
        }
        for c in &curves {
            let u = gauge_transport(&base, c, res)?.last();
            let ut = gauge_transport(&t, c, res)?.last();
            let expect = g.eval(&c.point(1.0)).transpose() * u * g.eval(&c.point(0.0));
            trans.add((ut - expect).norm());
        }
    }
    Ok(vec![
        curv.into_check("curvature is gauge covariant", 1e-11),
        trans.into_check("transport is gauge covariant", 1e-8),
        bianchi.into_check("Bianchi identity holds", 1e-10),
    ])
}

/// Runs every structural check. `Err` means a check could not be evaluated;
/// failing checks are reported in the result.
pub fn run_selftest(seed: u64) -> Result<SelftestReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let res = Resolution::new(1000);
    let mut checks = hodge_checks(&mut rng)?;
    checks.extend(algebra_checks(&mut rng));
    checks.extend(transport_checks(&mut rng, res)?);
    checks.extend(gauge_checks(&mut rng, res)?);
    Ok(SelftestReport {
        seed,
        pass: checks.iter().all(|c| c.pass),
        checks,
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes() {
        let r = run_selftest(7).unwrap();
        for c in &r.checks {
            assert!(c.pass, "{} defect {:e}", c.name, c.defect);
        }
        assert!(r.pass);
    }

    #[test]
    fn failures_are_reported() {
        let mut w = Worst::new();
        w.add(f64::NAN);
        assert!(!w.into_check("nan", 1.0).pass);
        assert!(!Worst::new().into_check("empty", 1.0).pass);
    }
}
