//! Lévy traces of second-derivative kernels, the modified trace along a
//! rotation curve, and the modified Lévy Laplacian of parallel transport.

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{project_generic, RotationCurve, Side, So4Element};
use crate::coeff::{array_norm, diagonal_trace, trace_product, transpose_defect, Array4, Coeff};
use crate::connection::{codifferential_of, covariant_curvature, Connection};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::{Bivector, MetricChart};
use crate::quadrature::TimeGrid;
use crate::transport::{
    reparameterize_r, transport_on, Curve, Resolution, SharedCurve, TransportResult,
};
use crate::Mat4;

/// `tr(Ω F) = PAIRING · F⟨v_Ω⟩` where `v_Ω` is the bivector of `Ω`.
pub const PAIRING: f64 = 2.0 * std::f64::consts::SQRT_2;

const KERNEL_SYMMETRY_TOL: f64 = 1e-10;

/// Lévy kernel `Q^L` (symmetric) and singular kernel `Q^S` (antisymmetric)
/// of a bilinear form on `H¹₀,₀`, sampled on a time grid, with an optional
/// Volterra table `Q^V[j][k]` that no trace reads.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTriple<C: Coeff> {
    pub grid: TimeGrid,
    pub levy: Vec<Array4<C>>,
    pub singular: Vec<Array4<C>>,
    pub volterra: Option<Vec<Vec<Array4<C>>>>,
}

impl<C: Coeff> KernelTriple<C> {
    pub fn new(grid: TimeGrid, levy: Vec<Array4<C>>, singular: Vec<Array4<C>>) -> Result<Self> {
        if levy.len() != grid.len() || singular.len() != grid.len() {
            return Err(Error::Contract(format!(
                "kernel lengths {}/{} do not match grid of {}",
                levy.len(),
                singular.len(),
                grid.len()
            )));
        }
        for (k, (l, s)) in levy.iter().zip(&singular).enumerate() {
            let scale = array_norm(l).max(array_norm(s)).max(1.0);
            if transpose_defect(l, 1.0) > KERNEL_SYMMETRY_TOL * scale {
                return Err(Error::Contract(format!(
                    "Lévy kernel not symmetric at node {k}"
                )));
            }
            if transpose_defect(s, -1.0) > KERNEL_SYMMETRY_TOL * scale {
                return Err(Error::Contract(format!(
                    "singular kernel not antisymmetric at node {k}"
                )));
            }
        }
        Ok(Self {
            grid,
            levy,
            singular,
            volterra: None,
        })
    }

    /// Splits arbitrary blocks into their symmetric and antisymmetric parts.
    /// The split is orthogonal, so this is the unique decomposition.
    pub fn from_blocks(
        grid: TimeGrid,
        levy: Vec<Array4<C>>,
        singular: Vec<Array4<C>>,
    ) -> Result<Self> {
        let sym = |a: &Array4<C>, s: f64| -> Array4<C> {
            std::array::from_fn(|i| std::array::from_fn(|j| (a[i][j] + a[j][i] * s) * 0.5))
        };
        Self::new(
            grid,
            levy.iter().map(|a| sym(a, 1.0)).collect(),
            singular.iter().map(|a| sym(a, -1.0)).collect(),
        )
    }
}

/// `∫₀¹ tr Q^L(t) dt`.
pub fn levy_trace<C: Coeff>(q: &KernelTriple<C>) -> C {
    let tr: Vec<C> = q.levy.iter().map(diagonal_trace).collect();
    q.grid.integrate(&tr)
}

/// Modified trace `∫tr Q^L − ∫tr(Ω Q^S)` with `Ω = Ẇ W⁻¹`, evaluated both
/// directly and through the left/right split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModifiedTrace<C> {
    pub two_term: C,
    pub three_term: C,
    pub levy_part: C,
    /// `−∫tr(Ω⁺ Q^S₊)`
    pub rot_plus: C,
    /// `−∫tr(Ω⁻ Q^S₋)`
    pub rot_minus: C,
}

fn check_alignment<C: Coeff>(w: &RotationCurve, q: &KernelTriple<C>) -> Result<()> {
    for t in w.kinks() {
        if q.grid.index_of(t).is_none() {
            return Err(Error::Contract(format!(
                "rotation-curve kink at t = {t} is not a node of the kernel grid"
            )));
        }
    }
    Ok(())
}

pub fn modified_levy_trace<C: Coeff>(
    w: &RotationCurve,
    q: &KernelTriple<C>,
) -> Result<ModifiedTrace<C>> {
    check_alignment(w, q)?;
    let omegas = w.spatial_generators(q.grid.times())?;
    let levy_part = levy_trace(q);
    let mut direct = Vec::with_capacity(omegas.len());
    let mut plus = Vec::with_capacity(omegas.len());
    let mut minus = Vec::with_capacity(omegas.len());
    for (om, s) in omegas.iter().zip(&q.singular) {
        direct.push(-trace_product(om.matrix(), s));
        let (sp, sm) = project_generic(s);
        let (op, omn) = (
            crate::algebra::project_left(om),
            crate::algebra::project_right(om),
        );
        plus.push(-trace_product(op.matrix(), &sp));
        minus.push(-trace_product(omn.matrix(), &sm));
    }
    let rot = q.grid.integrate(&direct);
    let rot_plus = q.grid.integrate(&plus);
    let rot_minus = q.grid.integrate(&minus);
    Ok(ModifiedTrace {
        two_term: levy_part + rot,
        three_term: levy_part + rot_plus + rot_minus,
        levy_part,
        rot_plus,
        rot_minus,
    })
}

/// Kernels of `(u, v) ↦ Q(Wu, Wv)`:
/// `Q^L' = WᵀQ^L W + sym(ẆᵀQ^S W)`, `Q^S' = WᵀQ^S W`, with `Ẇ` taken by
/// central differences of `W` with step `h`.
pub fn conjugate_kernels<C: Coeff>(
    w: &RotationCurve,
    q: &KernelTriple<C>,
    h: f64,
) -> Result<KernelTriple<C>> {
    let times = q.grid.times();
    let ws = w.sample(times)?;
    let kinks = w.kinks();
    let mut levy = Vec::with_capacity(times.len());
    let mut singular = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        let wd = derivative(w, t, h, &kinks)?;
        let wm = ws[k];
        let sandwich = |l: &Mat4, a: &Array4<C>, r: &Mat4| -> Array4<C> {
            std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    let mut acc = C::zero();
                    for m in 0..4 {
                        for n in 0..4 {
                            let c = l[(m, i)] * r[(n, j)];
                            if c != 0.0 {
                                acc = acc + a[m][n] * c;
                            }
                        }
                    }
                    acc
                })
            })
        };
        let base = sandwich(&wm, &q.levy[k], &wm);
        let cross = sandwich(&wd, &q.singular[k], &wm);
        levy.push(std::array::from_fn(|i| {
            std::array::from_fn(|j| base[i][j] + (cross[i][j] + cross[j][i]) * 0.5)
        }));
        singular.push(sandwich(&wm, &q.singular[k], &wm));
    }
    KernelTriple::from_blocks(q.grid.clone(), levy, singular)
}

/// Second-order differences of `W`: central in the interior, one-sided at
/// the ends, averaged one-sided at kinks.
fn derivative(w: &RotationCurve, t: f64, h: f64, kinks: &[f64]) -> Result<Mat4> {
    let one_sided = |s: f64| -> Result<Mat4> {
        Ok((w.eval(t)? * -3.0 + w.eval(t + 2.0 * s)? * 4.0 - w.eval(t + 4.0 * s)?) / (4.0 * s))
    };
    let at_kink = kinks.iter().any(|k| (k - t).abs() < 1e-13);
    if t - 2.0 * h < 0.0 {
        one_sided(h / 2.0)
    } else if t + 2.0 * h > 1.0 {
        one_sided(-h / 2.0)
    } else if at_kink {
        Ok((one_sided(h / 2.0)? + one_sided(-h / 2.0)?) * 0.5)
    } else {
        Ok((w.eval(t + h)? - w.eval(t - h)?) / (2.0 * h))
    }
}

/// Analytic Lévy and singular kernels of the second derivative of `U_{1,0}`:
/// `K^L_{μν} = ½ U_{1,t}(−∇_{e_μ}F⟨e_ν, γ̇⟩ − ∇_{e_ν}F⟨e_μ, γ̇⟩)U_{t,0}`,
/// `K^S_{μν} = U_{1,t} F⟨e_μ, e_ν⟩ U_{t,0}`.
pub fn transport_kernels(
    conn: &Connection,
    chart: &MetricChart,
    curve: &dyn Curve,
    res: Resolution,
) -> Result<KernelTriple<Mat4>> {
    let tr = transport_on(conn, chart, curve, res.grid(curve), res.steps)?;
    Ok(evaluate_nodes(conn, chart, &tr, None)?.0)
}

struct NodeTerms {
    levy: Array4<Mat4>,
    singular: Array4<Mat4>,
    ym: Mat4,
    rot_plus: Mat4,
    rot_minus: Mat4,
    scale: f64,
}

/// Per-node kernels and, when `omegas` is given, the integrands of the
/// direct formula (Yang–Mills term and bivector pairings).
fn evaluate_nodes(
    conn: &Connection,
    chart: &MetricChart,
    tr: &TransportResult,
    omegas: Option<&[So4Element]>,
) -> Result<(KernelTriple<Mat4>, Vec<NodeTerms>)> {
    let last = tr.gauge.last();
    let nodes: Vec<Result<NodeTerms>> = (0..tr.points.len())
        .into_par_iter()
        .map(|k| {
            let x = tr.points[k];
            let v = tr.velocities[k];
            let e = tr.frame.frames[k];
            let u = tr.gauge.u[k];
            let left = last * u.transpose();
            let conj = |m: &Mat4| left * m * u;
            let cov = covariant_curvature(conn, chart, &x)?;
            let cols: [crate::Vec4; 4] = std::array::from_fn(|i| e.column(i).into_owned());
            let nab: [[Mat4; 4]; 4] = std::array::from_fn(|m| {
                std::array::from_fn(|n| cov.nabla_eval(&cols[m], &cols[n], &v))
            });
            let levy: Array4<Mat4> = std::array::from_fn(|m| {
                std::array::from_fn(|n| conj(&((nab[m][n] + nab[n][m]) * -0.5)))
            });
            let singular: Array4<Mat4> = std::array::from_fn(|m| {
                std::array::from_fn(|n| conj(&cov.f.eval(&cols[m], &cols[n])))
            });
            let mut terms = NodeTerms {
                levy,
                singular,
                ym: Mat4::zeros(),
                rot_plus: Mat4::zeros(),
                rot_minus: Mat4::zeros(),
                scale: 0.0,
            };
            if let Some(omegas) = omegas {
                let ginv = chart.inverse_metric(&x)?;
                let dstar = codifferential_of(&cov, &ginv);
                let ym: Mat4 = (0..4).map(|n| dstar[n] * v[n]).sum();
                terms.ym = conj(&ym);
                let (fp, fm) = chart.split(&x, &cov.f)?;
                let om = omegas[k].omega();
                let basis = tr.frame.bivectors(k);
                let mut vp = Bivector::zero();
                let mut vm = Bivector::zero();
                for i in 0..3 {
                    vp.0 += basis.plus[i].0 * om.plus[i];
                    vm.0 += basis.minus[i].0 * om.minus[i];
                }
                terms.rot_plus = conj(&fp.pair(&vp)) * -PAIRING;
                terms.rot_minus = conj(&fm.pair(&vm)) * -PAIRING;
                let nsum: f64 = nab.iter().flatten().map(|m| m.norm()).sum();
                let fsum: f64 = cov.f.0.iter().flatten().map(|m| m.norm()).sum();
                terms.scale = nsum + omegas[k].norm() * fsum;
            }
            Ok(terms)
        })
        .collect();
    let nodes: Vec<NodeTerms> = nodes.into_iter().collect::<Result<_>>()?;
    let kernels = KernelTriple::new(
        tr.gauge.grid.clone(),
        nodes.iter().map(|n| n.levy).collect(),
        nodes.iter().map(|n| n.singular).collect(),
    )?;
    Ok((kernels, nodes))
}

/// The modified Lévy Laplacian of `U_{1,0}` along one curve, by the direct
/// formula and by the modified trace of the analytic kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyResult {
    /// `term_ym + term_rot`
    pub value: Mat4,
    /// `∫ U_{1,t} (D_A*F)(γ̇) U_{t,0} dt`
    pub term_ym: Mat4,
    /// `−∫ U_{1,t} tr(Ω F) U_{t,0} dt`
    pub term_rot: Mat4,
    pub term_rot_plus: Mat4,
    pub term_rot_minus: Mat4,
    /// Modified trace of the analytic kernels.
    pub kernel_value: Mat4,
    /// Same, through the left/right split.
    pub kernel_value_split: Mat4,
    pub route_discrepancy: f64,
    /// Quadrature-weighted size of the integrands, for round-off floors.
    pub magnitude: f64,
    pub threshold: f64,
    pub vanishes: bool,
    pub nodes: usize,
}

/// Second derivative of `U_{1,0}` in the directions `u`, `v` on a flat chart:
/// the kernel part `∫K^L⟨u, v⟩ + ½∫K^S⟨u̇, v⟩ + ½∫K^S⟨v̇, u⟩` plus the
/// Volterra part `U_{1,0}[∫G_v C_u + ∫G_u C_v]`, where
/// `G_w(t) = U_{t,0}ᵀ F⟨w, γ̇⟩ U_{t,0}` and `C_w(t) = ∫₀ᵗ G_w`.
pub fn second_variation(
    conn: &Connection,
    chart: &MetricChart,
    curve: &dyn Curve,
    u: &dyn Curve,
    v: &dyn Curve,
    res: Resolution,
) -> Result<Mat4> {
    if !chart.is_flat() {
        return Err(Error::Contract(
            "second variation is implemented in flat coordinates only".into(),
        ));
    }
    let mut extra = u.breakpoints();
    extra.extend(v.breakpoints());
    let grid = res.grid_with(curve, &extra);
    let tr = transport_on(conn, chart, curve, grid, res.steps)?;
    let (q, _) = evaluate_nodes(conn, chart, &tr, None)?;
    let times = q.grid.times();
    let pair = |a: &Array4<Mat4>, x: &crate::Vec4, y: &crate::Vec4| -> Mat4 {
        let mut acc = Mat4::zeros();
        for m in 0..4 {
            for n in 0..4 {
                acc += a[m][n] * (x[m] * y[n]);
            }
        }
        acc
    };
    let mut kernel = Vec::with_capacity(times.len());
    let mut gu = Vec::with_capacity(times.len());
    let mut gv = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        let (ut, vt) = (u.point(t), v.point(t));
        let (ud, vd) = (
            crate::transport::node_velocity(u, t),
            crate::transport::node_velocity(v, t),
        );
        kernel.push(
            pair(&q.levy[k], &ut, &vt)
                + (pair(&q.singular[k], &ud, &vt) + pair(&q.singular[k], &vd, &ut)) * 0.5,
        );
        let f = conn.field_strength(&tr.points[k])?;
        let uk = tr.gauge.u[k];
        gu.push(uk.transpose() * f.eval(&ut, &tr.velocities[k]) * uk);
        gv.push(uk.transpose() * f.eval(&vt, &tr.velocities[k]) * uk);
    }
    let cu = cumulative(times, &gu);
    let cv = cumulative(times, &gv);
    let cross: Vec<Mat4> = (0..times.len())
        .map(|k| gv[k] * cu[k] + gu[k] * cv[k])
        .collect();
    Ok(q.grid.integrate(&kernel) + tr.gauge.last() * q.grid.integrate(&cross))
}

/// Running integral `∫₀^{t_k} f` by the trapezoid rule with Richardson
/// correction from the local slopes (third order on smooth data).
fn cumulative(times: &[f64], f: &[Mat4]) -> Vec<Mat4> {
    let n = times.len();
    let slope = |k: usize| -> Mat4 {
        let (a, b) = (k.saturating_sub(1), (k + 1).min(n - 1));
        (f[b] - f[a]) / (times[b] - times[a])
    };
    let mut out = vec![Mat4::zeros(); n];
    for k in 1..n {
        let h = times[k] - times[k - 1];
        let trap = (f[k] + f[k - 1]) * (0.5 * h);
        let corr = (slope(k - 1) - slope(k)) * (h * h / 12.0);
        out[k] = out[k - 1] + trap + corr;
    }
    out
}

/// Absolute cap on the vanishing threshold.
pub const VANISHING_CAP: f64 = 1e-5;

/// "Zero" means below ten times the larger of the route discrepancy and a
/// round-off floor `64 ε · magnitude`, and never above [`VANISHING_CAP`].
pub fn vanishing_threshold(route_discrepancy: f64, magnitude: f64) -> f64 {
    (10.0 * route_discrepancy.max(64.0 * f64::EPSILON * magnitude)).min(VANISHING_CAP)
}

pub fn modified_levy_laplacian_transport(
    conn: &Connection,
    chart: &MetricChart,
    curve: &dyn Curve,
    w: &RotationCurve,
    res: Resolution,
) -> Result<LevyResult> {
    let grid = res.grid_with(curve, &w.kinks());
    let tr = transport_on(conn, chart, curve, grid, res.steps)?;
    let omegas = w.spatial_generators(tr.grid().times())?;
    let (kernels, nodes) = evaluate_nodes(conn, chart, &tr, Some(&omegas))?;
    let grid = tr.grid();
    let integrate = |f: &dyn Fn(&NodeTerms) -> Mat4| -> Mat4 {
        grid.integrate(&nodes.iter().map(f).collect::<Vec<_>>())
    };
    let term_ym = integrate(&|n| n.ym);
    let term_rot_plus = integrate(&|n| n.rot_plus);
    let term_rot_minus = integrate(&|n| n.rot_minus);
    let term_rot = term_rot_plus + term_rot_minus;
    let value = term_ym + term_rot;
    let mt = modified_levy_trace(w, &kernels)?;
    let route_discrepancy = (value - mt.two_term).norm();
    let magnitude = grid
        .integrate(&nodes.iter().map(|n| n.scale).collect::<Vec<_>>())
        .abs();
    let threshold = vanishing_threshold(route_discrepancy, magnitude);
    for (what, m) in [("value", &value), ("kernel route", &mt.two_term)] {
        if !m.iter().all(|v| v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite {what}")));
        }
    }
    Ok(LevyResult {
        value,
        term_ym,
        term_rot,
        term_rot_plus,
        term_rot_minus,
        kernel_value: mt.two_term,
        kernel_value_split: mt.three_term,
        route_discrepancy,
        magnitude,
        threshold,
        vanishes: value.norm() <= threshold,
        nodes: grid.len(),
    })
}

/// Kernels of `L_f(γ) = ∫₀¹ f(γ(t)) dt`: `Q^L_{μν} = ∇²f(e_μ, e_ν)`, `Q^S = 0`.
pub fn functional_kernels(
    f: &ScalarField,
    chart: &MetricChart,
    curve: &dyn Curve,
    res: Resolution,
) -> Result<KernelTriple<f64>> {
    let grid = res.grid(curve);
    let frames = crate::transport::levi_civita_transport_on(chart, curve, grid.clone())?;
    let mut levy = Vec::with_capacity(grid.len());
    for (k, &t) in grid.times().iter().enumerate() {
        let x = curve.point(t);
        let j = f.jet(&x);
        let gamma = chart.christoffel(&x)?;
        let hess = Mat4::from_fn(|i, l| {
            j.hess[i][l] - (0..4).map(|c| gamma.0[c][i][l] * j.grad[c]).sum::<f64>()
        });
        let e = frames.frames[k];
        let q = e.transpose() * hess * e;
        levy.push(std::array::from_fn(|a| std::array::from_fn(|b| q[(a, b)])));
    }
    let zeros = vec![[[0.0; 4]; 4]; grid.len()];
    KernelTriple::from_blocks(grid, levy, zeros)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalResult {
    /// Modified trace of the functional's kernels.
    pub value: f64,
    /// `∫₀¹ Δ_g f(γ(t)) dt` from the closed-form Laplace–Beltrami operator.
    pub laplace_beltrami: f64,
}

pub fn levy_laplacian_functional(
    f: &ScalarField,
    chart: &MetricChart,
    curve: &dyn Curve,
    w: &RotationCurve,
    res: Resolution,
) -> Result<FunctionalResult> {
    let q = functional_kernels(f, chart, curve, res)?;
    let value = modified_levy_trace(w, &q)?.two_term;
    let lb = q
        .grid
        .times()
        .iter()
        .map(|&t| chart.laplace_beltrami(f, &curve.point(t)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(FunctionalResult {
        value,
        laplace_beltrami: q.grid.integrate(&lb),
    })
}

/// `∫₀¹ L^W(γ, t, t) dt` with `L^W(γ, t, r) = tr(Ω(r) U_{t,0}⁻¹ F⟨e_μ, e_ν⟩ U_{t,0})`.
pub fn rotational_integral(
    conn: &Connection,
    chart: &MetricChart,
    curve: &dyn Curve,
    w: &RotationCurve,
    res: Resolution,
) -> Result<Mat4> {
    let grid = res.grid_with(curve, &w.kinks());
    let tr = transport_on(conn, chart, curve, grid, res.steps)?;
    let omegas = w.spatial_generators(tr.grid().times())?;
    let vals = (0..tr.points.len())
        .map(|k| {
            let f = conn.field_strength(&tr.points[k])?;
            let e = tr.frame.frames[k];
            let u = tr.gauge.u[k];
            let lf = f.in_frame(&e);
            Ok(u.transpose() * trace_product(omegas[k].matrix(), &lf) * u)
        })
        .collect::<Result<Vec<Mat4>>>()?;
    Ok(tr.grid().integrate(&vals))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotationLimitRow {
    pub r: f64,
    pub value_norm: f64,
    pub residual_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotationLimitReport {
    pub rows: Vec<RotationLimitRow>,
    pub values: Vec<Mat4>,
    /// `PAIRING · L₊(γ, 1)⟨w_W^+(γ, 1)⟩`
    pub endpoint: Mat4,
    /// Least-squares slope of `‖residual‖` against `r` through the origin.
    pub fitted_c: f64,
    pub r_squared: f64,
}

/// `∫₀¹ L^W(γ_r, t, t) dt` for each `r` against its `r → 0` limit
/// `L₊(γ(1))⟨w_W^+(γ, 1)⟩`, with a linear fit of the residuals.
pub fn lemma2_limit(
    conn: &Connection,
    chart: &MetricChart,
    curve: SharedCurve,
    w: &RotationCurve,
    rs: &[f64],
    res: Resolution,
) -> Result<RotationLimitReport> {
    if w.side() != Side::Left {
        return Err(Error::Contract(
            "the rotational limit needs a left-isoclinic rotation curve".into(),
        ));
    }
    if rs.is_empty() || rs.windows(2).any(|p| p[1] >= p[0]) {
        return Err(Error::Contract(
            "r sequence must be non-empty and decreasing".into(),
        ));
    }
    let grid = res.grid(curve.as_ref());
    let tr = transport_on(conn, chart, curve.as_ref(), grid, res.steps)?;
    let k = tr.points.len() - 1;
    let x1 = tr.points[k];
    let f = conn.field_strength(&x1)?;
    let (fp, _) = chart.split(&x1, &f)?;
    let alpha = w.alpha_coefficients();
    let basis = tr.frame.bivectors(k);
    let mut wp = Bivector::zero();
    for i in 0..3 {
        wp.0 += basis.plus[i].0 * alpha.plus[i];
    }
    let u1 = tr.gauge.u[k];
    let endpoint = u1.transpose() * fp.pair(&wp) * u1 * PAIRING;
    let mut rows = Vec::new();
    let mut values = Vec::new();
    for &r in rs {
        let cr = reparameterize_r(curve.clone(), r)?;
        let v = rotational_integral(conn, chart, cr.as_ref(), w, res)?;
        rows.push(RotationLimitRow {
            r,
            value_norm: v.norm(),
            residual_norm: (v - endpoint).norm(),
        });
        values.push(v);
    }
    let sxy: f64 = rows.iter().map(|p| p.r * p.residual_norm).sum();
    let sxx: f64 = rows.iter().map(|p| p.r * p.r).sum();
    let fitted_c = sxy / sxx;
    let mean = rows.iter().map(|p| p.residual_norm).sum::<f64>() / rows.len() as f64;
    let ss_res: f64 = rows
        .iter()
        .map(|p| (p.residual_norm - fitted_c * p.r).powi(2))
        .sum();
    let ss_tot: f64 = rows.iter().map(|p| (p.residual_norm - mean).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    };
    Ok(RotationLimitReport {
        rows,
        values,
        endpoint,
        fitted_c,
        r_squared,
    })
}
