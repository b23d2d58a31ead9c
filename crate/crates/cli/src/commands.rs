//! One function per subcommand, each producing a report and its tables.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use gauge_levy::connection::{action_and_charge, codifferential, curvature};
use gauge_levy::holonomy::{
    check_w_conditions, classify_from_holonomies, classify_holonomy, orbit_span_report, synthetic_so2_holonomies,
};
use gauge_levy::levy::{lemma2_limit, modified_levy_laplacian_transport, LevyResult};
use gauge_levy::selftest::run_selftest;
use gauge_levy::transport::Curve;
use gauge_levy::{algebra::Side, Mat4, Vec4};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{ExperimentConfig, HolonomySource, LevyExpectation};
use crate::report::{Outcome, Report, Table};
use crate::CliError;

fn num(v: f64) -> String {
    v.to_string()
}

fn matrix(m: &Mat4) -> Vec<Vec<f64>> {
    (0..4).map(|i| (0..4).map(|j| m[(i, j)]).collect()).collect()
}

fn report(cfg: &ExperimentConfig, command: &str, pass: bool, tol: &[(&str, f64)], result: serde_json::Value) -> Report {
    Report {
        command: command.into(),
        pass,
        seed: cfg.seed,
        config_hash: cfg.hash(),
        tolerances: tol.iter().map(|(k, v)| (k.to_string(), *v)).collect::<BTreeMap<_, _>>(),
        result,
    }
}

pub fn verify_instanton(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let v = cfg.verify;
    if v.points_per_axis < 2 {
        return Err(CliError::Usage("verify.points_per_axis must be at least 2".into()));
    }
    let n = v.points_per_axis;
    let axis: Vec<f64> = (0..n)
        .map(|i| -v.half_width + 2.0 * v.half_width * i as f64 / (n - 1) as f64)
        .collect();
    let point = |k: usize| Vec4::new(axis[k % n], axis[(k / n) % n], axis[(k / (n * n)) % n], axis[k / (n * n * n)]);
    let samples = (0..n.pow(4))
        .into_par_iter()
        .map(|k| -> Result<[f64; 4], CliError> {
            let x = point(k);
            let (f2, p2, m2) = curvature(&cfg.connection, &cfg.chart, &x)?.norms_sq(&cfg.chart)?;
            let d = codifferential(&cfg.connection, &cfg.chart, &x)?;
            let dn = d.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt();
            let ratio = if f2 > 0.0 { (p2 / f2).sqrt() } else { 0.0 };
            Ok([ratio, dn, p2.sqrt(), m2.sqrt()])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut worst = [0.0f64; 4];
    for s in &samples {
        for i in 0..4 {
            worst[i] = worst[i].max(s[i]);
        }
    }
    if worst.iter().any(|w| !w.is_finite()) {
        return Err(CliError::Numeric("non-finite curvature sample".into()));
    }
    let pass = worst[0] < v.ratio_tolerance && worst[1] < v.codifferential_tolerance;
    let mut t = Table::new("verify_instanton", &["quantity", "max"]);
    for (name, w) in ["self_dual_ratio", "codifferential", "self_dual_norm", "anti_self_dual_norm"]
        .iter()
        .zip(worst)
    {
        t.push([name.to_string(), num(w)]);
    }
    let rep = report(
        cfg,
        "verify-instanton",
        pass,
        &[("self_dual_ratio", v.ratio_tolerance), ("codifferential", v.codifferential_tolerance)],
        json!({
            "points": samples.len(),
            "max_self_dual_ratio": worst[0],
            "max_codifferential": worst[1],
            "max_self_dual_norm": worst[2],
            "max_anti_self_dual_norm": worst[3],
        }),
    );
    Ok(Outcome { report: rep, tables: vec![t] })
}

fn levy_entry(i: usize, r: &LevyResult) -> serde_json::Value {
    json!({
        "curve": i,
        "value_norm": r.value.norm(),
        "term_ym_norm": r.term_ym.norm(),
        "term_rot_plus_norm": r.term_rot_plus.norm(),
        "term_rot_minus_norm": r.term_rot_minus.norm(),
        "route_discrepancy": r.route_discrepancy,
        "threshold": r.threshold,
        "vanishes": r.vanishes,
        "value": matrix(&r.value),
    })
}

pub fn levy(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let w = cfg.rotation_curve()?;
    let res = cfg.resolution();
    let curves = cfg.curves();
    let results = curves
        .par_iter()
        .map(|c| modified_levy_laplacian_transport(&cfg.connection, &cfg.chart, c.as_ref(), &w, res))
        .collect::<Result<Vec<_>, _>>()?;
    let spec = cfg.levy;
    let routes_ok = results.iter().all(|r| r.route_discrepancy < spec.route_tolerance);
    let verdict = match spec.expect {
        LevyExpectation::Vanishes => results.iter().all(|r| r.vanishes),
        LevyExpectation::Nonzero => results.iter().any(|r| r.value.norm() > spec.nonzero_tolerance),
    };
    let mut t = Table::new(
        "levy",
        &["curve", "value_norm", "term_ym_norm", "term_rot_plus_norm", "term_rot_minus_norm", "route_discrepancy", "threshold", "vanishes"],
    );
    for (i, r) in results.iter().enumerate() {
        t.push([
            i.to_string(),
            num(r.value.norm()),
            num(r.term_ym.norm()),
            num(r.term_rot_plus.norm()),
            num(r.term_rot_minus.norm()),
            num(r.route_discrepancy),
            num(r.threshold),
            r.vanishes.to_string(),
        ]);
    }
    let max_disc = results.iter().map(|r| r.route_discrepancy).fold(0.0, f64::max);
    let rep = report(
        cfg,
        "levy",
        routes_ok && verdict,
        &[("route_discrepancy", spec.route_tolerance), ("nonzero", spec.nonzero_tolerance)],
        json!({
            "expect": spec.expect,
            "max_route_discrepancy": max_disc,
            "all_vanish": results.iter().all(|r| r.vanishes),
            "curves": results.iter().enumerate().map(|(i, r)| levy_entry(i, r)).collect::<Vec<_>>(),
        }),
    );
    Ok(Outcome { report: rep, tables: vec![t] })
}

pub fn holonomy(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let class = match cfg.holonomy.source {
        HolonomySource::Chart => {
            let curves = cfg.curves();
            if !curves.iter().all(|c| gauge_levy::transport::is_loop(c.as_ref())) {
                return Err(CliError::Usage("holonomy needs a loop family (curves.kind = \"fourier_loops\")".into()));
            }
            let refs: Vec<&dyn Curve> = curves.iter().map(|c| c.as_ref()).collect();
            classify_holonomy(&cfg.chart, &refs, cfg.resolution())?
        }
        HolonomySource::SyntheticSo2 => classify_from_holonomies(&synthetic_so2_holonomies(cfg.seed, cfg.curves.count))?,
    };
    let class_name = match class.class {
        gauge_levy::holonomy::HolonomyClass::Trivial => "Trivial",
        gauge_levy::holonomy::HolonomyClass::So2 => "SO2",
        gauge_levy::holonomy::HolonomyClass::So3 => "SO3",
    };
    let w = cfg.rotation_curve()?;
    let conditions = if w.side() == Side::Left { Some(check_w_conditions(&w, &class)?) } else { None };
    let orbit = orbit_span_report(&class, &w.alpha_coefficients().plus, cfg.seed);
    let expected = cfg.holonomy.expect.as_deref().is_none_or(|e| e == class_name);
    let mut t = Table::new("holonomy_loops", &["loop", "angle", "orthogonality_defect", "cross_block"]);
    for (i, d) in class.loops.iter().enumerate() {
        t.push([i.to_string(), num(d.angle), num(d.orthogonality_defect), num(d.cross_block)]);
    }
    let rep = report(
        cfg,
        "holonomy",
        expected,
        &[
            ("relative_cutoff", gauge_levy::holonomy::RELATIVE_CUTOFF),
            ("absolute_floor", gauge_levy::holonomy::ABSOLUTE_FLOOR),
            ("projection", gauge_levy::holonomy::PROJECTION_TOL),
        ],
        json!({
            "source": cfg.holonomy.source,
            "expected_class": cfg.holonomy.expect,
            "classification": class,
            "rotation_conditions": conditions,
            "orbit_span": orbit,
        }),
    );
    Ok(Outcome { report: rep, tables: vec![t] })
}

pub fn charge(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let spec = &cfg.charge;
    let (s, k) = action_and_charge(&cfg.connection, &cfg.chart, &spec.region)?;
    let bound = 4.0 * PI * PI * k.value.abs();
    let saturation = (s.value - bound).abs() / s.value.max(f64::MIN_POSITIVE);
    let saturated = s.value == 0.0 && k.value == 0.0 || saturation <= spec.saturation_tolerance;
    let integral = (k.value - k.value.round()).abs() <= spec.integrality_tolerance;
    let mut t = Table::new("charge", &["quantity", "value", "tail_bound"]);
    t.push(["action".to_string(), num(s.value), num(s.tail_bound)]);
    t.push(["charge".to_string(), num(k.value), num(k.tail_bound)]);
    let rep = report(
        cfg,
        "charge",
        saturated && integral,
        &[("saturation", spec.saturation_tolerance), ("integrality", spec.integrality_tolerance)],
        json!({
            "region": spec.region,
            "action": s,
            "charge": k,
            "four_pi_squared_abs_k": bound,
            "relative_saturation_gap": saturation,
            "nearest_integer": k.value.round(),
        }),
    );
    Ok(Outcome { report: rep, tables: vec![t] })
}

pub fn lemma2(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let w = cfg.rotation_curve()?;
    let curve = cfg.curves().swap_remove(cfg.lemma2.curve_index);
    let rep2 = lemma2_limit(&cfg.connection, &cfg.chart, curve, &w, &cfg.lemma2.rs, cfg.resolution())?;
    let pass = rep2.fitted_c > 0.0 && rep2.r_squared >= cfg.lemma2.min_r_squared;
    let mut t = Table::new("lemma2", &["r", "value_norm", "residual_norm", "fitted_bound"]);
    for row in &rep2.rows {
        t.push([num(row.r), num(row.value_norm), num(row.residual_norm), num(rep2.fitted_c * row.r)]);
    }
    let rep = report(
        cfg,
        "lemma2",
        pass,
        &[("min_r_squared", cfg.lemma2.min_r_squared)],
        json!({
            "curve_index": cfg.lemma2.curve_index,
            "rows": rep2.rows,
            "endpoint": matrix(&rep2.endpoint),
            "endpoint_norm": rep2.endpoint.norm(),
            "fitted_c": rep2.fitted_c,
            "r_squared": rep2.r_squared,
        }),
    );
    Ok(Outcome { report: rep, tables: vec![t] })
}

pub fn selftest(seed: u64) -> Result<Outcome, CliError> {
    let r = run_selftest(seed)?;
    let mut t = Table::new("selftest", &["check", "pass", "defect", "tolerance", "samples"]);
    for c in &r.checks {
        t.push([c.name.clone(), c.pass.to_string(), num(c.defect), num(c.tolerance), c.samples.to_string()]);
    }
    let tol: BTreeMap<String, f64> = r.checks.iter().map(|c| (c.name.clone(), c.tolerance)).collect();
    let hash = {
        use sha2::{Digest, Sha256};
        Sha256::digest(format!("selftest:{seed}").as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    };
    let rep = Report {
        command: "selftest".into(),
        pass: r.pass,
        seed,
        config_hash: hash,
        tolerances: tol,
        result: serde_json::to_value(&r).expect("report serializes"),
    };
    Ok(Outcome { report: rep, tables: vec![t] })
}
