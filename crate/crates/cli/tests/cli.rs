use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn config(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    std::fs::read_to_string(p).expect("example config exists")
}

/// The flat-instanton example shrunk to run in a few seconds.
fn small_instanton() -> String {
    config("instanton_flat.toml")
        .replace("count = 20", "count = 3")
        .replace("steps = 1000", "steps = 300")
        .replace("points_per_axis = 20", "points_per_axis = 6")
        .replace("radial_nodes = 96, angular_nodes = 16", "radial_nodes = 64, angular_nodes = 8")
}

struct Run {
    dir: TempDir,
    out: Output,
}

impl Run {
    fn code(&self) -> i32 {
        self.out.status.code().expect("exited normally")
    }

    fn out_dir(&self) -> PathBuf {
        self.dir.path().join("out")
    }

    fn report(&self) -> serde_json::Value {
        let text = std::fs::read_to_string(self.out_dir().join("report.json")).expect("report written");
        serde_json::from_str(&text).expect("valid json")
    }

    fn report_bytes(&self) -> Vec<u8> {
        std::fs::read(self.out_dir().join("report.json")).expect("report written")
    }
}

fn run(args: &[&str], cfg: Option<&str>) -> Run {
    let dir = TempDir::new().unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gauge-levy"));
    cmd.args(args).arg("--out-dir").arg(dir.path().join("out"));
    if let Some(text) = cfg {
        let p = dir.path().join("config.toml");
        std::fs::write(&p, text).unwrap();
        cmd.arg("--config").arg(p);
    }
    let out = cmd.output().expect("binary runs");
    Run { dir, out }
}

#[test]
fn selftest_passes_and_is_deterministic() {
    let a = run(&["selftest", "--seed-override", "3"], None);
    assert_eq!(a.code(), 0, "{}", String::from_utf8_lossy(&a.out.stderr));
    let b = run(&["selftest", "--seed-override", "3"], None);
    assert_eq!(a.report_bytes(), b.report_bytes());
    assert!(a.out_dir().join("tables/selftest.csv").exists());
}

#[test]
fn levy_on_instanton_vanishes_and_is_thread_independent() {
    let cfg = small_instanton();
    let a = run(&["levy", "--jobs", "1"], Some(&cfg));
    assert_eq!(a.code(), 0, "{}", String::from_utf8_lossy(&a.out.stderr));
    let b = run(&["levy", "--jobs", "4"], Some(&cfg));
    assert_eq!(a.report_bytes(), b.report_bytes());
    let r = a.report();
    assert_eq!(r["result"]["all_vanish"], true);
    assert_eq!(r["result"]["curves"].as_array().unwrap().len(), 3);
    assert!(r["config_hash"].as_str().unwrap().len() == 64);
    let csv = std::fs::read_to_string(a.out_dir().join("tables/levy.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn levy_flags_the_perturbation() {
    let cfg = small_instanton().replace(
        "[connection]\npreset = \"quaternionic_instanton\"\nrho = 1.0\ncenter = [0.0, 0.0, 0.0, 0.0]\nduality_sign = \"anti_self_dual\"",
        "[connection]\npreset = \"perturbed\"\namplitude = 0.1\n\n[connection.base]\npreset = \"quaternionic_instanton\"\nrho = 1.0\ncenter = [0.0, 0.0, 0.0, 0.0]\n\n[connection.bump]\ncenter = [0.3, -0.2, 0.1, 0.2]\nradius = 1.5\ndirection = [0.4, -0.7, 0.5, 0.3]\ngenerator = [0.3, 0.8, -0.5]",
    );
    assert!(cfg.contains("perturbed"));
    let r = run(&["levy"], Some(&cfg));
    assert_eq!(r.code(), 1);
    assert_eq!(r.report()["pass"], false);
    let r = run(&["verify-instanton"], Some(&cfg));
    assert_eq!(r.code(), 1);
    assert!(r.report()["result"]["max_self_dual_ratio"].as_f64().unwrap() > 1e-3);
}

#[test]
fn right_rotation_reports_anti_self_dual_pairing() {
    let cfg = small_instanton().replace("plus = [0.7, -1.2, 0.4], minus = [0.0, 0.0, 0.0]", "plus = [0.0, 0.0, 0.0], minus = [1.0, 0.0, 0.0]").replace("side = \"left\"", "side = \"right\"");
    let r = run(&["levy"], Some(&cfg));
    assert_eq!(r.code(), 1);
    let curves = r.report()["result"]["curves"].clone();
    assert!(curves.as_array().unwrap().iter().all(|c| c["term_rot_minus_norm"].as_f64().unwrap() > 1e-3));
    // the endpoint limit is defined for left rotations only
    assert_eq!(run(&["lemma2"], Some(&cfg)).code(), 2);
}

#[test]
fn zero_connection_is_trivially_fine() {
    let cfg = small_instanton().replace(
        "preset = \"quaternionic_instanton\"\nrho = 1.0\ncenter = [0.0, 0.0, 0.0, 0.0]\nduality_sign = \"anti_self_dual\"",
        "preset = \"zero\"",
    );
    let r = run(&["verify-instanton"], Some(&cfg));
    assert_eq!(r.code(), 0);
    let r = run(&["levy"], Some(&cfg));
    assert_eq!(r.code(), 0);
    for c in r.report()["result"]["curves"].as_array().unwrap() {
        assert_eq!(c["value_norm"].as_f64().unwrap(), 0.0);
    }
    assert_eq!(run(&["charge"], Some(&cfg)).code(), 0);
}

#[test]
fn charge_and_verification_of_instanton() {
    let cfg = small_instanton();
    let r = run(&["charge"], Some(&cfg));
    assert_eq!(r.code(), 0, "{}", String::from_utf8_lossy(&r.out.stderr));
    let k = r.report()["result"]["charge"]["value"].as_f64().unwrap();
    assert!((k + 1.0).abs() < 0.02);
    assert_eq!(run(&["verify-instanton"], Some(&cfg)).code(), 0);
}

#[test]
fn holonomy_classes_and_expectations() {
    let flat = small_instanton().replace("count = 3", "count = 10");
    let r = run(&["holonomy"], Some(&flat));
    assert_eq!(r.code(), 0);
    assert_eq!(r.report()["result"]["classification"]["class"], "Trivial");
    assert_eq!(r.report()["result"]["rotation_conditions"]["pass"], false);
    let cfg = config("round_s4_holonomy.toml").replace("count = 50", "count = 12").replace("steps = 1000", "steps = 300");
    let r = run(&["holonomy"], Some(&cfg));
    assert_eq!(r.code(), 0);
    assert_eq!(r.report()["result"]["orbit_span"]["span_dimension"], 3);
    let wrong = cfg.replace("expect = \"SO3\"", "expect = \"SO2\"");
    assert_eq!(run(&["holonomy"], Some(&wrong)).code(), 1);
    let so2 = run(&["holonomy"], Some(&config("synthetic_so2.toml")));
    assert_eq!(so2.code(), 0);
    assert_eq!(so2.report()["result"]["classification"]["fixed_bivector"][0], 1.0);
}

#[test]
fn lemma2_on_perturbed_example() {
    let cfg = config("perturbed_flat.toml").replace("steps = 2000", "steps = 800");
    let r = run(&["lemma2"], Some(&cfg));
    assert_eq!(r.code(), 0, "{}", String::from_utf8_lossy(&r.out.stderr));
    let rep = r.report();
    assert!(rep["result"]["fitted_c"].as_f64().unwrap() > 0.0);
    assert!(rep["result"]["r_squared"].as_f64().unwrap() > 0.99);
    let csv = std::fs::read_to_string(r.out_dir().join("tables/lemma2.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn seed_override_is_recorded() {
    let cfg = small_instanton();
    let a = run(&["levy"], Some(&cfg));
    let b = run(&["levy", "--seed-override", "9"], Some(&cfg));
    assert_eq!(b.report()["seed"], 9);
    assert_ne!(a.report()["config_hash"], b.report()["config_hash"]);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["levy"], None).code(), 2);
    assert_eq!(run(&["levy"], Some("seed = ")).code(), 2);
    assert_eq!(run(&["frobnicate"], None).code(), 2);
    assert_eq!(run(&["levy", "--jobs", "0"], Some(&small_instanton())).code(), 2);
    let bad = small_instanton().replace("count = 3", "count = 3\nextra = 1");
    assert_eq!(run(&["levy"], Some(&bad)).code(), 2);
}

#[test]
fn numeric_failures_exit_with_three() {
    let cfg = small_instanton().replace(
        "[chart]\npreset = \"flat\"",
        "[chart]\npreset = \"conformally_flat\"\nfactor = { family = \"constant\", value = 1000.0 }",
    );
    assert!(cfg.contains("conformally_flat"));
    let r = run(&["verify-instanton"], Some(&cfg));
    assert_eq!(r.code(), 3, "{}", String::from_utf8_lossy(&r.out.stderr));
}
