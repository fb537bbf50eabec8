use std::collections::BTreeSet;

use horocurv::config::{ConfigOverrides, SuiteConfig, CONFIG_ENV};
use horocurv::report::{run_suite, scan, Status, VerificationReport};
use horocurv::GeomError;

fn cfg(model: &str) -> SuiteConfig {
    SuiteConfig { model: model.into(), samples: Some(2000), ..Default::default() }
}

fn passed_names(r: &VerificationReport) -> BTreeSet<String> {
    r.checks.iter().filter(|c| c.passed).map(|c| c.name.clone()).collect()
}

fn without_timing(r: &VerificationReport) -> String {
    let mut r = r.clone();
    r.timing.clear();
    r.to_json()
}

#[test]
fn hyperbolic_suite_passes() {
    let r = run_suite(&cfg("hyperbolic")).unwrap();
    assert_eq!(r.status, Status::Pass, "{}", r.to_csv());
    assert!(r.error.is_none() && r.skipped.is_empty());
    assert_eq!(r.checks.len(), 13);
    assert!(r.check("horosphere-scalar").unwrap().value.abs() < 1e-5);
}

#[test]
fn complex_hyperbolic_suite_matches_references() {
    let r = run_suite(&SuiteConfig { directions: 2, ..cfg("complex-hyperbolic") }).unwrap();
    assert_eq!(r.status, Status::Pass, "{}", r.to_csv());
    assert!((r.check("horosphere-scalar").unwrap().value + 2.0).abs() < 1e-3);
    assert!(r.check("integrated-identity").unwrap().residual < 1e-3);
    assert!((r.check("sectional-spread").unwrap().value - 3.0).abs() < 1e-6);
    assert_eq!(r.model.dimension, 4);
}

#[test]
fn flat_perturbation_reproduces_hyperbolic_outcomes() {
    let h = run_suite(&cfg("hyperbolic")).unwrap();
    let p = run_suite(&SuiteConfig { amplitude: 0.0, ..cfg("perturbed") }).unwrap();
    assert_eq!(p.status, Status::Pass, "{}", p.to_csv());
    // amplitude 0 is locally symmetric, so nothing is skipped
    assert!(p.skipped.is_empty());
    assert_eq!(passed_names(&h), passed_names(&p));
    let (sh, sp) = (h.check("horosphere-scalar").unwrap(), p.check("horosphere-scalar").unwrap());
    assert!((sh.value - sp.value).abs() < 1e-6);
}

#[test]
fn bumped_model_reports_diagnostics_and_skips_identity() {
    let r = run_suite(&cfg("perturbed")).unwrap();
    assert_eq!(r.status, Status::Pass, "{}", r.to_csv());
    assert_eq!(r.skipped.len(), 1);
    assert!(r.skipped[0].starts_with("integrated-identity"));
    assert!(r.check("integrated-identity").is_none());
    assert!(r.check("sectional-spread").unwrap().value >= 1e-4);
}

#[test]
fn reports_are_deterministic_apart_from_timing() {
    let c = cfg("hyperbolic");
    let (a, b) = (run_suite(&c).unwrap(), run_suite(&c).unwrap());
    assert_eq!(without_timing(&a), without_timing(&b));
    let json: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["status"], "pass");
    assert!(json["timing"]["riccati"].as_f64().unwrap() >= 0.0);
    let other = run_suite(&SuiteConfig { seed: 7, ..c }).unwrap();
    assert_ne!(without_timing(&a), without_timing(&other));
}

#[test]
fn every_check_carries_a_known_tag() {
    let known: BTreeSet<&str> = ["Eq1", "Eq3", "Eq4", "Eq5-6", "Eq7", "Lemma1", "Schur"].into();
    let r = run_suite(&cfg("hyperbolic")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    let tags: BTreeSet<String> =
        json["checks"].as_array().unwrap().iter().map(|c| c["tag"].as_str().unwrap().to_string()).collect();
    assert!(tags.iter().all(|t| known.contains(t.as_str())), "{tags:?}");
    assert_eq!(tags.len(), known.len());

    let csv = r.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "name,tag,comparison,value,reference,residual,tolerance,passed");
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 8);
        assert!(known.contains(fields[1]));
    }
}

#[test]
fn hyperbolic_scan_has_flat_horospheres() {
    let table = scan(&SuiteConfig { samples: Some(100), horizon: 20.0, ..cfg("hyperbolic") }).unwrap();
    assert_eq!(table.rows.len(), 100);
    let worst = table.rows.iter().map(|r| r.s.abs()).fold(0.0, f64::max);
    assert!(worst < 1e-5, "{worst:e}");
    let csv = table.to_csv();
    assert_eq!(csv.lines().count(), 101);
    let width = csv.lines().next().unwrap().split(',').count();
    assert!(csv.lines().all(|l| l.split(',').count() == width));
}

#[test]
fn complex_hyperbolic_scan_has_constant_scalar() {
    let table = scan(&SuiteConfig { samples: Some(3), ..cfg("complex-hyperbolic") }).unwrap();
    for r in &table.rows {
        assert!((r.s + 2.0).abs() < 1e-3, "{}", r.s);
    }
}

#[test]
fn zero_samples_are_rejected() {
    let c = SuiteConfig { samples: Some(0), ..cfg("hyperbolic") };
    assert!(matches!(scan(&c), Err(GeomError::Config(_))));
    assert!(matches!(run_suite(&c), Err(GeomError::Config(_))));
}

#[test]
fn unknown_model_is_an_error() {
    assert!(run_suite(&cfg("spherical")).is_err());
}

#[test]
fn stage_failure_returns_partial_report() {
    let c = SuiteConfig { tol: 1e-14, horizon: 1.0, max_horizon: 1.0, ..cfg("hyperbolic") };
    let r = run_suite(&c).unwrap();
    assert_eq!(r.status, Status::Error);
    assert_eq!(r.status.exit_code(), 2);
    assert!(r.error.as_deref().unwrap().contains("converge"), "{:?}", r.error);
    assert!(r.direction.is_some());
    assert!(r.checks.is_empty());
}

#[test]
fn config_file_environment_and_flags_take_precedence_in_order() {
    let dir = std::env::temp_dir().join(format!("horocurv-report-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let env_file = dir.join("env.conf");
    let arg_file = dir.join("arg.conf");
    std::fs::write(&env_file, "# from env\nmodel = perturbed\nseed = 5\nstep = 0.002\n").unwrap();
    std::fs::write(&arg_file, "model = complex-hyperbolic\nmax-horizon = 90\n").unwrap();

    std::env::set_var(CONFIG_ENV, &env_file);
    let none = ConfigOverrides::default();
    let from_env = SuiteConfig::resolve(None, &none).unwrap();
    assert_eq!((from_env.model.as_str(), from_env.seed, from_env.step), ("perturbed", 5, 0.002));

    let explicit = SuiteConfig::resolve(Some(&arg_file), &none).unwrap();
    assert_eq!(explicit.model, "complex-hyperbolic");
    assert_eq!(explicit.seed, 42);
    assert_eq!(explicit.max_horizon, 90.0);

    let cli = ConfigOverrides { seed: Some(9), ..Default::default() };
    let layered = SuiteConfig::resolve(None, &cli).unwrap();
    assert_eq!((layered.model.as_str(), layered.seed), ("perturbed", 9));

    std::fs::write(&env_file, "colour = blue\n").unwrap();
    assert!(matches!(SuiteConfig::resolve(None, &none), Err(GeomError::Config(_))));
    std::env::remove_var(CONFIG_ENV);
    assert_eq!(SuiteConfig::resolve(None, &none).unwrap(), SuiteConfig::default());
    std::fs::remove_dir_all(&dir).ok();
}
