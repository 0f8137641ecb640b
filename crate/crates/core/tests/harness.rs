use serde_json::Value;
use ultraspherical::harness::{check_ids, registry, run_suite, run_suite_report, RunConfig};
use ultraspherical::Error;

/// Cheap checks covering random inputs, rayon-parallel kernels and memoised values.
fn quick() -> Vec<String> {
    [
        "plancherel",
        "heat-semigroup-law",
        "transform-identity",
        "poisson-subordination",
        "cz-transplant-size",
        "cz-transplant-regularity",
        "transplant-duality",
        "ap-linear-weight-growth",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

fn quick_config() -> RunConfig {
    let mut cfg = RunConfig { only: quick(), record_runtime: false, ..Default::default() };
    cfg.sizes.certify = 64;
    cfg
}

#[test]
fn same_seed_gives_identical_json() {
    let cfg = quick_config();
    let a = run_suite_report(&cfg).unwrap().to_json().unwrap();
    let b = run_suite_report(&cfg).unwrap().to_json().unwrap();
    assert_eq!(a, b);
}

#[test]
fn serial_and_parallel_runs_agree() {
    let mut one = quick_config();
    one.threads = Some(1);
    let mut four = quick_config();
    four.threads = Some(4);
    let a = run_suite(&one).unwrap();
    let b = run_suite(&four).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn other_seed_changes_random_checks() {
    let cfg = RunConfig { only: vec!["plancherel".into()], record_runtime: false, ..Default::default() };
    let other = RunConfig { seed: cfg.seed + 1, ..cfg.clone() };
    let a = run_suite(&cfg).unwrap();
    let b = run_suite(&other).unwrap();
    assert_ne!(a[0].fitted, b[0].fitted);
}

#[test]
fn reports_follow_registry_order() {
    let mut cfg = quick_config();
    cfg.only.reverse();
    let r = run_suite(&cfg).unwrap();
    let ids: Vec<&str> = r.iter().map(|r| r.id.as_str()).collect();
    let order: Vec<&str> = check_ids().into_iter().filter(|id| ids.contains(id)).collect();
    assert_eq!(ids, order);
    assert_eq!(ids.len(), quick().len());
}

#[test]
fn filter_selects_exactly_one() {
    let cfg = RunConfig { only: vec!["chebyshev-closed-form".into()], ..Default::default() };
    let r = run_suite(&cfg).unwrap();
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].id, "chebyshev-closed-form");
}

#[test]
fn unknown_check_is_a_configuration_error() {
    let cfg = RunConfig { only: vec!["g9-made-up".into()], ..Default::default() };
    assert!(matches!(run_suite(&cfg), Err(Error::Config(_))));
}

#[test]
fn invalid_config_is_rejected() {
    let bad = [
        RunConfig { t_grid: "1,2".into(), ..Default::default() },
        RunConfig { lambdas: vec![], ..Default::default() },
        RunConfig { ps: vec![1.0], ..Default::default() },
        RunConfig { threads: Some(0), ..Default::default() },
    ];
    for cfg in bad {
        assert!(matches!(run_suite(&cfg), Err(Error::Config(_)) | Err(Error::Domain(_))), "{cfg:?}");
    }
}

#[test]
fn registry_covers_every_criterion() {
    let reg = registry();
    for a in 1..=12 {
        let c = format!("A{a}");
        assert!(reg.iter().any(|s| s.criterion == c), "{c}");
    }
    assert!(check_ids().contains(&"g1-heat-ratio"));
}

#[test]
fn json_has_documented_shape() {
    let cfg = RunConfig { only: vec!["plancherel".into(), "ap-sqrt-weight-stable".into()], ..Default::default() };
    let suite = run_suite_report(&cfg).unwrap();
    let v: Value = serde_json::from_str(&suite.to_json().unwrap()).unwrap();
    assert!(v["config"].is_object());
    assert_eq!(v["summary"]["passed"].as_u64().unwrap() + v["summary"]["failed"].as_u64().unwrap(), 2);
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    for r in reports {
        for key in ["id", "parameters", "fitted", "tolerance", "observed", "pass", "runtime_ms"] {
            assert!(r.get(key).is_some(), "missing {key}");
        }
    }
    let sc = &reports[1]["scaling"];
    for key in ["n", "n2", "ratio"] {
        assert!(sc.get(key).is_some(), "scaling missing {key}");
    }
}

#[test]
fn pass_flag_matches_rule() {
    let mut cfg = quick_config();
    cfg.tolerances.insert("plancherel".into(), 0.0);
    for r in run_suite(&cfg).unwrap() {
        assert_eq!(r.pass, r.error.is_none() && r.rule.passes(r.observed, r.tolerance), "{}", r.id);
    }
}
