//! Verification harness: run configuration, seeded inputs, the check registry and
//! the report schema.

mod checks;
mod config;
mod random;
mod report;

pub use config::{RunConfig, Sizes};
pub use random::{derived_seed, random_sequence, Distribution};
pub use report::{Rule, Scaling, Summary, SuiteReport, VerificationReport};

use crate::error::{Error, Result};
use serde_json::Value;
use std::any::Any;
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};
use std::time::Instant;

/// A registered check.
#[derive(Clone, Copy)]
pub struct CheckSpec {
    pub id: &'static str,
    pub criterion: &'static str,
    pub description: &'static str,
    pub rule: Rule,
    pub tolerance: f64,
    run: fn(&Ctx, f64) -> Result<Outcome>,
}

impl std::fmt::Debug for CheckSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CheckSpec")
            .field("id", &self.id)
            .field("criterion", &self.criterion)
            .field("tolerance", &self.tolerance)
            .finish()
    }
}

/// What a check hands back to the runner.
#[derive(Debug, Default)]
pub(crate) struct Outcome {
    parameters: BTreeMap<String, Value>,
    fitted: BTreeMap<String, f64>,
    observed: f64,
    /// Replaces the configured tolerance (for tolerances that depend on `N`).
    tolerance: Option<f64>,
    scaling: Option<Scaling>,
}

impl Outcome {
    fn new(observed: f64) -> Self {
        Self { observed, ..Default::default() }
    }
    fn param(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.parameters.insert(key.to_string(), v.into());
        self
    }
    fn fit(mut self, fitted: impl IntoIterator<Item = (String, f64)>) -> Self {
        self.fitted.extend(fitted);
        self
    }
    fn scaling(mut self, s: Scaling) -> Self {
        self.scaling = Some(s);
        self
    }
    fn tolerance(mut self, t: f64) -> Self {
        self.tolerance = Some(t);
        self
    }
}

/// Run context: the config plus a cache shared between checks, so that scaling
/// checks reuse the size-`N` value of their sibling.
pub(crate) struct Ctx<'a> {
    cfg: &'a RunConfig,
    memo: Mutex<HashMap<String, Arc<dyn Any + Send + Sync>>>,
}

impl<'a> Ctx<'a> {
    fn new(cfg: &'a RunConfig) -> Self {
        Self { cfg, memo: Mutex::new(HashMap::new()) }
    }

    fn memo<T: Clone + Send + Sync + 'static>(&self, key: &str, make: impl FnOnce() -> Result<T>) -> Result<T> {
        if let Some(v) = self.memo.lock().expect("memo lock").get(key) {
            if let Some(t) = v.downcast_ref::<T>() {
                return Ok(t.clone());
            }
        }
        let v = make()?;
        self.memo.lock().expect("memo lock").insert(key.to_string(), Arc::new(v.clone()));
        Ok(v)
    }
}

macro_rules! check {
    ($id:literal, $crit:literal, $rule:expr, $tol:expr, $run:path, $desc:literal) => {
        CheckSpec { id: $id, criterion: $crit, description: $desc, rule: $rule, tolerance: $tol, run: $run }
    };
}

/// Every check in registry order.
pub fn registry() -> Vec<CheckSpec> {
    use checks::*;
    use Rule::*;
    vec![
        check!("plancherel", "A1", AtMost, 1e-11, plancherel, "|‖F_λ f‖² − 1| for random unit f"),
        check!("heat-contraction", "A2", AtMost, 1e-12, heat_contraction, "‖W_t f‖₂ − 1, both routes"),
        check!("heat-semigroup-law", "A2", AtMost, 1e-10, heat_semigroup_law, "‖W_s W_t f − W_{s+t} f‖₂, both routes"),
        check!("g-spectral-heat", "A3", AtMost, 1e-6, g_spectral_heat, "spectral heat g^k aggregate against Γ(2k)4^{−k}"),
        check!("g-spectral-poisson", "A3", AtMost, 1e-6, g_spectral_poisson, "spectral Poisson g^k aggregate against Γ(2k)4^{−k}"),
        check!("g1-heat-ratio", "A3", AtMost, 2e-2, g1_heat_ratio, "|‖g¹_W f‖₂/‖f‖₂ − 1/2| in sequence space"),
        check!("g1-heat-ratio-scaling", "A3", AtMost, 0.65, g1_heat_ratio_scaling, "heat g¹ ratio defect at 2N over N"),
        check!("poisson-g-ratio", "A3", AtMost, 2e-2, poisson_g_ratio, "|‖g^k_P f‖₂/‖f‖₂ − √(Γ(2k)4^{−k})|, k = 1, 2, in sequence space"),
        check!("poisson-g-ratio-scaling", "A3", AtMost, 0.65, poisson_g_ratio_scaling, "Poisson g^k ratio defect at 2N over N"),
        check!("hypergroup-identity", "A4", AtMost, 1e-14, hypergroup_identity, "‖f # δ_0/√w(0) − f‖_∞"),
        check!("transform-identity", "A4", AtMost, 1e-10, transform_identity, "F(f#g) against (1−x²)^{1/4−λ/2} Ff Fg at nodes"),
        check!("linearization-oracle", "A5", AtMost, 1e-9, linearization_oracle, "closed-form c_λ(n,m,k) against quadrature"),
        check!("chebyshev-closed-form", "A6", AtMost, 1e-12, chebyshev_closed_form, "φ_n^1(cos θ) against the sine formula"),
        check!("cz-heat", "A7", AtMost, 0.10, cz_heat, "heat kernel CZ constants, drift N → 2N"),
        check!("cz-heat-psi", "A7", AtMost, 0.10, cz_heat_psi, "ψ kernel CZ constants, drift N → 2N"),
        check!("cz-transplant-size", "A7", AtMost, 0.10, cz_transplant_size, "transplant parity kernels, size constant drift"),
        check!("cz-transplant-local", "A7", AtMost, 0.10, cz_transplant_local, "transplant parity kernels, local size drift"),
        check!("cz-transplant-regularity", "A7", AtMost, 0.10, cz_transplant_regularity, "transplant parity kernels, regularity drift"),
        check!("bessel-three-routes", "A8", AtMost, 1e-9, bessel_three_routes, "series, recurrence and integral I_ν agree"),
        check!("bessel-decay-envelope", "A8", AtMost, 0.10, bessel_decay_envelope, "(k+1)^{2λ+1} sup_t S_k(t), drift N → 2N"),
        check!("psi-decay-envelope", "A8", AtMost, 0.10, psi_decay_envelope, "(k+1)^{λ+1} sup_t |ψ_t(k)|, drift N → 2N"),
        check!("poisson-subordination", "A9", AtMost, 1e-6, poisson_subordination, "subordinated against spectral P_t f"),
        check!("poisson-maximal-domination", "A9", AtMost, 1e-12, poisson_maximal_domination, "max_n (P_* f − W_* f) on the grid"),
        check!("transplant-isometry-deficiency", "A10", Band { lower: -1e-10 }, 1.0, transplant_isometry_deficiency, "‖f‖² − ‖T f‖² in [−1e−10, C/N]"),
        check!("transplant-isometry-scaling", "A10", AtMost, 1.0, transplant_isometry_scaling, "isometry deficiency at 2N over N"),
        check!("transplant-roundtrip", "A10", AtMost, 1e-2, transplant_roundtrip, "‖T_{μ,λ} T_{λ,μ} f − f‖₂ on [0, N/4]"),
        check!("transplant-roundtrip-scaling", "A10", AtMost, 0.65, transplant_roundtrip_scaling, "round-trip defect at 2N over N"),
        check!("transplant-duality", "A10", AtMost, 1e-9, transplant_duality, "|⟨T_{μ,λ} f, g⟩ − ⟨f, T_{λ,μ} g⟩|"),
        check!("transplant-composition", "A10", AtMost, 5e-3, transplant_composition, "unit-step chain against direct transplant"),
        check!("ap-constant-weight", "A11", AtMost, 0.0, ap_constant_weight, "|A_p(1) − 1|"),
        check!("ap-sqrt-weight-stable", "A11", AtMost, 0.01, ap_sqrt_weight_stable, "A_2((n+1)^{1/2}) drift N → 2N"),
        check!("ap-linear-weight-growth", "A11", AtLeast, 0.10, ap_linear_weight_growth, "smallest growth of A_2(n+1) per doubling"),
        check!("probe-g1-weighted", "A12", AtMost, 0.15, probe_g1_weighted, "‖g¹_W f‖_{p,w}/‖f‖_{p,w} band drift N → 2N"),
        check!("probe-transplant-weighted", "A12", AtMost, 0.15, probe_transplant_weighted, "‖T f‖_{p,w}/‖f‖_{p,w} band drift N → 2N"),
    ]
}

/// Ids of every registered check.
pub fn check_ids() -> Vec<&'static str> {
    registry().iter().map(|c| c.id).collect()
}

/// Runs the selected checks in registry order. A check that errors is reported as
/// failed with `observed = NaN` and the message in `error`.
pub fn run_suite(cfg: &RunConfig) -> Result<Vec<VerificationReport>> {
    let reg = registry();
    let ids: Vec<&str> = reg.iter().map(|c| c.id).collect();
    cfg.validate(&ids)?;
    let selected: Vec<CheckSpec> =
        reg.into_iter().filter(|c| cfg.only.is_empty() || cfg.only.iter().any(|o| o == c.id)).collect();
    let go = || {
        let cx = Ctx::new(cfg);
        selected.iter().map(|spec| run_one(&cx, spec)).collect()
    };
    match cfg.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(go))
        }
        None => Ok(go()),
    }
}

/// [`run_suite`] wrapped with the config and pass/fail counts.
pub fn run_suite_report(cfg: &RunConfig) -> Result<SuiteReport> {
    Ok(SuiteReport::new(cfg.clone(), run_suite(cfg)?))
}

fn run_one(cx: &Ctx, spec: &CheckSpec) -> VerificationReport {
    let tol = cx.cfg.tolerances.get(spec.id).copied().unwrap_or(spec.tolerance);
    let start = Instant::now();
    let result = (spec.run)(cx, tol);
    let runtime_ms = if cx.cfg.record_runtime { start.elapsed().as_millis() as u64 } else { 0 };
    let mut report = VerificationReport {
        id: spec.id.to_string(),
        criterion: spec.criterion.to_string(),
        parameters: BTreeMap::new(),
        fitted: BTreeMap::new(),
        tolerance: tol,
        observed: f64::NAN,
        rule: spec.rule,
        pass: false,
        scaling: None,
        runtime_ms,
        error: None,
    };
    match result {
        Ok(out) => {
            report.tolerance = out.tolerance.unwrap_or(tol);
            report.parameters = out.parameters;
            report.fitted = out.fitted;
            report.observed = out.observed;
            report.scaling = out.scaling;
            report.pass = spec.rule.passes(report.observed, report.tolerance);
        }
        Err(e) => report.error = Some(e.to_string()),
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_ids_are_unique_and_cover_all_criteria() {
        let reg = registry();
        let mut ids: Vec<&str> = reg.iter().map(|c| c.id).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), reg.len());
        for a in 1..=12 {
            let c = format!("A{a}");
            assert!(reg.iter().any(|s| s.criterion == c), "{c} has no check");
        }
    }

    #[test]
    fn unknown_ids_are_rejected() {
        let cfg = RunConfig { only: vec!["no-such-check".into()], ..Default::default() };
        assert!(matches!(run_suite(&cfg), Err(Error::Config(_))));
        let cfg = RunConfig { tolerances: BTreeMap::from([("nope".to_string(), 1.0)]), ..Default::default() };
        assert!(matches!(run_suite(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn single_check_filter() {
        let cfg = RunConfig { only: vec!["chebyshev-closed-form".into()], ..Default::default() };
        let r = run_suite(&cfg).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].pass, "{}", r[0].summary_line());
    }

    #[test]
    fn tolerance_override_is_echoed() {
        let cfg = RunConfig {
            only: vec!["chebyshev-closed-form".into()],
            tolerances: BTreeMap::from([("chebyshev-closed-form".to_string(), 0.0)]),
            ..Default::default()
        };
        let r = run_suite(&cfg).unwrap();
        assert_eq!(r[0].tolerance, 0.0);
    }
}
