use crate::error::{Error, Result};
use crate::semigroup::TimeGrid;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::PathBuf;

/// Problem sizes used by the checks. Scaling checks also run at twice the size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Sizes {
    /// Plancherel support; the rule has `5N/4` nodes.
    pub plancherel: usize,
    /// Output length of the heat `g¹` ratio.
    pub g_ratio: usize,
    /// Output length of the Poisson `g^k` ratios.
    pub poisson_ratio: usize,
    /// Kernel size for Calderón–Zygmund certification and decay envelopes.
    pub certify: usize,
    /// Output length for transplantation round trip and composition.
    pub transplant: usize,
    /// Output length for transplantation isometry and duality.
    pub isometry: usize,
    /// Largest window end for `A_p` constants.
    pub ap: usize,
    /// Output length of the weighted probes.
    pub probe: usize,
}

impl Default for Sizes {
    fn default() -> Self {
        Self {
            plancherel: 128,
            g_ratio: 4096,
            poisson_ratio: 256,
            certify: 512,
            transplant: 4096,
            isometry: 1024,
            ap: 2048,
            probe: 1024,
        }
    }
}

/// Everything a suite run depends on. Equal configs give equal report values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    /// Orders for the identity-type checks.
    pub lambdas: Vec<f64>,
    /// `(λ, μ)` pairs for transplantation certification and probes.
    pub pairs: Vec<(f64, f64)>,
    pub sizes: Sizes,
    /// `min,max,ppd` for g-functions and maximal functions.
    pub t_grid: String,
    /// `min,max,ppd` for kernel certification.
    pub certify_grid: String,
    /// Exponents for weighted probes.
    pub ps: Vec<f64>,
    /// Power weights `(n+1)^{θ(p−1)}` for each `θ` listed here.
    pub weight_fractions: Vec<f64>,
    /// Random inputs per probe.
    pub probe_samples: usize,
    /// Worker threads; `None` leaves the global pool alone.
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    /// Run only these check ids (all when empty).
    pub only: Vec<String>,
    /// Per-check tolerance overrides.
    pub tolerances: BTreeMap<String, f64>,
    /// Record wall-clock times; off gives byte-identical output across runs.
    pub record_runtime: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 20_240_917,
            lambdas: vec![0.6, 1.0, 1.5, 2.5],
            pairs: vec![(1.2, 2.0), (0.8, 1.4)],
            sizes: Sizes::default(),
            t_grid: "1e-8,1e8,20".into(),
            certify_grid: "1e-2,1e7,4".into(),
            ps: vec![1.5, 2.0, 3.0],
            weight_fractions: vec![0.0, 0.5],
            probe_samples: 64,
            threads: None,
            out: None,
            only: Vec::new(),
            tolerances: BTreeMap::new(),
            record_runtime: true,
        }
    }
}

impl RunConfig {
    pub fn t_grid(&self) -> Result<TimeGrid> {
        TimeGrid::parse(&self.t_grid)
    }

    pub fn certify_grid(&self) -> Result<TimeGrid> {
        TimeGrid::parse(&self.certify_grid)
    }

    /// Rejects malformed grids, empty lists, bad orders and unknown check ids.
    pub fn validate(&self, known: &[&str]) -> Result<()> {
        self.t_grid()?;
        self.certify_grid()?;
        let bad = |m: String| Err(Error::Config(m));
        if self.lambdas.is_empty() || self.lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return bad(format!("lambdas must be a nonempty list of positive reals, got {:?}", self.lambdas));
        }
        if self.pairs.iter().any(|(l, m)| !(*l > 0.0 && *m > 0.0 && l.is_finite() && m.is_finite())) {
            return bad(format!("transplant pairs need positive orders, got {:?}", self.pairs));
        }
        if self.ps.is_empty() || self.ps.iter().any(|p| !(*p > 1.0 && p.is_finite())) {
            return bad(format!("ps must be reals > 1, got {:?}", self.ps));
        }
        if self.weight_fractions.iter().any(|a| !(*a > -1.0 && *a < 1.0)) {
            return bad(format!("weight fractions must lie in (−1, 1), got {:?}", self.weight_fractions));
        }
        if self.probe_samples == 0 {
            return bad("probe_samples must be ≥ 1".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be ≥ 1".into());
        }
        for id in self.only.iter().chain(self.tolerances.keys()) {
            if !known.contains(&id.as_str()) {
                return bad(format!("unknown check id {id:?}"));
            }
        }
        Ok(())
    }
}
