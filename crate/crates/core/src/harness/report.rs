use crate::error::Result;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt;

use super::RunConfig;

/// How `observed` is compared with `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Rule {
    /// `observed ≤ tolerance`.
    AtMost,
    /// `observed ≥ tolerance`.
    AtLeast,
    /// `lower ≤ observed ≤ tolerance`.
    Band {
        #[serde(with = "real")]
        lower: f64,
    },
}

impl Rule {
    pub fn passes(self, observed: f64, tolerance: f64) -> bool {
        match self {
            Rule::AtMost => observed <= tolerance,
            Rule::AtLeast => observed >= tolerance,
            Rule::Band { lower } => lower <= observed && observed <= tolerance,
        }
    }
}

/// A quantity measured at `N` and `2N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub n: usize,
    pub n2: usize,
    #[serde(with = "real")]
    pub value_n: f64,
    #[serde(with = "real")]
    pub value_2n: f64,
    /// `value_2n / value_n`.
    #[serde(with = "real")]
    pub ratio: f64,
}

impl Scaling {
    pub fn new(n: usize, value_n: f64, value_2n: f64) -> Self {
        Self { n, n2: 2 * n, value_n, value_2n, ratio: value_2n / value_n }
    }
}

/// Result of one registered check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub id: String,
    /// Acceptance criterion the check belongs to (`A1` … `A12`).
    pub criterion: String,
    pub parameters: BTreeMap<String, Value>,
    #[serde(with = "real_map")]
    pub fitted: BTreeMap<String, f64>,
    #[serde(with = "real")]
    pub tolerance: f64,
    #[serde(with = "real")]
    pub observed: f64,
    pub rule: Rule,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<Scaling>,
    pub runtime_ms: u64,
    /// Set when the check could not produce a value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl VerificationReport {
    /// `PASS id [A3] observed=… tol=… (12 ms)`.
    pub fn summary_line(&self) -> String {
        let op = match self.rule {
            Rule::AtMost => "<=".to_string(),
            Rule::AtLeast => ">=".to_string(),
            Rule::Band { lower } => format!("in [{lower:.3e},"),
        };
        let close = if matches!(self.rule, Rule::Band { .. }) { "]" } else { "" };
        let mut s = format!(
            "{} {} [{}] observed={:.4e} {} {:.4e}{} ({} ms)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.criterion,
            self.observed,
            op,
            self.tolerance,
            close,
            self.runtime_ms
        );
        if let Some(e) = &self.error {
            s.push_str(&format!(" error: {e}"));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
}

/// The file written by a run: `{config, reports, summary}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: RunConfig,
    pub reports: Vec<VerificationReport>,
    pub summary: Summary,
}

impl SuiteReport {
    pub fn new(config: RunConfig, reports: Vec<VerificationReport>) -> Self {
        let passed = reports.iter().filter(|r| r.pass).count();
        let failed = reports.len() - passed;
        Self { config, reports, summary: Summary { passed, failed } }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Reals as JSON numbers when finite and as `"NaN"`, `"inf"`, `"-inf"` otherwise.
pub(crate) mod real {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("NaN")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    struct RealVisitor;

    impl Visitor<'_> for RealVisitor {
        type Value = f64;
        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a number or one of \"NaN\", \"inf\", \"-inf\"")
        }
        fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<f64, E> {
            Ok(v)
        }
        fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<f64, E> {
            Ok(v as f64)
        }
        fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<f64, E> {
            Ok(v as f64)
        }
        fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<f64, E> {
            match v {
                "NaN" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        d.deserialize_any(RealVisitor)
    }

    #[derive(Serialize, Deserialize)]
    #[serde(transparent)]
    pub(crate) struct Real(#[serde(with = "self")] pub f64);
}

pub(crate) mod real_map {
    use super::real::Real;
    use super::*;

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        let wrapped: BTreeMap<&String, Real> = m.iter().map(|(k, v)| (k, Real(*v))).collect();
        wrapped.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<String, f64>, D::Error> {
        let m = BTreeMap::<String, Real>::deserialize(d)?;
        Ok(m.into_iter().map(|(k, v)| (k, v.0)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> VerificationReport {
        VerificationReport {
            id: "demo".into(),
            criterion: "A0".into(),
            parameters: BTreeMap::from([("lambda".to_string(), Value::from(0.6))]),
            fitted: BTreeMap::from([
                ("c".to_string(), 0.1 + 0.2),
                ("big".to_string(), f64::INFINITY),
                ("bad".to_string(), f64::NAN),
                ("tiny".to_string(), 5e-324),
            ]),
            tolerance: 1e-10,
            observed: 3.3e-11,
            rule: Rule::Band { lower: -1e-10 },
            pass: true,
            scaling: Some(Scaling::new(8, 1.0, 0.3)),
            runtime_ms: 7,
            error: None,
        }
    }

    #[test]
    fn json_roundtrip_is_lossless() {
        let r = sample();
        let s = serde_json::to_string(&r).unwrap();
        let back: VerificationReport = serde_json::from_str(&s).unwrap();
        assert!(back.fitted["bad"].is_nan());
        assert_eq!(back.fitted["big"], f64::INFINITY);
        assert_eq!(back.fitted["c"].to_bits(), (0.1f64 + 0.2).to_bits());
        assert_eq!(back.fitted["tiny"].to_bits(), 5e-324f64.to_bits());
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
    }

    #[test]
    fn rules() {
        assert!(Rule::AtMost.passes(1.0, 1.0));
        assert!(!Rule::AtMost.passes(f64::NAN, 1.0));
        assert!(Rule::AtLeast.passes(0.2, 0.1));
        assert!(!Rule::Band { lower: 0.0 }.passes(-1.0, 1.0));
        assert!(sample().summary_line().starts_with("PASS demo [A0]"));
    }
}
