//! Verifiers for the quantitative estimates. Each one measures a left-hand side on
//! sampled data, evaluates the right-hand side without its unspecified constant, and
//! records the ratio as an empirical constant checked against a declared ceiling.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::grid::GridSpec;

mod decay;
mod hj_checks;
mod verifiers;

pub use decay::{campanato_decay, mean_oscillation, DecayReport};
pub use hj_checks::{
    hopf_lax_checks, lemma_probe_sweep, supconv_semiconvexity, LemmaSweep, SweepPoint,
};
pub use verifiers::{
    consistency_report, errorentropy_from, errorvisc_from, oleinik_defect, quartic_compactness,
    stability_report, time_transfer_check, verify_errorentropy, verify_errorvisc,
    ERRORENTROPY_CEILING, ERRORVISC_CEILING, QUARTIC_CEILING, TIME_TRANSFER_CEILING,
};

/// Absolute tolerance `mesh·(1 + L)` under which a left-hand side counts as zero when
/// the right-hand side vanishes.
pub fn mesh_tolerance(spec: &GridSpec, sup_norm: f64) -> f64 {
    spec.mesh() * (1.0 + sup_norm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub name: String,
    #[serde(default)]
    pub scenario: String,
    #[serde(with = "real")]
    pub lhs: f64,
    #[serde(with = "real")]
    pub rhs_raw: f64,
    /// `lhs / rhs_raw`; zero when both sides vanish, `None` when only `rhs_raw` does.
    #[serde(with = "real::option")]
    pub empirical_constant: Option<f64>,
    pub ceiling: f64,
    pub pass: bool,
    #[serde(default)]
    pub flags: Vec<String>,
    #[serde(default)]
    pub metadata: BTreeMap<String, Value>,
}

impl EstimateReport {
    /// With `rhs_raw = 0` the report passes only if `lhs ≤ zero_tolerance`; otherwise it
    /// is flagged `inconsistent`.
    pub fn new(name: impl Into<String>, lhs: f64, rhs_raw: f64, ceiling: f64, zero_tolerance: f64) -> Self {
        let mut report = EstimateReport {
            name: name.into(),
            scenario: String::new(),
            lhs,
            rhs_raw,
            empirical_constant: None,
            ceiling,
            pass: false,
            flags: Vec::new(),
            metadata: BTreeMap::new(),
        };
        if rhs_raw > 0.0 {
            let c = lhs / rhs_raw;
            report.empirical_constant = Some(c);
            report.pass = c <= ceiling;
        } else if lhs <= zero_tolerance {
            report.empirical_constant = Some(0.0);
            report.pass = true;
        } else {
            report.flags.push("inconsistent".into());
        }
        report.metadata.insert("zero_tolerance".into(), number(zero_tolerance));
        report
    }

    pub fn with_scenario(mut self, id: &str) -> Self {
        self.scenario = id.to_string();
        self
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn with_grid(self, spec: &GridSpec) -> Self {
        self.with_meta("grid", format!("{}x{}", spec.nt, spec.nx))
    }

    pub fn flag(&mut self, f: &str) {
        if !self.flags.iter().any(|x| x == f) {
            self.flags.push(f.to_string());
        }
    }
}

/// JSON number for finite values, a string (`"inf"`, `"NaN"`) otherwise.
pub fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(x.to_string()))
}

/// Serializes `f64` as a JSON number when finite and as `"inf"`, `"-inf"` or `"NaN"`
/// otherwise, so infinite slopes survive a round trip.
pub mod real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_str(&x.to_string())
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }

    pub mod option {
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            match x {
                Some(v) => super::serialize(v, s),
                None => s.serialize_none(),
            }
        }

        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "super")] f64);

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_rule() {
        assert!(EstimateReport::new("a", 1.0, 1.0, 2.0, 0.0).pass);
        assert!(!EstimateReport::new("a", 3.0, 1.0, 2.0, 0.0).pass);
        let zero = EstimateReport::new("a", 1e-6, 0.0, 2.0, 1e-3);
        assert!(zero.pass);
        assert_eq!(zero.empirical_constant, Some(0.0));
        let bad = EstimateReport::new("a", 0.1, 0.0, 2.0, 1e-3);
        assert!(!bad.pass);
        assert_eq!(bad.flags, vec!["inconsistent".to_string()]);
        assert_eq!(bad.empirical_constant, None);
    }

    #[test]
    fn json_round_trip_with_infinities() {
        #[derive(Serialize, Deserialize)]
        struct W {
            #[serde(with = "real")]
            x: f64,
        }
        let s = serde_json::to_string(&W { x: f64::INFINITY }).unwrap();
        assert_eq!(s, r#"{"x":"inf"}"#);
        assert_eq!(serde_json::from_str::<W>(&s).unwrap().x, f64::INFINITY);
        let r = EstimateReport::new("n", 0.5, 2.0, 1.0, 0.0).with_scenario("s").with_meta("k", 3);
        let back: EstimateReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
