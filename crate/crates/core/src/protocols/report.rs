use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Slack floor for inequalities between closed-form or bisection values.
pub const ANALYTIC_TOL: f64 = 1e-7;
/// Slack floor when a side comes from a semidefinite program.
pub const SDP_TOL: f64 = 1e-6;

/// Parameters an inequality was evaluated at; unset fields are omitted.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<usize>,
}

/// One evaluated inequality `lhs ≤ rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    #[serde(with = "extended")]
    pub lhs: f64,
    #[serde(with = "extended")]
    pub rhs: f64,
    #[serde(with = "extended")]
    pub slack: f64,
    pub tolerance: f64,
    pub parameters: Parameters,
    /// Which result of the theory the inequality instantiates.
    pub provenance: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64, provenance: impl Into<String>) -> Self {
        // equal infinities count as a tight, consistent pair
        let slack = if lhs == rhs { 0.0 } else { rhs - lhs };
        Self {
            name: name.into(),
            lhs,
            rhs,
            slack,
            tolerance,
            parameters: Parameters::default(),
            provenance: provenance.into(),
            note: None,
        }
    }

    /// Reports `|a - b| ≤ 0`, for identities.
    pub fn equality(name: impl Into<String>, a: f64, b: f64, tolerance: f64, provenance: impl Into<String>) -> Self {
        let diff = if a == b { 0.0 } else { (a - b).abs() };
        Self::new(name, if diff.is_nan() { f64::INFINITY } else { diff }, 0.0, tolerance, provenance)
    }

    pub fn with_parameters(mut self, parameters: Parameters) -> Self {
        self.parameters = parameters;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.slack >= -self.tolerance
    }

    /// Whether both sides are information quantities (nats) rather than
    /// distances, norms or counts.
    pub fn is_information(&self) -> bool {
        const INFORMATION: [&str; 11] = [
            "bounds",
            "upper_exponent",
            "smoothing_",
            "hypothesis_as_order_zero",
            "order_zero",
            "collision_identical",
            "data_processing",
            "converse_",
            "achievability_",
            "sandwich_consistency",
            "extractable_",
        ];
        INFORMATION.iter().any(|p| self.name.starts_with(p))
    }
}

/// Totals over a list of reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    #[serde(with = "extended")]
    pub worst_slack: f64,
}

impl Summary {
    pub fn of(reports: &[BoundReport]) -> Self {
        let pass = reports.iter().filter(|r| r.passed()).count();
        let worst_slack = reports.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
        Self { pass, fail: reports.len() - pass, worst_slack }
    }
}

/// Round-trips non-finite floats through JSON as strings.
pub mod extended {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a number: {other:?}"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serializes_losslessly() {
        let r = BoundReport::new("x", 0.1 + 0.2, f64::INFINITY, ANALYTIC_TOL, "leftover hashing")
            .with_parameters(Parameters { eps: Some(0.3), dims: vec![2, 3], ..Default::default() });
        let text = serde_json::to_string(&r).unwrap();
        let back: BoundReport = serde_json::from_str(&text).unwrap();
        assert_eq!(r, back);
        assert!(back.passed());
    }

    #[test]
    fn slack_floor() {
        assert!(BoundReport::new("a", 1.0, 1.0 - 5e-8, ANALYTIC_TOL, "").passed());
        assert!(!BoundReport::new("a", 1.0, 1.0 - 5e-7, ANALYTIC_TOL, "").passed());
        assert!(BoundReport::new("a", f64::INFINITY, f64::INFINITY, ANALYTIC_TOL, "").passed());
        assert!(!BoundReport::equality("e", 1.0, f64::NAN, ANALYTIC_TOL, "").passed());
    }

    #[test]
    fn information_classification() {
        let info = |n: &str| BoundReport::new(n, 0.0, 0.0, 0.0, "").is_information();
        assert!(info("converse_measured") && info("bounds3_max_vs_collision") && info("achievability_collision"));
        assert!(!info("leftover_hash_smoothed") && !info("renyi_achievability_measured") && !info("decoupling_bures"));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn finite_or_infinite() -> impl Strategy<Value = f64> {
            prop_oneof![any::<f64>().prop_filter("not nan", |x| !x.is_nan()), Just(f64::INFINITY), Just(f64::NEG_INFINITY)]
        }

        proptest! {
            #[test]
            fn round_trips_exactly(lhs in finite_or_infinite(), rhs in finite_or_infinite(), eps in proptest::option::of(0.0f64..1.0)) {
                let r = BoundReport::new("p", lhs, rhs, ANALYTIC_TOL, "q")
                    .with_parameters(Parameters { eps, ..Default::default() });
                let back: BoundReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
                prop_assert_eq!(r.lhs.to_bits(), back.lhs.to_bits());
                prop_assert_eq!(r.rhs.to_bits(), back.rhs.to_bits());
                prop_assert_eq!(r.parameters.eps.map(f64::to_bits), back.parameters.eps.map(f64::to_bits));
            }

            #[test]
            fn passes_iff_slack_within_tolerance(lhs in -10.0f64..10.0, gap in -1e-6f64..1e-6) {
                let r = BoundReport::new("p", lhs, lhs + gap, ANALYTIC_TOL, "q");
                prop_assert_eq!(r.passed(), r.slack >= -ANALYTIC_TOL);
            }
        }
    }
}
