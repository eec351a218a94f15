use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

/// The sample at which a check attained its largest deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SampleRecord {
    pub z: Vec<Complex64>,
    pub v: Vec<Complex64>,
}

/// Outcome of one named property check over a set of samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub t: Option<f64>,
    pub k: Option<u32>,
    pub samples: usize,
    #[serde(with = "extended_float")]
    pub max_deviation: f64,
    pub tolerance: f64,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub argmax: Option<SampleRecord>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            t: None,
            k: None,
            samples: 0,
            max_deviation: 0.0,
            tolerance,
            status: CheckStatus::Pass,
            argmax: None,
            note: None,
        }
    }

    pub fn skipped(name: impl Into<String>, tolerance: f64, note: impl Into<String>) -> Self {
        Self {
            status: CheckStatus::Skipped,
            note: Some(note.into()),
            ..Self::new(name, tolerance)
        }
    }

    pub fn with_params(mut self, t: f64, k: u32) -> Self {
        self.t = Some(t);
        self.k = Some(k);
        self
    }

    /// Records one sample; a non-finite deviation counts as a failure.
    pub fn record(&mut self, deviation: f64, sample: impl FnOnce() -> SampleRecord) {
        self.samples += 1;
        let dev = if deviation.is_nan() { f64::INFINITY } else { deviation };
        if self.argmax.is_none() || dev > self.max_deviation {
            self.max_deviation = dev.max(self.max_deviation);
            self.argmax = Some(sample());
        }
        if self.status != CheckStatus::Skipped {
            self.status = if self.max_deviation.is_finite() && self.max_deviation < self.tolerance {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            };
        }
    }

    /// Marks the check failed without a deviation, e.g. after a numerical error.
    pub fn fail_with(&mut self, note: impl Into<String>) {
        self.samples += 1;
        self.max_deviation = f64::INFINITY;
        self.status = CheckStatus::Fail;
        self.note = Some(note.into());
    }

    /// Folds another report for the same check into this one.
    pub fn merge(&mut self, other: CheckReport) {
        self.samples += other.samples;
        if other.max_deviation > self.max_deviation || (self.argmax.is_none() && other.argmax.is_some()) {
            self.max_deviation = self.max_deviation.max(other.max_deviation);
            self.argmax = other.argmax;
        }
        if other.note.is_some() {
            self.note = other.note;
        }
        self.status = match (self.status, other.status) {
            (CheckStatus::Skipped, s) | (s, CheckStatus::Skipped) => s,
            (CheckStatus::Fail, _) | (_, CheckStatus::Fail) => CheckStatus::Fail,
            _ => CheckStatus::Pass,
        };
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

/// Non-finite values are written as the strings `"inf"`, `"-inf"` and `"nan"`.
mod extended_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
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
}
