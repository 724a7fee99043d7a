//! JSONL schema of census records. Big values are exact: rationals as
//! `"p/q"` strings, norms as integers.

use std::collections::BTreeMap;

use iet_core::Rational;
use serde::{Deserialize, Serialize};

use crate::serial::{opt_ratio, ratio};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub step: usize,
    pub cmax: u64,
    pub dyadic: u32,
    #[serde(with = "ratio")]
    pub balance: Rational,
    pub acceptable: bool,
    #[serde(with = "crate::serial::ratio_list")]
    pub expected: Vec<Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectionKind {
    Acceptable,
    Expected,
    Tower,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub kind: DetectionKind,
    #[serde(with = "opt_ratio")]
    pub epsilon: Option<Rational>,
    pub step: usize,
    pub m: u64,
    pub dyadic: u32,
    /// Whether `m` lies in the configured time set.
    pub in_a: bool,
}

/// Exact defect `∫|T^m x − x|` of the detection at `detection` (an index
/// into the record's detections).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefectRecord {
    pub detection: usize,
    #[serde(with = "ratio")]
    pub defect: Rational,
}

/// Dyadic windows `P_i`, `1 ≤ i ≤ window_count`, holding a detection in `A`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityRecord {
    pub windows: Vec<u32>,
    pub window_count: u32,
    #[serde(with = "ratio")]
    pub fraction: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRecord {
    pub id: u64,
    pub seed: u64,
    pub perm: String,
    pub lengths: String,
    pub word: String,
    pub steps: usize,
    /// `|C_max|` when the expansion stopped.
    pub final_norm: u64,
    pub tie_step: Option<usize>,
    pub events: Vec<EventRecord>,
    pub detections: Vec<DetectionRecord>,
    pub defects: Vec<DefectRecord>,
    /// Keyed by `"<kind>:<ε>"`.
    pub density: BTreeMap<String, DensityRecord>,
    pub error: Option<String>,
}

impl CensusRecord {
    pub fn defect_of(&self, detection: usize) -> Option<&Rational> {
        self.defects
            .iter()
            .find(|d| d.detection == detection)
            .map(|d| &d.defect)
    }

    /// The sampled IET in the `lengths;perm` text format.
    pub fn iet_text(&self) -> String {
        format!("{};{}", self.lengths, self.perm)
    }
}

pub fn density_key(kind: DetectionKind, epsilon: &Rational) -> String {
    let kind = match kind {
        DetectionKind::Acceptable => "acceptable",
        DetectionKind::Expected => "expected",
        DetectionKind::Tower => "tower",
    };
    format!("{kind}:{}", iet_core::rational::format_rational(epsilon))
}
