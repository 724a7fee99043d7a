//! Aggregation of census records into per-window tables.
//!
//! claim scarcity-estimate: summarize, BinRow::exact_m_frequency
//! claim bounded-acceptable-pairs: BinRow::max_multiplicity

use std::collections::{BTreeMap, HashMap};
use std::ops::RangeInclusive;

use iet_core::rational::{format_rational, to_f64};
use iet_core::rigidity::rigidity_defect;
use iet_core::stats::{least_squares, wilson_interval, Z95};
use iet_core::{Iet, Rational};
use serde::Serialize;

use crate::error::DataError;
use crate::record::{CensusRecord, DetectionKind};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BinRow {
    /// Window `P_i = [2^i, 2^{i+1})`.
    pub i: u32,
    /// Records whose expansion got past `2^{i+1}`.
    pub samples: u64,
    /// Of those, records with an acceptable pair in the window.
    pub with_hit: u64,
    pub hits: u64,
    pub frequency: f64,
    pub ci95: (f64, f64),
    /// `hits / (samples · 2^i)`: mean frequency of one exact value of `m`.
    pub exact_m_frequency: f64,
    pub distinct_m: u64,
    /// Most records sharing one exact `m`.
    pub max_multiplicity: u64,
    pub median_balance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    pub bins_used: usize,
}

/// Fewer than two windows with data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InsufficientData {
    pub nonempty_bins: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityHistogram {
    pub key: String,
    pub records: u64,
    /// Record counts with window fraction in `[k/10, (k+1)/10)`, the last
    /// bucket closed.
    pub buckets: [u64; 10],
    pub mean: f64,
    /// Records with a fraction of at least one tenth.
    pub at_least_tenth: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub id: u64,
    pub seed: u64,
    pub step: usize,
    pub m: u64,
    pub defect: String,
}

/// Expected ε-rigidity times checked against `defect ≤ 2ε`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Soundness {
    pub epsilon: String,
    pub detections: u64,
    pub within: u64,
    /// Largest `defect / ε`.
    pub max_ratio: f64,
    pub violations: Vec<Violation>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SpotCheck {
    pub records: u64,
    pub defects: u64,
    /// `(id, detection index)` of recorded defects that did not reproduce.
    pub mismatches: Vec<(u64, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryTable {
    pub records: u64,
    pub errors: u64,
    pub ties: u64,
    pub bins: Vec<BinRow>,
    pub slope: Result<Regression, InsufficientData>,
    pub density: Vec<DensityHistogram>,
    pub soundness: Vec<Soundness>,
    pub spot_check: SpotCheck,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SummaryOptions {
    pub bins: RangeInclusive<u32>,
    /// Records with `id % spot_every == 0` get every defect recomputed;
    /// `0` disables the check.
    pub spot_every: u64,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        Self {
            bins: 1..=16,
            spot_every: 100,
        }
    }
}

pub fn summarize(
    records: &[CensusRecord],
    opts: &SummaryOptions,
) -> Result<SummaryTable, DataError> {
    if records.is_empty() {
        return Err(DataError::Empty);
    }
    let bins: Vec<BinRow> = opts.bins.clone().map(|i| bin_row(records, i)).collect();
    let points: Vec<(f64, f64)> = bins
        .iter()
        .filter(|b| b.hits > 0)
        .map(|b| {
            (
                (f64::from(b.i) + 0.5) * std::f64::consts::LN_2,
                b.exact_m_frequency.ln(),
            )
        })
        .collect();
    let slope = match least_squares(&points) {
        Some((slope, intercept)) => Ok(Regression {
            slope,
            intercept,
            bins_used: points.len(),
        }),
        None => Err(InsufficientData {
            nonempty_bins: points.len(),
        }),
    };
    Ok(SummaryTable {
        records: records.len() as u64,
        errors: records.iter().filter(|r| r.error.is_some()).count() as u64,
        ties: records.iter().filter(|r| r.tie_step.is_some()).count() as u64,
        bins,
        slope,
        density: histograms(records),
        soundness: soundness(records),
        spot_check: spot_check(records, opts.spot_every)?,
    })
}

fn bin_row(records: &[CensusRecord], i: u32) -> BinRow {
    let lo = 1u64 << i;
    let hi = lo << 1;
    let mut samples = 0;
    let mut with_hit = 0;
    let mut hits = 0;
    let mut by_m: HashMap<u64, u64> = HashMap::new();
    let mut balances = Vec::new();
    for r in records
        .iter()
        .filter(|r| r.error.is_none() && r.final_norm >= hi)
    {
        samples += 1;
        let mut seen = false;
        let mut ms: Vec<u64> = Vec::new();
        for d in &r.detections {
            if d.kind == DetectionKind::Acceptable && (lo..hi).contains(&d.m) {
                hits += 1;
                seen = true;
                ms.push(d.m);
            }
        }
        ms.sort_unstable();
        ms.dedup();
        for m in ms {
            *by_m.entry(m).or_default() += 1;
        }
        with_hit += u64::from(seen);
        balances.extend(
            r.events
                .iter()
                .filter(|e| e.acceptable && e.dyadic == i)
                .map(|e| to_f64(&e.balance)),
        );
    }
    balances.sort_by(f64::total_cmp);
    let ratio = |a: u64, b: f64| if b > 0.0 { a as f64 / b } else { 0.0 };
    BinRow {
        i,
        samples,
        with_hit,
        hits,
        frequency: ratio(with_hit, samples as f64),
        ci95: wilson_interval(with_hit, samples, Z95),
        exact_m_frequency: ratio(hits, samples as f64 * lo as f64),
        distinct_m: by_m.len() as u64,
        max_multiplicity: by_m.values().copied().max().unwrap_or(0),
        median_balance: balances.get(balances.len() / 2).copied(),
    }
}

fn histograms(records: &[CensusRecord]) -> Vec<DensityHistogram> {
    let mut by_key: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in records {
        for (k, d) in &r.density {
            by_key.entry(k).or_default().push(to_f64(&d.fraction));
        }
    }
    by_key
        .into_iter()
        .map(|(key, fracs)| {
            let mut buckets = [0u64; 10];
            for f in &fracs {
                buckets[((f * 10.0).floor() as usize).min(9)] += 1;
            }
            let tenth = Rational::new(1.into(), 10.into());
            let at_least_tenth = records
                .iter()
                .filter(|r| r.density.get(key).is_some_and(|d| d.fraction >= tenth))
                .count() as u64;
            DensityHistogram {
                key: key.to_string(),
                records: fracs.len() as u64,
                buckets,
                mean: fracs.iter().sum::<f64>() / fracs.len() as f64,
                at_least_tenth,
            }
        })
        .collect()
}

fn soundness(records: &[CensusRecord]) -> Vec<Soundness> {
    let mut by_eps: BTreeMap<Rational, Soundness> = BTreeMap::new();
    for r in records {
        for (j, d) in r.detections.iter().enumerate() {
            let (DetectionKind::Expected, Some(eps)) = (d.kind, &d.epsilon) else {
                continue;
            };
            let Some(defect) = r.defect_of(j) else {
                continue;
            };
            let s = by_eps.entry(eps.clone()).or_insert_with(|| Soundness {
                epsilon: format_rational(eps),
                detections: 0,
                within: 0,
                max_ratio: 0.0,
                violations: Vec::new(),
            });
            s.detections += 1;
            s.max_ratio = s.max_ratio.max(to_f64(&(defect / eps)));
            if *defect <= eps * Rational::from_integer(2.into()) {
                s.within += 1;
            } else {
                s.violations.push(Violation {
                    id: r.id,
                    seed: r.seed,
                    step: d.step,
                    m: d.m,
                    defect: format_rational(defect),
                });
            }
        }
    }
    by_eps.into_values().collect()
}

/// Recomputes recorded defects by composing `T` directly, independently of
/// the tower route used during the census.
fn spot_check(records: &[CensusRecord], every: u64) -> Result<SpotCheck, DataError> {
    let mut out = SpotCheck::default();
    if every == 0 {
        return Ok(out);
    }
    for r in records
        .iter()
        .filter(|r| r.id % every == 0 && r.error.is_none())
    {
        out.records += 1;
        if r.defects.is_empty() {
            continue;
        }
        let t: Iet = r.iet_text().parse()?;
        for d in &r.defects {
            out.defects += 1;
            let m = r.detections.get(d.detection).map(|x| x.m);
            let fresh = m.map(|m| rigidity_defect(&t, m)).transpose()?;
            if fresh.as_ref() != Some(&d.defect) {
                out.mismatches.push((r.id, d.detection));
            }
        }
    }
    Ok(out)
}
