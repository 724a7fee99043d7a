//! Per-sample expansion, detection and exact defect recomputation, run as
//! an order-preserving parallel map over sample indices.
//!
//! claim rigidity-in-density-one-sets: Census::record, run_census

use std::collections::{BTreeMap, BTreeSet};

use iet_core::iet::format_lengths;
use iet_core::rauzy::{format_word, AcceptableWordTable, RvState, StopRule};
use iet_core::rigidity::{
    annotate_events, defects_at_steps, tower_rigidity_times, DensityPredicate, TowerSearch,
};
use iet_core::sample::Sampler;
use iet_core::{Iet, Rational};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::config::{EventLog, SamplerConfig};
use crate::error::DataError;
use crate::record::{
    density_key, CensusRecord, DefectRecord, DensityRecord, DetectionKind, DetectionRecord,
    EventRecord,
};

/// Records are produced in blocks of this many samples; only one block is
/// held in memory at a time.
const BLOCK: u64 = 512;

/// Validated configuration plus everything shared between samples.
pub struct Census {
    config: SamplerConfig,
    sampler: Sampler,
    table: AcceptableWordTable,
    times: DensityPredicate,
}

impl Census {
    pub fn new(config: SamplerConfig) -> Result<Self, DataError> {
        config.validate()?;
        Ok(Self {
            sampler: config.sampler()?,
            table: AcceptableWordTable::build(&config.class()?)?,
            times: config.predicate()?,
            config,
        })
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    pub fn table(&self) -> &AcceptableWordTable {
        &self.table
    }

    pub fn sample(&self, index: u64) -> Iet {
        self.sampler.sample(index)
    }

    /// The record of sample `index`; failures end up in its `error` field.
    pub fn record(&self, index: u64) -> CensusRecord {
        let t = self.sampler.sample(index);
        let mut rec = CensusRecord {
            id: index,
            seed: self.config.seed,
            perm: t.perm().to_string(),
            lengths: format_lengths(&t.lengths()),
            word: String::new(),
            steps: 0,
            final_norm: 1,
            tie_step: None,
            events: Vec::new(),
            detections: Vec::new(),
            defects: Vec::new(),
            density: BTreeMap::new(),
            error: None,
        };
        if let Err(e) = self.fill(&t, &mut rec) {
            rec.error = Some(e.to_string());
        }
        rec
    }

    fn fill(&self, t: &Iet, rec: &mut CensusRecord) -> Result<(), DataError> {
        let cfg = &self.config;
        let mut state = RvState::new(t)?;
        let norm = cfg.max_norm.map(BigUint::from);
        match (cfg.max_steps, &norm) {
            (Some(s), Some(n)) => state.run(StopRule::StepsOrNorm(s, n)),
            (Some(s), None) => state.run(StopRule::Steps(s)),
            (None, Some(n)) => state.run(StopRule::Norm(n)),
            (None, None) => unreachable!("validated"),
        }
        annotate_events(&mut state, &self.table, &cfg.epsilons);
        rec.word = format_word(state.word());
        rec.steps = state.steps();
        rec.final_norm = as_u64(&state.cmax())?;
        rec.tie_step = state.tie_step();

        for e in state.events() {
            if e.acceptable {
                rec.detections.push(self.detection(
                    DetectionKind::Acceptable,
                    None,
                    e.step,
                    as_u64(&e.cmax)?,
                ));
            }
        }
        for eps in &cfg.epsilons {
            for e in state.events() {
                if e.expected.contains(eps) {
                    let det = self.detection(
                        DetectionKind::Expected,
                        Some(eps),
                        e.step,
                        as_u64(&e.cmax)?,
                    );
                    rec.detections.push(det);
                }
            }
        }
        let wanted: Vec<usize> = rec
            .detections
            .iter()
            .enumerate()
            .filter(|(_, d)| d.kind == DetectionKind::Expected || cfg.acceptable_defects)
            .map(|(i, _)| i)
            .collect();
        let steps: Vec<usize> = wanted.iter().map(|&i| rec.detections[i].step).collect();
        for (i, defect) in wanted.into_iter().zip(defects_at_steps(&state, &steps)?) {
            rec.defects.push(DefectRecord {
                detection: i,
                defect,
            });
        }

        if let (Some(mass), Some(norm)) = (&cfg.tower_mass, &norm) {
            for eps in &cfg.epsilons {
                let search = TowerSearch {
                    epsilon: eps.clone(),
                    max_norm: norm.clone(),
                    min_mass: mass.clone(),
                    times: &self.times,
                    max_hits: cfg.tower_hits,
                };
                for hit in tower_rigidity_times(t, &search)? {
                    rec.detections.push(self.detection(
                        DetectionKind::Tower,
                        Some(eps),
                        hit.step,
                        hit.m,
                    ));
                    rec.defects.push(DefectRecord {
                        detection: rec.detections.len() - 1,
                        defect: hit.defect,
                    });
                }
            }
        }

        rec.events = state
            .events()
            .iter()
            .filter(|e| match cfg.events {
                EventLog::None => false,
                EventLog::Acceptable => e.acceptable,
                EventLog::All => true,
            })
            .map(|e| {
                Ok(EventRecord {
                    step: e.step,
                    cmax: as_u64(&e.cmax)?,
                    dyadic: e.dyadic,
                    balance: e.balance.clone(),
                    acceptable: e.acceptable,
                    expected: e.expected.clone(),
                })
            })
            .collect::<Result<_, DataError>>()?;

        if let Some(limit) = cfg.window_limit().filter(|&l| l > 0) {
            for eps in &cfg.epsilons {
                for kind in [DetectionKind::Expected, DetectionKind::Tower] {
                    if kind == DetectionKind::Tower && cfg.tower_mass.is_none() {
                        continue;
                    }
                    let windows: BTreeSet<u32> = rec
                        .detections
                        .iter()
                        .filter(|d| d.kind == kind && d.epsilon.as_ref() == Some(eps) && d.in_a)
                        .map(|d| d.dyadic)
                        .filter(|i| (1..=limit).contains(i))
                        .collect();
                    rec.density.insert(
                        density_key(kind, eps),
                        DensityRecord {
                            fraction: Rational::new(
                                (windows.len() as u64).into(),
                                u64::from(limit).into(),
                            ),
                            windows: windows.into_iter().collect(),
                            window_count: limit,
                        },
                    );
                }
            }
        }
        Ok(())
    }

    fn detection(
        &self,
        kind: DetectionKind,
        epsilon: Option<&Rational>,
        step: usize,
        m: u64,
    ) -> DetectionRecord {
        DetectionRecord {
            kind,
            epsilon: epsilon.cloned(),
            step,
            m,
            dyadic: 63 - m.leading_zeros(),
            in_a: self.times.contains(m),
        }
    }

    /// Calls `sink` with every record in index order.
    pub fn run<E>(&self, mut sink: impl FnMut(CensusRecord) -> Result<(), E>) -> Result<u64, E> {
        let n = self.config.samples;
        let mut start = 0;
        while start < n {
            let end = (start + BLOCK).min(n);
            let block: Vec<CensusRecord> = (start..end)
                .into_par_iter()
                .map(|i| self.record(i))
                .collect();
            for rec in block {
                sink(rec)?;
            }
            start = end;
        }
        Ok(n)
    }
}

fn as_u64(x: &BigUint) -> Result<u64, DataError> {
    x.to_u64()
        .ok_or_else(|| DataError::Config("column norm exceeds u64".into()))
}

/// All records of a census, in index order.
pub fn run_census(config: &SamplerConfig) -> Result<Vec<CensusRecord>, DataError> {
    let census = Census::new(config.clone())?;
    let mut out = Vec::with_capacity(config.samples.min(1 << 20) as usize);
    census.run(|r| {
        out.push(r);
        Ok::<_, DataError>(())
    })?;
    Ok(out)
}
