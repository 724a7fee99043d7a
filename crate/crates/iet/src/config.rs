use iet_core::rauzy::RauzyClass;
use iet_core::rigidity::DensityPredicate;
use iet_core::sample::{PermSource, Sampler, MIN_DENOM_BITS};
use iet_core::{Permutation, Rational};
use serde::{Deserialize, Serialize};

use crate::error::DataError;
use crate::serial::{ratio_list, ratio_pairs};

/// Which events of an expansion go into a census record.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EventLog {
    None,
    #[default]
    Acceptable,
    All,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceSpec {
    /// Every sample uses this permutation.
    Perm(String),
    /// Permutations drawn uniformly from the Rauzy class of this one.
    Class(String),
}

/// Everything a census run depends on. Two runs with equal configs produce
/// identical records.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub source: SourceSpec,
    pub denom_bits: u32,
    pub seed: u64,
    pub samples: u64,
    /// Stop once `|C_max|` reaches this.
    pub max_norm: Option<u64>,
    pub max_steps: Option<usize>,
    #[serde(with = "ratio_list")]
    pub epsilons: Vec<Rational>,
    /// Rotation avoidance `(α, δ)`: times with `‖nα‖ < δ` are outside `A`.
    #[serde(with = "ratio_pairs")]
    pub avoid: Vec<(Rational, Rational)>,
    /// Residue classes `n ≡ r (mod m)` outside `A`.
    pub progressions: Vec<(u64, u64)>,
    pub events: EventLog,
    /// Defects for acceptable detections too, not only expected ones.
    pub acceptable_defects: bool,
    /// When set, also search tower heights for ε-rigidity times, trying only
    /// towers of mass above this.
    #[serde(with = "crate::serial::opt_ratio")]
    pub tower_mass: Option<Rational>,
    /// Tower detections kept per ε; `0` keeps all.
    pub tower_hits: usize,
}

/// Largest accepted norm bound; column sums stay well inside `u64`.
pub const MAX_NORM_LIMIT: u64 = 1 << 60;

impl SamplerConfig {
    pub fn new(source: SourceSpec, samples: u64, seed: u64) -> Self {
        Self {
            source,
            denom_bits: 128,
            seed,
            samples,
            max_norm: Some(1 << 18),
            max_steps: None,
            epsilons: Vec::new(),
            avoid: Vec::new(),
            progressions: Vec::new(),
            events: EventLog::Acceptable,
            acceptable_defects: false,
            tower_mass: None,
            tower_hits: 1,
        }
    }

    pub fn validate(&self) -> Result<(), DataError> {
        if self.denom_bits < MIN_DENOM_BITS {
            return Err(DataError::Config(format!(
                "denominator bits must be at least {MIN_DENOM_BITS}"
            )));
        }
        match self.max_norm {
            None if self.max_steps.is_none() => {
                return Err(DataError::Config("need a norm or step bound".into()));
            }
            Some(n) if !(2..=MAX_NORM_LIMIT).contains(&n) => {
                return Err(DataError::Config(format!(
                    "norm bound must lie in 2..=2^60, got {n}"
                )));
            }
            _ => {}
        }
        if self
            .epsilons
            .iter()
            .any(|e| *e <= Rational::from_integer(0.into()))
        {
            return Err(DataError::Config("epsilon must be positive".into()));
        }
        self.predicate()?;
        self.sampler()?;
        Ok(())
    }

    pub fn seed_perm(&self) -> Result<Permutation, DataError> {
        let text = match &self.source {
            SourceSpec::Perm(p) | SourceSpec::Class(p) => p,
        };
        Ok(text.parse()?)
    }

    pub fn class(&self) -> Result<RauzyClass, DataError> {
        Ok(RauzyClass::of(&self.seed_perm()?)?)
    }

    pub fn sampler(&self) -> Result<Sampler, DataError> {
        let source = match &self.source {
            SourceSpec::Perm(_) => PermSource::Fixed(self.seed_perm()?),
            SourceSpec::Class(_) => PermSource::Class(self.class()?),
        };
        Ok(Sampler::new(source, self.denom_bits, self.seed)?)
    }

    /// The set `A` of admissible times.
    pub fn predicate(&self) -> Result<DensityPredicate, DataError> {
        let mut a = DensityPredicate::all();
        for (alpha, delta) in &self.avoid {
            a = a.avoiding_rotation(alpha.clone(), delta.clone())?;
        }
        for &(m, r) in &self.progressions {
            a = a.avoiding_progression(m, r)?;
        }
        Ok(a)
    }

    /// Dyadic windows `1..=i_max` that every untruncated expansion observes
    /// completely; `None` without a norm bound.
    pub fn window_limit(&self) -> Option<u32> {
        self.max_norm
            .map(|n| (63 - n.leading_zeros()).saturating_sub(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use iet_core::rational::ratio;

    #[test]
    fn validation() {
        let mut c = SamplerConfig::new(SourceSpec::Class("3 2 1".into()), 10, 1);
        assert!(c.validate().is_ok());
        assert_eq!(c.window_limit(), Some(17));
        c.denom_bits = 16;
        assert!(c.validate().is_err());
        c.denom_bits = 64;
        c.epsilons.push(ratio(0, 1));
        assert!(c.validate().is_err());
        c.epsilons.clear();
        c.source = SourceSpec::Perm("2 1 3".into());
        assert!(c.validate().is_err());
        c.source = SourceSpec::Perm("3 1 2".into());
        c.max_norm = None;
        assert!(c.validate().is_err());
        c.max_steps = Some(5);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn json_round_trip() {
        let mut c = SamplerConfig::new(SourceSpec::Perm("2 1".into()), 3, 9);
        c.epsilons = vec![ratio(1, 10)];
        c.avoid = vec![(ratio(5, 8), ratio(1, 8))];
        c.tower_mass = Some(ratio(7, 10));
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("\"1/10\""));
        let back: SamplerConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }
}
