//! Monte Carlo estimate of how often expansions become balanced before the
//! largest column grows by a fixed factor.
//!
//! A checkpoint is the first step at which `|C_max| ≥ 2^j`, for `j` in a
//! fixed range. From a checkpoint with norm `c`, the window runs while
//! `|C_max| < K^d · c`; the checkpoint succeeds if some matrix inside the
//! window has balance `< ν₀`. Only checkpoints whose whole window was
//! observed (no tie before the norm passed `K^d · c`) are counted, so the set
//! of trials does not depend on `ν₀` and the estimate is monotone in it.
//!
//! claim balance-often: balance_probe

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Pow};

use super::{RauzyClass, RvState, StopRule};
use crate::sample::{PermSource, Sampler};
use crate::stats::{wilson_interval, Z95};
use crate::{Error, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BalanceProbeConfig {
    /// Growth factor `K > 1`; windows span a factor `K^d`.
    pub growth: Rational,
    pub samples: u64,
    pub seed: u64,
    pub denom_bits: u32,
    /// Checkpoints at `|C_max| ≥ 2^j` for `j` in `first_checkpoint_bits..first_checkpoint_bits + checkpoints`.
    pub first_checkpoint_bits: u32,
    pub checkpoints: u32,
}

impl BalanceProbeConfig {
    pub fn new(growth: Rational, samples: u64, seed: u64) -> Self {
        Self {
            growth,
            samples,
            seed,
            denom_bits: 128,
            first_checkpoint_bits: 4,
            checkpoints: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BalanceEstimate {
    pub nu0: Rational,
    pub successes: u64,
    pub trials: u64,
    /// Checkpoints dropped because a tie ended the expansion inside their window.
    pub incomplete: u64,
    pub rho: Rational,
    pub ci95: (f64, f64),
}

/// One estimate per `ν₀`, all from the same samples and checkpoints.
pub fn balance_probe(
    class: &RauzyClass,
    nu0: &[Rational],
    config: &BalanceProbeConfig,
) -> Result<Vec<BalanceEstimate>, Error> {
    if config.growth <= Rational::one() {
        return Err(Error::InvalidArgument("growth factor must exceed 1"));
    }
    if config.samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample"));
    }
    let d = class.dim();
    let factor: Rational = Pow::pow(config.growth.clone(), d as u32);
    let sampler = Sampler::new(
        PermSource::Class(class.clone()),
        config.denom_bits,
        config.seed,
    )?;
    let last_bits = config.first_checkpoint_bits + config.checkpoints - 1;
    // window end for the last checkpoint is below ceil(2^(last_bits+1) · K^d)
    let horizon = ceil_mul(&(BigUint::one() << (last_bits + 1)), &factor);

    let mut window_minima: Vec<Rational> = Vec::new();
    let mut incomplete = 0u64;
    for i in 0..config.samples {
        let t = sampler.sample(i);
        let mut state = RvState::new(&t)?;
        state.run(StopRule::Norm(&horizon));
        let (mins, dropped) = checkpoint_minima(&state, config, &factor);
        window_minima.extend(mins);
        incomplete += dropped;
    }
    let trials = window_minima.len() as u64;
    Ok(nu0
        .iter()
        .map(|nu| {
            let successes = window_minima.iter().filter(|b| *b < nu).count() as u64;
            BalanceEstimate {
                nu0: nu.clone(),
                successes,
                trials,
                incomplete,
                rho: if trials == 0 {
                    Rational::from_integer(0.into())
                } else {
                    Rational::new(successes.into(), trials.into())
                },
                ci95: wilson_interval(successes, trials, Z95),
            }
        })
        .collect())
}

/// Smallest balance inside each fully observed window, and the number of
/// windows cut short.
fn checkpoint_minima(
    state: &RvState,
    config: &BalanceProbeConfig,
    factor: &Rational,
) -> (Vec<Rational>, u64) {
    let events = state.events();
    let mut out = Vec::new();
    let mut dropped = 0;
    for j in config.first_checkpoint_bits..config.first_checkpoint_bits + config.checkpoints {
        let threshold = BigUint::one() << j;
        let Some(start) = events.iter().position(|e| e.cmax >= threshold) else {
            dropped += 1;
            continue;
        };
        let c = &events[start].cmax;
        let limit = ceil_mul(c, factor);
        // window: events from start while cmax < K^d · c
        let end = events[start..].iter().position(|e| e.cmax >= limit);
        match end {
            Some(len) => {
                let min = events[start..start + len]
                    .iter()
                    .map(|e| &e.balance)
                    .min()
                    .cloned()
                    .expect("window holds its checkpoint");
                out.push(min);
            }
            None => dropped += 1,
        }
    }
    (out, dropped)
}

fn ceil_mul(x: &BigUint, r: &Rational) -> BigUint {
    let num = BigInt::from(x.clone()) * r.numer();
    let q = num.div_ceil(r.denom());
    q.to_biguint().expect("positive")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::Permutation;

    #[test]
    fn perfect_balance_never_seen_and_monotone() {
        let class = RauzyClass::of(&Permutation::reversal(3)).unwrap();
        let mut cfg = BalanceProbeConfig::new(int(2), 60, 5);
        cfg.denom_bits = 64;
        let est = balance_probe(&class, &[int(1), int(3), int(10), int(100)], &cfg).unwrap();
        assert_eq!(est[0].successes, 0);
        for w in est.windows(2) {
            assert!(w[0].successes <= w[1].successes);
            assert_eq!(w[0].trials, w[1].trials);
        }
        assert!(est[3].successes > 0);
        assert!(balance_probe(
            &class,
            &[int(2)],
            &BalanceProbeConfig::new(ratio(1, 1), 1, 0)
        )
        .is_err());
    }
}
