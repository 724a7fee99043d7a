//! Reproducible sampling of IETs with high-denominator rational lengths.
//!
//! Sample `i` of a sampler with seed `s` is drawn from ChaCha20 keyed by `s`
//! on stream `i`, so every sample can be regenerated on its own, in any order
//! and on any thread.
//!
//! Lengths are the spacings of `d − 1` distinct uniform points of
//! `{1, …, 2^D − 1}`, which is the uniform distribution on the lattice points
//! of the open simplex with denominator `2^D`.

use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::Zero;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::rauzy::RauzyClass;
use crate::{Error, Iet, Permutation};

/// Smallest accepted number of denominator bits.
pub const MIN_DENOM_BITS: u32 = 32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PermSource {
    Fixed(Permutation),
    /// Uniform over the members of the class.
    Class(RauzyClass),
}

impl PermSource {
    pub fn dim(&self) -> usize {
        match self {
            Self::Fixed(p) => p.len(),
            Self::Class(c) => c.dim(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sampler {
    source: PermSource,
    denom_bits: u32,
    seed: u64,
}

impl Sampler {
    pub fn new(source: PermSource, denom_bits: u32, seed: u64) -> Result<Self, Error> {
        if denom_bits < MIN_DENOM_BITS {
            return Err(Error::InvalidArgument(
                "denominator bits must be at least 32",
            ));
        }
        let d = source.dim();
        if d < 2 {
            return Err(Error::TooFewIntervals { d });
        }
        if let PermSource::Fixed(p) = &source {
            if !p.is_irreducible() {
                return Err(Error::ReduciblePermutation);
            }
        }
        Ok(Self {
            source,
            denom_bits,
            seed,
        })
    }

    pub fn source(&self) -> &PermSource {
        &self.source
    }

    pub fn denom_bits(&self) -> u32 {
        self.denom_bits
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    /// The random stream of sample `index`.
    pub fn rng(&self, index: u64) -> ChaCha20Rng {
        stream(self.seed, index)
    }

    pub fn sample(&self, index: u64) -> Iet {
        self.sample_with_rng(index).0
    }

    /// The sample together with its stream, positioned after the draw, for
    /// callers that need further randomness tied to the same sample.
    pub fn sample_with_rng(&self, index: u64) -> (Iet, ChaCha20Rng) {
        let mut rng = self.rng(index);
        let perm = match &self.source {
            PermSource::Fixed(p) => p.clone(),
            PermSource::Class(c) => {
                c.members()[uniform_below(&mut rng, c.len() as u64) as usize].clone()
            }
        };
        let lengths = simplex_lattice_point(&mut rng, perm.len(), self.denom_bits);
        let iet = Iet::from_integer_lengths(lengths, perm).expect("spacings are positive");
        (iet, rng)
    }
}

/// ChaCha20 keyed by `seed`, on stream `index`.
pub fn stream(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform integer in `[0, 2^bits)`.
pub fn random_bits<R: RngCore>(rng: &mut R, bits: u32) -> BigUint {
    let words = bits.div_ceil(32) as usize;
    let mut digits: Vec<u32> = (0..words).map(|_| rng.next_u32()).collect();
    let extra = words as u32 * 32 - bits;
    if extra > 0 {
        if let Some(top) = digits.last_mut() {
            *top >>= extra;
        }
    }
    BigUint::from_slice(&digits)
}

/// Uniform integer in `[0, bound)` by rejection; `bound ≥ 1`.
pub fn random_below<R: RngCore>(rng: &mut R, bound: &BigUint) -> BigUint {
    assert!(!bound.is_zero());
    let bits = bound.bits() as u32;
    loop {
        let x = random_bits(rng, bits);
        if x < *bound {
            return x;
        }
    }
}

/// Uniform integer in `[0, bound)` for `bound ≥ 1`.
pub fn uniform_below<R: RngCore>(rng: &mut R, bound: u64) -> u64 {
    assert!(bound > 0);
    let zone = u64::MAX - u64::MAX % bound;
    loop {
        let x = rng.next_u64();
        if x < zone {
            return x % bound;
        }
    }
}

/// Uniform positive integer vector of length `d` summing to `2^bits`.
pub fn simplex_lattice_point<R: RngCore>(rng: &mut R, d: usize, bits: u32) -> Vec<BigUint> {
    let total = BigUint::from(1u32) << bits;
    loop {
        let mut cuts: Vec<BigUint> = (0..d - 1).map(|_| random_bits(rng, bits)).collect();
        cuts.sort_unstable();
        let distinct = cuts.windows(2).all(|w| w[0] != w[1]);
        if !distinct || cuts.first().is_some_and(|c| c.is_zero()) {
            continue;
        }
        let mut out = Vec::with_capacity(d);
        let mut prev = BigUint::zero();
        for c in cuts {
            out.push(&c - &prev);
            prev = c;
        }
        out.push(&total - &prev);
        return out;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_index() {
        let s = Sampler::new(PermSource::Fixed(Permutation::reversal(4)), 128, 7).unwrap();
        assert_eq!(s.sample(3), s.sample(3));
        assert_ne!(s.sample(3), s.sample(4));
        let t = s.sample(0);
        assert_eq!(t.dim(), 4);
        assert!(t.scale().bits() <= 129);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(Sampler::new(PermSource::Fixed(Permutation::reversal(3)), 16, 0).is_err());
        assert_eq!(
            Sampler::new(PermSource::Fixed(Permutation::identity(3)), 64, 0),
            Err(Error::ReduciblePermutation)
        );
    }

    #[test]
    fn class_source_hits_every_member() {
        let class = RauzyClass::of(&Permutation::reversal(4)).unwrap();
        let s = Sampler::new(PermSource::Class(class.clone()), 64, 1).unwrap();
        let mut seen = alloc::vec![false; class.len()];
        for i in 0..200 {
            seen[class.index_of(s.sample(i).perm()).unwrap()] = true;
        }
        assert!(seen.iter().all(|&x| x));
    }

    #[test]
    fn lattice_points_sum_to_power_of_two() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for d in 2..6 {
            let v = simplex_lattice_point(&mut rng, d, 40);
            assert_eq!(v.len(), d);
            assert_eq!(v.iter().sum::<BigUint>(), BigUint::from(1u64 << 40));
            assert!(v.iter().all(|x| !x.is_zero()));
        }
    }
}
