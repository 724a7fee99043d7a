//! Correlation sequences of step functions under IETs.
//!
//! For a real step function `f` with cells `B_i` and values `v_i`, the
//! correlations `c_n = ⟨f, f∘Tⁿ⟩ = Σ_{i,j} v_i v_j λ(B_i ∩ T⁻ⁿB_j)` are the
//! Fourier coefficients of the spectral measure of `f`. They are exact
//! rationals; a whole series `c_0..c_N` is computed by pushing the cells of
//! `f` through `T` one step at a time.
//!
//! claim spectral-moments: correlation, CorrelationSeries::compute
//! claim wiener-dichotomy: CorrelationSeries::wiener_average
//! claim low-correlation-density-one: CorrelationSeries::low_correlation_set
//! claim rigidity-kills-correlation: disjointness_witness, Witness::revalidate
//! claim rotation-avoidance: rotation_rigidity, avoidance_set

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::rational::{dist_to_int, lcm_all, scaled_numer, signed, to_biguint};
use crate::rigidity::DensityPredicate;
use crate::rigidity::{tower_rigidity_times, TowerSearch};
use crate::rope::OrbitRope;
use crate::sample::Sampler;
use crate::{Error, Iet, Rational};

/// A real step function on `[0, 1)`: cells `[a, b)` in increasing order
/// covering `[0, 1)`, each with a value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepFunction {
    cells: Vec<(Rational, Rational, Rational)>,
}

impl StepFunction {
    pub fn new(cells: Vec<(Rational, Rational, Rational)>) -> Result<Self, Error> {
        let mut at = Rational::zero();
        for (a, b, _) in &cells {
            if *a != at || b <= a {
                return Err(Error::InvalidArgument(
                    "cells must partition [0, 1) in order",
                ));
            }
            at = b.clone();
        }
        if !at.is_one() {
            return Err(Error::InvalidArgument(
                "cells must partition [0, 1) in order",
            ));
        }
        Ok(Self { cells })
    }

    /// `1_{[a, b)} − (b − a)`.
    pub fn centered_indicator(a: &Rational, b: &Rational) -> Result<Self, Error> {
        if a.is_negative() || b <= a || *b > Rational::one() {
            return Err(Error::InvalidArgument("need 0 <= a < b <= 1"));
        }
        let mean = b - a;
        let mut cells = Vec::new();
        if a.is_positive() {
            cells.push((Rational::zero(), a.clone(), -mean.clone()));
        }
        cells.push((a.clone(), b.clone(), Rational::one() - &mean));
        if !b.is_one() {
            cells.push((b.clone(), Rational::one(), -mean));
        }
        Self::new(cells)
    }

    pub fn cells(&self) -> &[(Rational, Rational, Rational)] {
        &self.cells
    }

    /// `∫ f`.
    pub fn integral(&self) -> Rational {
        self.cells.iter().map(|(a, b, v)| (b - a) * v).sum()
    }

    pub fn is_mean_zero(&self) -> bool {
        self.integral().is_zero()
    }

    /// `‖f‖²`.
    pub fn norm_squared(&self) -> Rational {
        self.cells.iter().map(|(a, b, v)| (b - a) * v * v).sum()
    }

    pub fn value_at(&self, x: &Rational) -> Option<&Rational> {
        self.cells
            .iter()
            .find(|(a, b, _)| a <= x && x < b)
            .map(|(_, _, v)| v)
    }
}

/// `c_n` computed from the piecewise form of `Tⁿ` by intersecting every
/// piece image with every cell.
pub fn correlation(t: &Iet, f: &StepFunction, n: u64) -> Result<Rational, Error> {
    let power = t.to_piecewise(n)?;
    let mut total = Rational::zero();
    for (left, right, shift) in power.pieces() {
        // x ∈ [left, right) ∩ B_i, Tⁿx = x + shift ∈ B_j
        for (a, b, v) in f.cells() {
            let lo = core::cmp::max(&left, a);
            let hi = core::cmp::min(&right, b);
            if lo >= hi {
                continue;
            }
            for (c, e, w) in f.cells() {
                let lo2 = core::cmp::max(lo.clone(), c - &shift);
                let hi2 = core::cmp::min(hi.clone(), e - &shift);
                if lo2 < hi2 {
                    total += (hi2 - lo2) * v * w;
                }
            }
        }
    }
    Ok(total)
}

/// `c_0, …, c_N` for one IET and one step function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorrelationSeries {
    values: Vec<Rational>,
}

impl CorrelationSeries {
    /// Series up to and including `c_n_max`, one orbit pass.
    pub fn compute(t: &Iet, f: &StepFunction, n_max: u64) -> Result<Self, Error> {
        t.ensure_nondegenerate()?;
        let mut denoms: Vec<BigInt> = alloc::vec![signed(t.scale().clone())];
        for (a, b, _) in f.cells() {
            denoms.push(a.denom().clone());
            denoms.push(b.denom().clone());
        }
        let scale = lcm_all(denoms.iter());
        let vden = lcm_all(f.cells().iter().map(|(_, _, v)| v.denom()));
        let weights: Vec<BigInt> = f
            .cells()
            .iter()
            .map(|(_, _, v)| scaled_numer(v, &vden))
            .collect();
        let cells: Vec<(BigUint, BigUint, u32)> = f
            .cells()
            .iter()
            .enumerate()
            .map(|(i, (a, b, _))| {
                let lo = to_biguint(&scaled_numer(a, &scale));
                let hi = to_biguint(&scaled_numer(b, &scale));
                (lo.clone(), hi - lo, i as u32)
            })
            .collect();
        let cuts: Vec<BigUint> = cells.iter().skip(1).map(|c| c.0.clone()).collect();
        let factor = to_biguint(&scale) / t.scale();
        let breaks: Vec<BigUint> = t.integer_breaks().iter().map(|b| b * &factor).collect();
        let mut rope = OrbitRope::with_cells(to_biguint(&scale), &cells, weights.clone());
        let denom = &scale * &vden * &vden;
        let n_len = n_max
            .checked_add(1)
            .and_then(|n| n.to_usize())
            .ok_or(Error::InvalidArgument("series too long"))?;
        let mut values = Vec::with_capacity(n_len);
        for n in 0..=n_max {
            if n > 0 {
                rope.apply(&breaks, t.perm());
            }
            let sums = rope.weighted_sums(&cuts);
            let num: BigInt = sums.iter().zip(&weights).map(|(s, w)| s * w).sum();
            values.push(Rational::new(num, denom.clone()));
        }
        Ok(Self { values })
    }

    pub fn from_values(values: Vec<Rational>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn c0(&self) -> &Rational {
        &self.values[0]
    }

    /// `c_n` for any integer `n`, using `c_{−n} = c_n`.
    pub fn get(&self, n: i64) -> Option<&Rational> {
        self.values.get(n.unsigned_abs() as usize)
    }

    /// `N⁻¹ Σ_{k<N} c_k²`.
    pub fn wiener_average(&self, n: usize) -> Result<Rational, Error> {
        if n == 0 || n > self.values.len() {
            return Err(Error::SeriesTooShort {
                needed: n,
                available: self.values.len(),
            });
        }
        let sum: Rational = self.values[..n].iter().map(|c| c * c).sum();
        Ok(sum / Rational::from_integer(BigInt::from(n)))
    }

    /// Times `n ≤ N` with `|c_{n+k}| < threshold · c_0` for all `|k| ≤ k_range`,
    /// where `N = len − 1 − k_range`, as a predicate cut off at `N`.
    pub fn low_correlation_set(
        &self,
        threshold: &Rational,
        k_range: usize,
    ) -> Result<DensityPredicate, Error> {
        if !threshold.is_positive() {
            return Err(Error::InvalidArgument("threshold must be positive"));
        }
        let needed = k_range + 2;
        if self.values.len() < needed {
            return Err(Error::SeriesTooShort {
                needed,
                available: self.values.len(),
            });
        }
        let n_max = (self.values.len() - 1 - k_range) as u64;
        let bound = threshold * self.c0();
        let small: Vec<bool> = self.values.iter().map(|c| c.abs() < bound).collect();
        let k = k_range as i64;
        let excluded = (1..=n_max)
            .filter(|&n| !(-k..=k).all(|j| small[(n as i64 + j).unsigned_abs() as usize]));
        Ok(DensityPredicate::all().without_times(excluded).up_to(n_max))
    }
}

/// Continued fraction `[a_0; a_1, …]` of a rational with its convergents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuedFraction {
    pub quotients: Vec<BigInt>,
    /// `(p_k, q_k)`.
    pub convergents: Vec<(BigInt, BigInt)>,
}

impl ContinuedFraction {
    pub fn of(alpha: &Rational) -> Self {
        let mut quotients = Vec::new();
        let (mut p, mut q) = (alpha.numer().clone(), alpha.denom().clone());
        while !q.is_zero() {
            let (a, r) = p.div_mod_floor(&q);
            quotients.push(a);
            p = q;
            q = r;
        }
        let mut convergents = Vec::with_capacity(quotients.len());
        let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
        let (mut p1, mut q1) = (BigInt::zero(), BigInt::one());
        for a in &quotients {
            let p2 = a * &p0 + &p1;
            let q2 = a * &q0 + &q1;
            convergents.push((p2.clone(), q2.clone()));
            p1 = p0;
            q1 = q0;
            p0 = p2;
            q0 = q2;
        }
        Self {
            quotients,
            convergents,
        }
    }

    pub fn denominators(&self) -> Vec<BigInt> {
        self.convergents.iter().map(|(_, q)| q.clone()).collect()
    }
}

/// The first `count` rigidity times of rotation by `α`: the distinct
/// convergent denominators, then multiples of the period.
pub fn rotation_rigidity(alpha: &Rational, count: usize) -> Result<Vec<u64>, Error> {
    if !alpha.is_positive() || *alpha >= Rational::one() {
        return Err(Error::InvalidArgument("need 0 < alpha < 1"));
    }
    let mut out: Vec<u64> = Vec::new();
    for q in ContinuedFraction::of(alpha).denominators() {
        let q = q
            .to_u64()
            .ok_or(Error::InvalidArgument("denominator exceeds u64"))?;
        if out.last() != Some(&q) {
            out.push(q);
        }
    }
    let period = *out.last().expect("at least one convergent");
    let mut k = 2;
    while out.len() < count {
        out.push(period * k);
        k += 1;
    }
    out.truncate(count);
    Ok(out)
}

/// `{n : ‖nα‖ ≥ δ}`.
pub fn avoidance_set(alpha: &Rational, delta: &Rational) -> Result<DensityPredicate, Error> {
    DensityPredicate::all().avoiding_rotation(alpha.clone(), delta.clone())
}

/// Defect of rotation by `α` at time `n` in closed form: `2β(1 − β)`, `β = {nα}`.
pub fn rotation_defect(alpha: &Rational, n: u64) -> Rational {
    let beta = crate::rational::frac(&(alpha * Rational::from_integer(n.into())));
    Rational::from_integer(2.into()) * &beta * (Rational::one() - &beta)
}

/// `‖nα‖`.
pub fn circle_distance(alpha: &Rational, n: u64) -> Rational {
    dist_to_int(&(alpha * Rational::from_integer(n.into())))
}

/// Parameters of [`disjointness_witness`].
#[derive(Clone, Debug)]
pub struct WitnessSearch<'a> {
    pub target: &'a Iet,
    pub f: &'a StepFunction,
    /// Bound for both the defect of the sample and `|c_{n+k}| / c_0` of the target.
    pub threshold: Rational,
    pub k_range: usize,
    /// Largest time considered.
    pub horizon: u64,
    /// Tower mass filter for candidate times, see [`TowerSearch`].
    pub min_mass: Rational,
    /// Stop once this many witnesses are found; `0` searches the whole budget.
    pub wanted: usize,
}

/// A sampled IET `S` and a time `n` at which `S` is nearly the identity
/// while the target's correlations around `n` are small.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub sample_index: u64,
    pub sample: Iet,
    pub n: u64,
    pub step: usize,
    pub defect: Rational,
    /// `max_{|k| ≤ k_range} |c_{n+k}| / c_0`.
    pub max_correlation: Rational,
}

impl Witness {
    /// Recomputes both bounds from scratch, without the correlation series.
    pub fn revalidate(
        &self,
        target: &Iet,
        f: &StepFunction,
        threshold: &Rational,
        k_range: usize,
    ) -> Result<bool, Error> {
        if crate::rigidity::rigidity_defect(&self.sample, self.n)? >= *threshold {
            return Ok(false);
        }
        let c0 = f.norm_squared();
        let k = k_range as i64;
        for j in -k..=k {
            let time = (self.n as i64 + j).unsigned_abs();
            if correlation(target, f, time)?.abs() >= threshold * &c0 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessOutcome {
    pub witnesses: Vec<Witness>,
    pub samples_used: u64,
    /// Fewer than `wanted` witnesses were found within the budget.
    pub exhausted: bool,
}

/// Draws samples `0..budget` and keeps, per sample, the first tower-height
/// rigidity time below the threshold that lies in the target's
/// low-correlation set.
pub fn disjointness_witness(
    search: &WitnessSearch<'_>,
    sampler: &Sampler,
    budget: u64,
) -> Result<WitnessOutcome, Error> {
    let series = CorrelationSeries::compute(
        search.target,
        search.f,
        search.horizon + search.k_range as u64,
    )?;
    let low = series.low_correlation_set(&search.threshold, search.k_range)?;
    if low.count_up_to(search.horizon) == 0 {
        return Err(Error::InvalidArgument(
            "target has no low-correlation times",
        ));
    }
    let tower = TowerSearch {
        epsilon: search.threshold.clone(),
        max_norm: BigUint::from(search.horizon) + 1u32,
        min_mass: search.min_mass.clone(),
        times: &low,
        max_hits: 1,
    };
    let c0 = series.c0().clone();
    let k = search.k_range as i64;
    let mut witnesses = Vec::new();
    let mut used = 0;
    for i in 0..budget {
        if search.wanted > 0 && witnesses.len() >= search.wanted {
            break;
        }
        used += 1;
        let sample = sampler.sample(i);
        let Some(hit) = tower_rigidity_times(&sample, &tower)?.into_iter().next() else {
            continue;
        };
        let max_correlation = (-k..=k)
            .map(|j| series.get(hit.m as i64 + j).expect("within series").abs() / &c0)
            .max()
            .expect("nonempty range");
        witnesses.push(Witness {
            sample_index: i,
            sample,
            n: hit.m,
            step: hit.step,
            defect: hit.defect,
            max_correlation,
        });
    }
    Ok(WitnessOutcome {
        exhausted: search.wanted > 0 && witnesses.len() < search.wanted,
        witnesses,
        samples_used: used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::Permutation;

    fn half() -> StepFunction {
        StepFunction::centered_indicator(&int(0), &ratio(1, 2)).unwrap()
    }

    #[test]
    fn rotation_correlations() {
        let f = half();
        assert_eq!(f.norm_squared(), ratio(1, 4));
        assert!(f.is_mean_zero());
        let r2 = Iet::rotation(&ratio(1, 2)).unwrap();
        assert_eq!(correlation(&r2, &f, 1).unwrap(), ratio(-1, 4));
        let r3 = Iet::rotation(&ratio(1, 3)).unwrap();
        assert_eq!(correlation(&r3, &f, 1).unwrap(), ratio(-1, 12));
        assert_eq!(correlation(&r3, &f, 0).unwrap(), ratio(1, 4));
    }

    #[test]
    fn series_matches_direct_correlations() {
        let t = Iet::new(
            &[ratio(2, 11), ratio(4, 11), ratio(1, 11), ratio(4, 11)],
            Permutation::new(&[4, 3, 2, 1]).unwrap(),
        )
        .unwrap();
        let f = StepFunction::centered_indicator(&ratio(1, 3), &ratio(5, 7)).unwrap();
        let s = CorrelationSeries::compute(&t, &f, 30).unwrap();
        for n in 0..=30 {
            assert_eq!(
                s.values()[n as usize],
                correlation(&t, &f, n).unwrap(),
                "n = {n}"
            );
        }
    }

    #[test]
    fn wiener_average_of_third_rotation() {
        let t = Iet::rotation(&ratio(1, 3)).unwrap();
        let s = CorrelationSeries::compute(&t, &half(), 30).unwrap();
        assert_eq!(
            &s.values()[..3],
            [ratio(1, 4), ratio(-1, 12), ratio(-1, 12)]
        );
        for n in [3, 6, 30] {
            assert_eq!(s.wiener_average(n).unwrap(), ratio(11, 432));
        }
        let id = CorrelationSeries::compute(&Iet::identity(2), &half(), 5).unwrap();
        assert_eq!(id.wiener_average(6).unwrap(), ratio(1, 16));
        assert!(id.wiener_average(7).is_err());
    }

    #[test]
    fn low_correlation_sets() {
        let t = Iet::rotation(&ratio(1, 3)).unwrap();
        let s = CorrelationSeries::compute(&t, &half(), 40).unwrap();
        let a = s.low_correlation_set(&ratio(1, 4), 0).unwrap();
        assert_eq!(a.count_up_to(40), 0);
        let id = CorrelationSeries::compute(&Iet::identity(3), &half(), 40).unwrap();
        assert_eq!(
            id.low_correlation_set(&ratio(1, 2), 2)
                .unwrap()
                .count_up_to(40),
            0
        );
        assert!(s.low_correlation_set(&ratio(1, 4), 60).is_err());
    }

    #[test]
    fn witnesses_revalidate() {
        use crate::sample::PermSource;
        let sampler = Sampler::new(PermSource::Fixed(Permutation::reversal(4)), 64, 11).unwrap();
        let target = sampler.sample(0);
        let f = half();
        let search = WitnessSearch {
            target: &target,
            f: &f,
            threshold: ratio(1, 5),
            k_range: 1,
            horizon: 300,
            min_mass: ratio(1, 2),
            wanted: 2,
        };
        let samples = Sampler::new(PermSource::Fixed(Permutation::reversal(3)), 64, 12).unwrap();
        let out = disjointness_witness(&search, &samples, 40).unwrap();
        assert!(!out.witnesses.is_empty());
        for w in &out.witnesses {
            assert!(w.revalidate(&target, &f, &ratio(1, 5), 1).unwrap());
        }
        let id = Iet::identity(2);
        let none = WitnessSearch {
            target: &id,
            ..search
        };
        assert!(disjointness_witness(&none, &samples, 5).is_err());
    }

    #[test]
    fn continued_fractions() {
        let cf = ContinuedFraction::of(&ratio(5, 8));
        assert_eq!(cf.quotients, [0, 1, 1, 1, 2].map(BigInt::from));
        assert_eq!(cf.denominators(), [1, 1, 2, 3, 8].map(BigInt::from));
        assert_eq!(
            rotation_rigidity(&ratio(5, 8), 6).unwrap(),
            [1, 2, 3, 8, 16, 24]
        );
        for n in [8, 16, 24] {
            assert!(rotation_defect(&ratio(5, 8), n).is_zero());
        }
        let a = avoidance_set(&ratio(5, 8), &ratio(1, 8)).unwrap();
        assert!(!a.contains(8) && !a.contains(16));
        assert_eq!(circle_distance(&ratio(5, 8), 3), ratio(1, 8));
    }
}
