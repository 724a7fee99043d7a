//! Rigidity defects and ε-rigidity times.
//!
//! The defect of `T` at time `n` is `∫|Tⁿx − x| dx`, computed exactly from
//! the piecewise form of `Tⁿ`; `n` is an ε-rigidity time when the defect is
//! below ε. Along a Rauzy–Veech expansion, a step that completes an
//! acceptable block yields the candidate time `m = |C_max|`; it is *expected*
//! when, in addition, the induced interval carrying the tallest tower fills
//! more than `1 − ε/2` of the induced domain.
//!
//! claim rigidity-defect: rigidity_defect, scan_rigidity
//! claim expected-rigidity-times: detect_expected, in_wide_set, defects_at_steps
//! claim positive-lower-density: dyadic_census_of
//! claim good-times-in-a: tower_rigidity_times, DensityPredicate

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::rational::signed;
use crate::rauzy::{
    detect_acceptable, expand, AcceptableHit, AcceptableWordTable, RvState, StopRule, Towers,
};
use crate::{Error, Iet, PiecewiseTranslation, Rational};

/// `∫₀¹ |Tⁿx − x| dx`.
pub fn rigidity_defect(t: &Iet, n: u64) -> Result<Rational, Error> {
    t.ensure_nondegenerate()?;
    Ok(t.to_piecewise(n)?.defect())
}

/// A set of times with exactly decidable membership: the naturals `n ≥ 1`
/// minus a finite list, minus near-returns `{n : ‖nα‖ < δ}` of rotations,
/// minus residue classes, optionally cut off above a limit.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DensityPredicate {
    excluded: Vec<u64>,
    rotations: Vec<(Rational, Rational)>,
    progressions: Vec<(u64, u64)>,
    limit: Option<u64>,
}

impl DensityPredicate {
    /// All naturals.
    pub fn all() -> Self {
        Self::default()
    }

    pub fn without_times(mut self, times: impl IntoIterator<Item = u64>) -> Self {
        self.excluded.extend(times);
        self.excluded.sort_unstable();
        self.excluded.dedup();
        self
    }

    /// Removes `{n : ‖nα‖ < δ}`.
    pub fn avoiding_rotation(mut self, alpha: Rational, delta: Rational) -> Result<Self, Error> {
        if !delta.is_positive() {
            return Err(Error::InvalidArgument("avoidance radius must be positive"));
        }
        self.rotations.push((alpha, delta));
        Ok(self)
    }

    /// Removes `{n : n ≡ residue mod modulus}`.
    pub fn avoiding_progression(mut self, modulus: u64, residue: u64) -> Result<Self, Error> {
        if modulus == 0 {
            return Err(Error::InvalidArgument("modulus must be positive"));
        }
        self.progressions.push((modulus, residue % modulus));
        Ok(self)
    }

    /// Keeps only `n ≤ limit`.
    pub fn up_to(mut self, limit: u64) -> Self {
        self.limit = Some(self.limit.map_or(limit, |l| l.min(limit)));
        self
    }

    pub fn excluded_times(&self) -> &[u64] {
        &self.excluded
    }

    pub fn rotations(&self) -> &[(Rational, Rational)] {
        &self.rotations
    }

    pub fn progressions(&self) -> &[(u64, u64)] {
        &self.progressions
    }

    pub fn limit(&self) -> Option<u64> {
        self.limit
    }

    pub fn contains(&self, n: u64) -> bool {
        if n == 0 || self.limit.is_some_and(|l| n > l) {
            return false;
        }
        if self.excluded.binary_search(&n).is_ok() {
            return false;
        }
        if self.progressions.iter().any(|&(m, r)| n % m == r) {
            return false;
        }
        !self.rotations.iter().any(|(a, d)| near_return(a, d, n))
    }

    /// `|A ∩ [1, N]|`.
    pub fn count_up_to(&self, n: u64) -> u64 {
        (1..=n).filter(|&k| self.contains(k)).count() as u64
    }

    /// `|A ∩ [1, N]| / N`.
    pub fn density_up_to(&self, n: u64) -> Rational {
        if n == 0 {
            return Rational::one();
        }
        Rational::new(self.count_up_to(n).into(), n.into())
    }
}

/// `‖nα‖ < δ`, exactly.
fn near_return(alpha: &Rational, delta: &Rational, n: u64) -> bool {
    let q = alpha.denom();
    let r = (alpha.numer() * BigInt::from(n)).mod_floor(q);
    let dist = core::cmp::min(r.clone(), q - &r);
    // dist / q < δ
    dist * delta.denom() < delta.numer() * q
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DetectionSource {
    Plain,
    Acceptable,
    Expected,
}

impl DetectionSource {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Plain => "plain",
            Self::Acceptable => "acceptable",
            Self::Expected => "expected",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RigidityDetection {
    pub n: u64,
    pub defect: Rational,
    pub source: DetectionSource,
    pub dyadic: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RigidityReport {
    pub subject: Iet,
    pub epsilon: Rational,
    pub detections: Vec<RigidityDetection>,
    pub first_hit: Option<u64>,
}

impl RigidityReport {
    /// Every recorded defect equals a fresh exact recomputation.
    pub fn verify(&self) -> bool {
        self.detections
            .iter()
            .all(|d| rigidity_defect(&self.subject, d.n).is_ok_and(|r| r == d.defect))
    }

    /// Dyadic windows containing a detection.
    pub fn windows(&self) -> BTreeSet<u32> {
        self.detections.iter().map(|d| d.dyadic).collect()
    }
}

fn dyadic_of(n: u64) -> u32 {
    63 - n.leading_zeros()
}

/// All `n ≤ n_max` in `A` whose defect is below `ε`.
pub fn scan_rigidity(
    t: &Iet,
    epsilon: &Rational,
    n_max: u64,
    a: &DensityPredicate,
) -> Result<RigidityReport, Error> {
    if !epsilon.is_positive() {
        return Err(Error::InvalidArgument("epsilon must be positive"));
    }
    t.ensure_nondegenerate()?;
    let step = t.as_piecewise();
    let mut power = PiecewiseTranslation::identity(t.scale().clone());
    let mut detections = Vec::new();
    for n in 1..=n_max {
        power = step.compose(&power);
        if !a.contains(n) {
            continue;
        }
        let defect = power.defect();
        if defect < *epsilon {
            detections.push(RigidityDetection {
                n,
                defect,
                source: DetectionSource::Plain,
                dyadic: dyadic_of(n),
            });
        }
    }
    Ok(RigidityReport {
        subject: t.clone(),
        first_hit: detections.first().map(|d| d.n),
        epsilon: epsilon.clone(),
        detections,
    })
}

/// An expected rigidity time found along an expansion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpectedTime {
    pub step: usize,
    pub m: BigUint,
}

/// `λ / |λ| > 1 − ε/2` for the induced length at the `C_max` index, strictly.
pub fn in_wide_set(cmax_length: &BigUint, total: &BigUint, epsilon: &Rational) -> bool {
    // 2·den·λ > (2·den − num)·|λ|
    let num = epsilon.numer();
    let den = epsilon.denom();
    let lhs = BigInt::from(2) * den * signed(cmax_length.clone());
    let rhs = (BigInt::from(2) * den - num) * signed(total.clone());
    lhs > rhs
}

/// Acceptable steps at which the induced IET lies in the wide set for `ε`.
pub fn detect_expected(
    state: &RvState,
    table: &AcceptableWordTable,
    epsilon: &Rational,
) -> Vec<ExpectedTime> {
    expected_among(state, &detect_acceptable(state, table), epsilon)
}

fn expected_among(
    state: &RvState,
    hits: &[AcceptableHit],
    epsilon: &Rational,
) -> Vec<ExpectedTime> {
    hits.iter()
        .filter_map(|h| {
            let e = state.event(h.step)?;
            in_wide_set(&e.cmax_length, &e.total_length, epsilon).then(|| ExpectedTime {
                step: h.step,
                m: h.cmax.clone(),
            })
        })
        .collect()
}

/// Flags acceptable steps and, per ε, expected steps on the state's events.
pub fn annotate_events(state: &mut RvState, table: &AcceptableWordTable, epsilons: &[Rational]) {
    let hits = detect_acceptable(state, table);
    let mut marks: Vec<(usize, Vec<Rational>)> = Vec::with_capacity(hits.len());
    for h in &hits {
        let e = state.event(h.step).expect("hit within expansion");
        let expected = epsilons
            .iter()
            .filter(|eps| in_wide_set(&e.cmax_length, &e.total_length, eps))
            .cloned()
            .collect();
        marks.push((h.step, expected));
    }
    for (step, expected) in marks {
        let e = &mut state.events_mut()[step - 1];
        e.acceptable = true;
        e.expected = expected;
    }
}

/// Exact defect of the start IET at `m = |C_max|` after `step` steps, via
/// the tower decomposition at that step.
pub fn defect_at_step(state: &RvState, step: usize) -> Result<Rational, Error> {
    let prefix = state.prefix(step);
    let m = prefix
        .cmax()
        .to_u64()
        .ok_or(Error::InvalidArgument("time exceeds u64"))?;
    Ok(Towers::from_state(&prefix)?.defect(m))
}

/// Defects at several steps of one expansion, in the order given, reusing
/// a single forward pass.
pub fn defects_at_steps(state: &RvState, steps: &[usize]) -> Result<Vec<Rational>, Error> {
    let mut order: Vec<usize> = (0..steps.len()).collect();
    order.sort_by_key(|&i| steps[i]);
    let mut out = alloc::vec![Rational::zero(); steps.len()];
    let mut walker = RvState::new(state.start())?;
    for i in order {
        let target = steps[i];
        if target > state.steps() {
            return Err(Error::InvalidArgument("step beyond the expansion"));
        }
        walker.run(StopRule::Steps(target));
        let m = walker
            .cmax()
            .to_u64()
            .ok_or(Error::InvalidArgument("time exceeds u64"))?;
        out[i] = Towers::from_state(&walker)?.defect(m);
    }
    Ok(out)
}

/// Parameters of [`tower_rigidity_times`].
#[derive(Clone, Debug)]
pub struct TowerSearch<'a> {
    pub epsilon: Rational,
    /// Expansion stops once `|C_max|` reaches this.
    pub max_norm: BigUint,
    /// Only towers covering more than this fraction of `[0, 1)` are tried.
    pub min_mass: Rational,
    pub times: &'a DensityPredicate,
    /// Stop after this many detections; `0` for no limit.
    pub max_hits: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerDetection {
    pub step: usize,
    pub m: u64,
    pub defect: Rational,
    /// `|C_j| λ_j` of the tower whose height is `m`.
    pub mass: Rational,
}

/// ε-rigidity times among tower heights along the expansion of `t`.
///
/// A time `m = |C_j|` is tried when tower `j` is massive and `m ∈ A`; the
/// defect is then computed exactly, and each `m` is tried once.
pub fn tower_rigidity_times(
    t: &Iet,
    search: &TowerSearch<'_>,
) -> Result<Vec<TowerDetection>, Error> {
    if !search.epsilon.is_positive() {
        return Err(Error::InvalidArgument("epsilon must be positive"));
    }
    let mut state = RvState::new(t)?;
    let mut tried = BTreeSet::new();
    let mut out = Vec::new();
    let scale = signed(t.scale().clone());
    let (num, den) = (search.min_mass.numer(), search.min_mass.denom());
    while state.cmax() < search.max_norm && state.advance().is_ok() {
        let mut towers: Option<Towers> = None;
        for j in 0..t.dim() {
            let h = &state.column_sums()[j];
            let weight = signed(h * &state.current_integer_lengths()[j]);
            if &weight * den <= num * &scale {
                continue;
            }
            let Some(m) = h.to_u64() else { continue };
            if !search.times.contains(m) || !tried.insert(m) {
                continue;
            }
            if towers.is_none() {
                towers = Some(Towers::from_state(&state)?);
            }
            let defect = towers.as_ref().expect("just built").defect(m);
            if defect < search.epsilon {
                out.push(TowerDetection {
                    step: state.steps(),
                    m,
                    defect,
                    mass: Rational::new(weight, scale.clone()),
                });
                if search.max_hits > 0 && out.len() >= search.max_hits {
                    return Ok(out);
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CensusKind {
    /// Acceptable steps whose time `m` really has defect below ε.
    Acceptable,
    /// Expected ε-rigidity times.
    Expected,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicCensus {
    /// Windows `i ≤ i_max` containing a detection.
    pub hits: BTreeSet<u32>,
    pub proxy: Rational,
    /// `(step, m, defect)` for every detection with `m < 2^{i_max+1}`.
    pub detections: Vec<(usize, BigUint, Rational)>,
    pub tie_step: Option<usize>,
}

/// Expands until `|C_max| ≥ 2^{i_max+1}` (or a tie) and records which dyadic
/// windows received detections of the given kind.
pub fn dyadic_census_of(
    t: &Iet,
    epsilon: &Rational,
    i_max: u32,
    table: &AcceptableWordTable,
    kind: CensusKind,
) -> Result<DyadicCensus, Error> {
    if i_max == 0 {
        return Err(Error::InvalidArgument("i_max must be at least 1"));
    }
    let bound = BigUint::one() << (i_max + 1);
    let state = expand(t, StopRule::Norm(&bound))?;
    let hits = detect_acceptable(&state, table);
    let candidates: Vec<(usize, BigUint)> = match kind {
        CensusKind::Acceptable => hits.iter().map(|h| (h.step, h.cmax.clone())).collect(),
        CensusKind::Expected => expected_among(&state, &hits, epsilon)
            .into_iter()
            .map(|e| (e.step, e.m))
            .collect(),
    };
    let candidates: Vec<(usize, BigUint)> =
        candidates.into_iter().filter(|(_, m)| *m < bound).collect();
    let steps: Vec<usize> = candidates.iter().map(|c| c.0).collect();
    let defects = defects_at_steps(&state, &steps)?;
    let mut detections = Vec::new();
    let mut windows = BTreeSet::new();
    for ((step, m), defect) in candidates.into_iter().zip(defects) {
        if kind == CensusKind::Acceptable && defect >= *epsilon {
            continue;
        }
        let i = crate::rauzy::dyadic_index(&m);
        if i >= 1 && i <= i_max {
            windows.insert(i);
        }
        detections.push((step, m, defect));
    }
    Ok(DyadicCensus {
        proxy: Rational::new((windows.len() as u64).into(), u64::from(i_max).into()),
        hits: windows,
        detections,
        tie_step: state.tie_step(),
    })
}
