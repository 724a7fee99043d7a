//! Rauzy–Veech induction.
//!
//! One step replaces `T` by its first-return map to `[0, 1 − min(l_d, l_k))`,
//! where `k = π⁻¹(d)` is the interval placed last by `T`, rescaled to unit
//! length. The two outcomes are labelled:
//!
//! - `A`: `l_d > l_k`. Interval `d` keeps its place and loses `l_k`; interval
//!   `k` now returns after two steps.
//! - `B`: `l_k > l_d`. Interval `k` is cut in two; its right part (of length
//!   `l_d`) returns after two steps and is inserted right after it.
//!
//! Each step has an elementary nonnegative unimodular matrix `E` with
//! `lengths(T) ∝ E · lengths(R(T))`; products accumulate as
//! `M(T, n) = M(T, n−1) · E_n`. Column `j` of `M(T, n)` counts the visits of
//! the `j`-th induced interval to the original intervals before it returns,
//! so `|C_j|` is a return time (tower height).
//!
//! Internally lengths stay as unnormalised integer vectors: with `v₀` the
//! primitive length vector of the start IET, the current vector `v` satisfies
//! `v₀ = M · v` exactly at every step.
//!
//! claim induction-matrix: rv_step, expand, RvState::identity_holds
//! claim balanced-matrices: balance, RvMatrix::balance
//! claim dyadic-windows: dyadic_index

mod class;
mod matrix;
mod probe;
mod tower;
mod words;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::{Error, Iet, Permutation, Rational};

pub use class::RauzyClass;
pub use matrix::RvMatrix;
pub use probe::{balance_probe, BalanceEstimate, BalanceProbeConfig};
pub use tower::Towers;
pub use words::{
    all_words, cylinder_measure, detect_acceptable, AcceptableHit, AcceptableWord,
    AcceptableWordTable, DEFAULT_MAX_WORD_FACTOR,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StepType {
    A,
    B,
}

impl StepType {
    pub fn as_char(self) -> char {
        match self {
            Self::A => 'A',
            Self::B => 'B',
        }
    }
}

impl fmt::Display for StepType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

pub fn format_word(word: &[StepType]) -> String {
    word.iter().map(|s| s.as_char()).collect()
}

pub fn parse_word(s: &str) -> Result<Vec<StepType>, Error> {
    s.trim()
        .chars()
        .map(|c| match c {
            'A' => Ok(StepType::A),
            'B' => Ok(StepType::B),
            _ => Err(Error::Parse(alloc::format!("bad step letter {c:?}"))),
        })
        .collect()
}

/// Permutation after one step of the given type. `perm` must be irreducible.
pub fn rauzy_move(perm: &Permutation, step: StepType) -> Permutation {
    let d = perm.len();
    let last_image = perm.get(d - 1);
    let k = perm.inverse().get(d - 1);
    match step {
        StepType::A => {
            let images = (0..d)
                .map(|j| {
                    let p = perm.get(j);
                    if j == k {
                        last_image + 1
                    } else if p > last_image {
                        p + 1
                    } else {
                        p
                    }
                })
                .collect();
            Permutation::from_zero_based(images)
        }
        StepType::B => {
            let mut images = Vec::with_capacity(d);
            images.extend_from_slice(&perm.images()[..=k]);
            images.push(last_image);
            images.extend_from_slice(&perm.images()[k + 1..d - 1]);
            Permutation::from_zero_based(images)
        }
    }
}

/// Applies one step to an integer length vector in place; the caller has
/// already established that the critical lengths differ.
fn move_lengths(lengths: &mut Vec<BigUint>, k: usize, step: StepType) {
    let d = lengths.len();
    match step {
        StepType::A => {
            let loser = lengths[k].clone();
            lengths[d - 1] -= &loser;
        }
        StepType::B => {
            let last = lengths.pop().expect("d >= 2");
            lengths[k] -= &last;
            lengths.insert(k + 1, last);
        }
    }
}

fn critical(lengths: &[BigUint], perm: &Permutation) -> Result<(usize, StepType), Error> {
    let d = lengths.len();
    let k = perm.inverse().get(d - 1);
    match lengths[d - 1].cmp(&lengths[k]) {
        core::cmp::Ordering::Greater => Ok((k, StepType::A)),
        core::cmp::Ordering::Less => Ok((k, StepType::B)),
        core::cmp::Ordering::Equal => Err(Error::TieBreakdown),
    }
}

/// One Rauzy–Veech step: the normalised induced IET, the step type and the
/// elementary matrix `E` with `lengths(T) ∝ E · lengths(T')`.
pub fn rv_step(t: &Iet) -> Result<(Iet, StepType, RvMatrix), Error> {
    t.ensure_nondegenerate()?;
    if !t.is_irreducible() {
        return Err(Error::ReduciblePermutation);
    }
    let mut lengths = t.integer_lengths().to_vec();
    let (k, step) = critical(&lengths, t.perm())?;
    move_lengths(&mut lengths, k, step);
    let perm = rauzy_move(t.perm(), step);
    let mut elem = RvMatrix::identity(t.dim());
    elem.apply_step(k, step);
    // E is unimodular, so the new vector is still primitive
    Ok((Iet::from_primitive(lengths, perm), step, elem))
}

/// When to stop an expansion. Checked before every step.
#[derive(Clone, Copy)]
pub enum StopRule<'a> {
    Steps(usize),
    /// Stop as soon as `|C_max| ≥ norm`.
    Norm(&'a BigUint),
    /// Whichever of the two comes first.
    StepsOrNorm(usize, &'a BigUint),
    Predicate(&'a dyn Fn(&RvState) -> bool),
}

impl StopRule<'_> {
    fn reached(&self, state: &RvState) -> bool {
        match self {
            Self::Steps(n) => state.steps() >= *n,
            Self::Norm(norm) => state.cmax() >= **norm,
            Self::StepsOrNorm(n, norm) => state.steps() >= *n || state.cmax() >= **norm,
            Self::Predicate(f) => f(state),
        }
    }
}

/// Per-step record of an expansion, describing `M(S, n)` and `Rⁿ(S)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpansionEvent {
    pub step: usize,
    pub cmax: BigUint,
    pub cmax_index: usize,
    /// `i` with `2^i ≤ |C_max| < 2^{i+1}`.
    pub dyadic: u32,
    /// `max_{i,j} |C_i| / |C_j|`.
    pub balance: Rational,
    /// Length of the induced interval at the `C_max` index, same units as
    /// `total_length`.
    pub cmax_length: BigUint,
    pub total_length: BigUint,
    pub acceptable: bool,
    /// The ε values for which this step is an expected rigidity time.
    pub expected: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Termination {
    Stopped,
    /// The critical lengths coincided when attempting step `step + 1`.
    Tie {
        step: usize,
    },
}

#[derive(Clone, Debug)]
pub struct RvState {
    start: Iet,
    lengths: Vec<BigUint>,
    total: BigUint,
    perm: Permutation,
    matrix: RvMatrix,
    col_sums: Vec<BigUint>,
    word: Vec<StepType>,
    perm_trace: Vec<Permutation>,
    events: Vec<ExpansionEvent>,
    termination: Termination,
}

/// Runs Rauzy–Veech induction on `t` until `stop` holds or a tie occurs.
pub fn expand(t: &Iet, stop: StopRule<'_>) -> Result<RvState, Error> {
    let mut state = RvState::new(t)?;
    state.run(stop);
    Ok(state)
}

impl RvState {
    pub fn new(t: &Iet) -> Result<Self, Error> {
        t.ensure_nondegenerate()?;
        if !t.is_irreducible() {
            return Err(Error::ReduciblePermutation);
        }
        let d = t.dim();
        Ok(Self {
            start: t.clone(),
            lengths: t.integer_lengths().to_vec(),
            total: t.scale().clone(),
            perm: t.perm().clone(),
            matrix: RvMatrix::identity(d),
            col_sums: alloc::vec![BigUint::one(); d],
            word: Vec::new(),
            perm_trace: alloc::vec![t.perm().clone()],
            events: Vec::new(),
            termination: Termination::Stopped,
        })
    }

    /// Continues the expansion.
    pub fn run(&mut self, stop: StopRule<'_>) {
        if matches!(self.termination, Termination::Tie { .. }) {
            return;
        }
        while !stop.reached(self) {
            if self.advance().is_err() {
                self.termination = Termination::Tie { step: self.steps() };
                return;
            }
        }
        self.termination = Termination::Stopped;
    }

    /// One step; on a tie the state is left unchanged.
    pub fn advance(&mut self) -> Result<StepType, Error> {
        let (k, step) = critical(&self.lengths, &self.perm)?;
        let d = self.lengths.len();
        let loser = match step {
            StepType::A => self.lengths[k].clone(),
            StepType::B => self.lengths[d - 1].clone(),
        };
        self.total -= &loser;
        move_lengths(&mut self.lengths, k, step);
        self.perm = rauzy_move(&self.perm, step);
        self.matrix.apply_step(k, step);
        match step {
            StepType::A => {
                let add = self.col_sums[d - 1].clone();
                self.col_sums[k] += &add;
            }
            StepType::B => {
                self.col_sums[k + 1..].rotate_right(1);
                let base = self.col_sums[k].clone();
                self.col_sums[k + 1] += &base;
            }
        }
        self.word.push(step);
        self.perm_trace.push(self.perm.clone());
        let event = self.make_event();
        self.events.push(event);
        Ok(step)
    }

    fn make_event(&self) -> ExpansionEvent {
        let (cmax_index, cmax) = argmax(&self.col_sums);
        let cmin = self.col_sums.iter().min().expect("d >= 2");
        ExpansionEvent {
            step: self.steps(),
            cmax: cmax.clone(),
            cmax_index,
            dyadic: dyadic_index(cmax),
            balance: Rational::new(cmax.clone().into(), cmin.clone().into()),
            cmax_length: self.lengths[cmax_index].clone(),
            total_length: self.total.clone(),
            acceptable: false,
            expected: Vec::new(),
        }
    }

    pub fn start(&self) -> &Iet {
        &self.start
    }

    /// `Rⁿ(S)`, normalised.
    pub fn current(&self) -> Iet {
        Iet::from_primitive(self.lengths.clone(), self.perm.clone())
    }

    /// Unnormalised current lengths `v` with `v₀ = M · v`.
    pub fn current_integer_lengths(&self) -> &[BigUint] {
        &self.lengths
    }

    pub fn current_perm(&self) -> &Permutation {
        &self.perm
    }

    pub fn matrix(&self) -> &RvMatrix {
        &self.matrix
    }

    pub fn column_sums(&self) -> &[BigUint] {
        &self.col_sums
    }

    pub fn cmax(&self) -> BigUint {
        argmax(&self.col_sums).1.clone()
    }

    pub fn word(&self) -> &[StepType] {
        &self.word
    }

    /// Permutations before step 1, after step 1, …; length `steps() + 1`.
    pub fn perm_trace(&self) -> &[Permutation] {
        &self.perm_trace
    }

    pub fn events(&self) -> &[ExpansionEvent] {
        &self.events
    }

    pub fn events_mut(&mut self) -> &mut [ExpansionEvent] {
        &mut self.events
    }

    /// Event describing the state after step `n ≥ 1`.
    pub fn event(&self, n: usize) -> Option<&ExpansionEvent> {
        n.checked_sub(1).and_then(|i| self.events.get(i))
    }

    pub fn steps(&self) -> usize {
        self.word.len()
    }

    pub fn termination(&self) -> &Termination {
        &self.termination
    }

    pub fn tie_step(&self) -> Option<usize> {
        match self.termination {
            Termination::Tie { step } => Some(step),
            Termination::Stopped => None,
        }
    }

    /// `v₀ = M · v` with exact integer arithmetic.
    pub fn identity_holds(&self) -> bool {
        self.matrix.mul_vec(&self.lengths) == self.start.integer_lengths()
    }

    /// The state after the first `n` steps, recomputed from the start.
    pub fn prefix(&self, n: usize) -> RvState {
        let mut s = RvState::new(&self.start).expect("start was valid");
        s.run(StopRule::Steps(n.min(self.steps())));
        s
    }
}

/// Index and value of the largest entry, ties to the smallest index.
pub(crate) fn argmax(values: &[BigUint]) -> (usize, &BigUint) {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    (best, &values[best])
}

/// `floor(log2 m)` for `m ≥ 1`.
pub fn dyadic_index(m: &BigUint) -> u32 {
    debug_assert!(!m.is_zero());
    (m.bits().saturating_sub(1)) as u32
}

/// `max_{i,j} |C_i(M)| / |C_j(M)|`; `M` is ν-balanced iff this is `< ν`.
pub fn balance(m: &RvMatrix) -> Rational {
    m.balance()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use alloc::vec;

    fn rot23() -> Iet {
        Iet::new(
            &[ratio(1, 3), ratio(2, 3)],
            Permutation::new(&[2, 1]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn rv_step_on_two_intervals() {
        let (t1, step, e) = rv_step(&rot23()).unwrap();
        assert_eq!(step, StepType::A);
        assert_eq!(t1.lengths(), [ratio(1, 2), ratio(1, 2)]);
        assert_eq!(t1.perm().one_based(), [2, 1]);
        assert_eq!(e.column_sums(), [BigUint::from(2u32), BigUint::from(1u32)]);
        assert_eq!(rv_step(&t1).unwrap_err(), Error::TieBreakdown);
    }

    #[test]
    fn moves_on_three_letters() {
        let p = Permutation::new(&[3, 2, 1]).unwrap();
        assert_eq!(rauzy_move(&p, StepType::A).one_based(), [2, 3, 1]);
        assert_eq!(rauzy_move(&p, StepType::B).one_based(), [3, 1, 2]);
    }

    #[test]
    fn expansion_identity_and_norm() {
        let s = expand(&rot23(), StopRule::Steps(0)).unwrap();
        assert!(s.matrix().is_identity());
        assert!(s.word().is_empty());
        // (1,2) -> A -> (1,1): tie at the second step
        let s = expand(&rot23(), StopRule::Steps(2)).unwrap();
        assert_eq!(s.tie_step(), Some(1));
        assert!(s.identity_holds());

        let t = Iet::new(
            &[ratio(3, 10), ratio(7, 10)],
            Permutation::new(&[2, 1]).unwrap(),
        )
        .unwrap();
        let s = expand(&t, StopRule::Steps(2)).unwrap();
        assert_eq!(s.word(), [StepType::A, StepType::A]);
        assert_eq!(s.cmax(), BigUint::from(3u32));
        assert!(s.identity_holds());
        assert_eq!(s.perm_trace().len(), 3);
    }

    #[test]
    fn word_text() {
        let w = parse_word("ABBA").unwrap();
        assert_eq!(w, vec![StepType::A, StepType::B, StepType::B, StepType::A]);
        assert_eq!(format_word(&w), "ABBA");
        assert!(parse_word("AC").is_err());
    }

    #[test]
    fn dyadic_windows_are_half_open() {
        assert_eq!(dyadic_index(&BigUint::from(1u32)), 0);
        assert_eq!(dyadic_index(&BigUint::from(2u32)), 1);
        assert_eq!(dyadic_index(&BigUint::from(3u32)), 1);
        assert_eq!(dyadic_index(&BigUint::from(4u32)), 2);
    }
}
