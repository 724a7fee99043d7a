//! Acceptable words, cylinder measures and acceptable-pair detection.
//!
//! claim acceptable-pairs: AcceptableWordTable::build, detect_acceptable
//! claim cylinder-size: cylinder_measure, all_words

use alloc::vec::Vec;

use super::{rauzy_move, RauzyClass, RvMatrix, RvState, StepType};
use crate::{Error, Permutation, Rational};
use num_bigint::BigUint;

/// Default word length cap is `DEFAULT_MAX_WORD_FACTOR · d²`.
pub const DEFAULT_MAX_WORD_FACTOR: usize = 4;

/// The chosen positive word for one permutation of a class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AcceptableWord {
    pub perm: Permutation,
    pub word: Vec<StepType>,
    pub matrix: RvMatrix,
    /// `1 / Π |C_j|` of `matrix`.
    pub measure: Rational,
    /// `max entry / min entry` of `matrix`; every matrix whose word ends in
    /// this block has column ratios below it.
    pub entry_ratio: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AcceptableWordTable {
    class: RauzyClass,
    words: Vec<AcceptableWord>,
}

impl AcceptableWordTable {
    pub fn build(class: &RauzyClass) -> Result<Self, Error> {
        let d = class.dim();
        Self::build_with_limit(class, DEFAULT_MAX_WORD_FACTOR * d * d)
    }

    /// For each member, the first word in shortlex order (shorter first,
    /// then `A < B`) whose matrix is strictly positive. Since positivity is
    /// preserved by further steps, no proper prefix of that word is positive.
    pub fn build_with_limit(class: &RauzyClass, max_len: usize) -> Result<Self, Error> {
        let words = class
            .members()
            .iter()
            .map(|p| shortlex_positive_word(p, max_len))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            class: class.clone(),
            words,
        })
    }

    pub fn class(&self) -> &RauzyClass {
        &self.class
    }

    /// Entries in the class's member order.
    pub fn words(&self) -> &[AcceptableWord] {
        &self.words
    }

    pub fn for_perm(&self, perm: &Permutation) -> Option<&AcceptableWord> {
        self.class.index_of(perm).map(|i| &self.words[i])
    }

    pub fn max_word_len(&self) -> usize {
        self.words.iter().map(|w| w.word.len()).max().unwrap_or(0)
    }

    /// Worst entry ratio over the table.
    pub fn worst_entry_ratio(&self) -> Rational {
        self.words
            .iter()
            .map(|w| w.entry_ratio.clone())
            .max()
            .expect("class is nonempty")
    }

    /// `min_i p_i`.
    pub fn min_measure(&self) -> Rational {
        self.words
            .iter()
            .map(|w| w.measure.clone())
            .min()
            .expect("class is nonempty")
    }
}

fn shortlex_positive_word(perm: &Permutation, max_len: usize) -> Result<AcceptableWord, Error> {
    let d = perm.len();
    // level-by-level expansion with children in A, B order keeps each level
    // sorted lexicographically
    let mut level: Vec<(Vec<StepType>, Permutation, RvMatrix)> =
        alloc::vec![(Vec::new(), perm.clone(), RvMatrix::identity(d))];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(level.len() * 2);
        for (word, p, m) in &level {
            let k = p.inverse().get(d - 1);
            for step in [StepType::A, StepType::B] {
                let mut m2 = m.clone();
                m2.apply_step(k, step);
                let mut w2 = word.clone();
                w2.push(step);
                if m2.is_positive() {
                    let entry_ratio = m2.entry_ratio().expect("positive");
                    return Ok(AcceptableWord {
                        perm: perm.clone(),
                        word: w2,
                        measure: m2.cylinder_measure(),
                        matrix: m2,
                        entry_ratio,
                    });
                }
                next.push((w2, rauzy_move(p, step), m2));
            }
        }
        level = next;
    }
    Err(Error::SearchBudgetExceeded { max_len })
}

/// Every word of length `k` from `perm` with its matrix, in lexicographic
/// order. Both moves are always defined, so there are `2^k` of them.
pub fn all_words(perm: &Permutation, k: usize) -> Vec<(Vec<StepType>, RvMatrix)> {
    let d = perm.len();
    let mut level = alloc::vec![(Vec::new(), perm.clone(), RvMatrix::identity(d))];
    for _ in 0..k {
        let mut next = Vec::with_capacity(level.len() * 2);
        for (word, p, m) in level {
            let kk = p.inverse().get(d - 1);
            for step in [StepType::A, StepType::B] {
                let mut m2 = m.clone();
                m2.apply_step(kk, step);
                let mut w2 = word.clone();
                w2.push(step);
                next.push((w2, rauzy_move(&p, step), m2));
            }
        }
        level = next;
    }
    level.into_iter().map(|(w, _, m)| (w, m)).collect()
}

/// `Π_j |C_j(M)|⁻¹`.
pub fn cylinder_measure(m: &RvMatrix) -> Rational {
    m.cylinder_measure()
}

/// An acceptable pair `(M(S, step), C_max)` found in an expansion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AcceptableHit {
    pub step: usize,
    pub cmax: BigUint,
    /// Class index of the permutation the completed block started from.
    pub block_perm: usize,
}

/// Steps `n` at which the expansion has just completed the block `ω_i` of
/// the permutation `π_i` it held at step `n − |ω_i|`.
pub fn detect_acceptable(state: &RvState, table: &AcceptableWordTable) -> Vec<AcceptableHit> {
    let word = state.word();
    let trace = state.perm_trace();
    let mut steps: Vec<(usize, usize)> = Vec::new();
    for s in 0..word.len() {
        let Some(i) = table.class().index_of(&trace[s]) else {
            continue;
        };
        let w = &table.words()[i].word;
        if s + w.len() <= word.len() && word[s..s + w.len()] == w[..] {
            steps.push((s + w.len(), i));
        }
    }
    steps.sort_unstable();
    steps.dedup_by_key(|(n, _)| *n);
    steps
        .into_iter()
        .map(|(n, i)| AcceptableHit {
            step: n,
            cmax: state.event(n).expect("n >= 1").cmax.clone(),
            block_perm: i,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::rauzy::{expand, parse_word, StopRule};
    use crate::Iet;
    use num_traits::Zero;

    fn p(v: &[usize]) -> Permutation {
        Permutation::new(v).unwrap()
    }

    #[test]
    fn two_interval_word_is_ab() {
        let class = RauzyClass::of(&p(&[2, 1])).unwrap();
        let table = AcceptableWordTable::build(&class).unwrap();
        assert_eq!(table.words()[0].word, parse_word("AB").unwrap());
        // exhaustive: no word of length <= 1 is positive, and AB is the first at length 2
        for k in 1..=2 {
            for (w, m) in all_words(&p(&[2, 1]), k) {
                assert_eq!(
                    m.is_positive(),
                    k == 2 && w != parse_word("AA").unwrap() && w != parse_word("BB").unwrap()
                );
            }
        }
    }

    #[test]
    fn three_interval_words_are_short() {
        let class = RauzyClass::of(&p(&[3, 2, 1])).unwrap();
        let table = AcceptableWordTable::build(&class).unwrap();
        for w in table.words() {
            assert!(w.word.len() <= 6);
            assert!(w.matrix.is_positive());
            assert!(w.measure > Rational::zero());
        }
    }

    #[test]
    fn budget() {
        let class = RauzyClass::of(&p(&[3, 2, 1])).unwrap();
        assert_eq!(
            AcceptableWordTable::build_with_limit(&class, 1),
            Err(Error::SearchBudgetExceeded { max_len: 1 })
        );
    }

    #[test]
    fn detections_for_alternating_word() {
        // lengths from Fibonacci numbers give A, B, A, B, ...
        let t = Iet::new(&[ratio(5, 13), ratio(8, 13)], p(&[2, 1])).unwrap();
        let s = expand(&t, StopRule::Steps(4)).unwrap();
        assert_eq!(s.word(), parse_word("ABAB").unwrap());
        let class = RauzyClass::of(&p(&[2, 1])).unwrap();
        let table = AcceptableWordTable::build(&class).unwrap();
        let hits: Vec<usize> = detect_acceptable(&s, &table)
            .iter()
            .map(|h| h.step)
            .collect();
        assert_eq!(hits, [2, 4]);
        let short = expand(&t, StopRule::Steps(1)).unwrap();
        assert!(detect_acceptable(&short, &table).is_empty());
    }
}
