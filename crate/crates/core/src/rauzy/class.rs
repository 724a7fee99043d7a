use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec::Vec;

use super::{rauzy_move, StepType};
use crate::{Error, Permutation};

/// The Rauzy class of an irreducible permutation: everything reachable by
/// the two moves, which is also everything that can reach it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RauzyClass {
    members: Vec<Permutation>,
    index: BTreeMap<Permutation, usize>,
    /// `moves[i] = [after A, after B]` as member indices.
    moves: Vec<[usize; 2]>,
}

impl RauzyClass {
    /// Breadth-first closure from `seed`; members are listed in discovery
    /// order (A before B), so `members()[0] == seed`.
    pub fn of(seed: &Permutation) -> Result<Self, Error> {
        if seed.len() < 2 {
            return Err(Error::TooFewIntervals { d: seed.len() });
        }
        if !seed.is_irreducible() {
            return Err(Error::ReduciblePermutation);
        }
        let mut members = alloc::vec![seed.clone()];
        let mut index = BTreeMap::new();
        index.insert(seed.clone(), 0);
        let mut moves: Vec<[usize; 2]> = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let mut out = [0; 2];
            for (slot, step) in [StepType::A, StepType::B].into_iter().enumerate() {
                let next = rauzy_move(&members[i], step);
                out[slot] = *index.entry(next.clone()).or_insert_with(|| {
                    members.push(next);
                    queue.push_back(members.len() - 1);
                    members.len() - 1
                });
            }
            if moves.len() <= i {
                moves.resize(i + 1, [0; 2]);
            }
            moves[i] = out;
        }
        Ok(Self {
            members,
            index,
            moves,
        })
    }

    pub fn members(&self) -> &[Permutation] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members[0].len()
    }

    pub fn index_of(&self, perm: &Permutation) -> Option<usize> {
        self.index.get(perm).copied()
    }

    pub fn contains(&self, perm: &Permutation) -> bool {
        self.index.contains_key(perm)
    }

    pub fn successor(&self, i: usize, step: StepType) -> usize {
        self.moves[i][step as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[usize]) -> Permutation {
        Permutation::new(v).unwrap()
    }

    #[test]
    fn small_classes() {
        let c2 = RauzyClass::of(&p(&[2, 1])).unwrap();
        assert_eq!(c2.len(), 1);
        let c3 = RauzyClass::of(&p(&[3, 2, 1])).unwrap();
        assert_eq!(c3.len(), 3);
        for q in [p(&[3, 2, 1]), p(&[2, 3, 1]), p(&[3, 1, 2])] {
            assert!(c3.contains(&q));
        }
        assert_eq!(RauzyClass::of(&p(&[4, 3, 2, 1])).unwrap().len(), 7);
        assert_eq!(
            RauzyClass::of(&p(&[1, 2])),
            Err(Error::ReduciblePermutation)
        );
    }

    #[test]
    fn closed_under_both_moves() {
        let c = RauzyClass::of(&p(&[5, 4, 3, 2, 1])).unwrap();
        for (i, q) in c.members().iter().enumerate() {
            for s in [StepType::A, StepType::B] {
                assert_eq!(c.members()[c.successor(i, s)], rauzy_move(q, s));
            }
        }
    }
}
