//! Tower decomposition of `[0, 1)` read off an expansion.
//!
//! After `n` steps the induced map `R = Rⁿ(S)` lives on `[0, |v|)`, and the
//! `j`-th induced interval `J_j` rises through `|C_j|` disjoint levels
//! `J_j, S(J_j), …, S^{|C_j|−1}(J_j)` before `S` brings it back into the
//! base as `R(J_j)`. The levels tile `[0, 1)`, so `S^m` for any `m` can be
//! assembled from the levels and a few passes through `R`, without ever
//! refining the whole orbit.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};

use super::RvState;
use crate::iet::add_signed;
use crate::piecewise::{Piece, PiecewiseTranslation};
use crate::rational::signed;
use crate::{Error, Iet, Rational};

/// Largest total number of tower levels [`Towers::from_state`] will build.
pub const TOWER_LEVEL_LIMIT: u64 = 1 << 24;

#[derive(Clone, Debug)]
pub struct Towers {
    start: Iet,
    /// The induced map on `[0, |v|)`, in the start's units.
    base: Iet,
    heights: Vec<usize>,
    /// `levels[j][k]` is the left end of `S^k(J_j)`.
    levels: Vec<Vec<BigUint>>,
}

impl Towers {
    pub fn from_state(state: &RvState) -> Result<Self, Error> {
        let total: BigUint = state.column_sums().iter().sum();
        if total > BigUint::from(TOWER_LEVEL_LIMIT) {
            return Err(Error::InvalidArgument("towers exceed the level limit"));
        }
        let start = state.start().clone();
        let base = Iet::from_primitive(
            state.current_integer_lengths().to_vec(),
            state.current_perm().clone(),
        );
        let heights: Vec<usize> = state
            .column_sums()
            .iter()
            .map(|h| h.to_usize().expect("bounded by the level limit"))
            .collect();
        let levels = heights
            .iter()
            .enumerate()
            .map(|(j, &h)| {
                let mut x = base.integer_breaks()[j].clone();
                let mut col = Vec::with_capacity(h);
                col.push(x.clone());
                for _ in 1..h {
                    start.step_scaled(&mut x);
                    col.push(x.clone());
                }
                col
            })
            .collect();
        Ok(Self {
            start,
            base,
            heights,
            levels,
        })
    }

    pub fn heights(&self) -> &[usize] {
        &self.heights
    }

    pub fn base(&self) -> &Iet {
        &self.base
    }

    /// Left ends of the levels of tower `j`.
    pub fn levels(&self, j: usize) -> &[BigUint] {
        &self.levels[j]
    }

    /// The levels are pairwise disjoint and cover `[0, 1)`.
    pub fn covers_exactly(&self) -> bool {
        let mut cells: Vec<(&BigUint, &BigUint)> = Vec::new();
        for (j, col) in self.levels.iter().enumerate() {
            let len = &self.base.integer_lengths()[j];
            cells.extend(col.iter().map(|x| (x, len)));
        }
        cells.sort();
        let mut at = BigUint::zero();
        for (x, len) in cells {
            if *x != at {
                return false;
            }
            at = x + len;
        }
        at == *self.start.scale()
    }

    /// Each tower's top level is carried back into the base exactly as `R`
    /// moves its base.
    pub fn returns_match_induced_map(&self) -> bool {
        self.levels.iter().enumerate().all(|(j, col)| {
            let mut top = col.last().expect("height >= 1").clone();
            self.start.step_scaled(&mut top);
            let left = &self.base.integer_breaks()[j];
            top == self.base.eval_scaled(left)
        })
    }

    fn for_each_piece(&self, n: u64, mut visit: impl FnMut(&BigUint, &BigUint, &BigInt)) {
        let breaks = self.base.integer_breaks();
        let shifts = self.base.integer_shifts();
        let mut stack: Vec<(usize, BigUint, BigUint, u64, BigUint)> = Vec::new();
        for (j, col) in self.levels.iter().enumerate() {
            let len = &self.base.integer_lengths()[j];
            for (k, left) in col.iter().enumerate() {
                // (tower, [a, b) in base coordinates, steps left from the base, offset into the source level)
                stack.push((
                    j,
                    breaks[j].clone(),
                    &breaks[j] + len,
                    k as u64 + n,
                    BigUint::zero(),
                ));
                while let Some((t, a, b, r, off)) = stack.pop() {
                    if r < self.heights[t] as u64 {
                        let image = &self.levels[t][r as usize] + (&a - &breaks[t]);
                        let domain = left + &off;
                        let shift = signed(image) - signed(domain.clone());
                        visit(&domain, &(&b - &a), &shift);
                        continue;
                    }
                    let r = r - self.heights[t] as u64;
                    let mut first = a;
                    add_signed(&mut first, &shifts[t]);
                    let mut b2 = b;
                    add_signed(&mut b2, &shifts[t]);
                    let mut a2 = first.clone();
                    let mut u = self.base.interval_of_scaled(&a2);
                    while a2 < b2 {
                        let end = if breaks[u + 1] < b2 {
                            breaks[u + 1].clone()
                        } else {
                            b2.clone()
                        };
                        let sub_off = &off + (&a2 - &first);
                        stack.push((u, a2.clone(), end.clone(), r, sub_off));
                        a2 = end;
                        u += 1;
                    }
                }
            }
        }
    }

    /// `S^m` as a piecewise translation at the start's scale.
    pub fn power(&self, m: u64) -> PiecewiseTranslation {
        let mut pieces = Vec::new();
        self.for_each_piece(m, |left, len, shift| {
            pieces.push(Piece {
                left: left.clone(),
                right: left + len,
                shift: shift.clone(),
            })
        });
        pieces.sort_unstable_by(|a, b| a.left.cmp(&b.left));
        PiecewiseTranslation::from_sorted_pieces(self.start.scale().clone(), pieces)
    }

    /// `∫|S^m x − x| dx`.
    pub fn defect(&self, m: u64) -> Rational {
        let mut total = BigUint::zero();
        self.for_each_piece(m, |_, len, shift| total += len * shift.magnitude());
        let s = signed(self.start.scale().clone());
        Rational::new(signed(total), &s * &s)
    }
}
