//! Exact piecewise translations of `[0, 1)`.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::iet::add_signed;
use crate::rational::{signed, Rational};

/// One piece `[left, right) ↦ [left + shift, right + shift)`, in units of
/// `1/scale`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub left: BigUint,
    pub right: BigUint,
    pub shift: BigInt,
}

impl Piece {
    pub fn len(&self) -> BigUint {
        &self.right - &self.left
    }

    pub fn is_empty(&self) -> bool {
        self.right <= self.left
    }
}

/// A bijection of `[0, 1)` given as finitely many translated half-open
/// intervals.
///
/// Pieces are sorted, contiguous, cover `[0, scale)`, and adjacent pieces
/// always carry different shifts (canonical form), so two translations are
/// the same map iff they have the same pieces at a common scale.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseTranslation {
    scale: BigUint,
    pieces: Vec<Piece>,
}

impl PiecewiseTranslation {
    pub fn identity(scale: BigUint) -> Self {
        Self {
            pieces: alloc::vec![Piece {
                left: BigUint::zero(),
                right: scale.clone(),
                shift: BigInt::zero(),
            }],
            scale,
        }
    }

    /// Pieces must be sorted and contiguous; equal-shift neighbours are merged.
    pub(crate) fn from_sorted_pieces(scale: BigUint, pieces: Vec<Piece>) -> Self {
        let mut out: Vec<Piece> = Vec::with_capacity(pieces.len());
        for p in pieces {
            if p.is_empty() {
                continue;
            }
            match out.last_mut() {
                Some(last) if last.shift == p.shift && last.right == p.left => last.right = p.right,
                _ => out.push(p),
            }
        }
        Self { scale, pieces: out }
    }

    pub fn scale(&self) -> &BigUint {
        &self.scale
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn raw_pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Pieces as exact `(left, right, shift)` triples.
    pub fn pieces(&self) -> Vec<(Rational, Rational, Rational)> {
        let s = signed(self.scale.clone());
        self.pieces
            .iter()
            .map(|p| {
                (
                    Rational::new(signed(p.left.clone()), s.clone()),
                    Rational::new(signed(p.right.clone()), s.clone()),
                    Rational::new(p.shift.clone(), s.clone()),
                )
            })
            .collect()
    }

    fn piece_index(&self, x: &BigUint) -> usize {
        self.pieces.partition_point(|p| p.right <= *x)
    }

    /// Image of a scaled point in `[0, scale)`.
    pub fn apply_scaled(&self, x: &BigUint) -> Option<BigUint> {
        let p = self.pieces.get(self.piece_index(x))?;
        let mut y = x.clone();
        add_signed(&mut y, &p.shift);
        Some(y)
    }

    /// Image of `x ∈ [0, 1)`; `None` outside the domain.
    pub fn apply(&self, x: &Rational) -> Option<Rational> {
        if x.is_negative() || *x >= Rational::one() {
            return None;
        }
        let p = x.numer().magnitude();
        let q = x.denom().magnitude();
        let ps = p * &self.scale;
        let idx = self.pieces.partition_point(|piece| &piece.right * q <= ps);
        let piece = self.pieces.get(idx)?;
        Some(x + Rational::new(piece.shift.clone(), signed(self.scale.clone())))
    }

    /// The same map expressed over a multiple of the current scale.
    pub fn rescaled(&self, new_scale: &BigUint) -> Self {
        debug_assert!((new_scale % &self.scale).is_zero());
        let factor = new_scale / &self.scale;
        if factor.is_one() {
            return self.clone();
        }
        let f = signed(factor.clone());
        Self {
            scale: new_scale.clone(),
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    left: &p.left * &factor,
                    right: &p.right * &factor,
                    shift: &p.shift * &f,
                })
                .collect(),
        }
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &Self) -> Self {
        if self.scale != inner.scale {
            let l = self.scale.lcm(&inner.scale);
            return self.rescaled(&l).compose(&inner.rescaled(&l));
        }
        let mut out = Vec::with_capacity(inner.pieces.len() + self.pieces.len());
        for p in &inner.pieces {
            let mut a = p.left.clone();
            add_signed(&mut a, &p.shift);
            let mut b = p.right.clone();
            add_signed(&mut b, &p.shift);
            let mut k = self.piece_index(&a);
            while a < b {
                let q = &self.pieces[k];
                let end = if q.right < b {
                    q.right.clone()
                } else {
                    b.clone()
                };
                // domain of this sub-piece is [a, end) shifted back by p.shift
                let mut left = a.clone();
                let mut right = end.clone();
                let back = -&p.shift;
                add_signed(&mut left, &back);
                add_signed(&mut right, &back);
                out.push(Piece {
                    left,
                    right,
                    shift: &p.shift + &q.shift,
                });
                a = end;
                k += 1;
            }
        }
        Self::from_sorted_pieces(self.scale.clone(), out)
    }

    /// Whether both describe the same map of `[0, 1)`.
    pub fn same_map(&self, other: &Self) -> bool {
        if self.scale == other.scale {
            return self.pieces == other.pieces;
        }
        let l = self.scale.lcm(&other.scale);
        self.rescaled(&l).pieces == other.rescaled(&l).pieces
    }

    /// `∫₀¹ |f(x) − x| dx = Σ length · |shift|`.
    pub fn defect(&self) -> Rational {
        let mut total = BigUint::zero();
        for p in &self.pieces {
            total += p.len() * p.shift.magnitude();
        }
        let s = signed(self.scale.clone());
        Rational::new(signed(total), &s * &s)
    }

    /// Domain pieces are sorted, contiguous and cover `[0, scale)`.
    pub fn domain_is_partition(&self) -> bool {
        let mut at = BigUint::zero();
        for p in &self.pieces {
            if p.left != at || p.right <= p.left {
                return false;
            }
            at = p.right.clone();
        }
        at == self.scale
    }

    /// Image intervals stay in `[0, scale)` and tile it exactly.
    pub fn image_is_partition(&self) -> bool {
        let mut images: Vec<(BigInt, BigInt)> = self
            .pieces
            .iter()
            .map(|p| {
                (
                    signed(p.left.clone()) + &p.shift,
                    signed(p.right.clone()) + &p.shift,
                )
            })
            .collect();
        images.sort();
        let mut at = BigInt::zero();
        for (a, b) in images {
            if a != at {
                return false;
            }
            at = b;
        }
        at == signed(self.scale.clone())
    }

    pub fn inverse(&self) -> Self {
        let mut pieces: Vec<Piece> = self
            .pieces
            .iter()
            .map(|p| {
                let mut left = p.left.clone();
                add_signed(&mut left, &p.shift);
                let mut right = p.right.clone();
                add_signed(&mut right, &p.shift);
                Piece {
                    left,
                    right,
                    shift: -&p.shift,
                }
            })
            .collect();
        pieces.sort_by(|a, b| a.left.cmp(&b.left));
        Self::from_sorted_pieces(self.scale.clone(), pieces)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::{Iet, Permutation};

    #[test]
    fn rotation_cube_is_identity() {
        let t = Iet::rotation(&ratio(2, 3)).unwrap().as_piecewise();
        let t3 = t.compose(&t).compose(&t);
        assert_eq!(t3.len(), 1);
        assert!(t3.defect().is_zero());
    }

    #[test]
    fn compose_with_inverse() {
        let t = Iet::new(
            &[ratio(1, 6), ratio(1, 3), ratio(1, 2)],
            Permutation::new(&[3, 1, 2]).unwrap(),
        )
        .unwrap()
        .as_piecewise();
        let id = t.inverse().compose(&t);
        assert!(id.same_map(&PiecewiseTranslation::identity(BigUint::from(6u32))));
        assert!(t.image_is_partition());
        assert!(t.domain_is_partition());
    }

    #[test]
    fn mixed_scales() {
        let a = Iet::rotation(&ratio(1, 2)).unwrap().as_piecewise();
        let b = Iet::rotation(&ratio(1, 3)).unwrap().as_piecewise();
        let ab = a.compose(&b);
        let x = ratio(1, 12);
        assert_eq!(ab.apply(&x).unwrap(), ratio(11, 12));
        assert!(ab.image_is_partition());
    }
}
