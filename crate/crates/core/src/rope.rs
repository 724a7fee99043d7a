//! Where does `Tⁿ` carry each piece of `[0, S)`?
//!
//! The rope is a sequence of segments listed in image order: a segment of
//! length `len` at image offset `y` holds points that started at
//! `origin .. origin + len`. Applying `T` cuts the sequence at `T`'s
//! breakpoints and reorders the `d` blocks by `π`, so one step costs
//! `O(d log P)` with an implicit treap keyed by cumulative length.
//!
//! Segments also carry a label (a cell of a step function) and an integer
//! weight per label; subtree sums of `len · weight` give correlation
//! integrals over any image range.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use crate::piecewise::{Piece, PiecewiseTranslation};
use crate::rational::signed;
use crate::Permutation;

const NIL: u32 = u32::MAX;

struct Node {
    len: BigUint,
    origin: BigUint,
    label: u32,
    prio: u64,
    left: u32,
    right: u32,
    total: BigUint,
    own_w: BigInt,
    wsum: BigInt,
}

pub(crate) struct OrbitRope {
    nodes: Vec<Node>,
    root: u32,
    seed: u64,
    weights: Vec<BigInt>,
    scale: BigUint,
}

impl OrbitRope {
    pub(crate) fn identity(scale: BigUint) -> Self {
        Self::with_cells(scale.clone(), &[(BigUint::zero(), scale, 0)], Vec::new())
    }

    /// `cells` are `(start, len, label)` in increasing order covering `[0, scale)`.
    /// With empty `weights` no weighted sums are maintained.
    pub(crate) fn with_cells(
        scale: BigUint,
        cells: &[(BigUint, BigUint, u32)],
        weights: Vec<BigInt>,
    ) -> Self {
        let mut rope = Self {
            nodes: Vec::with_capacity(cells.len() * 4 + 16),
            root: NIL,
            seed: 0x9E37_79B9_7F4A_7C15,
            weights,
            scale,
        };
        for (start, len, label) in cells {
            if len.is_zero() {
                continue;
            }
            let n = rope.new_node(len.clone(), start.clone(), *label);
            rope.root = rope.merge(rope.root, n);
        }
        rope
    }

    fn next_prio(&mut self) -> u64 {
        // xorshift64*
        let mut x = self.seed;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.seed = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    fn own_weight(&self, len: &BigUint, label: u32) -> BigInt {
        match self.weights.get(label as usize) {
            Some(w) => signed(len.clone()) * w,
            None => BigInt::zero(),
        }
    }

    fn new_node(&mut self, len: BigUint, origin: BigUint, label: u32) -> u32 {
        let prio = self.next_prio();
        let own_w = self.own_weight(&len, label);
        self.nodes.push(Node {
            total: len.clone(),
            wsum: own_w.clone(),
            len,
            origin,
            label,
            prio,
            left: NIL,
            right: NIL,
            own_w,
        });
        (self.nodes.len() - 1) as u32
    }

    fn update(&mut self, t: u32) {
        let ti = t as usize;
        let (l, r) = (self.nodes[ti].left, self.nodes[ti].right);
        let mut total = core::mem::take(&mut self.nodes[ti].total);
        total.clone_from(&self.nodes[ti].len);
        if l != NIL {
            total += &self.nodes[l as usize].total;
        }
        if r != NIL {
            total += &self.nodes[r as usize].total;
        }
        self.nodes[ti].total = total;
        if !self.weights.is_empty() {
            let mut wsum = core::mem::take(&mut self.nodes[ti].wsum);
            wsum.clone_from(&self.nodes[ti].own_w);
            if l != NIL {
                wsum += &self.nodes[l as usize].wsum;
            }
            if r != NIL {
                wsum += &self.nodes[r as usize].wsum;
            }
            self.nodes[ti].wsum = wsum;
        }
    }

    fn merge(&mut self, a: u32, b: u32) -> u32 {
        if a == NIL {
            return b;
        }
        if b == NIL {
            return a;
        }
        if self.nodes[a as usize].prio > self.nodes[b as usize].prio {
            let r = self.merge(self.nodes[a as usize].right, b);
            self.nodes[a as usize].right = r;
            self.update(a);
            a
        } else {
            let l = self.merge(a, self.nodes[b as usize].left);
            self.nodes[b as usize].left = l;
            self.update(b);
            b
        }
    }

    /// Splits so that the left part has total length `pos`.
    fn split(&mut self, t: u32, mut pos: BigUint) -> (u32, u32) {
        if t == NIL {
            return (NIL, NIL);
        }
        let ti = t as usize;
        let l = self.nodes[ti].left;
        if l != NIL {
            if pos <= self.nodes[l as usize].total {
                let (a, b) = self.split(l, pos);
                self.nodes[ti].left = b;
                self.update(t);
                return (a, t);
            }
            pos -= &self.nodes[l as usize].total;
        } else if pos.is_zero() {
            return (NIL, t);
        }
        if pos < self.nodes[ti].len {
            let rest = &self.nodes[ti].len - &pos;
            let origin = &self.nodes[ti].origin + &pos;
            let label = self.nodes[ti].label;
            let n = self.new_node(rest, origin, label);
            self.nodes[ti].own_w = self.own_weight(&pos, label);
            self.nodes[ti].len = pos;
            let r = self.nodes[ti].right;
            self.nodes[ti].right = NIL;
            self.update(t);
            let rr = self.merge(n, r);
            return (t, rr);
        }
        pos -= &self.nodes[ti].len;
        let r = self.nodes[ti].right;
        if pos.is_zero() {
            self.nodes[ti].right = NIL;
            self.update(t);
            return (t, r);
        }
        let (a, b) = self.split(r, pos);
        self.nodes[ti].right = a;
        self.update(t);
        (t, b)
    }

    /// Applies one IET given by its breakpoints (at this rope's scale) and
    /// permutation.
    pub(crate) fn apply(&mut self, breaks: &[BigUint], perm: &Permutation) {
        let d = perm.len();
        let mut blocks = alloc::vec![NIL; d];
        let mut rest = self.root;
        for j in (1..d).rev() {
            let (a, b) = self.split(rest, breaks[j].clone());
            blocks[j] = b;
            rest = a;
        }
        blocks[0] = rest;
        let inv = perm.inverse();
        let mut root = NIL;
        for p in 0..d {
            root = self.merge(root, blocks[inv.get(p)]);
        }
        self.root = root;
    }

    /// Segments in image order as `(origin, len, label)`.
    pub(crate) fn segments(&self) -> Vec<(&BigUint, &BigUint, u32)> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = Vec::new();
        let mut t = self.root;
        while t != NIL || !stack.is_empty() {
            while t != NIL {
                stack.push(t);
                t = self.nodes[t as usize].left;
            }
            let n = stack.pop().expect("nonempty");
            let node = &self.nodes[n as usize];
            out.push((&node.origin, &node.len, node.label));
            t = node.right;
        }
        out
    }

    pub(crate) fn to_piecewise(&self) -> PiecewiseTranslation {
        let mut image = BigUint::zero();
        let mut pieces: Vec<Piece> = self
            .segments()
            .into_iter()
            .map(|(origin, len, _)| {
                let piece = Piece {
                    left: origin.clone(),
                    right: origin + len,
                    shift: signed(image.clone()) - signed(origin.clone()),
                };
                image += len;
                piece
            })
            .collect();
        pieces.sort_unstable_by(|a, b| a.left.cmp(&b.left));
        PiecewiseTranslation::from_sorted_pieces(self.scale.clone(), pieces)
    }

    /// Weighted sums `Σ len · weight(label)` over the image ranges delimited
    /// by the increasing interior `cuts`.
    pub(crate) fn weighted_sums(&mut self, cuts: &[BigUint]) -> Vec<BigInt> {
        let mut parts = alloc::vec![NIL; cuts.len() + 1];
        let mut rest = self.root;
        for (k, c) in cuts.iter().enumerate().rev() {
            let (a, b) = self.split(rest, c.clone());
            parts[k + 1] = b;
            rest = a;
        }
        parts[0] = rest;
        let sums = parts
            .iter()
            .map(|&p| {
                if p == NIL {
                    BigInt::zero()
                } else {
                    self.nodes[p as usize].wsum.clone()
                }
            })
            .collect();
        let mut root = NIL;
        for p in parts {
            root = self.merge(root, p);
        }
        self.root = root;
        sums
    }

    #[cfg(test)]
    fn segment_count(&self) -> usize {
        self.nodes.len()
    }
}
