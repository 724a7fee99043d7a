//! The IET type, evaluation, inversion, Keane checks and exact powers.
//!
//! claim iet-definition: Iet::new, Iet::eval, Iet::to_piecewise
//! claim keane-condition: Iet::keane_check

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::piecewise::{Piece, PiecewiseTranslation};
use crate::rational::{lcm_all, parse_rational, scaled_numer, signed, to_biguint, Rational};
use crate::rope::OrbitRope;
use crate::{Error, Permutation};

/// Above this exponent `to_piecewise` switches from step-by-step refinement
/// to the rope construction.
pub const REFINEMENT_LIMIT: u64 = 48;

/// An interval exchange transformation with rational lengths.
///
/// Lengths are stored as a primitive integer vector `n_1, …, n_d` whose sum is
/// the *scale* `S`; the rational length of interval `j` is `n_j / S`. Every
/// breakpoint and translation of `T` (and of all its powers) is an integer
/// multiple of `1/S`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Iet {
    lengths: Vec<BigUint>,
    scale: BigUint,
    perm: Permutation,
    breaks: Vec<BigUint>,
    shifts: Vec<BigInt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeaneViolation {
    /// Time at which the orbit hits a breakpoint.
    pub n: u64,
    /// 1-based index of the starting breakpoint `b_from`.
    pub from: usize,
    /// 1-based index of the breakpoint that is hit.
    pub to: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeaneReport {
    pub holds: bool,
    pub violation: Option<KeaneViolation>,
}

impl Iet {
    /// Validates `lengths` and `perm` and builds the IET.
    ///
    /// Zero lengths are accepted here; dynamical operations reject them with
    /// [`Error::DegenerateLength`].
    pub fn new(lengths: &[Rational], perm: Permutation) -> Result<Self, Error> {
        let d = lengths.len();
        if d < 2 {
            return Err(Error::TooFewIntervals { d });
        }
        if perm.len() != d {
            return Err(Error::DimensionMismatch {
                lengths: d,
                perm: perm.len(),
            });
        }
        if let Some(index) = lengths.iter().position(|l| l.is_negative()) {
            return Err(Error::NegativeLength { index });
        }
        let sum: Rational = lengths.iter().sum();
        if !sum.is_one() {
            return Err(Error::NonUnitSum { sum });
        }
        let scale = lcm_all(lengths.iter().map(|l| l.denom()));
        let ints = lengths
            .iter()
            .map(|l| to_biguint(&scaled_numer(l, &scale)))
            .collect();
        Ok(Self::from_primitive(ints, perm))
    }

    /// Builds the IET with lengths proportional to the given integers.
    pub fn from_integer_lengths(lengths: Vec<BigUint>, perm: Permutation) -> Result<Self, Error> {
        let d = lengths.len();
        if d < 2 {
            return Err(Error::TooFewIntervals { d });
        }
        if perm.len() != d {
            return Err(Error::DimensionMismatch {
                lengths: d,
                perm: perm.len(),
            });
        }
        let g = lengths.iter().fold(BigUint::zero(), |acc, l| acc.gcd(l));
        if g.is_zero() {
            return Err(Error::NonUnitSum {
                sum: Rational::zero(),
            });
        }
        let ints = if g.is_one() {
            lengths
        } else {
            lengths.into_iter().map(|l| l / &g).collect()
        };
        Ok(Self::from_primitive(ints, perm))
    }

    /// `lengths` must already have gcd 1 (or be the unique primitive
    /// representative the caller wants to keep).
    pub(crate) fn from_primitive(lengths: Vec<BigUint>, perm: Permutation) -> Self {
        let d = lengths.len();
        let mut breaks = Vec::with_capacity(d + 1);
        let mut acc = BigUint::zero();
        breaks.push(acc.clone());
        for l in &lengths {
            acc += l;
            breaks.push(acc.clone());
        }
        let scale = acc;
        // image position of interval j: total length of intervals k with π(k) < π(j)
        let inv = perm.inverse();
        let mut image_start = alloc::vec![BigUint::zero(); d];
        let mut pos = BigUint::zero();
        for p in 0..d {
            let j = inv.get(p);
            image_start[j] = pos.clone();
            pos += &lengths[j];
        }
        let shifts = (0..d)
            .map(|j| signed(image_start[j].clone()) - signed(breaks[j].clone()))
            .collect();
        Self {
            lengths,
            scale,
            perm,
            breaks,
            shifts,
        }
    }

    pub fn identity(d: usize) -> Self {
        Self::from_primitive(alloc::vec![BigUint::one(); d], Permutation::identity(d))
    }

    /// Rotation `x ↦ x + alpha mod 1` as the 2-IET with lengths
    /// `(1 - alpha, alpha)` and permutation `(2, 1)`.
    pub fn rotation(alpha: &Rational) -> Result<Self, Error> {
        let one = Rational::one();
        Self::new(
            &[&one - alpha, alpha.clone()],
            Permutation::new(&[2, 1]).expect("valid"),
        )
    }

    pub fn dim(&self) -> usize {
        self.lengths.len()
    }

    pub fn perm(&self) -> &Permutation {
        &self.perm
    }

    pub fn is_irreducible(&self) -> bool {
        self.perm.is_irreducible()
    }

    /// Common denominator `S` of all lengths.
    pub fn scale(&self) -> &BigUint {
        &self.scale
    }

    /// Integer lengths `n_j` with `l_j = n_j / S`.
    pub fn integer_lengths(&self) -> &[BigUint] {
        &self.lengths
    }

    /// Breakpoints `0 = b_0 ≤ … ≤ b_d = S` in units of `1/S`.
    pub fn integer_breaks(&self) -> &[BigUint] {
        &self.breaks
    }

    /// Translation of interval `j` in units of `1/S`.
    pub fn integer_shifts(&self) -> &[BigInt] {
        &self.shifts
    }

    pub fn length(&self, j: usize) -> Rational {
        Rational::new(signed(self.lengths[j].clone()), signed(self.scale.clone()))
    }

    pub fn lengths(&self) -> Vec<Rational> {
        (0..self.dim()).map(|j| self.length(j)).collect()
    }

    pub fn breakpoints(&self) -> Vec<Rational> {
        let s = signed(self.scale.clone());
        self.breaks
            .iter()
            .map(|b| Rational::new(signed(b.clone()), s.clone()))
            .collect()
    }

    pub fn is_degenerate(&self) -> bool {
        self.lengths.iter().any(Zero::is_zero)
    }

    pub fn ensure_nondegenerate(&self) -> Result<(), Error> {
        match self.lengths.iter().position(Zero::is_zero) {
            Some(index) => Err(Error::DegenerateLength { index }),
            None => Ok(()),
        }
    }

    /// Index of the interval containing the scaled point `x ∈ [0, S)`.
    pub(crate) fn interval_of_scaled(&self, x: &BigUint) -> usize {
        self.breaks[1..].partition_point(|b| b <= x)
    }

    /// `T(x)` for a scaled point `x ∈ [0, S)`.
    pub(crate) fn eval_scaled(&self, x: &BigUint) -> BigUint {
        let j = self.interval_of_scaled(x);
        let mut y = x.clone();
        add_signed(&mut y, &self.shifts[j]);
        y
    }

    /// In-place `x ← T(x)` on a scaled point.
    pub(crate) fn step_scaled(&self, x: &mut BigUint) {
        let j = self.interval_of_scaled(x);
        add_signed(x, &self.shifts[j]);
    }

    /// `T(x)` for `0 ≤ x < 1`.
    pub fn eval(&self, x: &Rational) -> Result<Rational, Error> {
        if x.is_negative() || *x >= Rational::one() {
            return Err(Error::OutOfDomain);
        }
        // compare x = p/q against b/S via p·S vs b·q
        let p = x.numer().magnitude();
        let q = x.denom().magnitude();
        let ps = p * &self.scale;
        let j = self.breaks[1..].partition_point(|b| b * q <= ps);
        Ok(x + Rational::new(self.shifts[j].clone(), signed(self.scale.clone())))
    }

    /// The inverse IET: lengths `(l_{π⁻¹(1)}, …, l_{π⁻¹(d)})`, permutation `π⁻¹`.
    pub fn invert(&self) -> Result<Self, Error> {
        self.ensure_nondegenerate()?;
        let inv = self.perm.inverse();
        let lengths = (0..self.dim())
            .map(|p| self.lengths[inv.get(p)].clone())
            .collect();
        Ok(Self::from_primitive(lengths, inv))
    }

    /// Breakpoints where `T` is genuinely discontinuous, as 1-based indices
    /// `i` of `b_i`, `1 ≤ i < d`.
    pub fn discontinuities(&self) -> Vec<usize> {
        (1..self.dim())
            .filter(|&i| self.perm.get(i) != self.perm.get(i - 1) + 1)
            .collect()
    }

    /// Checks `Tⁿ(b_i) ≠ b_j` for all `1 ≤ n ≤ depth` and all genuine
    /// discontinuities `b_i`, `b_j`.
    pub fn keane_check(&self, depth: u64) -> KeaneReport {
        let disc = self.discontinuities();
        let targets: Vec<(&BigUint, usize)> = disc.iter().map(|&i| (&self.breaks[i], i)).collect();
        let mut orbit: Vec<BigUint> = disc.iter().map(|&i| self.breaks[i].clone()).collect();
        for n in 1..=depth {
            for (k, x) in orbit.iter_mut().enumerate() {
                self.step_scaled(x);
                if let Some(&(_, to)) = targets.iter().find(|(b, _)| *b == x) {
                    return KeaneReport {
                        holds: false,
                        violation: Some(KeaneViolation {
                            n,
                            from: disc[k],
                            to,
                        }),
                    };
                }
            }
        }
        KeaneReport {
            holds: true,
            violation: None,
        }
    }

    /// `T` itself as a piecewise translation.
    pub fn as_piecewise(&self) -> PiecewiseTranslation {
        let pieces = (0..self.dim())
            .filter(|&j| !self.lengths[j].is_zero())
            .map(|j| Piece {
                left: self.breaks[j].clone(),
                right: self.breaks[j + 1].clone(),
                shift: self.shifts[j].clone(),
            })
            .collect();
        PiecewiseTranslation::from_sorted_pieces(self.scale.clone(), pieces)
    }

    /// `Tⁿ` as an exact piecewise translation.
    ///
    /// Small exponents are built by refinement (`Tᵏ⁺¹ = T ∘ Tᵏ`), larger ones
    /// by repeated squaring; all routes produce the same canonical pieces.
    pub fn to_piecewise(&self, n: u64) -> Result<PiecewiseTranslation, Error> {
        if n <= REFINEMENT_LIMIT {
            self.to_piecewise_by_refinement(n)
        } else {
            self.to_piecewise_by_squaring(n)
        }
    }

    /// `Tⁿ` from the binary digits of `n`. Each composition is linear in the
    /// piece counts, so maps whose powers stay simple (rotations) cost
    /// `O(log n)` compositions.
    pub fn to_piecewise_by_squaring(&self, n: u64) -> Result<PiecewiseTranslation, Error> {
        self.ensure_nondegenerate()?;
        let mut acc = PiecewiseTranslation::identity(self.scale.clone());
        let mut square = self.as_piecewise();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = square.compose(&acc);
            }
            k >>= 1;
            if k > 0 {
                square = square.compose(&square);
            }
        }
        Ok(acc)
    }

    /// `Tⁿ` by `n` successive refinements, `O(n² d)`.
    pub fn to_piecewise_by_refinement(&self, n: u64) -> Result<PiecewiseTranslation, Error> {
        self.ensure_nondegenerate()?;
        let t = self.as_piecewise();
        let mut acc = PiecewiseTranslation::identity(self.scale.clone());
        for _ in 0..n {
            acc = t.compose(&acc);
        }
        Ok(acc)
    }

    /// `Tⁿ` by tracking where every piece of `[0, 1)` is carried, `O(n d log n)`.
    pub fn to_piecewise_by_rope(&self, n: u64) -> Result<PiecewiseTranslation, Error> {
        self.ensure_nondegenerate()?;
        let mut rope = OrbitRope::identity(self.scale.clone());
        for _ in 0..n {
            rope.apply(&self.breaks, &self.perm);
        }
        Ok(rope.to_piecewise())
    }
}

pub(crate) fn add_signed(x: &mut BigUint, shift: &BigInt) {
    if shift.is_negative() {
        *x -= shift.magnitude();
    } else {
        *x += shift.magnitude();
    }
}

/// Text form `l1/m1,l2/m2,...;p1 p2 ... pd`.
impl fmt::Display for Iet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, l) in self.lengths().iter().enumerate() {
            if j > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}/{}", l.numer(), l.denom())?;
        }
        write!(f, ";{}", self.perm)
    }
}

impl FromStr for Iet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let (lengths, perm) = s
            .split_once(';')
            .ok_or_else(|| Error::Parse("expected `lengths;permutation`".to_string()))?;
        let lengths = parse_lengths(lengths)?;
        let perm: Permutation = perm.parse()?;
        Self::new(&lengths, perm)
    }
}

/// Comma-separated rationals.
pub fn parse_lengths(s: &str) -> Result<Vec<Rational>, Error> {
    s.split(',')
        .map(parse_rational)
        .collect::<Result<Vec<_>, _>>()
}

pub fn format_lengths(lengths: &[Rational]) -> String {
    let mut out = String::new();
    for (j, l) in lengths.iter().enumerate() {
        if j > 0 {
            out.push(',');
        }
        out.push_str(&crate::rational::format_rational(l));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn rot23() -> Iet {
        Iet::new(
            &[ratio(1, 3), ratio(2, 3)],
            Permutation::new(&[2, 1]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn construction_errors() {
        let p = Permutation::new(&[3, 2, 1]).unwrap();
        assert!(matches!(
            Iet::new(&[ratio(1, 3), ratio(1, 3), ratio(1, 2)], p.clone()),
            Err(Error::NonUnitSum { .. })
        ));
        assert_eq!(
            Iet::new(&[ratio(-1, 3), ratio(2, 3), ratio(2, 3)], p.clone()),
            Err(Error::NegativeLength { index: 0 })
        );
        assert_eq!(
            Iet::new(&[int(1)], Permutation::identity(1)),
            Err(Error::TooFewIntervals { d: 1 })
        );
        assert!(matches!(
            Iet::new(&[ratio(1, 2), ratio(1, 2)], p),
            Err(Error::DimensionMismatch { .. })
        ));
        // closed simplex: zero lengths are valid data
        let z = Iet::new(&[int(0), int(1)], Permutation::new(&[2, 1]).unwrap()).unwrap();
        assert!(z.is_degenerate());
        assert_eq!(z.invert(), Err(Error::DegenerateLength { index: 0 }));
    }

    #[test]
    fn evaluation() {
        let t = rot23();
        assert_eq!(t.eval(&int(0)).unwrap(), ratio(2, 3));
        assert_eq!(t.eval(&ratio(1, 2)).unwrap(), ratio(1, 6));
        assert_eq!(t.eval(&ratio(1, 3)).unwrap(), int(0));
        assert_eq!(t.eval(&int(1)), Err(Error::OutOfDomain));
        assert_eq!(t.eval(&ratio(-1, 5)), Err(Error::OutOfDomain));
        let id = Iet::new(&[ratio(1, 2), ratio(1, 2)], Permutation::identity(2)).unwrap();
        for k in 0..7 {
            assert_eq!(id.eval(&ratio(k, 7)).unwrap(), ratio(k, 7));
        }
    }

    #[test]
    fn inverse_of_rotation() {
        let s = rot23().invert().unwrap();
        assert_eq!(s.lengths(), [ratio(2, 3), ratio(1, 3)]);
        assert_eq!(s.perm().one_based(), [2, 1]);
        let t = Iet::new(
            &[ratio(1, 6), ratio(1, 3), ratio(1, 2)],
            Permutation::new(&[3, 1, 2]).unwrap(),
        )
        .unwrap();
        let s = t.invert().unwrap();
        assert_eq!(s.perm().one_based(), [2, 3, 1]);
        for k in 0..30 {
            let x = ratio(k, 30);
            assert_eq!(s.eval(&t.eval(&x).unwrap()).unwrap(), x);
        }
    }

    #[test]
    fn keane_for_rational_rotations() {
        let half = Iet::rotation(&ratio(1, 2)).unwrap();
        let r = half.keane_check(2);
        assert!(!r.holds);
        assert_eq!(r.violation.unwrap().n, 2);
        assert!(half.keane_check(1).holds);
        let r = Iet::rotation(&ratio(3, 7)).unwrap().keane_check(7);
        assert!(!r.holds);
    }

    #[test]
    fn small_powers() {
        let t = rot23();
        let p0 = t.to_piecewise(0).unwrap();
        assert_eq!(p0.len(), 1);
        let p1 = t.to_piecewise(1).unwrap();
        assert_eq!(
            p1.pieces(),
            [
                (int(0), ratio(1, 3), ratio(2, 3)),
                (ratio(1, 3), int(1), ratio(-1, 3))
            ]
        );
        let p3 = t.to_piecewise(3).unwrap();
        assert_eq!(p3.pieces(), [(int(0), int(1), int(0))]);
    }

    #[test]
    fn text_format() {
        let t: Iet = "1/6,1/3,1/2;3 1 2".parse().unwrap();
        assert_eq!(t.to_string(), "1/6,1/3,1/2;3 1 2");
        assert!("1/2,1/2".parse::<Iet>().is_err());
        assert!("1/2,1/3;2 1".parse::<Iet>().is_err());
    }
}
