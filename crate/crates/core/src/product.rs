//! Birkhoff averages of product systems `T × S` on `[0, 1)²`.
//!
//! Orbits of rational points are followed exactly on an integer grid fine
//! enough for both the map and the test sets, so visit counts are exact.
//!
//! claim product-unique-ergodicity: product_orbit_average
//! claim product-marginals: projection_check

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use crate::iet::add_signed;
use crate::rational::{lcm_all, scaled_numer, signed, to_biguint};
use crate::{Error, Iet, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductSystem {
    first: Iet,
    second: Iet,
}

impl ProductSystem {
    pub fn new(first: Iet, second: Iet) -> Result<Self, Error> {
        first.ensure_nondegenerate()?;
        second.ensure_nondegenerate()?;
        Ok(Self { first, second })
    }

    pub fn first(&self) -> &Iet {
        &self.first
    }

    pub fn second(&self) -> &Iet {
        &self.second
    }

    pub fn swapped(&self) -> Self {
        Self {
            first: self.second.clone(),
            second: self.first.clone(),
        }
    }
}

/// Half-open interval `[a, b) ⊂ [0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Span {
    pub lo: Rational,
    pub hi: Rational,
}

impl Span {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self, Error> {
        if lo.is_negative() || hi > Rational::one() || hi < lo {
            return Err(Error::InvalidArgument("need 0 <= lo <= hi <= 1"));
        }
        Ok(Self { lo, hi })
    }

    pub fn unit() -> Self {
        Self {
            lo: Rational::zero(),
            hi: Rational::one(),
        }
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rect {
    pub x: Span,
    pub y: Span,
}

impl Rect {
    pub fn area(&self) -> Rational {
        self.x.length() * self.y.length()
    }

    pub fn transposed(&self) -> Self {
        Self {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BirkhoffStats {
    pub rect: Rect,
    pub n: u64,
    pub target: Rational,
    /// One average per start, in start order.
    pub averages: Vec<Rational>,
    pub max_deviation: Rational,
}

/// One coordinate of an orbit on the grid of `scale`.
struct Walker {
    breaks: Vec<BigUint>,
    shifts: Vec<BigInt>,
}

impl Walker {
    fn new(t: &Iet, scale: &BigUint) -> Self {
        let factor = scale / t.scale();
        let f = signed(factor.clone());
        Self {
            breaks: t.integer_breaks().iter().map(|b| b * &factor).collect(),
            shifts: t.integer_shifts().iter().map(|s| s * &f).collect(),
        }
    }

    fn step(&self, x: &mut BigUint) {
        let j = self.breaks[1..].partition_point(|b| b <= x);
        add_signed(x, &self.shifts[j]);
    }
}

fn grid_scale<'a>(t: &Iet, points: impl Iterator<Item = &'a Rational>) -> BigUint {
    let denoms: Vec<BigInt> = core::iter::once(signed(t.scale().clone()))
        .chain(points.map(|p| p.denom().clone()))
        .collect();
    to_biguint(&lcm_all(denoms.iter()))
}

fn check_point(p: &Rational) -> Result<(), Error> {
    if p.is_negative() || *p >= Rational::one() {
        return Err(Error::OutOfDomain);
    }
    Ok(())
}

/// Exact visit frequencies of every rectangle along the product orbits of
/// all starts, one orbit pass per start.
pub fn product_orbit_average(
    system: &ProductSystem,
    rects: &[Rect],
    starts: &[(Rational, Rational)],
    n: u64,
) -> Result<Vec<BirkhoffStats>, Error> {
    if n == 0 {
        return Err(Error::InvalidArgument("horizon must be positive"));
    }
    for (x, y) in starts {
        check_point(x)?;
        check_point(y)?;
    }
    let xs = grid_scale(
        &system.first,
        rects
            .iter()
            .flat_map(|r| [&r.x.lo, &r.x.hi])
            .chain(starts.iter().map(|s| &s.0)),
    );
    let ys = grid_scale(
        &system.second,
        rects
            .iter()
            .flat_map(|r| [&r.y.lo, &r.y.hi])
            .chain(starts.iter().map(|s| &s.1)),
    );
    let (wx, wy) = (
        Walker::new(&system.first, &xs),
        Walker::new(&system.second, &ys),
    );
    let sx = signed(xs.clone());
    let sy = signed(ys.clone());
    let bounds: Vec<[BigUint; 4]> = rects
        .iter()
        .map(|r| {
            [
                to_biguint(&scaled_numer(&r.x.lo, &sx)),
                to_biguint(&scaled_numer(&r.x.hi, &sx)),
                to_biguint(&scaled_numer(&r.y.lo, &sy)),
                to_biguint(&scaled_numer(&r.y.hi, &sy)),
            ]
        })
        .collect();
    let mut counts = alloc::vec![alloc::vec![0u64; starts.len()]; rects.len()];
    for (s, (x0, y0)) in starts.iter().enumerate() {
        let mut x = to_biguint(&scaled_numer(x0, &sx));
        let mut y = to_biguint(&scaled_numer(y0, &sy));
        for _ in 0..n {
            for (r, b) in bounds.iter().enumerate() {
                if b[0] <= x && x < b[1] && b[2] <= y && y < b[3] {
                    counts[r][s] += 1;
                }
            }
            wx.step(&mut x);
            wy.step(&mut y);
        }
    }
    let nn = Rational::from_integer(BigInt::from(n));
    Ok(rects
        .iter()
        .zip(counts)
        .map(|(rect, c)| {
            let target = rect.area();
            let averages: Vec<Rational> = c
                .into_iter()
                .map(|k| Rational::from_integer(BigInt::from(k)) / &nn)
                .collect();
            let max_deviation = averages
                .iter()
                .map(|a| (a - &target).abs())
                .max()
                .unwrap_or_else(Rational::zero);
            BirkhoffStats {
                rect: rect.clone(),
                n,
                target,
                averages,
                max_deviation,
            }
        })
        .collect())
}

/// Frequency of `Tᵏx ∈ A` for the first coordinate alone, per start.
pub fn projection_check(
    system: &ProductSystem,
    set: &Span,
    starts: &[(Rational, Rational)],
    n: u64,
) -> Result<BirkhoffStats, Error> {
    let rect = Rect {
        x: set.clone(),
        y: Span::unit(),
    };
    Ok(product_orbit_average(system, &[rect], starts, n)?.remove(0))
}

/// Uniform starts on the grid of each component's own denominator.
pub fn random_starts<R: rand_core::RngCore>(
    rng: &mut R,
    system: &ProductSystem,
    count: usize,
) -> Vec<(Rational, Rational)> {
    let point = |rng: &mut R, t: &Iet| {
        let x = crate::sample::random_below(rng, t.scale());
        Rational::new(signed(x), signed(t.scale().clone()))
    };
    (0..count)
        .map(|_| (point(rng, &system.first), point(rng, &system.second)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::Permutation;

    fn span(a: i64, b: i64, c: i64, d: i64) -> Span {
        Span::new(ratio(a, b), ratio(c, d)).unwrap()
    }

    #[test]
    fn locked_half_rotations() {
        let r = Iet::rotation(&ratio(1, 2)).unwrap();
        let p = ProductSystem::new(r.clone(), r).unwrap();
        let rect = Rect {
            x: span(0, 1, 1, 2),
            y: span(0, 1, 1, 2),
        };
        let st = product_orbit_average(
            &p,
            &[
                rect,
                Rect {
                    x: Span::unit(),
                    y: Span::unit(),
                },
            ],
            &[(int(0), int(0))],
            10,
        )
        .unwrap();
        assert_eq!(st[0].averages, [ratio(1, 2)]);
        assert_eq!(st[0].max_deviation, ratio(1, 4));
        assert_eq!(st[1].averages, [int(1)]);
        assert!(st[1].max_deviation.is_zero());
    }

    #[test]
    fn projection_of_periodic_rotation() {
        let r = Iet::rotation(&ratio(3, 5)).unwrap();
        let s = Iet::new(
            &[ratio(1, 3), ratio(2, 3)],
            Permutation::new(&[2, 1]).unwrap(),
        )
        .unwrap();
        let p = ProductSystem::new(r, s).unwrap();
        let st =
            projection_check(&p, &span(0, 1, 1, 5), &[(ratio(1, 7), ratio(2, 9))], 25).unwrap();
        assert_eq!(st.averages, [ratio(1, 5)]);
    }

    #[test]
    fn swapping_components_transposes() {
        let a = Iet::new(
            &[ratio(2, 7), ratio(5, 7)],
            Permutation::new(&[2, 1]).unwrap(),
        )
        .unwrap();
        let b = Iet::new(
            &[ratio(1, 6), ratio(1, 3), ratio(1, 2)],
            Permutation::reversal(3),
        )
        .unwrap();
        let p = ProductSystem::new(a, b).unwrap();
        let rect = Rect {
            x: span(1, 4, 3, 4),
            y: span(0, 1, 1, 3),
        };
        let starts = [(ratio(1, 11), ratio(3, 13)), (ratio(1, 2), ratio(0, 1))];
        let swapped: Vec<_> = starts.iter().map(|(x, y)| (y.clone(), x.clone())).collect();
        let one = product_orbit_average(&p, core::slice::from_ref(&rect), &starts, 300).unwrap();
        let two = product_orbit_average(&p.swapped(), &[rect.transposed()], &swapped, 300).unwrap();
        assert_eq!(one[0].averages, two[0].averages);
        assert_eq!(one[0].max_deviation, two[0].max_deviation);
    }
}
