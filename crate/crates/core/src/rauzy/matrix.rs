use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use super::StepType;
use crate::rational::signed;
use crate::{Error, Rational};

/// Square nonnegative integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RvMatrix {
    d: usize,
    entries: Vec<BigUint>,
}

impl RvMatrix {
    pub fn identity(d: usize) -> Self {
        let mut entries = alloc::vec![BigUint::zero(); d * d];
        for i in 0..d {
            entries[i * d + i] = BigUint::one();
        }
        Self { d, entries }
    }

    /// From rows; every row must have as many entries as there are rows.
    pub fn from_rows(rows: Vec<Vec<BigUint>>) -> Result<Self, Error> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArgument("matrix must be square"));
        }
        Ok(Self {
            d,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigUint {
        &self.entries[i * self.d + j]
    }

    pub fn row(&self, i: usize) -> &[BigUint] {
        &self.entries[i * self.d..(i + 1) * self.d]
    }

    /// Right-multiplies by the elementary matrix of one step.
    pub(crate) fn apply_step(&mut self, k: usize, step: StepType) {
        let d = self.d;
        for row in self.entries.chunks_mut(d) {
            match step {
                StepType::A => {
                    let last = row[d - 1].clone();
                    row[k] += last;
                }
                StepType::B => {
                    row[k + 1..].rotate_right(1);
                    let base = row[k].clone();
                    row[k + 1] += base;
                }
            }
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.d, other.d);
        let d = self.d;
        let mut entries = alloc::vec![BigUint::zero(); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = &self.entries[i * d + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let b = &other.entries[k * d + j];
                    if !b.is_zero() {
                        entries[i * d + j] += a * b;
                    }
                }
            }
        }
        Self { d, entries }
    }

    pub fn mul_vec(&self, v: &[BigUint]) -> Vec<BigUint> {
        (0..self.d)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(BigUint::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// `|C_j| = Σ_i M_ij`.
    pub fn column_sums(&self) -> Vec<BigUint> {
        let mut sums = alloc::vec![BigUint::zero(); self.d];
        for row in self.entries.chunks(self.d) {
            for (s, a) in sums.iter_mut().zip(row) {
                *s += a;
            }
        }
        sums
    }

    /// Largest column sum and its index, ties to the smallest index.
    pub fn cmax(&self) -> (usize, BigUint) {
        let sums = self.column_sums();
        let (i, v) = super::argmax(&sums);
        (i, v.clone())
    }

    pub fn balance(&self) -> Rational {
        let sums = self.column_sums();
        let max = sums.iter().max().expect("d >= 1");
        let min = sums.iter().min().expect("d >= 1");
        Rational::new(signed(max.clone()), signed(min.clone()))
    }

    /// `1 / Π_j |C_j|`, the Lebesgue measure of the cylinder of this matrix
    /// inside the simplex (normalised so the whole simplex has measure 1).
    pub fn cylinder_measure(&self) -> Rational {
        let prod = self
            .column_sums()
            .into_iter()
            .fold(BigUint::one(), |acc, s| acc * s);
        Rational::new(BigInt::one(), signed(prod))
    }

    pub fn is_positive(&self) -> bool {
        self.entries.iter().all(|a| !a.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.d)
    }

    /// `max entry / min entry`; `None` unless every entry is positive.
    pub fn entry_ratio(&self) -> Option<Rational> {
        if !self.is_positive() {
            return None;
        }
        let max = self.entries.iter().max()?;
        let min = self.entries.iter().min()?;
        Some(Rational::new(signed(max.clone()), signed(min.clone())))
    }

    /// Exact determinant by fraction-free elimination.
    pub fn determinant(&self) -> BigInt {
        let d = self.d;
        if d == 0 {
            return BigInt::one();
        }
        let mut a: Vec<BigInt> = self.entries.iter().cloned().map(signed).collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..d - 1 {
            if a[k * d + k].is_zero() {
                let Some(p) = (k + 1..d).find(|&i| !a[i * d + k].is_zero()) else {
                    return BigInt::zero();
                };
                for j in 0..d {
                    a.swap(k * d + j, p * d + j);
                }
                sign = -sign;
            }
            for i in k + 1..d {
                for j in k + 1..d {
                    let v = &a[i * d + j] * &a[k * d + k] - &a[i * d + k] * &a[k * d + j];
                    a[i * d + j] = v / &prev;
                }
            }
            prev = a[k * d + k].clone();
        }
        sign * &a[d * d - 1]
    }

    /// One row per line, entries separated by spaces.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for i in 0..self.d {
            for (j, a) in self.row(i).iter().enumerate() {
                if j > 0 {
                    s.push(' ');
                }
                s.push_str(&alloc::format!("{a}"));
            }
            s.push('\n');
        }
        s
    }
}

impl fmt::Display for RvMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn m(rows: &[&[u32]]) -> RvMatrix {
        RvMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigUint::from(x)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn elementary_matrices() {
        let mut a = RvMatrix::identity(2);
        a.apply_step(0, StepType::A);
        assert_eq!(a, m(&[&[1, 0], &[1, 1]]));
        let mut b = RvMatrix::identity(3);
        b.apply_step(0, StepType::B);
        assert_eq!(b, m(&[&[1, 1, 0], &[0, 0, 1], &[0, 1, 0]]));
        assert_eq!(b.determinant().magnitude(), &BigUint::one());
    }

    #[test]
    fn determinant_and_products() {
        let a = m(&[&[2, 1], &[1, 1]]);
        assert_eq!(a.determinant(), BigInt::one());
        let b = m(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1]]);
        assert_eq!(b.determinant(), BigInt::from(-1));
        assert_eq!(a.mul(&a), m(&[&[5, 3], &[3, 2]]));
        assert_eq!(
            a.mul_vec(&[BigUint::from(1u32), BigUint::from(2u32)]),
            vec![BigUint::from(4u32), BigUint::from(3u32)]
        );
        assert_eq!(
            a.column_sums(),
            vec![BigUint::from(3u32), BigUint::from(2u32)]
        );
        assert_eq!(a.cylinder_measure(), Rational::new(1.into(), 6.into()));
        assert_eq!(a.entry_ratio(), Some(Rational::from_integer(2.into())));
        assert_eq!(a.dump(), "2 1\n1 1\n");
    }
}
