//! Permutations of `{1, …, d}`, stored zero-based.
//!
//! claim irreducible-permutations: Permutation::is_irreducible

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::Error;

/// A permutation of `{1, …, d}`, given by its images `π(1), …, π(d)`.
///
/// For an IET, `π(j)` is the position that interval `j` occupies after the
/// exchange. Indices are 0-based in the API (`get(0)` is `π(1) - 1`) and
/// 1-based in the text form (`"3 2 1"`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    /// Builds from 1-based images.
    pub fn new(images: &[usize]) -> Result<Self, Error> {
        let d = images.len();
        let mut seen = alloc::vec![false; d];
        let mut zero_based = Vec::with_capacity(d);
        for &p in images {
            if p == 0 || p > d || seen[p - 1] {
                return Err(Error::NotAPermutation);
            }
            seen[p - 1] = true;
            zero_based.push(p - 1);
        }
        Ok(Self { images: zero_based })
    }

    pub(crate) fn from_zero_based(images: Vec<usize>) -> Self {
        debug_assert!({
            let mut s = images.clone();
            s.sort_unstable();
            s.iter().enumerate().all(|(i, &v)| i == v)
        });
        Self { images }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            images: (0..d).collect(),
        }
    }

    /// The order-reversing permutation `(d, d-1, …, 1)`.
    pub fn reversal(d: usize) -> Self {
        Self {
            images: (0..d).rev().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// 0-based image of 0-based index `i`.
    pub fn get(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.images.iter().map(|&p| p + 1).collect()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = alloc::vec![0; self.len()];
        for (i, &p) in self.images.iter().enumerate() {
            inv[p] = i;
        }
        Self { images: inv }
    }

    /// Irreducible iff no proper prefix `{1..k}` is mapped onto itself.
    pub fn is_irreducible(&self) -> bool {
        let mut max_image = 0;
        for (k, &p) in self
            .images
            .iter()
            .enumerate()
            .take(self.len().saturating_sub(1))
        {
            max_image = max_image.max(p);
            if max_image == k {
                return false;
            }
        }
        true
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &p)| i == p)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.images.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", p + 1)?;
        }
        Ok(())
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let images = s
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::Parse(String::from("permutation images must be integers")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(&images)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn validates_images() {
        assert!(Permutation::new(&[2, 1]).is_ok());
        assert_eq!(Permutation::new(&[1, 1]), Err(Error::NotAPermutation));
        assert_eq!(Permutation::new(&[0, 1]), Err(Error::NotAPermutation));
        assert_eq!(Permutation::new(&[1, 3]), Err(Error::NotAPermutation));
    }

    #[test]
    fn irreducibility() {
        assert!(Permutation::new(&[2, 1]).unwrap().is_irreducible());
        assert!(!Permutation::new(&[1, 2]).unwrap().is_irreducible());
        assert!(Permutation::new(&[3, 2, 1]).unwrap().is_irreducible());
        assert!(Permutation::new(&[3, 1, 2]).unwrap().is_irreducible());
        assert!(!Permutation::new(&[2, 1, 3]).unwrap().is_irreducible());
        assert!(!Permutation::new(&[1, 3, 2]).unwrap().is_irreducible());
        assert!(Permutation::new(&[4, 3, 2, 1]).unwrap().is_irreducible());
    }

    #[test]
    fn text_round_trip() {
        let p: Permutation = "4 1 3 2".parse().unwrap();
        assert_eq!(p.one_based(), [4, 1, 3, 2]);
        assert_eq!(p.to_string(), "4 1 3 2");
        assert_eq!(p.inverse().one_based(), [2, 4, 3, 1]);
    }
}
