use alloc::string::String;
use core::fmt;

use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// Lengths do not add up to exactly one.
    NonUnitSum {
        sum: Rational,
    },
    NegativeLength {
        index: usize,
    },
    NotAPermutation,
    DimensionMismatch {
        lengths: usize,
        perm: usize,
    },
    TooFewIntervals {
        d: usize,
    },
    /// A point outside `[0, 1)` was passed to an evaluation.
    OutOfDomain,
    /// A dynamical operation needs every length to be strictly positive.
    DegenerateLength {
        index: usize,
    },
    /// The two critical lengths of a Rauzy–Veech step coincide.
    TieBreakdown,
    ReduciblePermutation,
    SearchBudgetExceeded {
        max_len: usize,
    },
    SeriesTooShort {
        needed: usize,
        available: usize,
    },
    Parse(String),
    InvalidArgument(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonUnitSum { sum } => write!(f, "lengths sum to {sum}, expected exactly 1"),
            Self::NegativeLength { index } => write!(f, "length {} is negative", index + 1),
            Self::NotAPermutation => write!(f, "images do not form a permutation of 1..d"),
            Self::DimensionMismatch { lengths, perm } => write!(
                f,
                "{lengths} lengths given for a permutation on {perm} letters"
            ),
            Self::TooFewIntervals { d } => write!(f, "an IET needs at least 2 intervals, got {d}"),
            Self::OutOfDomain => write!(f, "point outside [0, 1)"),
            Self::DegenerateLength { index } => {
                write!(
                    f,
                    "length {} is zero; operation needs positive lengths",
                    index + 1
                )
            }
            Self::TieBreakdown => write!(f, "critical lengths are equal; induction undefined"),
            Self::ReduciblePermutation => write!(f, "permutation is reducible"),
            Self::SearchBudgetExceeded { max_len } => {
                write!(f, "no positive word of length <= {max_len}")
            }
            Self::SeriesTooShort { needed, available } => write!(
                f,
                "correlation series has {available} terms, {needed} needed"
            ),
            Self::Parse(msg) => write!(f, "parse error: {msg}"),
            Self::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
