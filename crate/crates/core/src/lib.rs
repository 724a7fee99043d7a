//! Exact interval exchange transformations.
//!
//! An interval exchange transformation (IET) on `[0, 1)` cuts the unit
//! interval into `d` pieces of prescribed lengths and rearranges them
//! according to a permutation. This crate works with rational lengths only and
//! never rounds: every length, breakpoint, translation, rigidity defect and
//! correlation is an exact rational number.
//!
//! Internally an IET with rational lengths is stored as a primitive integer
//! vector over a common denominator (its *scale*), so the hot loops of
//! Rauzy–Veech induction, orbit walking and power construction are plain big
//! integer additions.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, census
//! orchestration and the command line live in the companion `iet` crate.
//!
//! Modules:
//!
//! - [`iet`], [`perm`], [`piecewise`]: IETs, permutations, exact powers `Tⁿ`.
//! - [`rauzy`]: Rauzy–Veech induction, Rauzy classes, acceptable words,
//!   cylinder measures, balance and tower decompositions.
//! - [`rigidity`]: rigidity defects, ε-rigidity scans, expected rigidity times.
//! - [`spectral`]: correlation sequences, Wiener averages, continued fractions.
//! - [`product`]: Birkhoff averages of product systems.
//! - [`sample`]: reproducible uniform sampling of IETs.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;
pub mod iet;
pub mod perm;
pub mod piecewise;
pub mod product;
pub mod rational;
pub mod rauzy;
pub mod rigidity;
mod rope;
pub mod sample;
pub mod spectral;
pub mod stats;

pub use error::Error;
pub use iet::{Iet, KeaneReport, KeaneViolation};
pub use perm::Permutation;
pub use piecewise::{Piece, PiecewiseTranslation};
pub use rational::Rational;

pub type Result<T, E = Error> = core::result::Result<T, E>;
