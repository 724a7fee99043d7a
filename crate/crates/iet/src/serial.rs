//! Serde adapters writing rationals as `"p/q"` strings.

use iet_core::rational::{format_rational, parse_rational};
use iet_core::Rational;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serializer};

fn parse<'de, D: Deserializer<'de>>(s: &str) -> Result<Rational, D::Error> {
    parse_rational(s).map_err(D::Error::custom)
}

pub mod ratio {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        parse::<D>(&String::deserialize(d)?)
    }
}

pub mod opt_ratio {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(x) => s.serialize_some(&format_rational(x)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| parse::<D>(&s))
            .transpose()
    }
}

pub mod ratio_list {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(xs.iter().map(format_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| parse::<D>(s))
            .collect()
    }
}

pub mod ratio_pairs {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[(Rational, Rational)], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(
            xs.iter()
                .map(|(a, b)| (format_rational(a), format_rational(b))),
        )
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<Vec<(Rational, Rational)>, D::Error> {
        Vec::<(String, String)>::deserialize(d)?
            .iter()
            .map(|(a, b)| Ok((parse::<D>(a)?, parse::<D>(b)?)))
            .collect()
    }
}
