//! Additive valuations with values in `Q ∪ {+∞}`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use num_rational::Rational64;
use num_traits::Zero;
use serde::{Serialize, Serializer};

/// A valuation value: a rational number or `+∞` (the valuation of zero).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(Rational64),
    Infinite,
}

impl Valuation {
    pub fn int(v: i64) -> Self {
        Valuation::Finite(Rational64::from_integer(v))
    }

    pub fn frac(num: i64, den: i64) -> Self {
        Valuation::Finite(Rational64::new(num, den))
    }

    pub fn finite(self) -> Option<Rational64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    /// `self >= threshold`, treating `+∞` as larger than every rational.
    pub fn at_least(self, threshold: Rational64) -> bool {
        match self {
            Valuation::Finite(v) => v >= threshold,
            Valuation::Infinite => true,
        }
    }

    /// `self > threshold`.
    pub fn exceeds(self, threshold: Rational64) -> bool {
        match self {
            Valuation::Finite(v) => v > threshold,
            Valuation::Infinite => true,
        }
    }

    /// Multiply a finite valuation by a rational exponent (valuation of a power).
    pub fn scale(self, k: Rational64) -> Self {
        match self {
            Valuation::Finite(v) => Valuation::Finite(v * k),
            Valuation::Infinite if k.is_zero() => Valuation::int(0),
            Valuation::Infinite => Valuation::Infinite,
        }
    }
}

impl From<Rational64> for Valuation {
    fn from(v: Rational64) -> Self {
        Valuation::Finite(v)
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
            (Valuation::Infinite, _) => Ordering::Greater,
            (_, Valuation::Infinite) => Ordering::Less,
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
        }
    }
}

impl Add for Valuation {
    type Output = Valuation;

    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "+inf"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Serialize a rational as `"p/q"`, for use with `serialize_with`.
pub fn serialize_ratio<S: Serializer>(r: &Rational64, serializer: S) -> Result<S::Ok, S::Error> {
    serializer.collect_str(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_dominates() {
        assert!(Valuation::Infinite > Valuation::int(1_000_000));
        assert!(Valuation::Infinite.at_least(Rational64::from_integer(7)));
        assert_eq!(Valuation::frac(1, 2) + Valuation::Infinite, Valuation::Infinite);
    }

    #[test]
    fn display() {
        assert_eq!(Valuation::frac(7, 2).to_string(), "7/2");
        assert_eq!(Valuation::int(3).to_string(), "3");
        assert_eq!(Valuation::Infinite.to_string(), "+inf");
    }
}
