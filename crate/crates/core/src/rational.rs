use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

/// An exact probability or ratio of counts, kept reduced.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Probability(pub BigRational);

impl Probability {
    pub fn from_counts(num: BigUint, den: BigUint) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Probability(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_ratio(num: u64, den: u64) -> Self {
        Self::from_counts(BigUint::from(num), BigUint::from(den))
    }

    pub fn one_third() -> Self {
        Self::from_ratio(1, 3)
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// `self − 1/3` as an exact value.
    pub fn gap_to_third(&self) -> BigRational {
        &self.0 - Self::one_third().0
    }

    pub fn gap_to_third_f64(&self) -> f64 {
        self.gap_to_third().to_f64().unwrap_or(f64::NAN)
    }
}

/// Fixed 17-significant-digit rendering used in every report.
pub fn render_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl Serialize for Probability {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("Probability", 3)?;
        s.serialize_field("num", &self.numer().to_string())?;
        s.serialize_field("den", &self.denom().to_string())?;
        s.serialize_field("float", &render_f64(self.to_f64()))?;
        s.end()
    }
}
