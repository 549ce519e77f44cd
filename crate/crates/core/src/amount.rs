//! Exact fixed-point Ether amounts.
//!
//! Amounts are carried as integer Wei (1 Ether = 10^18 Wei) so that sums over
//! millions of transfers never drift the way binary floats do.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Wei per Ether.
pub const WEI_PER_ETHER: u128 = 1_000_000_000_000_000_000;

const FRACTIONAL_DIGITS: usize = 18;

/// A non-negative Ether value held as integer Wei.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Amount(u128);

/// Failure to parse or combine amounts.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum AmountError {
    #[error("empty amount")]
    Empty,
    #[error("negative amount `{0}`")]
    Negative(String),
    #[error("invalid amount `{0}`")]
    Invalid(String),
    #[error("amount `{0}` has more than {FRACTIONAL_DIGITS} fractional digits")]
    TooPrecise(String),
    #[error("amount `{0}` is out of range")]
    OutOfRange(String),
}

impl Amount {
    pub const ZERO: Amount = Amount(0);

    pub const fn from_wei(wei: u128) -> Self {
        Amount(wei)
    }

    /// Whole-Ether constructor; fails only past ~3.4e20 Ether.
    pub fn from_ether(ether: u128) -> Option<Self> {
        ether.checked_mul(WEI_PER_ETHER).map(Amount)
    }

    pub const fn wei(self) -> u128 {
        self.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn checked_add(self, rhs: Amount) -> Option<Amount> {
        self.0.checked_add(rhs.0).map(Amount)
    }

    pub fn checked_sub(self, rhs: Amount) -> Option<Amount> {
        self.0.checked_sub(rhs.0).map(Amount)
    }

    /// Uniform scaling by an integer factor.
    pub fn checked_mul(self, factor: u128) -> Option<Amount> {
        self.0.checked_mul(factor).map(Amount)
    }

    /// Division to the nearest Wei, half up. Used for per-ego means.
    pub fn div_round(self, divisor: u128) -> Amount {
        assert!(divisor > 0, "division by zero");
        Amount((self.0 + divisor / 2) / divisor)
    }

    /// Lossy conversion for display-side arithmetic only.
    pub fn to_f64_lossy(self) -> f64 {
        self.0 as f64 / WEI_PER_ETHER as f64
    }
}

impl Add for Amount {
    type Output = Amount;

    fn add(self, rhs: Amount) -> Amount {
        self.checked_add(rhs).expect("amount sum overflows u128 Wei")
    }
}

impl AddAssign for Amount {
    fn add_assign(&mut self, rhs: Amount) {
        *self = *self + rhs;
    }
}

impl Sum for Amount {
    fn sum<I: Iterator<Item = Amount>>(iter: I) -> Amount {
        iter.fold(Amount::ZERO, Add::add)
    }
}

impl FromStr for Amount {
    type Err = AmountError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(AmountError::Empty);
        }
        if s.starts_with('-') {
            return Err(AmountError::Negative(s.to_owned()));
        }
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, Some(f)),
            None => (s, None),
        };
        if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(AmountError::Invalid(s.to_owned()));
        }
        let whole: u128 = int_part
            .parse()
            .map_err(|_| AmountError::OutOfRange(s.to_owned()))?;
        let mut wei = whole
            .checked_mul(WEI_PER_ETHER)
            .ok_or_else(|| AmountError::OutOfRange(s.to_owned()))?;
        if let Some(frac) = frac_part {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(AmountError::Invalid(s.to_owned()));
            }
            if frac.len() > FRACTIONAL_DIGITS {
                return Err(AmountError::TooPrecise(s.to_owned()));
            }
            let digits: u128 = frac.parse().expect("digits already validated");
            let scale = 10u128.pow((FRACTIONAL_DIGITS - frac.len()) as u32);
            wei = wei
                .checked_add(digits * scale)
                .ok_or_else(|| AmountError::OutOfRange(s.to_owned()))?;
        }
        Ok(Amount(wei))
    }
}

impl fmt::Display for Amount {
    /// Canonical decimal form: no exponent, trailing fractional zeros trimmed.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.0 / WEI_PER_ETHER;
        let frac = self.0 % WEI_PER_ETHER;
        if frac == 0 {
            return write!(f, "{whole}");
        }
        let digits = format!("{frac:018}");
        write!(f, "{whole}.{}", digits.trim_end_matches('0'))
    }
}

impl Serialize for Amount {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Amount {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}
