//! Fixed-point quantities.
//!
//! Distances are held in tenths of a kilometre, rates in hundredths of a
//! currency unit per kilometre and money in thousandths of a currency unit,
//! so `rate × distance` is exact and every cost total is reproducible bit for
//! bit. On the wire all three are plain decimal numbers.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Absolute time in minutes from the horizon origin (or a duration in minutes).
pub type Minutes = i64;

/// Minutes in a calendar day.
pub const DAY: Minutes = 1440;

/// A distance with 0.1 km resolution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Distance(i64);

impl Distance {
    pub const ZERO: Distance = Distance(0);

    pub const fn from_tenths(tenths: i64) -> Self {
        Distance(tenths)
    }

    pub const fn from_km(km: i64) -> Self {
        Distance(km * 10)
    }

    /// Rounds to the nearest 0.1 km.
    pub fn from_km_f64(km: f64) -> Self {
        Distance((km * 10.0).round() as i64)
    }

    pub const fn tenths(self) -> i64 {
        self.0
    }

    pub fn km(self) -> f64 {
        self.0 as f64 / 10.0
    }
}

impl Add for Distance {
    type Output = Distance;
    fn add(self, rhs: Distance) -> Distance {
        Distance(self.0 + rhs.0)
    }
}

impl AddAssign for Distance {
    fn add_assign(&mut self, rhs: Distance) {
        self.0 += rhs.0;
    }
}

impl Sub for Distance {
    type Output = Distance;
    fn sub(self, rhs: Distance) -> Distance {
        Distance(self.0 - rhs.0)
    }
}

impl SubAssign for Distance {
    fn sub_assign(&mut self, rhs: Distance) {
        self.0 -= rhs.0;
    }
}

impl Sum for Distance {
    fn sum<I: Iterator<Item = Distance>>(iter: I) -> Distance {
        Distance(iter.map(|d| d.0).sum())
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_fixed(f, self.0, 1, 1)
    }
}

impl Serialize for Distance {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.km())
    }
}

impl<'de> Deserialize<'de> for Distance {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let km = f64::deserialize(d)?;
        if !km.is_finite() {
            return Err(serde::de::Error::custom("distance must be finite"));
        }
        Ok(Distance::from_km_f64(km))
    }
}

/// A per-kilometre rate with 0.01 resolution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rate(i64);

impl Rate {
    pub const fn from_cents(cents: i64) -> Self {
        Rate(cents)
    }

    pub fn from_f64(per_km: f64) -> Self {
        Rate((per_km * 100.0).round() as i64)
    }

    pub const fn cents(self) -> i64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }

    /// Exact cost of driving `distance` at this rate.
    pub fn cost(self, distance: Distance) -> Money {
        Money(self.0 * distance.0)
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_fixed(f, self.0, 2, 2)
    }
}

impl Serialize for Rate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for Rate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        if !v.is_finite() {
            return Err(serde::de::Error::custom("rate must be finite"));
        }
        Ok(Rate::from_f64(v))
    }
}

/// An amount of money with 0.001 resolution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Money(i64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub const fn from_mills(mills: i64) -> Self {
        Money(mills)
    }

    pub const fn from_cents(cents: i64) -> Self {
        Money(cents * 10)
    }

    pub fn from_f64(amount: f64) -> Self {
        Money((amount * 1000.0).round() as i64)
    }

    pub const fn mills(self) -> i64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 1000.0
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl SubAssign for Money {
    fn sub_assign(&mut self, rhs: Money) {
        self.0 -= rhs.0;
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl Mul<i64> for Money {
    type Output = Money;
    fn mul(self, rhs: i64) -> Money {
        Money(self.0 * rhs)
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        Money(iter.map(|m| m.0).sum())
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_fixed(f, self.0, 3, 2)
    }
}

impl Serialize for Money {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        if !v.is_finite() {
            return Err(serde::de::Error::custom("amount must be finite"));
        }
        Ok(Money::from_f64(v))
    }
}

/// Writes `value / 10^scale` with at least `min_digits` fractional digits,
/// trimming trailing zeros beyond that.
fn write_fixed(f: &mut fmt::Formatter<'_>, value: i64, scale: u32, min_digits: usize) -> fmt::Result {
    let unit = 10i64.pow(scale);
    let sign = if value < 0 { "-" } else { "" };
    let abs = value.unsigned_abs();
    let int = abs / unit as u64;
    let frac = abs % unit as u64;
    let mut digits = format!("{:0width$}", frac, width = scale as usize);
    while digits.len() > min_digits && digits.ends_with('0') {
        digits.pop();
    }
    if digits.is_empty() {
        write!(f, "{sign}{int}")
    } else {
        write!(f, "{sign}{int}.{digits}")
    }
}
