//! Cyclic month labels and the fixed-length periodic series used for every
//! model quantity (survival rates, mover values, vacancies, cutoffs, volumes,
//! prices).

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of periods in the monthly model.
pub const MONTHS: usize = 12;

pub const MONTH_NAMES: [&str; MONTHS] = [
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
];

/// A 1-based position in a cycle of `period` months.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MonthIndex {
    value: usize,
    period: usize,
}

impl MonthIndex {
    pub fn new(value: usize, period: usize) -> Result<Self> {
        if period == 0 || value == 0 || value > period {
            return Err(Error::domain(format!(
                "month index {value} outside 1..={period}"
            )));
        }
        Ok(Self { value, period })
    }

    /// Wraps any integer offset onto the 1-based cycle, so `from_offset(0, 12)`
    /// is month 12 and `from_offset(13, 12)` is month 1.
    pub fn from_offset(offset: i64, period: usize) -> Self {
        let p = period as i64;
        let zero_based = (offset - 1).rem_euclid(p);
        Self {
            value: zero_based as usize + 1,
            period,
        }
    }

    pub fn value(self) -> usize {
        self.value
    }

    pub fn period(self) -> usize {
        self.period
    }

    pub fn zero_based(self) -> usize {
        self.value - 1
    }

    pub fn succ(self) -> Self {
        self.shift(1)
    }

    pub fn pred(self) -> Self {
        self.shift(-1)
    }

    pub fn shift(self, by: i64) -> Self {
        Self::from_offset(self.value as i64 + by, self.period)
    }
}

impl fmt::Display for MonthIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.period == MONTHS {
            f.write_str(MONTH_NAMES[self.zero_based()])
        } else {
            write!(f, "{}", self.value)
        }
    }
}

#[inline]
pub(crate) fn wrap(i: usize, k: isize, n: usize) -> usize {
    (i as isize + k).rem_euclid(n as isize) as usize
}

/// A cycle of `n` real values; indexing wraps so that position `m + n` is `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PeriodicSeries {
    values: Vec<f64>,
}

impl PeriodicSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain(
                "periodic series must have at least one period",
            ));
        }
        Ok(Self { values })
    }

    pub fn constant(value: f64, period: usize) -> Self {
        assert!(period > 0, "period must be positive");
        Self {
            values: vec![value; period],
        }
    }

    pub fn from_fn(period: usize, f: impl FnMut(usize) -> f64) -> Self {
        assert!(period > 0, "period must be positive");
        Self {
            values: (0..period).map(f).collect(),
        }
    }

    pub fn period(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    /// Value at a zero-based position shifted by `k`, wrapping cyclically.
    #[inline]
    pub fn cyclic(&self, i: usize, k: isize) -> f64 {
        self.values[wrap(i, k, self.values.len())]
    }

    pub fn get(&self, month: MonthIndex) -> f64 {
        self.values[month.zero_based() % self.values.len()]
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().copied()
    }

    pub fn map(&self, f: impl FnMut(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().copied().map(f).collect(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// 1-based month of the largest value (first one on ties).
    pub fn argmax(&self) -> MonthIndex {
        let mut best = 0;
        for (i, &x) in self.values.iter().enumerate() {
            if x > self.values[best] {
                best = i;
            }
        }
        MonthIndex::from_offset(best as i64 + 1, self.period())
    }

    pub fn argmin(&self) -> MonthIndex {
        let mut best = 0;
        for (i, &x) in self.values.iter().enumerate() {
            if x < self.values[best] {
                best = i;
            }
        }
        MonthIndex::from_offset(best as i64 + 1, self.period())
    }

    /// Rotates forward by `k` months: the value at month `m` moves to `m + k`.
    pub fn rotate(&self, k: i64) -> Self {
        let n = self.period();
        Self::from_fn(n, |i| self.values[wrap(i, -(k as isize), n)])
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.period(), other.period());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for PeriodicSeries {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i % self.values.len()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn successor_and_predecessor_wrap() {
        let dec = MonthIndex::new(12, 12).unwrap();
        assert_eq!(dec.succ().value(), 1);
        let jan = MonthIndex::new(1, 12).unwrap();
        assert_eq!(jan.pred().value(), 12);
        assert_eq!(jan.shift(-25).value(), 12);
        assert_eq!(MonthIndex::from_offset(0, 2).value(), 2);
    }

    #[test]
    fn rejects_out_of_range_month() {
        assert!(MonthIndex::new(0, 12).is_err());
        assert!(MonthIndex::new(13, 12).is_err());
    }

    #[test]
    fn cyclic_indexing_wraps() {
        let s = PeriodicSeries::from_fn(12, |i| i as f64);
        assert_eq!(s[12], s[0]);
        assert_eq!(s.cyclic(0, -1), 11.0);
        assert_eq!(s.cyclic(11, 1), 0.0);
        let m = MonthIndex::from_offset(14, 12);
        assert_eq!(s.get(m), 1.0);
    }

    #[test]
    fn rotate_moves_values_forward() {
        let s = PeriodicSeries::from_fn(12, |i| i as f64);
        let r = s.rotate(3);
        assert_eq!(r[3], 0.0);
        assert_eq!(r[0], 9.0);
        assert_eq!(r.rotate(-3), s);
    }

    #[test]
    fn argmax_is_one_based() {
        let s = PeriodicSeries::new(vec![1.0, 5.0, 3.0]).unwrap();
        assert_eq!(s.argmax().value(), 2);
        assert_eq!(s.argmin().value(), 1);
    }
}
